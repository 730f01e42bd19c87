#pragma once

// Monte Carlo driver: i.i.d. Rayleigh draws, every requested method on each
// draw, CSV persistence of the per-trial records and EPM traces.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srbeam/epm_cccp.hpp"
#include "srbeam/model.hpp"

namespace srbeam::harness {

enum class Method { Ub, Epm, MrtG, MrtH, Random };
const char* to_string(Method m);
/// Accepts the CSV names: ub, epm, mrt-g, mrt-h, random.
Method parse_method(std::string_view name);

inline const std::vector<double> kDefaultSnrGrid = {0, 5, 10, 15, 20, 25};

struct ExperimentConfig {
  int n_t = 2, n_r = 2, n_b = 2;
  std::vector<double> snr_db_list = kDefaultSnrGrid;
  double r_t_min = 2.0;  // bits/s/Hz
  int trials = 100;
  std::uint64_t seed = 42;
  std::vector<Method> methods = {Method::Ub, Method::Epm, Method::MrtG, Method::MrtH};
  epm::EpmConfig epm;
  long random_samples = 10000;  // beamformers per random-search evaluation
  int threads = 1;
  std::string output_path;
  std::optional<std::string> trace_path;

  void validate() const;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);
/// Seed of trial k: the (k+1)-th output of a SplitMix64 stream started at
/// `seed`, i.e. splitmix64(seed + (k+1) * 0x9E3779B97F4A7C15).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

/// G (n_r x n_t), H (n_b x n_t), F (n_r x n_b) with i.i.d. CN(0, 1) entries,
/// filled column-major in that order from mt19937_64(trial_seed).
model::ChannelSet draw_channels(int n_t, int n_r, int n_b, std::uint64_t trial_seed);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed_used = 0;
  double snr_db = 0.0;
  std::string method;
  double r_b = 0.0;
  double r_t_achieved = 0.0;
  bool rt_satisfied = false;
  int iterations = 0;
  std::string status;  // ok, infeasible, residual_not_closed, solver_failure
  std::optional<double> rank_ratio;

  bool operator==(const TrialRecord&) const = default;
};

struct TraceRecord {
  int trial = 0;
  double snr_db = 0.0;
  int iter = 0;
  double objective = 0.0;
  double penalty_residual = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  std::vector<TraceRecord> traces;
};

/// Records for one trial: one per (snr, method), in list order.
ExperimentResult run_trial(const ExperimentConfig& config, int trial);

/// All trials, concatenated in trial order whatever `threads` is.  Writes the
/// CSVs when output_path / trace_path are set.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Throws InvalidArgument when a record breaks its schema or an `ok` record
/// breaks its method's feasibility contract.
void validate_record(const TrialRecord& r);

void write_csv(const std::vector<TrialRecord>& records, const std::string& path);
void write_trace_csv(const std::vector<TraceRecord>& traces, const std::string& path);
std::vector<TrialRecord> read_csv(const std::string& path);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

/// Same text the writers produce.
std::string format_csv(const std::vector<TrialRecord>& records);
std::string format_trace_csv(const std::vector<TraceRecord>& traces);

struct AggregateRow {
  std::string method;
  double snr_db = 0.0;
  double mean_r_b = 0.0;
  int count = 0;
};

/// Mean r_b per (method, snr).  A (trial, snr) pair where ub or epm reports
/// `infeasible` is dropped for every method.  With filter_rt, rows whose
/// rt_satisfied is false are dropped as well.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records, bool filter_rt = false);

/// key = value lines; '#' starts a comment.  Keys: nt, nr, nb, rt, snr-db,
/// trials, seed, methods, out, trace, mu-init, max-cccp-iters, tol,
/// restore-iters, extrapolation, threads, random-samples.  Unknown keys and
/// malformed values throw InvalidArgument.
void apply_config_text(ExperimentConfig& config, const std::string& text);
void apply_config_file(ExperimentConfig& config, const std::string& path);

std::vector<double> parse_real_list(std::string_view text);
std::vector<Method> parse_method_list(std::string_view text);

}  // namespace srbeam::harness
