// srbeam: Monte Carlo runs and the single-antenna oracle from the shell.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "srbeam/errors.hpp"
#include "srbeam/harness.hpp"
#include "srbeam/oracle.hpp"

using namespace srbeam;

namespace {

struct RunFlags {
  std::string config;
  std::optional<int> nt, nr, nb, trials, max_cccp_iters, restore_iters, extrapolation, threads;
  std::optional<long> random_samples;
  std::optional<double> rt, mu_init, tol;
  std::optional<std::string> snr_db, methods, out, trace;
  std::optional<std::uint64_t> seed;
};

harness::ExperimentConfig build_config(const RunFlags& f) {
  harness::ExperimentConfig c;
  if (!f.config.empty()) harness::apply_config_file(c, f.config);
  if (f.nt) c.n_t = *f.nt;
  if (f.nr) c.n_r = *f.nr;
  if (f.nb) c.n_b = *f.nb;
  if (f.rt) c.r_t_min = *f.rt;
  if (f.snr_db) c.snr_db_list = harness::parse_real_list(*f.snr_db);
  if (f.trials) c.trials = *f.trials;
  if (f.seed) c.seed = *f.seed;
  if (f.methods) c.methods = harness::parse_method_list(*f.methods);
  if (f.out) c.output_path = *f.out;
  if (f.trace) c.trace_path = *f.trace;
  if (f.mu_init) c.epm.mu_init = *f.mu_init;
  if (f.max_cccp_iters) c.epm.max_cccp_iters = *f.max_cccp_iters;
  if (f.tol) c.epm.cccp_tol = *f.tol;
  if (f.restore_iters) c.epm.max_restore_iters = *f.restore_iters;
  if (f.extrapolation) c.epm.extrapolation_doublings = *f.extrapolation;
  if (f.threads) c.threads = *f.threads;
  if (f.random_samples) c.random_samples = *f.random_samples;
  if (c.output_path.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO symbiotic-radio backscatter beamforming"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Monte Carlo experiment, results to CSV");
  run->add_option("--config", rf.config, "key = value file; flags override it");
  run->add_option("--nt", rf.nt, "transmit antennas");
  run->add_option("--nr", rf.nr, "receive antennas");
  run->add_option("--nb", rf.nb, "BD antennas");
  run->add_option("--rt", rf.rt, "primary rate requirement, bits/s/Hz");
  run->add_option("--snr-db", rf.snr_db, "comma-separated SNR grid in dB");
  run->add_option("--trials", rf.trials, "number of channel draws");
  run->add_option("--seed", rf.seed, "master seed");
  run->add_option("--methods", rf.methods, "subset of ub,epm,mrt-g,mrt-h,random");
  run->add_option("--out", rf.out, "results CSV");
  run->add_option("--trace", rf.trace, "EPM trace CSV");
  run->add_option("--mu-init", rf.mu_init, "initial penalty weight");
  run->add_option("--max-cccp-iters", rf.max_cccp_iters, "CCCP iterations per penalty weight");
  run->add_option("--tol", rf.tol, "CCCP relative stopping tolerance");
  run->add_option("--restore-iters", rf.restore_iters, "primary-rate restoration steps when no start meets r_t (0: off)");
  run->add_option("--extrapolation", rf.extrapolation, "extrapolation doublings tried after each CCCP step (0: off)");
  run->add_option("--threads", rf.threads, "worker threads");
  run->add_option("--random-samples", rf.random_samples, "beamformers per random-search evaluation");

  std::string scalar;
  double budget = 0.0, rt = 0.0;
  auto* orc = app.add_subcommand("oracle", "closed-form optimum for one antenna everywhere");
  orc->add_option("--scalar", scalar, "g,h,f as real gains (only magnitudes matter)")->required();
  orc->add_option("--budget", budget, "power budget (linear)")->required();
  orc->add_option("--rt", rt, "primary rate requirement, bits/s/Hz")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = build_config(rf);
      const auto res = harness::run_experiment(cfg);
      std::cerr << "wrote " << res.records.size() << " records to " << cfg.output_path << "\n";
      return 0;
    }
    const auto v = harness::parse_real_list(scalar);
    if (v.size() != 3) throw Error(ErrorCode::InvalidArgument, "--scalar expects g,h,f");
    const auto r = oracle::scalar_closed_form(v[0], v[1], v[2], budget, rt);
    std::printf("feasible=%s r_b=%.9g\n", r.feasible ? "true" : "false", r.best_r_b);
    return 0;
  } catch (const Error& e) {
    std::cerr << "srbeam: " << e.what() << "\n";
    return 2;
  }
}
