#include "srbeam/harness.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "srbeam/baselines.hpp"
#include "srbeam/errors.hpp"
#include "srbeam/oracle.hpp"
#include "srbeam/sdr_ub.hpp"

namespace srbeam::harness {

namespace {

constexpr const char* kHeader = "trial,seed_used,snr_db,method,r_b,r_t_achieved,rt_satisfied,iterations,status,rank_ratio";
constexpr const char* kTraceHeader = "trial,snr_db,iter,objective,penalty_residual";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

Error bad(const std::string& what) { return Error(ErrorCode::InvalidArgument, what); }

template <class T>
T parse_number(std::string_view text, const char* what) {
  const std::string s(trim(text));
  try {
    std::size_t used = 0;
    T v;
    if constexpr (std::is_same_v<T, double>) v = std::stod(s, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>) v = std::stoull(s, &used);
    else if constexpr (std::is_same_v<T, long>) v = std::stol(s, &used);
    else v = std::stoi(s, &used);
    if (used != s.size()) throw bad("");
    return v;
  } catch (const std::exception&) {
    throw bad(std::string(what) + ": cannot parse '" + s + "'");
  }
}

bool parse_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw bad("expected true/false, got '" + std::string(s) + "'");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return in;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

std::vector<std::vector<std::string>> read_rows(const std::string& path, const char* header) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) throw bad(path + ": unexpected header");
  const std::size_t cols = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split(trim(line), ',');
    if (f.size() != cols) throw bad(path + ": wrong field count in '" + line + "'");
    rows.push_back(std::move(f));
  }
  return rows;
}

TrialRecord base_record(int trial, std::uint64_t seed, double snr, Method m) {
  TrialRecord r;
  r.trial = trial;
  r.seed_used = seed;
  r.snr_db = snr;
  r.method = to_string(m);
  return r;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Ub: return "ub";
    case Method::Epm: return "epm";
    case Method::MrtG: return "mrt-g";
    case Method::MrtH: return "mrt-h";
    case Method::Random: return "random";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Ub, Method::Epm, Method::MrtG, Method::MrtH, Method::Random})
    if (name == to_string(m)) return m;
  throw bad("unknown method '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (n_t < 1 || n_r < 1 || n_b < 1) throw bad("antenna counts must be positive");
  if (snr_db_list.empty()) throw bad("snr list is empty");
  for (double s : snr_db_list)
    if (!std::isfinite(s)) throw bad("snr values must be finite");
  if (!std::isfinite(r_t_min) || r_t_min < 0.0) throw bad("r_t_min must be finite and >= 0");
  if (trials < 1) throw bad("trials must be >= 1");
  if (methods.empty()) throw bad("no methods requested");
  if (random_samples < 1) throw bad("random_samples must be >= 1");
  if (threads < 1) throw bad("threads must be >= 1");
  epm.validate();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed + (trial + 1) * 0x9E3779B97F4A7C15ULL);
}

model::ChannelSet draw_channels(int n_t, int n_r, int n_b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  auto fill = [&](int rows, int cols) {
    CMat a(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) {
        const double re = nd(rng);
        a(i, j) = cplx(re, nd(rng));
      }
    return a;
  };
  CMat G = fill(n_r, n_t);
  CMat H = fill(n_b, n_t);
  CMat F = fill(n_r, n_b);
  return model::ChannelSet(std::move(G), std::move(H), std::move(F));
}

ExperimentResult run_trial(const ExperimentConfig& cfg, int trial) {
  ExperimentResult out;
  const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(trial));
  const model::ChannelSet ch = draw_channels(cfg.n_t, cfg.n_r, cfg.n_b, seed);
  for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
    const double snr = cfg.snr_db_list[si];
    const model::ProblemSpec spec{ch, std::pow(10.0, snr / 10.0), cfg.r_t_min};
    for (Method m : cfg.methods) {
      TrialRecord r = base_record(trial, seed, snr, m);
      try {
        switch (m) {
          case Method::Ub: {
            const auto ub = sdr::solve_upper_bound(spec);
            r.status = sdr::to_string(ub.status);
            r.iterations = ub.iterations;
            if (ub.status == sdr::UbStatus::Optimal) {
              r.r_b = ub.r_b_upper;
              r.r_t_achieved = ub.r_t_lifted;
              r.rt_satisfied = ub.r_t_lifted >= cfg.r_t_min - model::kRateTol;
              r.rank_ratio = ub.rank_ratio;
            }
            break;
          }
          case Method::Epm: {
            epm::EpmConfig ec = cfg.epm;
            ec.seed = splitmix64(seed ^ 0x6570'6D00ULL);
            const auto e = epm::solve_epm(spec, ec);
            r.status = epm::to_string(e.status);
            r.r_b = e.r_b;
            r.r_t_achieved = e.r_t_achieved;
            r.rt_satisfied = e.rt_satisfied;
            r.iterations = e.cccp_iterations;
            for (std::size_t k = 0; k < e.objective_trace.size(); ++k)
              out.traces.push_back({trial, snr, static_cast<int>(k), e.objective_trace[k], e.residual_trace[k]});
            break;
          }
          case Method::MrtG:
          case Method::MrtH: {
            const auto b = baselines::evaluate_baseline(
                spec, {m == Method::MrtG ? baselines::MrtTarget::G : baselines::MrtTarget::H});
            r.status = "ok";
            r.r_b = b.r_b;
            r.r_t_achieved = b.r_t_achieved;
            r.rt_satisfied = b.rt_satisfied;
            break;
          }
          case Method::Random: {
            const auto o = oracle::random_search(spec, cfg.random_samples, trial_seed(seed, si));
            r.iterations = static_cast<int>(o.samples_evaluated);
            r.status = o.feasible ? "ok" : "infeasible";
            if (o.feasible) {
              r.r_b = o.best_r_b;
              r.r_t_achieved = model::rate_primary(ch, o.best_P);
              r.rt_satisfied = r.r_t_achieved >= cfg.r_t_min - model::kRateTol;
            }
            break;
          }
        }
      } catch (const Error&) {
        r = base_record(trial, seed, snr, m);
        r.status = "solver_failure";
      }
      try {
        validate_record(r);
      } catch (const Error&) {
        // A point that breaks its method's contract is a solver failure.
        r.status = "solver_failure";
      }
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ExperimentResult> per(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k; (k = next.fetch_add(1)) < cfg.trials;) per[static_cast<std::size_t>(k)] = run_trial(cfg, k);
  };
  const int nthreads = std::min(cfg.threads, cfg.trials);
  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
  }
  ExperimentResult all;
  for (auto& p : per) {
    all.records.insert(all.records.end(), p.records.begin(), p.records.end());
    all.traces.insert(all.traces.end(), p.traces.begin(), p.traces.end());
  }
  if (!cfg.output_path.empty()) write_csv(all.records, cfg.output_path);
  if (cfg.trace_path) write_trace_csv(all.traces, *cfg.trace_path);
  return all;
}

void validate_record(const TrialRecord& r) {
  static const std::set<std::string> statuses = {"ok", "infeasible", "residual_not_closed", "solver_failure"};
  const Method m = parse_method(r.method);
  if (!statuses.count(r.status)) throw bad("record status '" + r.status + "'");
  if (!std::isfinite(r.r_b) || r.r_b < 0.0) throw bad("record r_b must be finite and >= 0");
  if (r.iterations < 0) throw bad("record iterations must be >= 0");
  if (r.rank_ratio && m != Method::Ub) throw bad("rank_ratio is only defined for ub records");
  const bool needs_rt = m == Method::Ub || m == Method::Epm || m == Method::Random;
  if (needs_rt && r.status == "ok" && !r.rt_satisfied)
    throw bad(std::string("ok ") + r.method + " record violates the primary-rate constraint");
}

std::string format_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << kHeader << '\n';
  for (const auto& r : records) {
    validate_record(r);
    os << r.trial << ',' << r.seed_used << ',' << fmt(r.snr_db) << ',' << r.method << ',' << fmt(r.r_b) << ','
       << fmt(r.r_t_achieved) << ',' << (r.rt_satisfied ? "true" : "false") << ',' << r.iterations << ','
       << r.status << ',' << (r.rank_ratio ? fmt(*r.rank_ratio) : "") << '\n';
  }
  return os.str();
}

std::string format_trace_csv(const std::vector<TraceRecord>& traces) {
  std::ostringstream os;
  os << kTraceHeader << '\n';
  for (const auto& t : traces)
    os << t.trial << ',' << fmt(t.snr_db) << ',' << t.iter << ',' << fmt(t.objective) << ','
       << fmt(t.penalty_residual) << '\n';
  return os.str();
}

void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  write_text(format_csv(records), path);
}

void write_trace_csv(const std::vector<TraceRecord>& traces, const std::string& path) {
  write_text(format_trace_csv(traces), path);
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::vector<TrialRecord> out;
  for (const auto& f : read_rows(path, kHeader)) {
    TrialRecord r;
    r.trial = parse_number<int>(f[0], "trial");
    r.seed_used = parse_number<std::uint64_t>(f[1], "seed_used");
    r.snr_db = parse_number<double>(f[2], "snr_db");
    r.method = f[3];
    r.r_b = parse_number<double>(f[4], "r_b");
    r.r_t_achieved = parse_number<double>(f[5], "r_t_achieved");
    r.rt_satisfied = parse_bool(f[6]);
    r.iterations = parse_number<int>(f[7], "iterations");
    r.status = f[8];
    if (!f[9].empty()) r.rank_ratio = parse_number<double>(f[9], "rank_ratio");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::vector<TraceRecord> out;
  for (const auto& f : read_rows(path, kTraceHeader))
    out.push_back({parse_number<int>(f[0], "trial"), parse_number<double>(f[1], "snr_db"),
                   parse_number<int>(f[2], "iter"), parse_number<double>(f[3], "objective"),
                   parse_number<double>(f[4], "penalty_residual")});
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records, bool filter_rt) {
  std::set<std::pair<int, double>> dropped;
  for (const auto& r : records)
    if ((r.method == "ub" || r.method == "epm") && r.status == "infeasible") dropped.insert({r.trial, r.snr_db});
  std::map<std::pair<std::string, double>, std::pair<double, int>> acc;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& r : records) {
    if (dropped.count({r.trial, r.snr_db}) || (filter_rt && !r.rt_satisfied)) continue;
    auto key = std::make_pair(r.method, r.snr_db);
    auto [it, fresh] = acc.try_emplace(key, 0.0, 0);
    if (fresh) order.push_back(key);
    it->second.first += r.r_b;
    ++it->second.second;
  }
  std::vector<AggregateRow> out;
  for (const auto& key : order) {
    const auto& [sum, n] = acc.at(key);
    out.push_back({key.first, key.second, sum / n, n});
  }
  return out;
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_number<double>(s, "real list"));
  return out;
}

std::vector<Method> parse_method_list(std::string_view text) {
  std::vector<Method> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_method(trim(s)));
  return out;
}

void apply_config_text(ExperimentConfig& c, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw bad("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(v.substr(0, eq)));
    const std::string_view val = trim(v.substr(eq + 1));
    if (key == "nt") c.n_t = parse_number<int>(val, "nt");
    else if (key == "nr") c.n_r = parse_number<int>(val, "nr");
    else if (key == "nb") c.n_b = parse_number<int>(val, "nb");
    else if (key == "rt") c.r_t_min = parse_number<double>(val, "rt");
    else if (key == "snr-db") c.snr_db_list = parse_real_list(val);
    else if (key == "trials") c.trials = parse_number<int>(val, "trials");
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(val, "seed");
    else if (key == "methods") c.methods = parse_method_list(val);
    else if (key == "out") c.output_path = std::string(val);
    else if (key == "trace") c.trace_path = std::string(val);
    else if (key == "mu-init") c.epm.mu_init = parse_number<double>(val, "mu-init");
    else if (key == "max-cccp-iters") c.epm.max_cccp_iters = parse_number<int>(val, "max-cccp-iters");
    else if (key == "tol") c.epm.cccp_tol = parse_number<double>(val, "tol");
    else if (key == "restore-iters") c.epm.max_restore_iters = parse_number<int>(val, "restore-iters");
    else if (key == "extrapolation") c.epm.extrapolation_doublings = parse_number<int>(val, "extrapolation");
    else if (key == "threads") c.threads = parse_number<int>(val, "threads");
    else if (key == "random-samples") c.random_samples = parse_number<long>(val, "random-samples");
    else throw bad("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
}

void apply_config_file(ExperimentConfig& c, const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(c, ss.str());
}

}  // namespace srbeam::harness
