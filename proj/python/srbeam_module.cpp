// Python bindings: rates, solvers, baselines and the experiment harness.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srbeam/baselines.hpp"
#include "srbeam/epm_cccp.hpp"
#include "srbeam/errors.hpp"
#include "srbeam/harness.hpp"
#include "srbeam/model.hpp"
#include "srbeam/oracle.hpp"
#include "srbeam/sdr_ub.hpp"

namespace py = pybind11;
using namespace srbeam;

namespace {

model::ProblemSpec make_spec(const CMat& G, const CMat& H, const CMat& F, double budget, double r_t) {
  return {model::ChannelSet(G, H, F), budget, r_t};
}

py::dict record_dict(const harness::TrialRecord& r) {
  py::dict d;
  d["trial"] = r.trial;
  d["seed_used"] = r.seed_used;
  d["snr_db"] = r.snr_db;
  d["method"] = r.method;
  d["r_b"] = r.r_b;
  d["r_t_achieved"] = r.r_t_achieved;
  d["rt_satisfied"] = r.rt_satisfied;
  d["iterations"] = r.iterations;
  d["status"] = r.status;
  d["rank_ratio"] = r.rank_ratio ? py::cast(*r.rank_ratio) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_srbeam, m) {
  m.doc() = "MIMO symbiotic-radio backscatter beamforming";
  py::register_exception<Error>(m, "SrbeamError", PyExc_ValueError);

  m.def("rate_primary", [](const CMat& G, const CMat& H, const CMat& F, const CMat& P) {
    return model::rate_primary(model::ChannelSet(G, H, F), P);
  }, py::arg("G"), py::arg("H"), py::arg("F"), py::arg("P"));
  m.def("rate_secondary", [](const CMat& G, const CMat& H, const CMat& F, const CMat& P) {
    return model::rate_secondary(model::ChannelSet(G, H, F), P);
  }, py::arg("G"), py::arg("H"), py::arg("F"), py::arg("P"));

  m.def("solve_epm", [](const CMat& G, const CMat& H, const CMat& F, double budget, double r_t, double mu_init,
                        int max_cccp_iters, std::uint64_t seed) {
    epm::EpmConfig cfg;
    cfg.mu_init = mu_init;
    cfg.max_cccp_iters = max_cccp_iters;
    cfg.seed = seed;
    const auto r = epm::solve_epm(make_spec(G, H, F, budget, r_t), cfg);
    py::dict d;
    d["status"] = epm::to_string(r.status);
    d["P"] = r.beamformer.P;
    d["r_b"] = r.r_b;
    d["r_t_achieved"] = r.r_t_achieved;
    d["rt_satisfied"] = r.rt_satisfied;
    d["cccp_iterations"] = r.cccp_iterations;
    d["residual"] = r.residual;
    d["objective_trace"] = r.objective_trace;
    d["init_used"] = r.init_used;
    return d;
  }, py::arg("G"), py::arg("H"), py::arg("F"), py::arg("budget"), py::arg("r_t"), py::arg("mu_init") = 1e-3,
     py::arg("max_cccp_iters") = 50, py::arg("seed") = 0);

  m.def("solve_upper_bound", [](const CMat& G, const CMat& H, const CMat& F, double budget, double r_t) {
    const auto r = sdr::solve_upper_bound(make_spec(G, H, F, budget, r_t));
    py::dict d;
    d["status"] = sdr::to_string(r.status);
    d["r_b_upper"] = r.r_b_upper;
    d["rank_ratio"] = r.rank_ratio;
    d["Psi"] = r.Psi;
    d["P"] = r.recovered_P ? py::cast(r.recovered_P->P) : py::none();
    return d;
  }, py::arg("G"), py::arg("H"), py::arg("F"), py::arg("budget"), py::arg("r_t"));

  m.def("mrt", [](const CMat& G, const CMat& H, const CMat& F, double budget, double r_t, const std::string& target) {
    if (target != "g" && target != "h") throw Error(ErrorCode::InvalidArgument, "target must be 'g' or 'h'");
    const auto b = baselines::evaluate_baseline(make_spec(G, H, F, budget, r_t),
                                                {target == "g" ? baselines::MrtTarget::G : baselines::MrtTarget::H});
    py::dict d;
    d["P"] = b.beamformer.P;
    d["r_b"] = b.r_b;
    d["r_t_achieved"] = b.r_t_achieved;
    d["rt_satisfied"] = b.rt_satisfied;
    return d;
  }, py::arg("G"), py::arg("H"), py::arg("F"), py::arg("budget"), py::arg("r_t"), py::arg("target") = "g");

  m.def("scalar_closed_form", [](cplx g, cplx h, cplx f, double budget, double r_t) {
    const auto r = oracle::scalar_closed_form(g, h, f, budget, r_t);
    return py::make_tuple(r.feasible, r.best_r_b);
  }, py::arg("g"), py::arg("h"), py::arg("f"), py::arg("budget"), py::arg("r_t"));

  m.def("trial_seed", &harness::trial_seed, py::arg("seed"), py::arg("trial"));
  m.def("draw_channels", [](int n_t, int n_r, int n_b, std::uint64_t seed) {
    const auto ch = harness::draw_channels(n_t, n_r, n_b, seed);
    return py::make_tuple(ch.G(), ch.H(), ch.F());
  }, py::arg("n_t"), py::arg("n_r"), py::arg("n_b"), py::arg("seed"));

  m.def("run_experiment", [](int trials, std::vector<double> snr_db, std::vector<std::string> methods, double r_t,
                             std::uint64_t seed, int n_t, int n_r, int n_b, int threads, const std::string& out,
                             std::optional<std::string> trace) {
    harness::ExperimentConfig c;
    c.trials = trials;
    c.snr_db_list = std::move(snr_db);
    c.methods.clear();
    for (const auto& s : methods) c.methods.push_back(harness::parse_method(s));
    c.r_t_min = r_t;
    c.seed = seed;
    c.n_t = n_t;
    c.n_r = n_r;
    c.n_b = n_b;
    c.threads = threads;
    c.output_path = out;
    c.trace_path = std::move(trace);
    harness::ExperimentResult res;
    {
      py::gil_scoped_release release;
      res = harness::run_experiment(c);
    }
    py::list rows;
    for (const auto& r : res.records) rows.append(record_dict(r));
    return rows;
  }, py::arg("trials"), py::arg("snr_db") = harness::kDefaultSnrGrid,
     py::arg("methods") = std::vector<std::string>{"ub", "epm", "mrt-g", "mrt-h"}, py::arg("r_t") = 2.0,
     py::arg("seed") = 42, py::arg("n_t") = 2, py::arg("n_r") = 2, py::arg("n_b") = 2, py::arg("threads") = 1,
     py::arg("out") = "", py::arg("trace") = std::nullopt);

  m.def("read_csv", [](const std::string& path) {
    py::list rows;
    for (const auto& r : harness::read_csv(path)) rows.append(record_dict(r));
    return rows;
  }, py::arg("path"));
}
