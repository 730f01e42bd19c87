#include "srbeam/oracle.hpp"

#include <cmath>
#include <random>

namespace srbeam::oracle {

OracleResult scalar_closed_form(cplx g, cplx h, cplx f, double budget, double r_t) {
  if (!(budget >= 0.0) || !(r_t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "budget and r_t must be >= 0");
  OracleResult res;
  res.method = Method::ScalarClosedForm;
  res.samples_evaluated = 1;
  const double a = std::norm(f) * std::norm(h);
  const double rate_t = std::log2(1.0 + std::norm(g) * budget / (1.0 + a * budget));
  res.best_P = CMat::Constant(1, 1, cplx(std::sqrt(budget), 0.0));
  if (rate_t < r_t - model::kRateTol) {
    res.feasible = false;
    return res;
  }
  res.feasible = true;
  res.best_r_b = std::log2(1.0 + a * budget);
  return res;
}

OracleResult random_search(const model::ProblemSpec& spec, long num_samples, std::uint64_t seed) {
  spec.validate();
  if (num_samples < 1) throw Error(ErrorCode::InvalidArgument, "random_search needs at least one sample");
  const int nt = spec.channels.n_t();
  OracleResult res;
  res.method = Method::RandomSearch;
  res.best_P = CMat::Zero(nt, nt);
  if (spec.r_t_min <= model::kRateTol) res.feasible = true;  // P = 0 qualifies

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  CMat P(nt, nt);
  for (long s = 0; s < num_samples; ++s) {
    for (int j = 0; j < nt; ++j)
      for (int i = 0; i < nt; ++i) P(i, j) = cplx(normal(rng), normal(rng));
    const double power = (1.0 - unif(rng)) * spec.power_budget;  // (0, budget]
    const double norm = P.norm();
    if (norm > 0.0) P *= std::sqrt(power) / norm;
    ++res.samples_evaluated;
    if (model::rate_primary(spec.channels, P) < spec.r_t_min - model::kRateTol) continue;
    const double rb = model::rate_secondary(spec.channels, P);
    if (!res.feasible || rb > res.best_r_b) {
      res.feasible = true;
      res.best_r_b = rb;
      res.best_P = P;
    }
  }
  return res;
}

double finite_diff_check(const ScalarFn& fn, const GradFn& grad, const RVec& point, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  const RVec g = grad(point);
  if (g.size() != point.size()) throw Error(ErrorCode::DimensionMismatch, "gradient length");
  double worst = 0.0;
  const double scale = std::max(g.size() ? g.cwiseAbs().maxCoeff() : 0.0, 1.0);
  RVec x = point;
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    x(k) = point(k) + step;
    const double fp = fn(x);
    x(k) = point(k) - step;
    const double fm = fn(x);
    x(k) = point(k);
    worst = std::max(worst, std::abs((fp - fm) / (2.0 * step) - g(k)) / scale);
  }
  return worst;
}

}  // namespace srbeam::oracle
