#include "srbeam/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace srbeam::baselines {

const char* to_string(MrtTarget t) { return t == MrtTarget::G ? "mrt-g" : "mrt-h"; }

model::Beamformer mrt_beamformer(const model::ChannelSet& ch, double budget, MrtChoice choice) {
  if (!(budget >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative power budget");
  const int nt = ch.n_t();
  if (budget == 0.0) return {CMat::Zero(nt, nt), budget};
  const CMat& target = choice.target == MrtTarget::G ? ch.G() : ch.H();
  const lin::Svd s = lin::svd(target);
  if (s.sigma.size() == 0 || s.sigma(0) < 1e-12)
    throw Error(ErrorCode::DegenerateChannel, std::string(to_string(choice.target)) + " target is numerically zero");
  return {std::sqrt(budget / nt) * s.V, budget};
}

BaselineEvaluation evaluate_baseline(const model::ProblemSpec& spec, MrtChoice choice) {
  const int nt = spec.channels.n_t();
  model::Beamformer bf{CMat::Zero(nt, nt), spec.power_budget};
  try {
    bf = mrt_beamformer(spec.channels, spec.power_budget, choice);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateChannel) throw;
    bf.P = std::sqrt(spec.power_budget / nt) * CMat::Identity(nt, nt);
  }
  const double rt = model::rate_primary(spec.channels, bf.P);
  const double rb = model::rate_secondary(spec.channels, bf.P);
  return {bf, rb, rt, rt >= spec.r_t_min - model::kRateTol};
}

model::Beamformer waterfill_beamformer(const CMat& G, double budget) {
  const auto nt = G.cols();
  if (!(budget >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative power budget");
  Eigen::SelfAdjointEigenSolver<CMat> es(G.adjoint() * G);
  const RVec lam = es.eigenvalues().reverse();
  const CMat V = es.eigenvectors().rowwise().reverse();
  // Largest k active modes with a common water level.
  RVec p = RVec::Zero(nt);
  for (Eigen::Index k = nt; k >= 1; --k) {
    if (lam(k - 1) <= 1e-14) continue;
    double inv = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) inv += 1.0 / lam(i);
    const double level = (budget + inv) / static_cast<double>(k);
    if (level - 1.0 / lam(k - 1) < 0.0) continue;
    for (Eigen::Index i = 0; i < k; ++i) p(i) = level - 1.0 / lam(i);
    break;
  }
  if (p.sum() == 0.0 && nt > 0) p(0) = budget;  // G == 0: any allocation is optimal
  CMat P = V * p.cwiseSqrt().cast<cplx>().asDiagonal();
  return {P, budget};
}

}  // namespace srbeam::baselines
