#include "srbeam/model.hpp"

#include <cmath>
#include <string>

namespace srbeam::model {

namespace {

void check_P(const ChannelSet& ch, const CMat& P) {
  if (P.rows() != ch.n_t() || P.cols() != ch.n_t())
    throw Error(ErrorCode::DimensionMismatch, "beamformer is " + std::to_string(P.rows()) + "x" +
                                                  std::to_string(P.cols()) + ", expected " +
                                                  std::to_string(ch.n_t()) + "x" +
                                                  std::to_string(ch.n_t()));
  if (!lin::all_finite(P)) throw Error(ErrorCode::NonFinite, "beamformer has non-finite entries");
}

}  // namespace

ChannelSet::ChannelSet(CMat G, CMat H, CMat F) : G_(std::move(G)), H_(std::move(H)), F_(std::move(F)) {
  if (G_.size() == 0 || H_.size() == 0 || F_.size() == 0)
    throw Error(ErrorCode::DimensionMismatch, "empty channel matrix");
  if (H_.cols() != G_.cols() || F_.rows() != G_.rows() || F_.cols() != H_.rows())
    throw Error(ErrorCode::DimensionMismatch,
                "channel shapes G " + std::to_string(G_.rows()) + "x" + std::to_string(G_.cols()) +
                    ", H " + std::to_string(H_.rows()) + "x" + std::to_string(H_.cols()) + ", F " +
                    std::to_string(F_.rows()) + "x" + std::to_string(F_.cols()));
  if (!lin::all_finite(G_) || !lin::all_finite(H_) || !lin::all_finite(F_))
    throw Error(ErrorCode::NonFinite, "channel matrix has non-finite entries");
}

void ProblemSpec::validate() const {
  if (!(power_budget >= 0.0) || !std::isfinite(power_budget))
    throw Error(ErrorCode::InvalidArgument, "power budget must be finite and nonnegative");
  if (!(r_t_min >= 0.0) || !std::isfinite(r_t_min))
    throw Error(ErrorCode::InvalidArgument, "rate constraint must be finite and nonnegative");
}

CVec compute_D(const ChannelSet& ch, const CMat& P) {
  check_P(ch, P);
  return ch.H() * P.rowwise().sum();
}

lin::HermView compute_K(const ChannelSet& ch, const CMat& P) {
  const CVec d = compute_D(ch, P);
  const CMat fd = ch.F() * d.asDiagonal();
  CMat K = CMat::Identity(ch.n_r(), ch.n_r()) + fd * fd.adjoint();
  return lin::HermView(K);
}

double rate_joint(const ChannelSet& ch, const CMat& P) {
  const lin::HermView K = compute_K(ch, P);
  const CMat gp = ch.G() * P;
  return nats_to_bits(lin::logdet_psd(lin::HermView(K.matrix() + gp * gp.adjoint())));
}

double rate_primary(const ChannelSet& ch, const CMat& P) {
  const lin::HermView K = compute_K(ch, P);
  const CMat gp = ch.G() * P;
  const double joint = lin::logdet_psd(lin::HermView(K.matrix() + gp * gp.adjoint()));
  return std::max(0.0, nats_to_bits(joint - lin::logdet_psd(K)));
}

double rate_secondary(const ChannelSet& ch, const CMat& P) {
  return std::max(0.0, nats_to_bits(lin::logdet_psd(compute_K(ch, P))));
}

RateReport evaluate(const ChannelSet& ch, const CMat& P) {
  return RateReport{rate_primary(ch, P), rate_secondary(ch, P), compute_K(ch, P), compute_D(ch, P)};
}

Feasibility is_feasible(const ProblemSpec& spec, const CMat& P) {
  const double rate_slack = rate_primary(spec.channels, P) - spec.r_t_min;
  const double power_slack = spec.power_budget - P.squaredNorm();
  return {rate_slack >= -kRateTol && power_slack >= -kPowerTol, rate_slack, power_slack};
}

bool numerically_zero(const CMat& a, double eps) { return a.size() == 0 || a.cwiseAbs().maxCoeff() < eps; }

}  // namespace srbeam::model
