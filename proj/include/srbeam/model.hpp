#pragma once

// Rate model of a MIMO symbiotic-radio backscatter link.  The transmitter
// sends x = P s; the BD reflects diag(H x) c; the receiver sees
//   y = G x + F diag(H x) c + n,   n ~ CN(0, I).
// The receiver decodes s first, treating the backscatter term as noise, then
// cancels G x and decodes c.  All rates are analytic in (G, H, F, P).

#include <vector>

#include "srbeam/lin.hpp"

namespace srbeam::model {

inline constexpr double kRateTol = 1e-6;   // bits
inline constexpr double kPowerTol = 1e-6;

inline constexpr double kLn2 = 0.69314718055994530942;

inline double nats_to_bits(double nats) { return nats / kLn2; }
inline double bits_to_nats(double bits) { return bits * kLn2; }

/// One channel realization.  G: N_r x N_t, H: N_b x N_t (row i is h_i^H),
/// F: N_r x N_b.
class ChannelSet {
 public:
  ChannelSet(CMat G, CMat H, CMat F);

  const CMat& G() const noexcept { return G_; }
  const CMat& H() const noexcept { return H_; }
  const CMat& F() const noexcept { return F_; }

  int n_t() const noexcept { return static_cast<int>(G_.cols()); }
  int n_r() const noexcept { return static_cast<int>(G_.rows()); }
  int n_b() const noexcept { return static_cast<int>(H_.rows()); }

  /// h_i as a column vector (i is 0-based), i.e. the conjugate of row i of H.
  CVec h(int i) const { return H_.row(i).adjoint(); }

 private:
  CMat G_, H_, F_;
};

struct Beamformer {
  CMat P;               // N_t x N_t
  double power_budget;  // tr(P P^H) <= power_budget

  double power() const { return P.squaredNorm(); }
};

struct ProblemSpec {
  ChannelSet channels;
  double power_budget;
  double r_t_min;  // bits/s/Hz

  void validate() const;
};

struct RateReport {
  double r_t_achieved;  // bits/s/Hz
  double r_b_achieved;  // bits/s/Hz
  lin::HermView K;
  CVec D_diag;
};

struct Feasibility {
  bool feasible;
  double rate_slack;   // R_t - r_t_min, bits
  double power_slack;  // budget - tr(P P^H)
};

/// D_i = h_i^H P 1.
CVec compute_D(const ChannelSet& ch, const CMat& P);

/// K = I + F diag(|D_i|^2) F^H.
lin::HermView compute_K(const ChannelSet& ch, const CMat& P);

double rate_primary(const ChannelSet& ch, const CMat& P);
double rate_secondary(const ChannelSet& ch, const CMat& P);

/// log2 |K + G P P^H G^H|, the joint term that splits into R_t + R_b.
double rate_joint(const ChannelSet& ch, const CMat& P);

RateReport evaluate(const ChannelSet& ch, const CMat& P);

Feasibility is_feasible(const ProblemSpec& spec, const CMat& P);

/// True when every entry of `a` is below `eps` in magnitude.
bool numerically_zero(const CMat& a, double eps = 1e-12);

}  // namespace srbeam::model
