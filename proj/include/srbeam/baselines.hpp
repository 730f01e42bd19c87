#pragma once

// Reference beamformers: maximum ratio transmission along the right singular
// vectors of G (MRT-G) or H (MRT-H), with equal power per column.

#include "srbeam/model.hpp"

namespace srbeam::baselines {

enum class MrtTarget { G, H };
enum class MrtWeighting { EqualPower };

struct MrtChoice {
  MrtTarget target = MrtTarget::G;
  MrtWeighting weighting = MrtWeighting::EqualPower;
};

const char* to_string(MrtTarget t);

/// P = sqrt(budget / N_t) V, with V the full right singular basis of the
/// target channel (A = U S V^H).  Throws DegenerateChannel when every singular
/// value of the target is below 1e-12 and the budget is positive.
model::Beamformer mrt_beamformer(const model::ChannelSet& ch, double budget, MrtChoice choice);

struct BaselineEvaluation {
  model::Beamformer beamformer;
  double r_b;           // bits/s/Hz
  double r_t_achieved;  // bits/s/Hz
  bool rt_satisfied;
};

/// Rates of an MRT beamformer.  Never throws on infeasibility: the r_t check
/// is recorded in `rt_satisfied`.  A degenerate target channel falls back to
/// the scaled identity, which is an MRT solution for the zero matrix.
BaselineEvaluation evaluate_baseline(const model::ProblemSpec& spec, MrtChoice choice);

/// Water-filling beamformer maximizing log2|I + G P P^H G^H| under
/// tr(P P^H) <= budget; the primary-rate optimum when no backscatter is present.
model::Beamformer waterfill_beamformer(const CMat& G, double budget);

}  // namespace srbeam::baselines
