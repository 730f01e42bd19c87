#pragma once

// Independent reference computations used to cross-check the solvers.

#include <cstdint>
#include <functional>

#include "srbeam/model.hpp"

namespace srbeam::oracle {

enum class Method { ScalarClosedForm, RandomSearch, GridSearch };

struct OracleResult {
  bool feasible = false;
  double best_r_b = 0.0;  // bits/s/Hz
  CMat best_P;
  long samples_evaluated = 0;
  Method method = Method::ScalarClosedForm;
};

/// Single-antenna optimum.  With t = |p|^2 and a = |f|^2 |h|^2,
///   R_b(t) = log2(1 + a t),   R_t(t) = log2(1 + |g|^2 t / (1 + a t)),
/// both nondecreasing in t, so full power is optimal whenever it meets r_t.
OracleResult scalar_closed_form(cplx g, cplx h, cplx f, double budget, double r_t);

/// Best r_t-feasible sample among `num_samples` complex Gaussian beamformers,
/// each rescaled to a power drawn uniformly from (0, budget].
OracleResult random_search(const model::ProblemSpec& spec, long num_samples, std::uint64_t seed);

using ScalarFn = std::function<double(const RVec&)>;
using GradFn = std::function<RVec(const RVec&)>;

/// Central-difference check of `grad` against `fn` at `point`.  Returns
/// max_k |fd_k - grad_k| / max(||grad||_inf, 1).
double finite_diff_check(const ScalarFn& fn, const GradFn& grad, const RVec& point, double step);

}  // namespace srbeam::oracle
