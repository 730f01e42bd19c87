#pragma once

// Exact-penalty concave-convex procedure for the secondary-rate maximization.
//
// The rank-one coupling M = P P^H is written as the LMI
//
//   [[W1, M, P], [M^H, W2, P], [P^H, P^H, I]] >= 0   with  tr(W1 - P P^H) = 0,
//
// and the trace equality is moved into the objective with weight mu.  The
// nonconvex pieces, |h_i^H P 1|^2 in the backscatter slacks and tr(P P^H) in
// the penalty, are linearized at the current iterate, so every iteration
// solves a convex determinant-maximization subproblem.
//
// The primary-rate requirement is additionally kept as a convex inner
// approximation that is tight at P_l.  With S = G P P^H G^H and
// K = I + F diag(xi(P)) F^H, R_t = ln det(K + S) - ln det K, and
//
//   ln det(K + S) >= ln det(K^ + G (P_l P^H + P P_l^H - P_l P_l^H) G^H)
//   ln det K      <= ln det K_l + sum_i c_i (u_i - xi_i(P_l)),  u_i >= xi_i(P)
//
// where K^ uses the tangents of xi and c_i = f_i^H K_l^{-1} f_i.  Every iterate
// therefore satisfies R_t >= r_t exactly, independent of how closely M tracks
// P P^H.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srbeam/detmax.hpp"
#include "srbeam/model.hpp"
#include "srbeam/param.hpp"

namespace srbeam::epm {

/// f(P) = constant + Re tr(coeff^H P).
struct AffinePForm {
  double constant = 0.0;
  CMat coeff;
  double value(const CMat& P) const;
};

/// Tangent of |h_i^H P 1|^2 at P_tilde for every BD antenna i.
std::vector<AffinePForm> linearize_xi(const model::ChannelSet& ch, const CMat& P_tilde);
/// Tangent of mu tr(P P^H) at P_tilde.  Requires mu > 0.
AffinePForm linearize_zeta(const CMat& P_tilde, double mu);

/// [[W1, M, P], [M^H, W2, P], [P^H, P^H, I]] for numeric blocks.
CMat coupling_matrix(const CMat& M, const CMat& P, const CMat& W1, const CMat& W2);

enum class InitStrategy { MrtH, MrtG, Random, Given };

struct EpmConfig {
  double mu_init = 1e-3;
  double mu_growth = 10.0;
  double mu_max = 1e6;
  double cccp_tol = 1e-4;
  double residual_tol = 1e-5;
  int max_outer = 8;
  int max_cccp_iters = 50;
  // MrtH: MRT-H, MRT-G, then random draws.  MrtG: MRT-G first.  Random: only
  // random draws.  Given: only `given_P`.
  InitStrategy init_strategy = InitStrategy::MrtH;
  int n_random_init = 8;
  std::uint64_t seed = 0;
  std::optional<CMat> given_P;
  // When positive and no candidate meets r_t, push the one with the largest
  // R_t (or the water-filling beamformer) over r_t with restore_primary_rate
  // instead of reporting Infeasible.
  int max_restore_iters = 0;
  // After each CCCP step P_l -> P_{l+1}, try P_{l+1} + (2^j - 1)(P_{l+1} - P_l)
  // for j = extrapolation_doublings down to 1, scaled back into the budget.
  // The first point that keeps R_t > r_t and raises R_b restarts the next
  // step with M = W1 = W2 = P P^H.  0 disables it.
  int extrapolation_doublings = 3;
  detmax::Tolerances solver;
  void validate() const;
};

/// Variable layout shared by every CCCP subproblem of one instance.
struct Layout {
  explicit Layout(const model::ChannelSet& ch);
  param::ComplexBlock P;
  param::HermitianBlock M, W1, W2;
  std::vector<int> active;  // BD antennas carrying backscatter
  int q_offset;
  int u_offset;
  int rb;
  int n;
};

/// The coupling block LMI as an affine map of the layout vector.
detmax::AffineHermitianMap coupling_lmi(const Layout& L);

/// The inner approximation of R_t above, in bits, evaluated at P with u = xi(P).
/// Equals R_t(P_l) at P = P_l and never exceeds R_t(P).  Returns -infinity
/// where the linearized log-det argument is not positive definite.
double rt_lower_bound(const model::ChannelSet& ch, const CMat& P_l, const CMat& P);

/// Minorize-maximize on the inner approximation of R_t above:
///   P_{l+1} = argmax rt_lower_bound(P_l, P)  s.t. tr(P P^H) <= budget,
/// so R_t rises monotonically.  Returns the first iterate with
/// R_t >= r_t_min + margin bits, or nullopt when R_t stalls below that.
std::optional<CMat> restore_primary_rate(const model::ProblemSpec& spec, const CMat& P0, int max_iters = 30,
                                         double margin = 1e-3, const detmax::Tolerances& tol = {});

struct EpmState {
  CMat P_l, M, W1, W2;
  RVec q;                      // one entry per active antenna
  double r_b_surrogate = 0.0;  // bits/s/Hz
  double r_b_exact = 0.0;      // R_b(P_l), bits/s/Hz
  double mu = 0.0;
  double residual = 0.0;       // tr(W1 - P P^H)
  std::vector<double> objective_trace;
  std::vector<double> residual_trace;
};

/// -R_b(P_l) + mu tr(W1 - P_l P_l^H): the penalized objective with the
/// backscatter slacks and the quadratic evaluated exactly.
double penalized_objective(const EpmState& s);

/// State at a beamformer: M = W1 = W2 = P P^H, q = |h_i^H P 1|^2,
/// r_b = R_b(P).
EpmState initial_state(const model::ProblemSpec& spec, const Layout& L, const CMat& P0, double mu);

/// The convex subproblem linearized at s.P_l with penalty weight mu.
detmax::DetmaxProblem build_subproblem(const model::ProblemSpec& spec, const Layout& L, const EpmState& s,
                                       double mu);
RVec pack(const Layout& L, const EpmState& s);
EpmState unpack(const Layout& L, const RVec& z, double mu);

struct StepResult {
  EpmState state;
  detmax::SolveReport report;
};
/// One CCCP iteration.  Throws ConvergenceFailure when the subproblem is
/// infeasible or the solver fails.
StepResult cccp_step(const model::ProblemSpec& spec, const Layout& L, const EpmState& s, double mu,
                     const detmax::Tolerances& tol = {});

enum class EpmStatus { Optimal, Infeasible, ResidualNotClosed, SolverFailure };
const char* to_string(EpmStatus s);

struct EpmResult {
  EpmStatus status = EpmStatus::SolverFailure;
  model::Beamformer beamformer;
  double r_b = 0.0;           // bits/s/Hz, from P
  double r_t_achieved = 0.0;  // bits/s/Hz, from P
  bool rt_satisfied = false;
  int cccp_iterations = 0;
  int newton_iterations = 0;
  double final_mu = 0.0;
  double residual = 0.0;
  double coupling_error = 0.0;  // ||M - P P^H||_F
  double r_b_surrogate = 0.0;
  std::string init_used;
  // Penalized objective after initialization and after every CCCP iteration.
  std::vector<double> objective_trace;
  std::vector<double> residual_trace;  // tr(W1 - P P^H) at the same points
};

EpmResult solve_epm(const model::ProblemSpec& spec, const EpmConfig& config = {});

}  // namespace srbeam::epm
