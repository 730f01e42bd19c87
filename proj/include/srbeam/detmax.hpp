#pragma once

// Dense primal barrier solver for small determinant-maximization programs:
//
//   maximize    c . z
//   subject to  ln det S_j(z) >= a_j . z + d_j      (S_j affine Hermitian)
//               L_k(z) >= 0                          (affine Hermitian LMI)
//               A_m . z <= b_m
//
// Hermitian maps are handled through their real symmetric embedding.  The
// embedding doubles ln det, so every matrix barrier carries a weight of 1/2
// and constraint levels stay in complex-domain nats.

#include <functional>
#include <optional>
#include <vector>

#include "srbeam/lin.hpp"

namespace srbeam::detmax {

/// S(z) = S_0 + sum_k z_k S_k with Hermitian S_0, S_k.
class AffineHermitianMap {
 public:
  struct Term {
    int var;
    CMat coeff;
  };

  AffineHermitianMap() = default;
  explicit AffineHermitianMap(CMat constant);

  /// Accumulates `coeff` onto the coefficient of z_var.
  void add_term(int var, const CMat& coeff);
  /// Adds a constant offset to S_0.
  void add_constant(const CMat& c);

  CMat evaluate(const RVec& z) const;
  Eigen::Index dim() const noexcept { return constant_.rows(); }
  const CMat& constant() const noexcept { return constant_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }

 private:
  CMat constant_;
  std::vector<Term> terms_;
};

/// ln det map(z) >= slope . z + offset.
struct LogDetConstraint {
  AffineHermitianMap map;
  RVec slope;
  double offset = 0.0;
};

struct LmiConstraint {
  AffineHermitianMap map;
};

/// row . z <= rhs.
struct LinearInequality {
  RVec row;
  double rhs = 0.0;
};

struct DetmaxProblem {
  explicit DetmaxProblem(int num_vars);

  int n;
  RVec objective;  // maximized
  std::vector<LogDetConstraint> logdet;
  std::vector<LmiConstraint> lmis;
  std::vector<LinearInequality> linear;

  /// Convenience: row with a single coefficient.
  RVec unit_row(int var, double coeff = 1.0) const;
  void add_linear(RVec row, double rhs) { linear.push_back({std::move(row), rhs}); }

  /// Throws DimensionMismatch / NotHermitian / NonFinite.
  void validate() const;
  /// Total self-concordance parameter of the barrier.
  double barrier_parameter() const;
};

enum class Status { Optimal, Infeasible, MaxIterations, NumericalFailure };

const char* to_string(Status s);

struct Tolerances {
  double t_init = 1.0;
  double kappa = 10.0;
  // Path following stops once nu / t <= gap_per_barrier * nu, i.e. t >= 1 / gap_per_barrier.
  double gap_per_barrier = 1e-7;
  double newton_tol = 1e-9;  // on the squared Newton decrement
  int max_centering_steps = 50;
  int max_outer = 40;
  double hessian_reg = 1e-10;
  double feas_tol = 1e-7;
  double kkt_tol = 1e-6;
  double phase1_margin = 1e-8;
  double phase1_early_stop = 1e-3;
  bool record_trace = false;
};

struct SolveReport {
  Status status = Status::NumericalFailure;
  RVec z_star;
  double objective_value = 0.0;
  double kkt_residual = 0.0;
  double barrier_gap = 0.0;
  int iterations = 0;  // Newton steps, phase I included
  // With record_trace: centering objective t(-c.z) + phi(z) after each Newton
  // step, one inner vector per value of t (main phase only).
  std::vector<std::vector<double>> centering_trace;
};

struct Phase1Result {
  Status status = Status::NumericalFailure;
  RVec z;
  double margin = 0.0;  // smallest strict margin at z
  int iterations = 0;
};

/// Value, gradient and (optionally) Hessian of the log barrier, or of a single
/// one of its terms.  Terms are ordered: log-det constraints, LMIs, linear.
struct BarrierEval {
  bool in_domain = false;
  double value = 0.0;
  RVec gradient;
  RMat hessian;
};

class Barrier {
 public:
  explicit Barrier(const DetmaxProblem& problem);

  int num_terms() const noexcept;
  double parameter() const noexcept { return nu_; }
  BarrierEval evaluate(const RVec& z, bool with_hessian) const;
  BarrierEval evaluate_term(int term, const RVec& z, bool with_hessian) const;

 private:
  struct Block {
    RMat constant;
    std::vector<int> vars;
    std::vector<RMat> coeffs;
  };
  struct LogDetTerm {
    Block block;
    RVec slope;
    double offset;
  };

  bool add_logdet(const LogDetTerm& t, const RVec& z, bool hess, BarrierEval& out) const;
  bool add_lmi(const Block& b, const RVec& z, bool hess, BarrierEval& out) const;
  bool add_linear(const LinearInequality& l, const RVec& z, bool hess, BarrierEval& out) const;

  int n_;
  double nu_ = 0.0;
  std::vector<LogDetTerm> logdet_;
  std::vector<Block> lmis_;
  std::vector<LinearInequality> linear_;
};

/// Largest violation of any constraint at z, evaluated directly on the complex
/// maps (not through the barrier).  Nonpositive means feasible; the magnitude
/// of a negative value is the smallest strict margin.
double max_violation(const DetmaxProblem& problem, const RVec& z);

/// Finds z with every constraint strictly satisfied (margin >= phase1_margin)
/// by minimizing a common slack s with the same barrier machinery.  `hint` is
/// returned unchanged when already strictly feasible.
Phase1Result phase1_find_strictly_feasible(const DetmaxProblem& problem, const Tolerances& tol = {},
                                           const std::optional<RVec>& hint = std::nullopt);

SolveReport solve(const DetmaxProblem& problem, const Tolerances& tol = {},
                  const std::optional<RVec>& start = std::nullopt);

}  // namespace srbeam::detmax
