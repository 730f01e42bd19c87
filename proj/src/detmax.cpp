#include "srbeam/detmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace srbeam::detmax {

namespace {

// Real embedding doubles ln det; this weight brings every matrix barrier back
// to complex-domain units.
constexpr double kEmbedWeight = 0.5;

double min_eigenvalue(const CMat& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double complex_logdet_or_nan(const CMat& a) {
  const Eigen::LLT<CMat> llt(0.5 * (a + a.adjoint()));
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log(llt.matrixLLT()(i, i).real());
  return 2.0 * acc;
}

void check_map(const AffineHermitianMap& m, int n, const std::string& what) {
  if (m.constant().rows() != m.constant().cols())
    throw Error(ErrorCode::DimensionMismatch, what + ": constant is not square");
  if (!lin::all_finite(m.constant())) throw Error(ErrorCode::NonFinite, what + ": constant");
  lin::HermView(m.constant());
  for (const auto& t : m.terms()) {
    if (t.var < 0 || t.var >= n) throw Error(ErrorCode::IndexOutOfRange, what + ": variable index");
    if (t.coeff.rows() != m.dim() || t.coeff.cols() != m.dim())
      throw Error(ErrorCode::DimensionMismatch, what + ": coefficient shape");
    lin::HermView(t.coeff);
  }
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::MaxIterations: return "MaxIterations";
    case Status::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Problem containers

AffineHermitianMap::AffineHermitianMap(CMat constant) : constant_(std::move(constant)) {}

void AffineHermitianMap::add_term(int var, const CMat& coeff) {
  for (auto& t : terms_) {
    if (t.var == var) {
      t.coeff += coeff;
      return;
    }
  }
  terms_.push_back({var, coeff});
}

void AffineHermitianMap::add_constant(const CMat& c) { constant_ += c; }

CMat AffineHermitianMap::evaluate(const RVec& z) const {
  CMat out = constant_;
  for (const auto& t : terms_) out += z(t.var) * t.coeff;
  return out;
}

DetmaxProblem::DetmaxProblem(int num_vars) : n(num_vars), objective(RVec::Zero(num_vars)) {
  if (num_vars < 1) throw Error(ErrorCode::InvalidArgument, "problem needs at least one variable");
}

RVec DetmaxProblem::unit_row(int var, double coeff) const {
  RVec r = RVec::Zero(n);
  r(var) = coeff;
  return r;
}

void DetmaxProblem::validate() const {
  if (objective.size() != n) throw Error(ErrorCode::DimensionMismatch, "objective length");
  if (!objective.allFinite()) throw Error(ErrorCode::NonFinite, "objective");
  for (const auto& c : logdet) {
    check_map(c.map, n, "log-det constraint");
    if (c.slope.size() != n) throw Error(ErrorCode::DimensionMismatch, "log-det slope length");
    if (!c.slope.allFinite() || !std::isfinite(c.offset))
      throw Error(ErrorCode::NonFinite, "log-det slope/offset");
  }
  for (const auto& c : lmis) check_map(c.map, n, "LMI");
  for (const auto& c : linear) {
    if (c.row.size() != n) throw Error(ErrorCode::DimensionMismatch, "linear row length");
    if (!c.row.allFinite() || !std::isfinite(c.rhs)) throw Error(ErrorCode::NonFinite, "linear row");
  }
}

double DetmaxProblem::barrier_parameter() const {
  double nu = static_cast<double>(linear.size());
  for (const auto& c : logdet) nu += static_cast<double>(c.map.dim()) + 1.0;
  for (const auto& c : lmis) nu += static_cast<double>(c.map.dim());
  return nu;
}

double max_violation(const DetmaxProblem& problem, const RVec& z) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : problem.logdet) {
    const CMat s = c.map.evaluate(z);
    const double lmin = min_eigenvalue(s);
    if (!(lmin > 0.0)) {
      worst = std::max(worst, -lmin);
      continue;
    }
    const double slack = complex_logdet_or_nan(s) - c.slope.dot(z) - c.offset;
    worst = std::max(worst, -std::min(lmin, slack));
  }
  for (const auto& c : problem.lmis) worst = std::max(worst, -min_eigenvalue(c.map.evaluate(z)));
  for (const auto& c : problem.linear) worst = std::max(worst, c.row.dot(z) - c.rhs);
  return worst;
}

// ---------------------------------------------------------------------------
// Barrier

Barrier::Barrier(const DetmaxProblem& problem) : n_(problem.n), nu_(problem.barrier_parameter()) {
  auto embed = [](const AffineHermitianMap& m) {
    Block b;
    b.constant = lin::real_embed_unchecked(m.constant());
    for (const auto& t : m.terms()) {
      b.vars.push_back(t.var);
      b.coeffs.push_back(lin::real_embed_unchecked(t.coeff));
    }
    return b;
  };
  for (const auto& c : problem.logdet) logdet_.push_back({embed(c.map), c.slope, c.offset});
  for (const auto& c : problem.lmis) lmis_.push_back(embed(c.map));
  linear_ = problem.linear;
}

int Barrier::num_terms() const noexcept {
  return static_cast<int>(logdet_.size() + lmis_.size() + linear_.size());
}

namespace {

struct MatrixPieces {
  double logdet;        // real-embedded ln det
  RVec tau;             // tr(X^{-1} X_k) over the block's variables
  RMat gram;            // tr(X^{-1} X_k X^{-1} X_l)
};

template <class Block>
bool matrix_pieces(const Block& b, const RVec& z, bool hess, MatrixPieces& out) {
  RMat x = b.constant;
  for (std::size_t k = 0; k < b.vars.size(); ++k) x.noalias() += z(b.vars[k]) * b.coeffs[k];
  const Eigen::LLT<RMat> llt(x);
  if (llt.info() != Eigen::Success) return false;
  double ld = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double d = llt.matrixLLT()(i, i);
    if (!(d > 0.0)) return false;
    ld += std::log(d);
  }
  out.logdet = 2.0 * ld;
  const auto m = static_cast<Eigen::Index>(b.vars.size());
  out.tau.resize(m);
  std::vector<RMat> a(b.vars.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    a[k] = llt.solve(b.coeffs[k]);
    out.tau(k) = a[k].trace();
  }
  if (hess) {
    out.gram.resize(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const RMat at = a[k].transpose();
      for (Eigen::Index l = k; l < m; ++l) {
        const double v = at.cwiseProduct(a[l]).sum();
        out.gram(k, l) = v;
        out.gram(l, k) = v;
      }
    }
  }
  return true;
}

}  // namespace

bool Barrier::add_logdet(const LogDetTerm& t, const RVec& z, bool hess, BarrierEval& out) const {
  MatrixPieces mp;
  if (!matrix_pieces(t.block, z, hess, mp)) return false;
  const double w = kEmbedWeight;
  const double g = w * mp.logdet - t.slope.dot(z) - t.offset;
  if (!(g > 0.0)) return false;
  out.value += -std::log(g) - w * mp.logdet;
  RVec dg = -t.slope;
  for (std::size_t k = 0; k < t.block.vars.size(); ++k) dg(t.block.vars[k]) += w * mp.tau(k);
  out.gradient += -dg / g;
  for (std::size_t k = 0; k < t.block.vars.size(); ++k) out.gradient(t.block.vars[k]) -= w * mp.tau(k);
  if (hess) {
    out.hessian.noalias() += (dg * dg.transpose()) / (g * g);
    const double scale = w * (1.0 / g + 1.0);
    for (std::size_t k = 0; k < t.block.vars.size(); ++k)
      for (std::size_t l = 0; l < t.block.vars.size(); ++l)
        out.hessian(t.block.vars[k], t.block.vars[l]) += scale * mp.gram(k, l);
  }
  return true;
}

bool Barrier::add_lmi(const Block& b, const RVec& z, bool hess, BarrierEval& out) const {
  MatrixPieces mp;
  if (!matrix_pieces(b, z, hess, mp)) return false;
  const double w = kEmbedWeight;
  out.value -= w * mp.logdet;
  for (std::size_t k = 0; k < b.vars.size(); ++k) out.gradient(b.vars[k]) -= w * mp.tau(k);
  if (hess)
    for (std::size_t k = 0; k < b.vars.size(); ++k)
      for (std::size_t l = 0; l < b.vars.size(); ++l) out.hessian(b.vars[k], b.vars[l]) += w * mp.gram(k, l);
  return true;
}

bool Barrier::add_linear(const LinearInequality& l, const RVec& z, bool hess, BarrierEval& out) const {
  const double s = l.rhs - l.row.dot(z);
  if (!(s > 0.0)) return false;
  out.value -= std::log(s);
  out.gradient += l.row / s;
  if (hess) out.hessian.noalias() += (l.row * l.row.transpose()) / (s * s);
  return true;
}

BarrierEval Barrier::evaluate_term(int term, const RVec& z, bool with_hessian) const {
  BarrierEval out;
  out.gradient = RVec::Zero(n_);
  if (with_hessian) out.hessian = RMat::Zero(n_, n_);
  const int nl = static_cast<int>(logdet_.size()), nm = static_cast<int>(lmis_.size());
  if (term < 0 || term >= num_terms()) throw Error(ErrorCode::IndexOutOfRange, "barrier term index");
  if (term < nl)
    out.in_domain = add_logdet(logdet_[term], z, with_hessian, out);
  else if (term < nl + nm)
    out.in_domain = add_lmi(lmis_[term - nl], z, with_hessian, out);
  else
    out.in_domain = add_linear(linear_[term - nl - nm], z, with_hessian, out);
  return out;
}

BarrierEval Barrier::evaluate(const RVec& z, bool with_hessian) const {
  BarrierEval out;
  out.gradient = RVec::Zero(n_);
  if (with_hessian) out.hessian = RMat::Zero(n_, n_);
  out.in_domain = false;
  for (const auto& t : logdet_)
    if (!add_logdet(t, z, with_hessian, out)) return out;
  for (const auto& b : lmis_)
    if (!add_lmi(b, z, with_hessian, out)) return out;
  for (const auto& l : linear_)
    if (!add_linear(l, z, with_hessian, out)) return out;
  out.in_domain = std::isfinite(out.value);
  return out;
}

// ---------------------------------------------------------------------------
// Path following

namespace {

enum class Centering { Converged, MaxSteps, Stalled, Failed, Stopped };

// Jacobi-scaled Cholesky solve of H dz = -g with escalating regularization.
bool newton_direction(const RMat& h, const RVec& g, double reg0, RVec& dz) {
  const Eigen::Index n = h.rows();
  RVec s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = h(i, i) > 0.0 ? 1.0 / std::sqrt(h(i, i)) : 1.0;
  const RMat hs = s.asDiagonal() * h * s.asDiagonal();
  const RVec gs = s.cwiseProduct(g);
  for (double reg : {0.0, reg0, reg0 * 1e2, reg0 * 1e4, reg0 * 1e6}) {
    RMat hr = hs;
    hr.diagonal().array() += reg;
    const Eigen::LLT<RMat> llt(hr);
    if (llt.info() != Eigen::Success) continue;
    dz = -s.cwiseProduct(llt.solve(gs));
    if (dz.allFinite()) return true;
  }
  return false;
}

struct PathState {
  RVec z;
  double t;
  double lambda2 = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Centering last = Centering::Failed;
  std::vector<std::vector<double>>* trace = nullptr;
};

using StopFn = std::function<bool(const RVec&)>;

Centering center(const RVec& c, const Barrier& barrier, const Tolerances& tol, PathState& st,
                 const StopFn& stop) {
  // Minimizes t (-c.z) + phi(z).
  if (st.trace) st.trace->emplace_back();
  for (int step = 0; step < tol.max_centering_steps; ++step) {
    const BarrierEval e = barrier.evaluate(st.z, true);
    if (!e.in_domain) return Centering::Failed;
    const RVec grad = -st.t * c + e.gradient;
    RVec dz;
    if (!newton_direction(e.hessian, grad, tol.hessian_reg, dz)) return Centering::Failed;
    const double slope = grad.dot(dz);
    st.lambda2 = -slope;
    if (st.lambda2 <= tol.newton_tol) return Centering::Converged;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      const RVec zn = st.z + alpha * dz;
      const BarrierEval en = barrier.evaluate(zn, false);
      if (!en.in_domain) continue;
      const double df = -st.t * alpha * c.dot(dz) + (en.value - e.value);
      if (df <= 0.01 * alpha * slope) {
        st.z = zn;
        if (st.trace) st.trace->back().push_back(-st.t * c.dot(zn) + en.value);
        accepted = true;
        break;
      }
    }
    ++st.iterations;
    if (!accepted) return Centering::Stalled;
    if (stop && stop(st.z)) return Centering::Stopped;
  }
  return Centering::MaxSteps;
}

// Outer loop t <- kappa t.  `after_center` may end the path early (returns true).
PathState follow_path(const RVec& c, const Barrier& barrier, const Tolerances& tol, RVec z0,
                      const StopFn& mid_step, const std::function<bool(const PathState&)>& after_center,
                      std::vector<std::vector<double>>* trace = nullptr) {
  PathState st{std::move(z0), tol.t_init};
  st.trace = trace;
  const double nu = std::max(barrier.parameter(), 1.0);
  for (int outer = 0; outer < tol.max_outer; ++outer) {
    st.last = center(c, barrier, tol, st, mid_step);
    if (st.last == Centering::Failed || st.last == Centering::Stopped) return st;
    if (after_center && after_center(st)) return st;
    if (nu / st.t <= tol.gap_per_barrier * nu) return st;
    st.t *= tol.kappa;
  }
  return st;
}

DetmaxProblem augment_with_slack(const DetmaxProblem& p) {
  const int s = p.n;
  DetmaxProblem q(p.n + 1);
  q.objective(s) = -1.0;
  for (const auto& c : p.logdet) {
    LogDetConstraint a{c.map, RVec::Zero(p.n + 1), c.offset};
    a.map.add_term(s, CMat::Identity(c.map.dim(), c.map.dim()));
    a.slope.head(p.n) = c.slope;
    a.slope(s) = -1.0;
    q.logdet.push_back(std::move(a));
  }
  for (const auto& c : p.lmis) {
    LmiConstraint a{c.map};
    a.map.add_term(s, CMat::Identity(c.map.dim(), c.map.dim()));
    q.lmis.push_back(std::move(a));
  }
  for (const auto& c : p.linear) {
    RVec row = RVec::Zero(p.n + 1);
    row.head(p.n) = c.row;
    row(s) = -1.0;
    q.linear.push_back({std::move(row), c.rhs});
  }
  return q;
}

}  // namespace

Phase1Result phase1_find_strictly_feasible(const DetmaxProblem& problem, const Tolerances& tol,
                                           const std::optional<RVec>& hint) {
  problem.validate();
  Phase1Result res;
  RVec z0 = hint.value_or(RVec::Zero(problem.n));
  if (z0.size() != problem.n) throw Error(ErrorCode::DimensionMismatch, "phase I hint length");
  if (!z0.allFinite()) throw Error(ErrorCode::NonFinite, "phase I hint");
  const double v0 = max_violation(problem, z0);
  if (v0 <= -tol.phase1_margin) {
    res.status = Status::Optimal;
    res.z = z0;
    res.margin = -v0;
    return res;
  }
  if (problem.logdet.empty() && problem.lmis.empty() && problem.linear.empty()) {
    res.status = Status::Optimal;
    res.z = z0;
    res.margin = std::numeric_limits<double>::infinity();
    return res;
  }

  // Initial slack: enough to make every matrix PD and every row strict, then
  // grown until each log-det level is met.
  double need = v0;
  for (const auto& c : problem.logdet) need = std::max(need, -min_eigenvalue(c.map.evaluate(z0)));
  double s0 = need + std::max(1.0, 0.1 * std::abs(need));
  for (const auto& c : problem.logdet) {
    const CMat base = c.map.evaluate(z0);
    const CMat eye = CMat::Identity(base.rows(), base.cols());
    for (int k = 0; k < 200; ++k) {
      const double ld = complex_logdet_or_nan(base + s0 * eye);
      if (std::isfinite(ld) && ld - c.slope.dot(z0) - c.offset + s0 > 1.0) break;
      s0 += std::max(1.0, std::abs(s0));
    }
  }

  const DetmaxProblem aug = augment_with_slack(problem);
  const Barrier barrier(aug);
  RVec za(problem.n + 1);
  za.head(problem.n) = z0;
  za(problem.n) = s0;
  const double nu = barrier.parameter();
  bool certified_infeasible = false;
  const PathState st = follow_path(
      aug.objective, barrier, tol, za,
      [&](const RVec& z) { return z(problem.n) <= -tol.phase1_early_stop; },
      [&](const PathState& p) {
        const double s = p.z(problem.n);
        if (s <= -tol.phase1_margin) return true;
        if (s - nu / p.t > 0.0) {
          certified_infeasible = true;
          return true;
        }
        return false;
      });
  res.iterations = st.iterations;
  res.z = st.z.head(problem.n);
  const double v = max_violation(problem, res.z);
  res.margin = -v;
  if (st.last == Centering::Failed && !(v <= -tol.phase1_margin)) {
    res.status = Status::NumericalFailure;
  } else if (v <= -tol.phase1_margin) {
    res.status = Status::Optimal;
  } else {
    res.status = Status::Infeasible;
    (void)certified_infeasible;
  }
  return res;
}

SolveReport solve(const DetmaxProblem& problem, const Tolerances& tol, const std::optional<RVec>& start) {
  problem.validate();
  SolveReport rep;
  const Phase1Result p1 = phase1_find_strictly_feasible(problem, tol, start);
  rep.iterations = p1.iterations;
  rep.z_star = p1.z;
  if (p1.status != Status::Optimal) {
    rep.status = p1.status;
    rep.objective_value = problem.objective.dot(rep.z_star);
    return rep;
  }
  const Barrier barrier(problem);
  const PathState st = follow_path(problem.objective, barrier, tol, p1.z, nullptr, nullptr,
                                   tol.record_trace ? &rep.centering_trace : nullptr);
  rep.iterations += st.iterations;
  rep.z_star = st.z;
  rep.objective_value = problem.objective.dot(st.z);
  rep.barrier_gap = barrier.parameter() / st.t;
  rep.kkt_residual = std::sqrt(std::max(st.lambda2, 0.0)) / st.t;
  const bool feasible = max_violation(problem, st.z) <= tol.feas_tol;
  const bool centered = st.last == Centering::Converged ||
                        (st.last == Centering::Stalled && st.lambda2 <= 1e-6) ||
                        (st.last == Centering::MaxSteps && st.lambda2 <= 1e-6);
  if (st.last == Centering::Failed || !feasible || !st.z.allFinite())
    rep.status = Status::NumericalFailure;
  else if (centered && rep.kkt_residual <= tol.kkt_tol)
    rep.status = Status::Optimal;
  else
    rep.status = Status::MaxIterations;
  return rep;
}

}  // namespace srbeam::detmax
