#include "srbeam/epm_cccp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "srbeam/baselines.hpp"
#include "srbeam/errors.hpp"

namespace srbeam::epm {

namespace {

constexpr double kZeroTol = 1e-12;
// Room left above the tightest admissible W2 so the subproblems keep an interior.
constexpr double kW2Slack = 1.0;

std::vector<int> active_antennas(const model::ChannelSet& ch) {
  std::vector<int> out;
  for (int i = 0; i < ch.n_b(); ++i)
    if (ch.H().row(i).cwiseAbs().maxCoeff() >= kZeroTol && ch.F().col(i).cwiseAbs().maxCoeff() >= kZeroTol)
      out.push_back(i);
  return out;
}

double xi(const model::ChannelSet& ch, int i, const CMat& P) {
  return std::norm((ch.H().row(i) * P.rowwise().sum())(0));
}

RVec trace_row(const param::HermitianBlock& b, int n, double scale) {
  RVec row = RVec::Zero(n);
  for (int k = 0; k < b.n(); ++k) row(b.offset() + k) = scale;
  return row;
}

void place(CMat& dst, int bi, int bj, int n, const CMat& blk) { dst.block(bi * n, bj * n, n, n) = blk; }

}  // namespace

double AffinePForm::value(const CMat& P) const {
  return constant + (coeff.adjoint() * P).trace().real();
}

std::vector<AffinePForm> linearize_xi(const model::ChannelSet& ch, const CMat& P_tilde) {
  if (P_tilde.rows() != ch.n_t() || P_tilde.cols() != ch.n_t())
    throw Error(ErrorCode::DimensionMismatch, "linearize_xi: P_tilde must be N_t x N_t");
  std::vector<AffinePForm> out;
  const CVec ones_sum = P_tilde.rowwise().sum();
  for (int i = 0; i < ch.n_b(); ++i) {
    const cplx a = (ch.H().row(i) * ones_sum)(0);
    AffinePForm f;
    f.constant = -std::norm(a);
    // d/dP of 2 Re(conj(a) h_i^H P 1): C_jk = 2 a conj(H_ij), independent of k.
    f.coeff = CMat(ch.n_t(), ch.n_t());
    for (int j = 0; j < ch.n_t(); ++j) f.coeff.row(j).setConstant(2.0 * a * std::conj(ch.H()(i, j)));
    out.push_back(std::move(f));
  }
  return out;
}

AffinePForm linearize_zeta(const CMat& P_tilde, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "linearize_zeta: mu must be positive");
  return {-mu * P_tilde.squaredNorm(), 2.0 * mu * P_tilde};
}

CMat coupling_matrix(const CMat& M, const CMat& P, const CMat& W1, const CMat& W2) {
  const auto n = P.rows();
  for (const CMat* x : {&M, &P, &W1, &W2})
    if (x->rows() != n || x->cols() != n) throw Error(ErrorCode::DimensionMismatch, "coupling_matrix: blocks must be N_t x N_t");
  const int k = static_cast<int>(n);
  CMat out = CMat::Zero(3 * n, 3 * n);
  place(out, 0, 0, k, W1);
  place(out, 0, 1, k, M);
  place(out, 0, 2, k, P);
  place(out, 1, 0, k, M.adjoint());
  place(out, 1, 1, k, W2);
  place(out, 1, 2, k, P);
  place(out, 2, 0, k, P.adjoint());
  place(out, 2, 1, k, P.adjoint());
  place(out, 2, 2, k, CMat::Identity(n, n));
  return out;
}

void EpmConfig::validate() const {
  if (!(mu_init > 0.0) || !(mu_max >= mu_init) || !(mu_growth > 1.0))
    throw Error(ErrorCode::InvalidArgument, "EpmConfig: need 0 < mu_init <= mu_max and mu_growth > 1");
  if (!(cccp_tol > 0.0) || !(residual_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "EpmConfig: tolerances must be positive");
  if (max_outer < 1 || max_cccp_iters < 1 || n_random_init < 0 || max_restore_iters < 0 ||
      extrapolation_doublings < 0)
    throw Error(ErrorCode::InvalidArgument, "EpmConfig: iteration counts must be positive");
  if (init_strategy == InitStrategy::Given && !given_P)
    throw Error(ErrorCode::InvalidArgument, "EpmConfig: Given init needs given_P");
}

Layout::Layout(const model::ChannelSet& ch)
    : P(0, ch.n_t(), ch.n_t()),
      M(P.offset() + P.size(), ch.n_t()),
      W1(M.offset() + M.size(), ch.n_t()),
      W2(W1.offset() + W1.size(), ch.n_t()),
      active(active_antennas(ch)) {
  const int na = static_cast<int>(active.size());
  q_offset = W2.offset() + W2.size();
  u_offset = q_offset + na;
  rb = u_offset + na;
  n = rb + 1;
}

namespace {

// Inner approximation of R_t >= r_t at P_l: one log-det constraint in (P, u)
// and the LMIs u_a >= |h_a^H P 1|^2.
struct RtRestriction {
  std::vector<detmax::LogDetConstraint> logdet;
  std::vector<detmax::LmiConstraint> lmis;
};

RtRestriction rt_restriction(const model::ProblemSpec& spec, const Layout& L, const CMat& Pl) {
  const auto& ch = spec.channels;
  const CMat& G = ch.G();
  const auto na = static_cast<int>(L.active.size());
  const std::vector<AffinePForm> xl = linearize_xi(ch, Pl);
  RtRestriction out;

  // K^ + G (P_l P^H + P P_l^H - P_l P_l^H) G^H, affine in P
  CMat a0 = CMat::Identity(ch.n_r(), ch.n_r()) - G * Pl * Pl.adjoint() * G.adjoint();
  for (int a = 0; a < na; ++a) {
    const CVec f = ch.F().col(L.active[a]);
    a0 += xl[L.active[a]].constant * (f * f.adjoint());
  }
  detmax::AffineHermitianMap A(a0);
  for (const auto& b : L.P.basis()) {
    CMat t = G * (Pl * b.matrix.adjoint() + b.matrix * Pl.adjoint()) * G.adjoint();
    for (int a = 0; a < na; ++a) {
      const CVec f = ch.F().col(L.active[a]);
      t += (xl[L.active[a]].coeff.adjoint() * b.matrix).trace().real() * (f * f.adjoint());
    }
    A.add_term(b.var, t);
  }
  const CMat K = model::compute_K(ch, Pl).matrix();
  const Eigen::LLT<CMat> llt(K);
  RVec slope = RVec::Zero(L.n);
  double offset = model::bits_to_nats(spec.r_t_min) + lin::logdet_psd(lin::HermView(K));
  for (int a = 0; a < na; ++a) {
    const CVec f = ch.F().col(L.active[a]);
    const double c = (f.adjoint() * llt.solve(f))(0).real();
    slope(L.u_offset + a) = c;
    offset -= c * xi(ch, L.active[a], Pl);
  }
  out.logdet.push_back({A, slope, offset});

  // [[u_a, h_a^H P 1], [conj, 1]] >= 0
  for (int a = 0; a < na; ++a) {
    CMat c0 = CMat::Zero(2, 2);
    c0(1, 1) = 1.0;
    detmax::AffineHermitianMap m(c0);
    CMat e = CMat::Zero(2, 2);
    e(0, 0) = 1.0;
    m.add_term(L.u_offset + a, e);
    for (const auto& b : L.P.basis()) {
      const cplx v = (ch.H().row(L.active[a]) * b.matrix.rowwise().sum())(0);
      if (v == cplx(0.0)) continue;
      CMat t = CMat::Zero(2, 2);
      t(0, 1) = v;
      t(1, 0) = std::conj(v);
      m.add_term(b.var, t);
    }
    out.lmis.push_back({m});
  }
  return out;
}

}  // namespace

detmax::AffineHermitianMap coupling_lmi(const Layout& L) {
  const int nt = L.P.rows();
  CMat c = CMat::Zero(3 * nt, 3 * nt);
  place(c, 2, 2, nt, CMat::Identity(nt, nt));
  detmax::AffineHermitianMap map(c);
  const CMat Z = CMat::Zero(3 * nt, 3 * nt);
  for (const auto& b : L.W1.basis()) {
    CMat t = Z;
    place(t, 0, 0, nt, b.matrix);
    map.add_term(b.var, t);
  }
  for (const auto& b : L.W2.basis()) {
    CMat t = Z;
    place(t, 1, 1, nt, b.matrix);
    map.add_term(b.var, t);
  }
  for (const auto& b : L.M.basis()) {
    CMat t = Z;
    place(t, 0, 1, nt, b.matrix);
    place(t, 1, 0, nt, b.matrix.adjoint());
    map.add_term(b.var, t);
  }
  for (const auto& b : L.P.basis()) {
    CMat t = Z;
    place(t, 0, 2, nt, b.matrix);
    place(t, 1, 2, nt, b.matrix);
    place(t, 2, 0, nt, b.matrix.adjoint());
    place(t, 2, 1, nt, b.matrix.adjoint());
    map.add_term(b.var, t);
  }
  return map;
}

double rt_lower_bound(const model::ChannelSet& ch, const CMat& P_l, const CMat& P) {
  const Layout L(ch);
  const model::ProblemSpec spec{ch, std::max(1.0, P.squaredNorm()), 0.0};
  RVec z = RVec::Zero(L.n);
  L.P.write(P, z);
  for (std::size_t a = 0; a < L.active.size(); ++a)
    z(L.u_offset + static_cast<int>(a)) = xi(ch, L.active[a], P);
  const RtRestriction r = rt_restriction(spec, L, P_l);
  const auto& c = r.logdet.front();
  const CMat A = c.map.evaluate(z);
  const Eigen::LLT<CMat> llt(0.5 * (A + A.adjoint()));
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  double ld = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) ld += 2.0 * std::log(llt.matrixLLT()(i, i).real());
  return model::nats_to_bits(ld - c.slope.dot(z) - c.offset);
}

std::optional<CMat> restore_primary_rate(const model::ProblemSpec& spec, const CMat& P0, int max_iters,
                                         double margin, const detmax::Tolerances& tol) {
  spec.validate();
  const auto& ch = spec.channels;
  const int nt = ch.n_t();
  // Compact layout: P, then u, then the epigraph variable tau in the rb slot.
  Layout L(ch);
  const auto na = static_cast<int>(L.active.size());
  L.u_offset = L.P.size();
  L.rb = L.u_offset + na;
  L.n = L.rb + 1;
  const model::ProblemSpec level{ch, spec.power_budget, 0.0};

  // [[budget, vec(P)^H], [vec(P), I]] >= 0
  CMat c0 = CMat::Identity(nt * nt + 1, nt * nt + 1);
  c0(0, 0) = spec.power_budget;
  detmax::AffineHermitianMap power(c0);
  for (const auto& b : L.P.basis()) {
    CMat t = CMat::Zero(nt * nt + 1, nt * nt + 1);
    const CVec v = lin::vec(b.matrix);
    t.block(1, 0, nt * nt, 1) = v;
    t.block(0, 1, 1, nt * nt) = v.adjoint();
    power.add_term(b.var, t);
  }

  CMat P = P0;
  double rt = model::rate_primary(ch, P);
  for (int it = 0; it < max_iters; ++it) {
    if (rt >= spec.r_t_min + margin) return P;
    detmax::DetmaxProblem prob(L.n);
    prob.objective(L.rb) = 1.0;
    RtRestriction r = rt_restriction(level, L, P);
    for (auto& c : r.logdet) {
      c.slope(L.rb) = 1.0;
      prob.logdet.push_back(std::move(c));
    }
    for (auto& c : r.lmis) prob.lmis.push_back(std::move(c));
    prob.lmis.push_back({power});
    const detmax::SolveReport rep = detmax::solve(prob, tol);
    if (rep.status != detmax::Status::Optimal && rep.status != detmax::Status::MaxIterations) break;
    const CMat next = L.P.value(rep.z_star);
    const double rt_next = model::rate_primary(ch, next);
    if (!(rt_next > rt + 1e-9)) break;
    P = next;
    rt = rt_next;
  }
  if (rt >= spec.r_t_min + margin) return P;
  return std::nullopt;
}

double penalized_objective(const EpmState& s) {
  return -s.r_b_exact + s.mu * s.residual;
}

EpmState initial_state(const model::ProblemSpec& spec, const Layout& L, const CMat& P0, double mu) {
  const auto& ch = spec.channels;
  EpmState s;
  s.P_l = P0;
  s.M = s.W1 = s.W2 = P0 * P0.adjoint();
  const auto na = static_cast<Eigen::Index>(L.active.size());
  s.q = RVec(na);
  for (Eigen::Index a = 0; a < na; ++a) s.q(a) = xi(ch, L.active[a], P0);
  s.r_b_surrogate = s.r_b_exact = model::rate_secondary(ch, P0);
  s.mu = mu;
  s.residual = 0.0;
  return s;
}

RVec pack(const Layout& L, const EpmState& s) {
  RVec z = RVec::Zero(L.n);
  L.P.write(s.P_l, z);
  L.M.write(s.M, z);
  L.W1.write(s.W1, z);
  L.W2.write(s.W2, z);
  const auto na = static_cast<Eigen::Index>(L.active.size());
  z.segment(L.q_offset, na) = s.q;
  z(L.rb) = model::bits_to_nats(s.r_b_surrogate);
  return z;
}

EpmState unpack(const Layout& L, const RVec& z, double mu) {
  EpmState s;
  s.P_l = L.P.value(z);
  s.M = L.M.value(z);
  s.W1 = L.W1.value(z);
  s.W2 = L.W2.value(z);
  const auto na = static_cast<Eigen::Index>(L.active.size());
  s.q = z.segment(L.q_offset, na);
  s.r_b_surrogate = model::nats_to_bits(z(L.rb));
  s.mu = mu;
  s.residual = (s.W1.trace().real()) - s.P_l.squaredNorm();
  return s;
}

detmax::DetmaxProblem build_subproblem(const model::ProblemSpec& spec, const Layout& L, const EpmState& s,
                                       double mu) {
  const auto& ch = spec.channels;
  const int nt = ch.n_t();
  const double budget = spec.power_budget;
  const double rt = model::bits_to_nats(spec.r_t_min);
  detmax::DetmaxProblem p(L.n);
  const auto na = static_cast<int>(L.active.size());

  // maximize r_b - mu tr(W1) + zeta_hat(P)  (r_b in bits, constant dropped)
  p.objective(L.rb) = 1.0 / model::kLn2;
  p.objective += trace_row(L.W1, L.n, -mu);
  const AffinePForm zeta = linearize_zeta(s.P_l, mu);
  L.P.add_real_inner(zeta.coeff, 1.0, p.objective);

  // r_b <= ln det(I + F diag(q) F^H)
  detmax::AffineHermitianMap s1(CMat::Identity(ch.n_r(), ch.n_r()));
  for (int a = 0; a < na; ++a) {
    const CVec f = ch.F().col(L.active[a]);
    s1.add_term(L.q_offset + a, f * f.adjoint());
  }
  p.logdet.push_back({s1, p.unit_row(L.rb), 0.0});

  if (spec.r_t_min > 0.0) {
    // r_b + r_t <= ln det(I + F diag(q) F^H + G M G^H)
    detmax::AffineHermitianMap s2 = s1;
    for (const auto& b : L.M.basis()) s2.add_term(b.var, ch.G() * b.matrix * ch.G().adjoint());
    p.logdet.push_back({s2, p.unit_row(L.rb), rt});
    RtRestriction r = rt_restriction(spec, L, s.P_l);
    for (auto& c : r.logdet) p.logdet.push_back(std::move(c));
    for (auto& c : r.lmis) p.lmis.push_back(std::move(c));
  }

  p.lmis.push_back({coupling_lmi(L)});
  detmax::AffineHermitianMap mpsd(CMat::Zero(nt, nt));
  for (const auto& b : L.M.basis()) mpsd.add_term(b.var, b.matrix);
  p.lmis.push_back({mpsd});

  p.add_linear(trace_row(L.M, L.n, 1.0), budget);
  // tr(W1) >= tr(P P^H), so this also enforces the power budget on P.
  p.add_linear(trace_row(L.W1, L.n, 1.0), budget);
  p.add_linear(trace_row(L.W2, L.n, 1.0), budget + kW2Slack);

  // q_a <= xi_hat_a(P), q_a >= 0
  const std::vector<AffinePForm> xis = linearize_xi(ch, s.P_l);
  for (int a = 0; a < na; ++a) {
    RVec row = p.unit_row(L.q_offset + a);
    L.P.add_real_inner(xis[L.active[a]].coeff, -1.0, row);
    p.add_linear(row, xis[L.active[a]].constant);
    p.add_linear(p.unit_row(L.q_offset + a, -1.0), 0.0);
  }
  p.add_linear(p.unit_row(L.rb, -1.0), 0.0);
  return p;
}

StepResult cccp_step(const model::ProblemSpec& spec, const Layout& L, const EpmState& s, double mu,
                     const detmax::Tolerances& tol) {
  const detmax::DetmaxProblem prob = build_subproblem(spec, L, s, mu);
  StepResult out;
  RVec z0 = pack(L, s);
  for (std::size_t a = 0; a < L.active.size(); ++a)
    z0(L.u_offset + static_cast<int>(a)) = xi(spec.channels, L.active[a], s.P_l);
  out.report = detmax::solve(prob, tol, z0);
  if (out.report.status == detmax::Status::Infeasible)
    throw Error(ErrorCode::ConvergenceFailure, "cccp_step: subproblem infeasible");
  if (out.report.status != detmax::Status::Optimal && out.report.status != detmax::Status::MaxIterations)
    throw Error(ErrorCode::ConvergenceFailure, std::string("cccp_step: ") + detmax::to_string(out.report.status));
  out.state = unpack(L, out.report.z_star, mu);
  out.state.r_b_exact = model::rate_secondary(spec.channels, out.state.P_l);
  out.state.objective_trace = s.objective_trace;
  out.state.objective_trace.push_back(penalized_objective(out.state));
  out.state.residual_trace = s.residual_trace;
  out.state.residual_trace.push_back(out.state.residual);
  return out;
}

const char* to_string(EpmStatus s) {
  switch (s) {
    case EpmStatus::Optimal: return "ok";
    case EpmStatus::Infeasible: return "infeasible";
    case EpmStatus::ResidualNotClosed: return "residual_not_closed";
    case EpmStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

namespace {

struct Candidate {
  std::string name;
  CMat P;
};

std::vector<Candidate> init_candidates(const model::ProblemSpec& spec, const EpmConfig& cfg) {
  const auto& ch = spec.channels;
  const int nt = ch.n_t();
  std::vector<Candidate> out;
  auto mrt = [&](baselines::MrtTarget t) {
    out.push_back({baselines::to_string(t), baselines::evaluate_baseline(spec, {t}).beamformer.P});
  };
  switch (cfg.init_strategy) {
    case InitStrategy::Given: out.push_back({"given", *cfg.given_P}); return out;
    case InitStrategy::MrtH: mrt(baselines::MrtTarget::H); mrt(baselines::MrtTarget::G); break;
    case InitStrategy::MrtG: mrt(baselines::MrtTarget::G); mrt(baselines::MrtTarget::H); break;
    case InitStrategy::Random: break;
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  for (int k = 0; k < cfg.n_random_init; ++k) {
    CMat P(nt, nt);
    for (int j = 0; j < nt; ++j)
      for (int i = 0; i < nt; ++i) P(i, j) = cplx(nd(rng), nd(rng));
    P *= std::sqrt(spec.power_budget) / P.norm();
    out.push_back({"random", P});
  }
  return out;
}

void finalize(const model::ProblemSpec& spec, const CMat& P, EpmResult& r) {
  r.beamformer = {P, spec.power_budget};
  r.r_b = model::rate_secondary(spec.channels, P);
  r.r_t_achieved = model::rate_primary(spec.channels, P);
  r.rt_satisfied = model::is_feasible(spec, P).feasible;
}

}  // namespace

EpmResult solve_epm(const model::ProblemSpec& spec, const EpmConfig& cfg) {
  spec.validate();
  cfg.validate();
  const auto& ch = spec.channels;
  EpmResult res;
  const bool with_rt = spec.r_t_min > 0.0;
  const Layout L(ch);

  if (L.active.empty()) {
    // No backscatter path: R_b = 0 for every P; water-filling decides R_t.
    finalize(spec, baselines::waterfill_beamformer(ch.G(), spec.power_budget).P, res);
    res.init_used = "waterfill";
    res.status = res.rt_satisfied ? EpmStatus::Optimal : EpmStatus::Infeasible;
    return res;
  }

  std::optional<Candidate> start;
  for (auto& c : init_candidates(spec, cfg)) {
    if (!with_rt || model::rate_primary(ch, c.P) > spec.r_t_min) {
      start = std::move(c);
      break;
    }
  }
  if (!start && with_rt && cfg.max_restore_iters > 0) {
    std::optional<Candidate> best;
    double best_rt = -1.0;
    auto cands = init_candidates(spec, cfg);
    cands.push_back({"waterfill", baselines::waterfill_beamformer(ch.G(), spec.power_budget).P});
    for (auto& c : cands) {
      const double r = model::rate_primary(ch, c.P);
      if (r > best_rt) {
        best_rt = r;
        best = std::move(c);
      }
    }
    if (auto P = restore_primary_rate(spec, best->P, cfg.max_restore_iters, 1e-3, cfg.solver))
      start = Candidate{best->name + "+restored", *P};
  }
  if (!start) {
    res.status = EpmStatus::Infeasible;
    finalize(spec, CMat::Zero(ch.n_t(), ch.n_t()), res);
    return res;
  }
  res.init_used = start->name;

  double mu = cfg.mu_init;
  EpmState s = initial_state(spec, L, start->P, mu);
  s.objective_trace.push_back(penalized_objective(s));
  s.residual_trace.push_back(s.residual);
  res.status = EpmStatus::ResidualNotClosed;
  try {
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
      s.mu = mu;
      double prev = penalized_objective(s);
      for (int it = 0; it < cfg.max_cccp_iters; ++it) {
        const CMat P_prev = s.P_l;
        StepResult step = cccp_step(spec, L, s, mu, cfg.solver);
        res.newton_iterations += step.report.iterations;
        ++res.cccp_iterations;
        s = std::move(step.state);
        if (cfg.extrapolation_doublings > 0) {
          const CMat d = s.P_l - P_prev;
          for (int j = cfg.extrapolation_doublings; j >= 1; --j) {
            CMat Pe = s.P_l + (std::ldexp(1.0, j) - 1.0) * d;
            const double pw = Pe.squaredNorm();
            if (pw > spec.power_budget) Pe *= std::sqrt(spec.power_budget / pw);
            if (with_rt && !(model::rate_primary(ch, Pe) > spec.r_t_min)) continue;
            if (!(model::rate_secondary(ch, Pe) > s.r_b_exact)) continue;
            EpmState e = initial_state(spec, L, Pe, mu);
            e.objective_trace = s.objective_trace;
            e.residual_trace = s.residual_trace;
            e.objective_trace.back() = penalized_objective(e);
            e.residual_trace.back() = 0.0;
            s = std::move(e);
            break;
          }
        }
        const double cur = penalized_objective(s);
        const bool done = std::abs(cur - prev) <= cfg.cccp_tol * std::max(1.0, std::abs(cur));
        prev = cur;
        if (done) break;
      }
      if (s.residual <= cfg.residual_tol) {
        res.status = EpmStatus::Optimal;
        break;
      }
      if (mu * cfg.mu_growth > cfg.mu_max) break;
      mu *= cfg.mu_growth;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConvergenceFailure) throw;
    res.status = EpmStatus::SolverFailure;
  }
  res.final_mu = mu;
  res.residual = s.residual;
  res.coupling_error = (s.M - s.P_l * s.P_l.adjoint()).norm();
  res.r_b_surrogate = s.r_b_surrogate;
  res.objective_trace = s.objective_trace;
  res.residual_trace = s.residual_trace;
  finalize(spec, s.P_l, res);
  return res;
}

}  // namespace srbeam::epm
