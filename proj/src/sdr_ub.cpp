#include "srbeam/sdr_ub.hpp"

#include <algorithm>
#include <cmath>

#include "srbeam/baselines.hpp"

namespace srbeam::sdr {

namespace {

constexpr double kZeroTol = 1e-12;

std::vector<int> active_antennas(const model::ChannelSet& ch) {
  std::vector<int> out;
  for (int i = 0; i < ch.n_b(); ++i)
    if (ch.H().row(i).cwiseAbs().maxCoeff() >= kZeroTol && ch.F().col(i).cwiseAbs().maxCoeff() >= kZeroTol)
      out.push_back(i);
  return out;
}

}  // namespace

const char* to_string(UbStatus s) {
  switch (s) {
    case UbStatus::Optimal: return "ok";
    case UbStatus::Infeasible: return "infeasible";
    case UbStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

std::vector<CMat> build_Hi(const model::ChannelSet& ch) {
  const int nt = ch.n_t();
  const CMat ones = CMat::Ones(nt, nt);
  std::vector<CMat> out;
  out.reserve(ch.n_b());
  for (int i = 0; i < ch.n_b(); ++i) {
    const CVec h = ch.h(i);
    out.push_back(lin::kron(ones, h * h.adjoint()));
  }
  return out;
}

LiftedG build_lifted_G(const model::ChannelSet& ch) {
  LiftedG lg{lin::kron(CMat::Identity(ch.n_t(), ch.n_t()), ch.G()), {}};
  for (int i = 1; i <= ch.n_t(); ++i) lg.E.push_back(lin::selection_matrix(i, ch.n_r(), ch.n_t()));
  return lg;
}

CMat lifted_gram(const LiftedG& lg, const CMat& Psi) {
  const CMat inner = lg.G_tilde * Psi * lg.G_tilde.adjoint();
  CMat out = CMat::Zero(lg.E.front().rows(), lg.E.front().rows());
  for (const auto& e : lg.E) out += e * inner * e.adjoint();
  return out;
}

UpperBoundProgram build_upper_bound_program(const model::ProblemSpec& spec) {
  spec.validate();
  const auto& ch = spec.channels;
  const int nt = ch.n_t(), nr = ch.n_r();
  const int n_psi = nt * nt;
  const std::vector<int> active = active_antennas(ch);
  const param::HermitianBlock psi(0, n_psi);
  const int q_offset = psi.size();
  const int rb = q_offset + static_cast<int>(active.size());
  UpperBoundProgram prog{detmax::DetmaxProblem(rb + 1), psi, active, q_offset, rb, RVec::Zero(rb + 1)};
  auto& p = prog.problem;
  p.objective(rb) = 1.0;

  const std::vector<CMat> Hi = build_Hi(ch);
  const LiftedG lg = build_lifted_G(ch);
  const CMat eye_r = CMat::Identity(nr, nr);

  detmax::AffineHermitianMap s1(eye_r);
  for (std::size_t a = 0; a < active.size(); ++a) {
    const CVec f = ch.F().col(active[a]);
    s1.add_term(q_offset + static_cast<int>(a), f * f.adjoint());
  }
  detmax::AffineHermitianMap s2 = s1;
  detmax::AffineHermitianMap lmi(CMat::Zero(n_psi, n_psi));
  const auto basis = psi.basis();
  for (const auto& b : basis) {
    s2.add_term(b.var, lifted_gram(lg, b.matrix));
    lmi.add_term(b.var, b.matrix);
  }
  p.logdet.push_back({s1, p.unit_row(rb), 0.0});
  p.logdet.push_back({s2, p.unit_row(rb), model::bits_to_nats(spec.r_t_min)});
  p.lmis.push_back({lmi});

  // q_i <= tr(Psi H_i)
  for (std::size_t a = 0; a < active.size(); ++a) {
    RVec row = p.unit_row(q_offset + static_cast<int>(a));
    for (const auto& b : basis) row(b.var) -= (b.matrix * Hi[active[a]]).trace().real();
    p.add_linear(row, 0.0);
    p.add_linear(p.unit_row(q_offset + static_cast<int>(a), -1.0), 0.0);
  }
  // tr(Psi) <= P
  RVec trace_row = RVec::Zero(p.n);
  for (const auto& b : basis) trace_row(b.var) = b.matrix.trace().real();
  p.add_linear(trace_row, spec.power_budget);
  p.add_linear(p.unit_row(rb, -1.0), 0.0);

  // Start: half power spread evenly, slacks at half their bound.
  const CMat psi0 = (0.5 * spec.power_budget / n_psi) * CMat::Identity(n_psi, n_psi);
  psi.write(psi0, prog.start);
  for (std::size_t a = 0; a < active.size(); ++a)
    prog.start(q_offset + static_cast<int>(a)) = 0.5 * (psi0 * Hi[active[a]]).trace().real();
  prog.start(rb) = 0.0;
  return prog;
}

UpperBoundResult solve_upper_bound(const model::ProblemSpec& spec, double rank_tol, const detmax::Tolerances& tol) {
  spec.validate();
  const auto& ch = spec.channels;
  const int nt = ch.n_t();
  const int n_psi = nt * nt;
  UpperBoundResult res;
  res.q = RVec::Zero(ch.n_b());

  const UpperBoundProgram prog = build_upper_bound_program(spec);
  if (prog.active.empty()) {
    // No backscatter path: r_b = 0; the relaxation is feasible iff the
    // water-filling primary rate reaches r_t.
    const model::Beamformer wf = baselines::waterfill_beamformer(ch.G(), spec.power_budget);
    const CMat p = lin::vec(wf.P);
    res.Psi = p * p.adjoint();
    res.rank_ratio = 0.0;
    res.solver_status = detmax::Status::Optimal;
    if (model::rate_primary(ch, wf.P) < spec.r_t_min - model::kRateTol) {
      res.status = UbStatus::Infeasible;
      return res;
    }
    res.status = UbStatus::Optimal;
    res.r_t_lifted = model::rate_primary(ch, wf.P);
    res.recovered_P = wf;
    return res;
  }

  const detmax::SolveReport rep = detmax::solve(prog.problem, tol, prog.start);
  res.solver_status = rep.status;
  res.iterations = rep.iterations;
  if (rep.status == detmax::Status::Infeasible) {
    res.status = UbStatus::Infeasible;
    return res;
  }
  if (rep.status != detmax::Status::Optimal) {
    res.status = UbStatus::SolverFailure;
    return res;
  }
  res.status = UbStatus::Optimal;
  res.Psi = prog.psi.value(rep.z_star);
  res.r_b_upper = std::max(0.0, model::nats_to_bits(rep.z_star(prog.rb_var)));
  const std::vector<CMat> Hi = build_Hi(ch);
  for (std::size_t a = 0; a < prog.active.size(); ++a) {
    const int i = prog.active[a];
    res.q(i) = rep.z_star(prog.q_offset + static_cast<int>(a));
    const double xi = (res.Psi * Hi[i]).trace().real();
    res.slack_residual = std::max(res.slack_residual, std::abs(xi - res.q(i)) / std::max(1.0, xi));
  }

  const CMat Kq = CMat::Identity(ch.n_r(), ch.n_r()) + ch.F() * res.q.cast<cplx>().asDiagonal() * ch.F().adjoint();
  const CMat joint = Kq + lifted_gram(build_lifted_G(ch), res.Psi);
  res.r_t_lifted = model::nats_to_bits(lin::logdet_psd(lin::HermView(joint))) - res.r_b_upper;

  Eigen::SelfAdjointEigenSolver<CMat> es(res.Psi);
  const RVec ev = es.eigenvalues();
  const double l1 = ev(n_psi - 1);
  res.rank_ratio = n_psi > 1 && l1 > 0.0 ? std::max(0.0, ev(n_psi - 2)) / l1 : 0.0;
  if (res.rank_ratio <= rank_tol && l1 > 0.0) {
    const CMat p = std::sqrt(l1) * es.eigenvectors().col(n_psi - 1);
    const model::Beamformer bf{lin::unvec(p, nt, nt), spec.power_budget};
    if (model::is_feasible(spec, bf.P).feasible &&
        std::abs(model::rate_secondary(ch, bf.P) - res.r_b_upper) <= 1e-3)
      res.recovered_P = bf;
  }
  return res;
}

}  // namespace srbeam::sdr
