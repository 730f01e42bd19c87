#pragma once

// Upper bound on the secondary rate from the rank-one relaxation of the
// lifted beamforming problem:  p = vec(P),  Psi = p p^H  relaxed to Psi >= 0.

#include <optional>
#include <vector>

#include "srbeam/detmax.hpp"
#include "srbeam/model.hpp"
#include "srbeam/param.hpp"

namespace srbeam::sdr {

/// H_i such that tr(p p^H H_i) = |h_i^H P 1|^2 with p = vec(P) column-stacked:
/// H_i = (1 1^H) kron (h_i h_i^H).
std::vector<CMat> build_Hi(const model::ChannelSet& ch);

/// G~ = I_{N_t} kron G and the selection blocks E_1..E_{N_t}, so that
/// G P P^H G^H = sum_i E_i G~ p p^H G~^H E_i^H.
struct LiftedG {
  CMat G_tilde;
  std::vector<CMat> E;
};
LiftedG build_lifted_G(const model::ChannelSet& ch);

/// sum_i E_i G~ Psi G~^H E_i^H.
CMat lifted_gram(const LiftedG& lg, const CMat& Psi);

enum class UbStatus { Optimal, Infeasible, SolverFailure };
const char* to_string(UbStatus s);

struct UpperBoundResult {
  UbStatus status = UbStatus::SolverFailure;
  double r_b_upper = 0.0;  // bits/s/Hz
  CMat Psi;                // N_t^2 x N_t^2
  RVec q;                  // length N_b; zero for inactive BD antennas
  double rank_ratio = 0.0; // lambda_2 / lambda_1 of Psi
  // Primary rate the relaxed point leaves after its secondary rate,
  // log2|K(q) + lifted gram| - r_b_upper; at least r_t_min when Optimal.
  double r_t_lifted = 0.0;
  std::optional<model::Beamformer> recovered_P;
  // max_i |tr(Psi H_i) - q_i| / max(1, tr(Psi H_i)) over active BD antennas.
  double slack_residual = 0.0;
  int iterations = 0;
  detmax::Status solver_status = detmax::Status::NumericalFailure;
};

/// The relaxation as a detmax program in complex-domain nats.  Variables:
/// Psi (Hermitian coordinates), q_i for each active BD antenna, then r_b.
/// Antennas whose h_i or f_i is numerically zero cannot carry backscatter
/// and get no slack variable.
struct UpperBoundProgram {
  detmax::DetmaxProblem problem;
  param::HermitianBlock psi;
  std::vector<int> active;  // BD antenna index for each q variable
  int q_offset;
  int rb_var;
  RVec start;  // heuristic phase-I start
};
UpperBoundProgram build_upper_bound_program(const model::ProblemSpec& spec);

UpperBoundResult solve_upper_bound(const model::ProblemSpec& spec, double rank_tol = 1e-6,
                                   const detmax::Tolerances& tol = {});

}  // namespace srbeam::sdr
