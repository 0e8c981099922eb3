// Copyright 2026 The qfi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qfi/core.hpp"

namespace qfi {

// Post-selected non-Hermitian evolution generated by
//   H_nh(t) = H0(t, x) + H1(t) - (i/2) sum_j gamma_j(t) L_j^† L_j
// and its collision-model unraveling.

struct JumpChannel {
  Operator op;
  std::function<double(double)> rate;  // gamma_j(t) >= 0
};

struct CollisionSpec {
  std::function<Operator(double t, double x)> h0;
  /// d/dx of h0. When empty, a central difference over x is used.
  std::function<Operator(double t, double x)> dh0;
  /// Control Hamiltonian. When empty, zero.
  std::function<Operator(double t)> h1;
  std::vector<JumpChannel> jumps;
  Eigen::Index dim = 0;
};

enum class Scheme {
  euler_paper,  // 1 - i H_nh(t_n) dt per step
  expm_step,    // exp(-i H_nh(t_{n-1} + dt/2) dt) per step
};

class TimeGrid {
 public:
  TimeGrid(double total_time, long steps, Scheme scheme = Scheme::expm_step);

  double total_time() const { return total_; }
  long steps() const { return steps_; }
  double dt() const { return total_ / static_cast<double>(steps_); }
  Scheme scheme() const { return scheme_; }
  /// t_n, with time(steps()) == total_time() exactly.
  double time(long n) const;

 private:
  double total_;
  long steps_;
  Scheme scheme_;
};

/// Non-Hermitian generator at (t, x). Throws DomainError for a negative rate or a
/// non-Hermitian H0/H1.
Operator h_nh(const CollisionSpec& spec, double t, double x);

/// d/dx H_nh = d/dx H0.
Operator dh_nh(const CollisionSpec& spec, double t, double x);

/// sum_j gamma_j(t) L_j^† L_j
Operator jump_rate_operator(const CollisionSpec& spec, double t);

struct TrajectoryCheckpoint {
  long step = 0;
  double time = 0.0;
  Operator m;   // M_check(t_n)
  Operator dm;  // d/dx M_check(t_n)
};

struct NhTrajectory {
  TimeGrid grid{1.0, 1};
  double x = 0.0;
  /// Checkpoint spacing in steps (1 for N <= 2^14).
  long stride = 1;
  std::vector<TrajectoryCheckpoint> checkpoints;  // includes n = 0 and n = N

  const Operator& final_m() const { return checkpoints.back().m; }
  const Operator& final_dm() const { return checkpoints.back().dm; }
  /// M(t_n)|psi> at each checkpoint.
  std::vector<Ket> states(const Ket& psi) const;
  /// Largest step-to-step increase of ||M(t_n) psi||, 0 when nonincreasing.
  double max_norm_increase(const Ket& psi) const;
};

NhTrajectory propagate(const CollisionSpec& spec, const TimeGrid& grid, double x);

/// Label of the retained no-jump outcome in a discrete channel.
inline constexpr const char* kNoJumpLabel = "nojump";

/// Explicit Kraus list: the no-jump product plus one operator per (step, jump),
/// labelled "L<j>@<n>". The retained set is {nojump}. Throws DomainError when the
/// completeness residual exceeds 10x the scheme's predicted bound.
MeasurementChannel build_discrete_channel(const CollisionSpec& spec, const Ket& psi,
                                          const TimeGrid& grid, double x);

/// Same Kraus list with analytic x-derivatives.
KrausDerivatives discrete_channel_derivatives(const CollisionSpec& spec, const TimeGrid& grid,
                                              double x);

ChannelFamily discrete_family(const CollisionSpec& spec, const TimeGrid& grid);

/// Predicted completeness residual for the scheme on this grid.
double completeness_bound(const CollisionSpec& spec, const TimeGrid& grid, double x);

/// || int_0^T M^† L^2 M dt + M^†(T) M(T) - 1 || with the grid's quadrature nodes.
double check_integral_completeness(const CollisionSpec& spec, const TimeGrid& grid, double x);

struct CollisionEfg {
  double e_retained = 0.0;
  Complex f_retained = 0.0;
  double g_retained = 0.0;

  /// Whole collision record, including evolution after a jump.
  double e_omega = 0.0;
  Complex f_omega = 0.0;
  double g_omega = 0.0;

  /// Records truncated at the first jump: <G_check> + int <dM^† L^2 dM>, matching
  /// the operators of build_discrete_channel.
  double e_omega_first_jump = 0.0;
  Complex f_omega_first_jump = 0.0;
  double g_omega_first_jump = 0.0;

  double i_q() const;
  double i_q_first_jump() const;
  /// sum over the retained outcome of 4[<G> - |<F>|^2 / <E>]
  double avg_ps_qfi() const;
};

CollisionEfg efg_integrals(const CollisionSpec& spec, const TimeGrid& grid, double x,
                           const Ket& psi);

struct Theorem2Verdict {
  bool lossless = false;
  double tol = 0.0;
  bool energy_pass = false;  // d/dx <E_check> = 0
  double energy_residual = 0.0;
  bool jump_pass = false;  // sqrt(gamma_j) L_j |xi(t)> = 0
  double jump_residual = 0.0;
  double jump_worst_time = 0.0;
  double dtheta = 0.0;  // -Re<F_check> / <E_check> at T
};

/// Both conditions are checked at the supplied x; the energy derivative uses a
/// Richardson-extrapolated central difference.
Theorem2Verdict check_theorem2(const CollisionSpec& spec, const TimeGrid& grid, double x,
                               const Ket& psi, double tol);

struct NhLoss {
  double kappa = 0.0;
  double p_check = 0.0;
  double i_sigma = 0.0;  // I(sigma_{x|check})
  double i_q = 0.0;
  double kappa_first_jump = 0.0;
  double i_q_first_jump = 0.0;
};

/// Throws DomainError when I^Q vanishes.
NhLoss nh_loss(const CollisionSpec& spec, const TimeGrid& grid, double x, const Ket& psi);

/// Loss fraction of commuting dephasing dynamics with total rate operator L2.
double dephasing_closed_form(const Operator& h0, const Operator& l2, double total_time,
                             const Ket& psi);

}  // namespace qfi
