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

#include "qfi/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qfi/fisher.hpp"

namespace qfi {

namespace {

constexpr long kDenseCheckpointLimit = 1L << 14;
constexpr double kQfiFloor = 1e-14;

void require_hermitian(const Operator& a, Eigen::Index dim, const char* what) {
  if (a.rows() != dim || a.cols() != dim) {
    throw DimensionError(std::string(what) + " does not match the model dimension");
  }
  const double scale = std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
  if (hermiticity_defect(a) > kExactTol * scale) {
    throw DomainError(std::string(what) + " is not Hermitian");
  }
}

double rate_at(const JumpChannel& jump, double t) {
  const double g = jump.rate ? jump.rate(t) : 0.0;
  if (!std::isfinite(g) || g < 0.0) throw DomainError("jump rate must be finite and nonnegative");
  return g;
}

Operator validated_h0(const CollisionSpec& spec, double t, double x) {
  if (!spec.h0) throw DomainError("collision spec has no estimation Hamiltonian");
  Operator h = spec.h0(t, x);
  require_hermitian(h, spec.dim, "H0");
  return h;
}

/// One propagation step as seen by a visitor. The node is the operator that a jump
/// during this step acts on, and `weights[j]` is gamma_j(node_time) * dt.
struct Step {
  long n;
  double node_time;
  const Operator& m_prev;
  const Operator& dm_prev;
  const Operator& node_m;
  const Operator& node_dm;
  const std::vector<double>& weights;
};

template <class Visitor>
void walk(const CollisionSpec& spec, const TimeGrid& grid, double x, bool need_node,
          Visitor&& visit) {
  const Eigen::Index d = spec.dim;
  if (d <= 0) throw DimensionError("collision spec has no dimension");
  for (const auto& j : spec.jumps) {
    if (j.op.rows() != d || j.op.cols() != d) {
      throw DimensionError("jump operator does not match the model dimension");
    }
  }
  const double dt = grid.dt();
  const Complex minus_i(0, -1);
  Operator m = Operator::Identity(d, d);
  Operator dm = Operator::Zero(d, d);
  Operator next_m(d, d), next_dm(d, d), node_m(d, d), node_dm(d, d);
  std::vector<double> weights(spec.jumps.size());

  for (long n = 1; n <= grid.steps(); ++n) {
    const double t0 = grid.time(n - 1);
    double node_time;
    if (grid.scheme() == Scheme::euler_paper) {
      node_time = grid.time(n);
      const Operator h = h_nh(spec, node_time, x);
      const Operator dh = dh_nh(spec, node_time, x);
      next_m = m + minus_i * dt * (h * m);
      next_dm = dm + minus_i * dt * (dh * m + h * dm);
      if (need_node) {
        node_m = m;
        node_dm = dm;
      }
    } else {
      node_time = t0 + dt / 2.0;
      const auto [k, dk] = expm_with_derivative(minus_i * dt * h_nh(spec, node_time, x),
                                                minus_i * dt * dh_nh(spec, node_time, x));
      next_m = k * m;
      next_dm = dk * m + k * dm;
      if (need_node) {
        const double quarter = t0 + dt / 4.0;
        const auto [kh, dkh] = expm_with_derivative(minus_i * (dt / 2.0) * h_nh(spec, quarter, x),
                                                    minus_i * (dt / 2.0) * dh_nh(spec, quarter, x));
        node_m = kh * m;
        node_dm = dkh * m + kh * dm;
      }
    }
    if (!next_m.allFinite() || !next_dm.allFinite()) {
      throw DomainError("propagation produced non-finite values");
    }
    for (std::size_t j = 0; j < spec.jumps.size(); ++j) {
      weights[j] = rate_at(spec.jumps[j], node_time) * dt;
    }
    visit(Step{n, node_time, m, dm, node_m, node_dm, weights});
    m.swap(next_m);
    dm.swap(next_dm);
  }
  visit(Step{grid.steps() + 1, grid.total_time(), m, dm, m, dm, weights});
}

struct FinalPropagator {
  Operator m;
  Operator dm;
};

FinalPropagator propagate_final(const CollisionSpec& spec, const TimeGrid& grid, double x) {
  FinalPropagator out;
  walk(spec, grid, x, false, [&](const Step& s) {
    if (s.n > grid.steps()) {
      out.m = s.m_prev;
      out.dm = s.dm_prev;
    }
  });
  return out;
}

Operator jump_map(const CollisionSpec& spec, const std::vector<double>& rates, const Operator& a) {
  Operator out = Operator::Zero(a.rows(), a.cols());
  for (std::size_t j = 0; j < spec.jumps.size(); ++j) {
    if (rates[j] == 0.0) continue;
    const Operator& l = spec.jumps[j].op;
    out.noalias() += rates[j] * (l * a * l.adjoint());
  }
  return out;
}

/// Moments of the whole collision record: rho = sum v v^†, eta = sum dv v^†,
/// tau = sum dv dv^† over all jump records.
struct RecordMoments {
  Operator rho, eta, tau;
};

RecordMoments record_generator(const CollisionSpec& spec, double t, double x,
                               const RecordMoments& s) {
  const Complex i(0, 1);
  const Operator h = h_nh(spec, t, x);
  const Operator dh = dh_nh(spec, t, x);
  std::vector<double> rates(spec.jumps.size());
  for (std::size_t j = 0; j < rates.size(); ++j) rates[j] = rate_at(spec.jumps[j], t);
  auto lind = [&](const Operator& a) -> Operator {
    return -i * (h * a - a * h.adjoint()) + jump_map(spec, rates, a);
  };
  RecordMoments out;
  out.rho = lind(s.rho);
  out.eta = lind(s.eta) - i * dh * s.rho;
  out.tau = lind(s.tau) - i * dh * s.eta.adjoint() + i * s.eta * dh;
  return out;
}

RecordMoments full_record(const CollisionSpec& spec, const TimeGrid& grid, double x,
                          const Ket& psi) {
  const Eigen::Index d = spec.dim;
  RecordMoments s{ops::projector(psi), Operator::Zero(d, d), Operator::Zero(d, d)};
  const double dt = grid.dt();
  const Complex minus_i(0, -1);
  if (grid.scheme() == Scheme::euler_paper) {
    std::vector<double> rates(spec.jumps.size());
    for (long n = 1; n <= grid.steps(); ++n) {
      const double t = grid.time(n);
      const Operator k = Operator::Identity(d, d) + minus_i * dt * h_nh(spec, t, x);
      const Operator dk = minus_i * dt * dh_nh(spec, t, x);
      for (std::size_t j = 0; j < rates.size(); ++j) rates[j] = rate_at(spec.jumps[j], t) * dt;
      RecordMoments next;
      next.rho = k * s.rho * k.adjoint() + jump_map(spec, rates, s.rho);
      next.eta = dk * s.rho * k.adjoint() + k * s.eta * k.adjoint() + jump_map(spec, rates, s.eta);
      next.tau = dk * s.rho * dk.adjoint() + dk * s.eta.adjoint() * k.adjoint() +
                 k * s.eta * dk.adjoint() + k * s.tau * k.adjoint() + jump_map(spec, rates, s.tau);
      s = std::move(next);
    }
    return s;
  }
  auto axpy = [](const RecordMoments& a, double c, const RecordMoments& b) {
    return RecordMoments{a.rho + c * b.rho, a.eta + c * b.eta, a.tau + c * b.tau};
  };
  for (long n = 1; n <= grid.steps(); ++n) {
    const double t0 = grid.time(n - 1);
    const RecordMoments k1 = record_generator(spec, t0, x, s);
    const RecordMoments k2 = record_generator(spec, t0 + dt / 2.0, x, axpy(s, dt / 2.0, k1));
    const RecordMoments k3 = record_generator(spec, t0 + dt / 2.0, x, axpy(s, dt / 2.0, k2));
    const RecordMoments k4 = record_generator(spec, grid.time(n), x, axpy(s, dt, k3));
    s.rho += dt / 6.0 * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
    s.eta += dt / 6.0 * (k1.eta + 2.0 * k2.eta + 2.0 * k3.eta + k4.eta);
    s.tau += dt / 6.0 * (k1.tau + 2.0 * k2.tau + 2.0 * k3.tau + k4.tau);
  }
  return s;
}

void require_psi(const CollisionSpec& spec, const Ket& psi) {
  if (psi.size() != spec.dim) throw DimensionError("state does not match the model dimension");
  if (!is_normalized(psi, kExactTol)) throw DomainError("initial state is not normalized");
}

}  // namespace

TimeGrid::TimeGrid(double total_time, long steps, Scheme scheme)
    : total_(total_time), steps_(steps), scheme_(scheme) {
  if (steps < 1) throw DomainError("time grid needs at least one step");
  if (!std::isfinite(total_time) || total_time < 0.0) {
    throw DomainError("total time must be finite and nonnegative");
  }
}

double TimeGrid::time(long n) const {
  if (n < 0 || n > steps_) throw DomainError("time index outside the grid");
  if (n == steps_) return total_;
  return total_ * static_cast<double>(n) / static_cast<double>(steps_);
}

Operator jump_rate_operator(const CollisionSpec& spec, double t) {
  Operator l2 = Operator::Zero(spec.dim, spec.dim);
  for (const auto& j : spec.jumps) {
    if (j.op.rows() != spec.dim || j.op.cols() != spec.dim) {
      throw DimensionError("jump operator does not match the model dimension");
    }
    l2.noalias() += rate_at(j, t) * (j.op.adjoint() * j.op);
  }
  return l2;
}

Operator h_nh(const CollisionSpec& spec, double t, double x) {
  Operator h = validated_h0(spec, t, x);
  if (spec.h1) {
    const Operator h1 = spec.h1(t);
    require_hermitian(h1, spec.dim, "H1");
    h += h1;
  }
  return h - Complex(0, 0.5) * jump_rate_operator(spec, t);
}

Operator dh_nh(const CollisionSpec& spec, double t, double x) {
  if (spec.dh0) {
    Operator d = spec.dh0(t, x);
    require_hermitian(d, spec.dim, "dH0/dx");
    return d;
  }
  const double h = 1e-4 * std::max(1.0, std::abs(x));
  auto central = [&](double s) {
    return Operator((validated_h0(spec, t, x + s) - validated_h0(spec, t, x - s)) / (2.0 * s));
  };
  return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

std::vector<Ket> NhTrajectory::states(const Ket& psi) const {
  std::vector<Ket> out;
  out.reserve(checkpoints.size());
  for (const auto& c : checkpoints) out.push_back(c.m * psi);
  return out;
}

double NhTrajectory::max_norm_increase(const Ket& psi) const {
  double worst = 0.0;
  double prev = psi.norm();
  for (const auto& c : checkpoints) {
    const double cur = (c.m * psi).norm();
    worst = std::max(worst, cur - prev);
    prev = cur;
  }
  return worst;
}

NhTrajectory propagate(const CollisionSpec& spec, const TimeGrid& grid, double x) {
  NhTrajectory traj;
  traj.grid = grid;
  traj.x = x;
  traj.stride = grid.steps() <= kDenseCheckpointLimit
                    ? 1
                    : (grid.steps() + kDenseCheckpointLimit - 1) / kDenseCheckpointLimit;
  walk(spec, grid, x, false, [&](const Step& s) {
    const long n = s.n - 1;  // index of m_prev
    if (n % traj.stride == 0 || n == grid.steps()) {
      traj.checkpoints.push_back({n, grid.time(n), s.m_prev, s.dm_prev});
    }
  });
  return traj;
}

double completeness_bound(const CollisionSpec& spec, const TimeGrid& grid, double x) {
  double h_max = 0.0;
  double l2_max = 0.0;
  for (long n = 0; n <= grid.steps(); ++n) {
    const double t = grid.time(n);
    h_max = std::max(h_max, h_nh(spec, t, x).norm());
    l2_max = std::max(l2_max, jump_rate_operator(spec, t).norm());
  }
  const double dt = grid.dt();
  if (grid.scheme() == Scheme::euler_paper) {
    const double a = static_cast<double>(grid.steps()) * dt * dt * h_max * h_max;
    return a * std::exp(a) + 1e-12;
  }
  return grid.total_time() * dt * l2_max * (h_max + l2_max) + 1e-12;
}

MeasurementChannel build_discrete_channel(const CollisionSpec& spec, const Ket& psi,
                                          const TimeGrid& grid, double x) {
  if (psi.size() != spec.dim) throw DimensionError("state does not match the model dimension");
  std::vector<KrausOperator> kraus;
  kraus.reserve(1 + grid.steps() * spec.jumps.size());
  kraus.push_back({kNoJumpLabel, Operator()});
  walk(spec, grid, x, true, [&](const Step& s) {
    if (s.n > grid.steps()) {
      kraus.front().op = s.m_prev;
      return;
    }
    for (std::size_t j = 0; j < spec.jumps.size(); ++j) {
      kraus.push_back({"L" + std::to_string(j + 1) + "@" + std::to_string(s.n),
                       std::sqrt(s.weights[j]) * (spec.jumps[j].op * s.node_m)});
    }
  });
  MeasurementChannel channel(std::move(kraus), {kNoJumpLabel}, Completeness::approximate);
  const double bound = completeness_bound(spec, grid, x);
  if (channel.completeness_residual() > 10.0 * bound) {
    throw DomainError("discrete channel completeness residual " +
                      std::to_string(channel.completeness_residual()) +
                      " exceeds 10x the predicted bound " + std::to_string(bound));
  }
  return channel;
}

KrausDerivatives discrete_channel_derivatives(const CollisionSpec& spec, const TimeGrid& grid,
                                              double x) {
  KrausDerivatives out;
  out.reserve(1 + grid.steps() * spec.jumps.size());
  out.emplace_back();
  walk(spec, grid, x, true, [&](const Step& s) {
    if (s.n > grid.steps()) {
      out.front() = s.dm_prev;
      return;
    }
    for (std::size_t j = 0; j < spec.jumps.size(); ++j) {
      out.push_back(std::sqrt(s.weights[j]) * (spec.jumps[j].op * s.node_dm));
    }
  });
  return out;
}

ChannelFamily discrete_family(const CollisionSpec& spec, const TimeGrid& grid) {
  const Ket probe = ops::basis(spec.dim, 0);
  return ChannelFamily(
      [spec, grid, probe](double x) { return build_discrete_channel(spec, probe, grid, x); },
      [spec, grid](double x) { return discrete_channel_derivatives(spec, grid, x); });
}

double check_integral_completeness(const CollisionSpec& spec, const TimeGrid& grid, double x) {
  const Eigen::Index d = spec.dim;
  Operator sum = Operator::Zero(d, d);
  walk(spec, grid, x, true, [&](const Step& s) {
    if (s.n > grid.steps()) {
      sum.noalias() += s.m_prev.adjoint() * s.m_prev;
      return;
    }
    for (std::size_t j = 0; j < spec.jumps.size(); ++j) {
      if (s.weights[j] == 0.0) continue;
      const Operator lm = spec.jumps[j].op * s.node_m;
      sum.noalias() += s.weights[j] * (lm.adjoint() * lm);
    }
  });
  return spectral_norm(sum - Operator::Identity(d, d));
}

double CollisionEfg::i_q() const {
  return std::max(0.0, 4.0 * (g_omega - f_omega.real() * f_omega.real()));
}

double CollisionEfg::i_q_first_jump() const {
  const double f = f_omega_first_jump.real();
  return std::max(0.0, 4.0 * (g_omega_first_jump - f * f));
}

double CollisionEfg::avg_ps_qfi() const {
  if (e_retained <= kProbabilityFloor) return 0.0;
  return std::max(0.0, 4.0 * (g_retained - std::norm(f_retained) / e_retained));
}

CollisionEfg efg_integrals(const CollisionSpec& spec, const TimeGrid& grid, double x,
                           const Ket& psi) {
  require_psi(spec, psi);
  const Complex i(0, 1);
  CollisionEfg out;
  double e_int = 0.0, g_int = 0.0;
  Complex f_int = 0.0;
  walk(spec, grid, x, true, [&](const Step& s) {
    if (s.n > grid.steps()) {
      const Ket v = s.m_prev * psi;
      const Ket dv = s.dm_prev * psi;
      out.e_retained = v.squaredNorm();
      out.f_retained = i * dv.dot(v);
      out.g_retained = dv.squaredNorm();
      return;
    }
    const Ket v = s.node_m * psi;
    const Ket dv = s.node_dm * psi;
    for (std::size_t j = 0; j < spec.jumps.size(); ++j) {
      if (s.weights[j] == 0.0) continue;
      const Ket lv = spec.jumps[j].op * v;
      const Ket ldv = spec.jumps[j].op * dv;
      e_int += s.weights[j] * lv.squaredNorm();
      f_int += s.weights[j] * i * ldv.dot(lv);
      g_int += s.weights[j] * ldv.squaredNorm();
    }
  });
  out.e_omega_first_jump = out.e_retained + e_int;
  out.f_omega_first_jump = out.f_retained + f_int;
  out.g_omega_first_jump = out.g_retained + g_int;

  const RecordMoments full = full_record(spec, grid, x, psi);
  out.e_omega = full.rho.trace().real();
  out.f_omega = i * std::conj(full.eta.trace());
  out.g_omega = full.tau.trace().real();
  return out;
}

Theorem2Verdict check_theorem2(const CollisionSpec& spec, const TimeGrid& grid, double x,
                               const Ket& psi, double tol) {
  require_psi(spec, psi);
  Theorem2Verdict v;
  v.tol = tol;

  std::vector<Ket> states, derivs;
  states.reserve(grid.steps() + 1);
  derivs.reserve(grid.steps() + 1);
  walk(spec, grid, x, false, [&](const Step& s) {
    states.push_back(s.m_prev * psi);
    derivs.push_back(s.dm_prev * psi);
  });
  const Ket& vt = states.back();
  const double e = vt.squaredNorm();
  if (e <= kProbabilityFloor) throw DomainError("check_theorem2: no-jump probability vanishes");
  const Complex f = Complex(0, 1) * derivs.back().dot(vt);
  v.dtheta = -f.real() / e;

  auto energy = [&](double xx) { return (propagate_final(spec, grid, xx).m * psi).squaredNorm(); };
  const double h = 1e-3 * std::max(1.0, std::abs(x));
  auto central = [&](double s) { return (energy(x + s) - energy(x - s)) / (2.0 * s); };
  v.energy_residual = std::abs((4.0 * central(h / 2.0) - central(h)) / 3.0);
  v.energy_pass = v.energy_residual <= tol;

  for (long n = 0; n <= grid.steps(); ++n) {
    const double t = grid.time(n);
    const Ket xi = derivs[n] + Complex(0, v.dtheta) * states[n];
    for (const auto& jump : spec.jumps) {
      const double r = std::sqrt(rate_at(jump, t)) * (jump.op * xi).norm();
      if (r > v.jump_residual) {
        v.jump_residual = r;
        v.jump_worst_time = t;
      }
    }
  }
  v.jump_pass = v.jump_residual <= tol;
  v.lossless = v.energy_pass && v.jump_pass;
  return v;
}

NhLoss nh_loss(const CollisionSpec& spec, const TimeGrid& grid, double x, const Ket& psi) {
  const CollisionEfg efg = efg_integrals(spec, grid, x, psi);
  NhLoss out;
  out.i_q = efg.i_q();
  if (out.i_q <= kQfiFloor) throw DomainError("nh_loss: I^Q vanishes");
  const double avg = efg.avg_ps_qfi();
  out.kappa = 1.0 - avg / out.i_q;
  out.p_check = efg.e_retained;
  out.i_sigma = out.p_check > kProbabilityFloor ? avg / out.p_check : 0.0;
  out.i_q_first_jump = efg.i_q_first_jump();
  out.kappa_first_jump = out.i_q_first_jump > kQfiFloor
                             ? 1.0 - avg / out.i_q_first_jump
                             : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double dephasing_closed_form(const Operator& h0, const Operator& l2, double total_time,
                             const Ket& psi) {
  const Eigen::Index d = psi.size();
  require_hermitian(h0, d, "H0");
  require_hermitian(l2, d, "L^2");
  if (commutator(h0, l2).cwiseAbs().maxCoeff() > kExactTol) {
    throw DomainError("dephasing_closed_form: H0 and L^2 do not commute");
  }
  if (!std::isfinite(total_time) || total_time < 0.0) throw DomainError("total time must be >= 0");
  const double mean = psi.dot(h0 * psi).real();
  const double var = psi.dot(h0 * (h0 * psi)).real() - mean * mean;
  if (var <= kQfiFloor) throw DomainError("dephasing_closed_form: H0 has no variance in psi");
  const Operator decay = hermitian_function(l2, [&](double l) { return std::exp(-l * total_time); });
  const Ket dpsi = decay * psi;
  const double e = psi.dot(dpsi).real();
  const double eh = psi.dot(decay * (h0 * psi)).real();
  const double ehh = psi.dot(decay * (h0 * (h0 * psi))).real();
  return 1.0 - (ehh - eh * eh / e) / var;
}

}  // namespace qfi
