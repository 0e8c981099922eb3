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

#include "qfi/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qfi {

double DerivativeConfig::step_at(double x) const {
  const double h = step.value_or(1e-5 * std::max(1.0, std::abs(x)));
  if (!(h > 0.0)) throw DomainError("derivative step must be positive");
  return h;
}

double pure_qfi(const Ket& psi, const Ket& dpsi) {
  if (psi.size() != dpsi.size()) throw DimensionError("pure_qfi: dimension mismatch");
  const double q = 4.0 * (dpsi.squaredNorm() - std::norm(psi.dot(dpsi)));
  return std::max(q, 0.0);
}

SldResult sld(const Operator& rho, const Operator& drho, std::optional<double> cutoff) {
  if (rho.rows() != drho.rows() || rho.cols() != drho.cols()) {
    throw DimensionError("sld: dimension mismatch");
  }
  if (!is_hermitian(rho, kExactTol) || !is_hermitian(drho, kExactTol)) {
    throw DomainError("sld: inputs must be Hermitian");
  }
  const HermitianEig eig = hermitian_eig((rho + rho.adjoint()) / 2.0);
  const double trace = rho.trace().real();
  const double cut = cutoff.value_or(1e-10 * std::max(trace, 1e-300));

  const Operator d = eig.vectors.adjoint() * drho * eig.vectors;
  const Eigen::Index n = rho.rows();
  Operator l = Operator::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = eig.values(i) + eig.values(j);
      if (s > cut) l(i, j) = 2.0 * d(i, j) / s;
    }
  }
  SldResult out;
  out.sld = eig.vectors * l * eig.vectors.adjoint();
  out.sld = (out.sld + out.sld.adjoint()) / 2.0;
  out.support_cutoff = cut;
  out.qfi = std::max(0.0, (rho * out.sld * out.sld).trace().real());
  return out;
}

double mixed_qfi(const MeasurementChannel& channel, const KrausDerivatives& dm, const Ket& psi) {
  return sld(mixed_state(channel, psi), mixed_state_derivative(channel, dm, psi)).qfi;
}

double classical_fi(double p, double dp) {
  if (p < -kExactTol || p > 1.0 + kExactTol) throw DomainError("classical_fi: p outside [0, 1]");
  if (p <= kProbabilityFloor) {
    if (std::abs(dp) <= kResponseFloor) return 0.0;
    throw SingularOutcome("classical_fi: vanishing probability with nonvanishing derivative");
  }
  return dp * dp / p;
}

std::optional<ConditionalState> conditional_state(const Operator& m, const Operator& dm,
                                                  const Ket& psi) {
  const Ket v = m * psi;
  const Ket dv = dm * psi;
  const double p = v.squaredNorm();
  if (p <= kProbabilityFloor) return std::nullopt;
  const double dp = 2.0 * v.dot(dv).real();
  const double sp = std::sqrt(p);
  ConditionalState out;
  out.state = v / sp;
  out.derivative = dv / sp - v * (dp / (2.0 * p * sp));
  out.probability = p;
  out.dprobability = dp;
  return out;
}

SigmaSeQfi sigma_se_qfi(const MeasurementChannel& channel, const KrausDerivatives& dm,
                        const Ket& psi) {
  require_same_dim(channel, dm, psi);
  SigmaSeQfi out;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    OutcomeQfi o;
    o.label = channel[i].label;
    o.retained = channel.is_retained(o.label);
    const auto cond = conditional_state(channel[i].op, dm[i], psi);
    if (!cond) {
      const Ket v = channel[i].op * psi;
      o.probability = v.squaredNorm();
      const double response = (dm[i] * psi).norm();
      o.status = response > kResponseFloor ? OutcomeStatus::singular : OutcomeStatus::dead;
      if (o.status == OutcomeStatus::singular) out.singular.push_back(o.label);
      out.outcomes.push_back(o);
      continue;
    }
    o.probability = cond->probability;
    o.dprobability = cond->dprobability;
    o.conditional_qfi = pure_qfi(cond->state, cond->derivative);
    o.classical = classical_fi(o.probability, o.dprobability);
    o.total = o.probability * o.conditional_qfi + o.classical;
    out.total += o.total;
    out.outcomes.push_back(o);
  }
  return out;
}

namespace {

std::vector<Operator> central_difference(const ChannelFamily& family, double x, double h,
                                         const std::vector<std::string>& labels) {
  MeasurementChannel plus = [&] {
    try {
      return family(x + h);
    } catch (const std::exception& e) {
      throw DomainError(std::string("family not evaluable in stencil range: ") + e.what());
    }
  }();
  MeasurementChannel minus = [&] {
    try {
      return family(x - h);
    } catch (const std::exception& e) {
      throw DomainError(std::string("family not evaluable in stencil range: ") + e.what());
    }
  }();
  if (plus.labels() != labels || minus.labels() != labels) {
    throw DomainError("channel family relabels its outcomes across x");
  }
  std::vector<Operator> d;
  d.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    d.push_back((plus[i].op - minus[i].op) / (2.0 * h));
  }
  return d;
}

}  // namespace

FamilyDerivative family_derivative(const ChannelFamily& family, double x,
                                   const DerivativeConfig& cfg) {
  const DerivativeMode mode = cfg.mode.value_or(
      family.has_analytic_derivative() ? DerivativeMode::analytic : DerivativeMode::central_fd);
  FamilyDerivative out;
  out.mode = mode;
  if (mode == DerivativeMode::analytic) {
    out.derivatives = family.analytic_derivative(x);
    return out;
  }
  const MeasurementChannel centre = family(x);
  const auto labels = centre.labels();
  const double h = cfg.step_at(x);
  const auto coarse = central_difference(family, x, h, labels);
  const auto fine = central_difference(family, x, h / 2.0, labels);
  double err = 0.0;
  out.derivatives.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    err = std::max(err, (fine[i] - coarse[i]).cwiseAbs().maxCoeff() / 3.0);
    out.derivatives.push_back(cfg.richardson ? Operator((4.0 * fine[i] - coarse[i]) / 3.0)
                                             : coarse[i]);
  }
  out.truncation_error = cfg.richardson ? err : 4.0 * err;
  return out;
}

SigmaSeQfi sigma_se_qfi(const ChannelFamily& family, const Ket& psi, double x,
                        const DerivativeConfig& cfg) {
  const MeasurementChannel channel = family(x);
  if (!channel.exact()) throw DomainError("sigma_se_qfi: channel is not exact at x");
  return sigma_se_qfi(channel, family_derivative(family, x, cfg).derivatives, psi);
}

std::vector<double> dilated_outcome_qfi(const MeasurementChannel& channel,
                                        const KrausDerivatives& dm, const Ket& psi) {
  require_same_dim(channel, dm, psi);
  // <Psi|dPsi> = sum_w <psi_w|dpsi_w>
  Complex overlap = 0.0;
  std::vector<Ket> v, dv;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    v.push_back(channel[i].op * psi);
    dv.push_back(dm[i] * psi);
    overlap += v.back().dot(dv.back());
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    out.push_back(4.0 * (dv[i] - overlap * v[i]).squaredNorm());
  }
  return out;
}

ConvexityReport refined_convexity_check(const MeasurementChannel& channel,
                                        const KrausDerivatives& dm, const Ket& psi,
                                        const std::vector<Operator>& povm, double slack) {
  require_same_dim(channel, dm, psi);
  const Eigen::Index n = channel.dim();
  Operator sum = Operator::Zero(n, n);
  for (const auto& e : povm) {
    if (e.rows() != n || e.cols() != n) throw DimensionError("POVM element has wrong dimension");
    if (!is_psd(e, kExactTol)) throw DomainError("POVM element is not positive semidefinite");
    sum += e;
  }
  if (spectral_norm(sum - Operator::Identity(n, n)) > kExactTol) {
    throw DomainError("POVM does not resolve the identity");
  }

  const Operator rho = mixed_state(channel, psi);
  const Operator drho = mixed_state_derivative(channel, dm, psi);
  const Operator l = sld(rho, drho).sld;

  struct Branch {
    Operator sigma_tilde;
    Operator sld_tilde;
  };
  std::vector<Branch> branches;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    const auto cond = conditional_state(channel[i].op, dm[i], psi);
    if (!cond) continue;
    const Operator dsigma = cond->derivative * cond->state.adjoint() +
                            cond->state * cond->derivative.adjoint();
    Branch b;
    b.sigma_tilde = cond->probability * ops::projector(cond->state);
    b.sld_tilde = (cond->dprobability / cond->probability) * Operator::Identity(n, n) + 2.0 * dsigma;
    branches.push_back(std::move(b));
  }

  ConvexityReport report;
  report.slack = slack;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (const auto& e : povm) {
    ConvexityTerm t;
    const double pe = (rho * e).trace().real();
    const double de = (drho * e).trace().real();
    t.classical = pe > kProbabilityFloor ? de * de / pe : 0.0;
    t.mixed = (rho * l * e * l).trace().real();
    for (const auto& b : branches) {
      t.post_measurement += (b.sigma_tilde * b.sld_tilde * e * b.sld_tilde).trace().real();
    }
    t.lower_holds = t.classical <= t.mixed + slack;
    t.upper_holds = t.mixed <= t.post_measurement + slack;
    t.classical_below_post = t.classical <= t.post_measurement + slack;
    report.worst_violation = std::max(
        {report.worst_violation, t.classical - t.mixed, t.mixed - t.post_measurement});
    report.holds = report.holds && t.lower_holds && t.upper_holds;
    report.terms.push_back(t);
  }
  return report;
}

}  // namespace qfi
