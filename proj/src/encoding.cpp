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

#include "qfi/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "qfi/fisher.hpp"

namespace qfi {

namespace {

constexpr double kQfiFloor = 1e-14;

KrausDerivatives rephase(const MeasurementChannel& channel, const KrausDerivatives& dm,
                         double dtheta) {
  KrausDerivatives out = dm;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += Complex(0, dtheta) * channel[i].op;
  return out;
}

}  // namespace

EfgReport efg(const MeasurementChannel& channel, const KrausDerivatives& dm, const Ket& psi,
              Gauge gauge) {
  require_same_dim(channel, dm, psi);
  if (gauge == Gauge::perpendicular) {
    EfgReport r = efg(channel, fix_perpendicular_gauge(channel, dm, psi).derivatives, psi);
    r.gauge = Gauge::perpendicular;
    return r;
  }
  EfgReport r;
  r.exact = channel.exact();
  r.gauge = gauge;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    const Ket v = channel[i].op * psi;
    const Ket dv = dm[i] * psi;
    OutcomeEfg o;
    o.label = channel[i].label;
    o.retained = channel.is_retained(o.label);
    o.e = v.squaredNorm();
    o.f = Complex(0, 1) * dv.dot(v);
    o.g = dv.squaredNorm();
    r.e_total += o.e;
    r.f_total += o.f;
    r.g_total += o.g;
    if (o.retained) {
      r.e_retained += o.e;
      r.f_retained += o.f;
      r.g_retained += o.g;
    } else {
      r.e_discarded += o.e;
      r.f_discarded += o.f;
      r.g_discarded += o.g;
    }
    r.outcomes.push_back(std::move(o));
  }
  return r;
}

double total_qfi(const EfgReport& report, bool allow_approximate) {
  if (!report.exact && !allow_approximate) {
    throw DomainError("total_qfi: channel is not exact; supply integral corrections instead");
  }
  const double f = report.f_total.real();
  return std::max(0.0, 4.0 * (report.g_total - f * f));
}

double average_postselected_qfi(const EfgReport& report) {
  double sum = 0.0;
  for (const auto& o : report.outcomes) {
    if (!o.retained || o.e <= kProbabilityFloor) continue;
    sum += std::max(0.0, 4.0 * (o.g - std::norm(o.f) / o.e));
  }
  return sum;
}

EfgReport analyze(const MeasurementChannel& channel, const KrausDerivatives& dm, const Ket& psi,
                  bool allow_approximate) {
  EfgReport r = efg(channel, dm, psi);
  r.i_q = total_qfi(r, allow_approximate);
  r.avg_ps_qfi = average_postselected_qfi(r);
  r.kappa = r.i_q > kQfiFloor ? 1.0 - r.avg_ps_qfi / r.i_q : EfgReport::kUnset;
  return r;
}

GaugedDerivatives fix_perpendicular_gauge(const MeasurementChannel& channel,
                                          const KrausDerivatives& dm, const Ket& psi) {
  const EfgReport r = efg(channel, dm, psi);
  GaugedDerivatives out;
  out.phase.dtheta = -r.f_total.real() / r.e_total;
  out.derivatives = rephase(channel, dm, out.phase.dtheta);
  return out;
}

PerpVerdict check_lossless_perp(const MeasurementChannel& channel, const KrausDerivatives& dm,
                                const Ket& psi, double tol) {
  require_same_dim(channel, dm, psi);
  const GaugedDerivatives gauged = fix_perpendicular_gauge(channel, dm, psi);
  PerpVerdict v;
  v.tol = tol;
  v.gauge = gauged.phase;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    const Ket s = channel[i].op * psi;
    const Ket ds = gauged.derivatives[i] * psi;
    const std::string& label = channel[i].label;
    if (channel.is_retained(label)) {
      const double res = std::abs(s.dot(ds));
      v.retained.push_back({label, res});
      v.worst = std::max(v.worst, res);
      if (s.squaredNorm() <= kProbabilityFloor && ds.norm() > kResponseFloor) {
        v.positivity_violations.push_back(label);
      }
    } else {
      const double res = ds.norm();
      v.discarded.push_back({label, res});
      v.worst = std::max(v.worst, res);
    }
  }
  v.lossless = v.worst <= tol && v.positivity_violations.empty();
  return v;
}

GenericVerdict check_lossless_generic(const MeasurementChannel& channel,
                                      const KrausDerivatives& dm, const Ket& psi, double tol) {
  const EfgReport r = efg(channel, dm, psi);
  GenericVerdict v;
  v.tol = tol;
  for (const auto& o : r.outcomes) {
    if (!o.retained) continue;
    const double res = std::abs(o.f - r.f_total * o.e);
    v.retained.push_back({o.label, res});
    v.necessary.push_back({o.label, std::abs(o.f.imag())});
    v.worst = std::max({v.worst, res, std::abs(o.f.imag())});
  }
  v.discarded = std::abs(r.g_discarded - r.f_total * std::conj(r.f_discarded));
  v.worst = std::max(v.worst, v.discarded);
  v.lossless = v.worst <= tol;
  return v;
}

KappaResult loss_kappa(const EfgReport& report, double tol) {
  const double f = report.f_total.real();
  const double denom = report.g_total - f * f;
  if (4.0 * denom <= kQfiFloor) throw DomainError("loss_kappa: I^Q vanishes, no information to lose");
  KappaResult k;
  k.value = (report.g_discarded - f * report.f_discarded.real()) / denom;
  for (const auto& o : report.outcomes) {
    if (o.retained) k.condition_residual = std::max(k.condition_residual, std::abs(o.f - f * o.e));
  }
  k.conditional = k.condition_residual > tol;
  return k;
}

AmplificationReport amplification_report(const MeasurementChannel& channel,
                                         const KrausDerivatives& dm, const Ket& psi) {
  const EfgReport r = efg(channel, dm, psi);
  AmplificationReport a;
  a.i_q = total_qfi(r);
  a.strict = true;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    AmplificationEntry e;
    e.label = channel[i].label;
    const auto cond = conditional_state(channel[i].op, dm[i], psi);
    e.probability = (channel[i].op * psi).squaredNorm();
    if (cond) e.conditional_qfi = pure_qfi(cond->state, cond->derivative);
    e.ratio = a.i_q > kQfiFloor ? e.probability * e.conditional_qfi / a.i_q : 0.0;
    a.sum_qfi += e.conditional_qfi;
    a.avg_qfi += e.probability * e.conditional_qfi;
    a.strict = a.strict && e.probability > kProbabilityFloor &&
               e.probability < 1.0 - kProbabilityFloor;
    a.entries.push_back(std::move(e));
  }
  a.amplified = a.sum_qfi > a.i_q;
  return a;
}

}  // namespace qfi
