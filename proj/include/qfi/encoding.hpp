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

#include <limits>
#include <string>
#include <vector>

#include "qfi/core.hpp"

namespace qfi {

// Expectation values over the initial system state of
//   E_w = M_w^† M_w,   F_w = i dM_w^† M_w,   G_w = dM_w^† dM_w.

enum class Gauge { as_given, perpendicular };

struct OutcomeEfg {
  std::string label;
  bool retained = true;
  double e = 0.0;
  Complex f = 0.0;
  double g = 0.0;
};

struct EfgReport {
  std::vector<OutcomeEfg> outcomes;

  double e_total = 0.0;
  Complex f_total = 0.0;
  double g_total = 0.0;
  double e_retained = 0.0;
  Complex f_retained = 0.0;
  double g_retained = 0.0;
  double e_discarded = 0.0;
  Complex f_discarded = 0.0;
  double g_discarded = 0.0;

  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  double i_q = kUnset;
  /// sum over retained outcomes of p(w|x) I(sigma_{x|w})
  double avg_ps_qfi = kUnset;
  /// 1 - avg_ps_qfi / i_q
  double kappa = kUnset;

  Gauge gauge = Gauge::as_given;
  bool exact = true;
};

/// Per-outcome and aggregate <E>, <F>, <G>. i_q / avg_ps_qfi / kappa are left unset.
EfgReport efg(const MeasurementChannel& channel, const KrausDerivatives& dm, const Ket& psi,
              Gauge gauge = Gauge::as_given);

/// I^Q = 4(<G_Omega> - Re<F_Omega>^2), clamped at zero. Throws DomainError for a
/// report from an approximate channel unless `allow_approximate`.
double total_qfi(const EfgReport& report, bool allow_approximate = false);

/// sum over retained live outcomes of 4[<G_w> - |<F_w>|^2 / <E_w>].
double average_postselected_qfi(const EfgReport& report);

/// efg() followed by total_qfi, average_postselected_qfi and the loss fraction.
EfgReport analyze(const MeasurementChannel& channel, const KrausDerivatives& dm, const Ket& psi,
                  bool allow_approximate = false);

struct GaugePhase {
  double theta = 0.0;
  double dtheta = 0.0;
};

struct GaugedDerivatives {
  KrausDerivatives derivatives;
  GaugePhase phase;
};

/// Rephases M_w -> e^{i theta(x)} M_w (theta = 0 at x) with
/// dtheta = -Re<F_Omega> / <E_Omega>, which makes Re<F_Omega> vanish.
GaugedDerivatives fix_perpendicular_gauge(const MeasurementChannel& channel,
                                          const KrausDerivatives& dm, const Ket& psi);

struct OutcomeResidual {
  std::string label;
  double value = 0.0;
};

struct PerpVerdict {
  bool lossless = false;
  double tol = 0.0;
  GaugePhase gauge;  // rephasing applied before the check
  /// |<psi_w|d psi_w>| for retained outcomes
  std::vector<OutcomeResidual> retained;
  /// ||d psi_w|| for discarded outcomes
  std::vector<OutcomeResidual> discarded;
  /// Retained outcomes with p <= p_floor but live response.
  std::vector<std::string> positivity_violations;
  double worst = 0.0;
};

/// Sufficient conditions for lossless post-selection in the perpendicular gauge.
/// The derivatives are brought into the perpendicular gauge first.
PerpVerdict check_lossless_perp(const MeasurementChannel& channel, const KrausDerivatives& dm,
                                const Ket& psi, double tol);

struct GenericVerdict {
  bool lossless = false;
  double tol = 0.0;
  /// |<F_w> - <F_Omega><E_w>| for retained outcomes
  std::vector<OutcomeResidual> retained;
  /// |<G_x> - <F_Omega> conj(<F_x>)|
  double discarded = 0.0;
  /// |Im<F_w>| = |d<E_w>/dx| / 2 for retained outcomes (necessary condition)
  std::vector<OutcomeResidual> necessary;
  double worst = 0.0;
};

/// Gauge-covariant lossless conditions, valid in any U(1) gauge.
GenericVerdict check_lossless_generic(const MeasurementChannel& channel,
                                      const KrausDerivatives& dm, const Ket& psi, double tol);

struct KappaResult {
  /// (<G_x> - <F_Omega><F_x>) / (<G_Omega> - <F_Omega>^2)
  double value = 0.0;
  /// The retained-outcome condition fails at `tol`; the value is then only indicative.
  bool conditional = false;
  double condition_residual = 0.0;
};

/// Loss fraction from aggregate E/F/G. Throws DomainError when I^Q vanishes.
KappaResult loss_kappa(const EfgReport& report, double tol = 1e-9);

struct AmplificationEntry {
  std::string label;
  double probability = 0.0;
  double conditional_qfi = 0.0;
  /// p * I(sigma) / I^Q
  double ratio = 0.0;
};

struct AmplificationReport {
  std::vector<AmplificationEntry> entries;
  double i_q = 0.0;
  double sum_qfi = 0.0;  // sum_w I(sigma_{x|w})
  double avg_qfi = 0.0;  // sum_w p I(sigma_{x|w})
  /// Every outcome has p in (0, 1): the sum strictly exceeds the average.
  bool strict = false;
  bool amplified = false;
};

AmplificationReport amplification_report(const MeasurementChannel& channel,
                                         const KrausDerivatives& dm, const Ket& psi);

}  // namespace qfi
