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

#include <optional>
#include <string>
#include <vector>

#include "qfi/core.hpp"

namespace qfi {

/// Outcome probabilities at or below this are treated as dead.
inline constexpr double kProbabilityFloor = 1e-12;
/// A dead outcome whose response exceeds this is singular (diverging classical FI).
inline constexpr double kResponseFloor = 1e-9;

/// Thrown by classical_fi when p is dead but dp is not.
class SingularOutcome : public DomainError {
 public:
  using DomainError::DomainError;
};

struct SldResult {
  Operator sld;
  double support_cutoff = 0.0;
  double qfi = 0.0;
};

enum class DerivativeMode { analytic, central_fd };

struct DerivativeConfig {
  /// Unset: analytic when the family provides it, central differences otherwise.
  std::optional<DerivativeMode> mode;
  /// Unset: 1e-5 * max(1, |x|).
  std::optional<double> step;
  bool richardson = true;

  double step_at(double x) const;
};

/// 4(<dpsi|dpsi> - |<psi|dpsi>|^2), clamped at zero.
double pure_qfi(const Ket& psi, const Ket& dpsi);

/// Symmetric logarithmic derivative of rho in its eigenbasis. Pairs with
/// lambda_i + lambda_j <= cutoff get L_ij = 0. Default cutoff is 1e-10 * Tr(rho).
SldResult sld(const Operator& rho, const Operator& drho, std::optional<double> cutoff = {});

/// QFI of the decohered state rho_x = sum_w M_w rho_i M_w^†.
double mixed_qfi(const MeasurementChannel& channel, const KrausDerivatives& dm, const Ket& psi);

/// (dp)^2 / p. Returns 0 for a dead outcome with vanishing response and throws
/// SingularOutcome for a dead outcome with live response.
double classical_fi(double p, double dp);

enum class OutcomeStatus { live, dead, singular };

struct OutcomeQfi {
  std::string label;
  bool retained = true;
  OutcomeStatus status = OutcomeStatus::live;
  double probability = 0.0;
  double dprobability = 0.0;
  /// I(sigma_{x|w}) of the normalized post-measurement state.
  double conditional_qfi = 0.0;
  double classical = 0.0;
  /// p * I(sigma) + I^cl
  double total = 0.0;
};

struct SigmaSeQfi {
  double total = 0.0;
  std::vector<OutcomeQfi> outcomes;
  /// Labels excluded from `total` because they are singular.
  std::vector<std::string> singular;
};

/// Post-measurement conditional state sigma_{x|w} and its x-derivative.
struct ConditionalState {
  Ket state;
  Ket derivative;
  double probability;
  double dprobability;
};

/// Normalizes M|psi> and differentiates the normalized state. Returns nullopt for a
/// dead outcome.
std::optional<ConditionalState> conditional_state(const Operator& m, const Operator& dm,
                                                  const Ket& psi);

/// QFI of sigma^SE = sum_w p(w|x) sigma_{x|w} ⊗ |pi_w><pi_w|, per outcome and total.
SigmaSeQfi sigma_se_qfi(const MeasurementChannel& channel, const KrausDerivatives& dm,
                        const Ket& psi);

struct FamilyDerivative {
  KrausDerivatives derivatives;
  DerivativeMode mode = DerivativeMode::analytic;
  /// Max-entry estimate of the finite-difference truncation error (0 for analytic).
  double truncation_error = 0.0;
};

FamilyDerivative family_derivative(const ChannelFamily& family, double x,
                                   const DerivativeConfig& cfg = {});

SigmaSeQfi sigma_se_qfi(const ChannelFamily& family, const Ket& psi, double x,
                        const DerivativeConfig& cfg = {});

/// I_w(|Psi^SE>) = 4 <d_perp Psi| (1 ⊗ Pi_w) |d_perp Psi>, evaluated from the Kraus data.
std::vector<double> dilated_outcome_qfi(const MeasurementChannel& channel,
                                        const KrausDerivatives& dm, const Ket& psi);

struct ConvexityTerm {
  double classical = 0.0;         // J_mu^cl(rho; E_mu)
  double mixed = 0.0;             // J_mu(rho)
  double post_measurement = 0.0;  // J_mu(sigma^SE)
  bool lower_holds = true;        // classical <= mixed
  bool upper_holds = true;        // mixed <= post_measurement
  bool classical_below_post = true;
};

struct ConvexityReport {
  std::vector<ConvexityTerm> terms;
  double slack = 1e-8;
  /// Largest excess over either inequality (<= 0 when the chain holds).
  double worst_violation = 0.0;
  bool holds = true;
};

/// Per-POVM-element chain J^cl <= J(rho) <= J(sigma^SE).
/// Throws DomainError when the POVM elements are not PSD or do not resolve the identity.
ConvexityReport refined_convexity_check(const MeasurementChannel& channel,
                                        const KrausDerivatives& dm, const Ket& psi,
                                        const std::vector<Operator>& povm, double slack = 1e-8);

}  // namespace qfi
