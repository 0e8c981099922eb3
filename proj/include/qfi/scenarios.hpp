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

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qfi/collision.hpp"
#include "qfi/core.hpp"

namespace qfi {

// ---------------------------------------------------------------------------
// Transducer: a system qubit flips conditioned on the environment leaving its
// initial state, and the environment is then measured in a rotated basis.

struct TransducerSpec {
  Operator h0_env;   // estimation Hamiltonian on the environment
  Ket env_initial;   // |phi>
  Ket sys_initial;   // |psi>
  Operator flip;     // unitary with <psi|flip|psi> = 0
  double total_time = 1.0;
  double x = 1e-5;
  double eps = 1.0;  // mixing of the measurement basis
};

struct Transducer {
  ChannelFamily family;
  double expected_iq = 0.0;  // 4 T^2 Var(H0_env)
  Operator h0_shifted;       // H0_env - <phi|H0_env|phi>
  Ket env_perp;              // H0|phi> / sqrt(Var)
  Operator interaction;      // U^I on system ⊗ environment
  std::vector<Ket> env_basis;
  /// max_w |<psi, phi| U^I† (1 ⊗ Pi_w) U^I |psi, phi_perp>|
  double weak_signal_residual = 0.0;
};

/// Exact dilation U(x) = U^I exp(-i x T (1 ⊗ H0)) with analytic derivatives.
/// Throws DomainError when H0 has no variance in |phi>, when the flip does not
/// orthogonalize |psi>, or when the weak-signal condition fails at 1e-10.
Transducer build_transducer(const TransducerSpec& spec, std::set<std::string> retained = {});

/// H0 = sigma_z, |phi> = |+x>, |psi> = |0>, flip = sigma_x.
TransducerSpec two_qubit_transducer(double eps, double x = 1e-5, double total_time = 1.0);

struct Fig1bRow {
  double eps = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double i_sigma_1 = 0.0;
  double i_sigma_2 = 0.0;
  double avg_total = 0.0;  // sum_w p I(sigma_w)
  double sum_total = 0.0;  // sum_w I(sigma_w)
  double i_q = 0.0;
  /// Worst residual of the perpendicular-gauge lossless check.
  double theorem1_residual = 0.0;
};

/// One row per eps; spec.eps is ignored.
std::vector<Fig1bRow> fig1b_sweep(const TransducerSpec& spec, const std::vector<double>& eps_grid);

std::vector<double> log_grid(double a, double b, int n);
std::vector<double> lin_grid(double a, double b, int n);
/// 41 log-spaced points over [1e-3, 1e3].
std::vector<double> default_eps_grid();

// ---------------------------------------------------------------------------
// Pure dephasing with a multiplicative estimation Hamiltonian x H0.

/// Throws DomainError unless H0, H1(t) and L commute pairwise (sampled on [0, T]).
CollisionSpec build_dephasing(const Operator& h0, std::function<Operator(double)> h1,
                              const Operator& jump, double gamma, double total_time,
                              const Ket& psi, double x);

/// Two-outcome exact channel of commuting dephasing lumped over the whole record:
///   nojump: e^{-ixH0T} e^{-L2 T/2},  jump: e^{-ixH0T} (1 - e^{-L2 T})^{1/2}.
/// Only "nojump" is retained.
ChannelFamily dephasing_channel(const Operator& h0, const Operator& l2, double total_time);

// ---------------------------------------------------------------------------
// Seeded random instances.

Operator random_hermitian(Eigen::Index dim, std::mt19937_64& rng);
Operator haar_unitary(Eigen::Index dim, std::mt19937_64& rng);
Ket random_ket(Eigen::Index dim, std::mt19937_64& rng);

/// Columns of a Haar unitary on dim * n_outcomes.
MeasurementChannel random_channel(Eigen::Index dim, int n_outcomes, std::uint64_t seed);

/// Dilation U(x) = U0 exp(-i x H) with random U0 and Hermitian H.
ChannelFamily random_family(Eigen::Index dim, int n_outcomes, std::uint64_t seed);

/// Naimark POVM E_mu = K_mu^† K_mu from a Haar unitary.
std::vector<Operator> random_povm(Eigen::Index dim, int n_elements, std::mt19937_64& rng);

}  // namespace qfi
