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

#include "qfi/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "qfi/encoding.hpp"

namespace qfi {

namespace {

constexpr double kVarianceFloor = 1e-14;

std::vector<Ket> standard_basis(Eigen::Index dim) {
  std::vector<Ket> out;
  for (Eigen::Index k = 0; k < dim; ++k) out.push_back(ops::basis(dim, k));
  return out;
}

/// Extends an orthonormal set to a basis of the whole space.
std::vector<Ket> complete_basis(std::vector<Ket> basis, Eigen::Index dim) {
  for (Eigen::Index k = 0; k < dim && static_cast<Eigen::Index>(basis.size()) < dim; ++k) {
    Ket v = ops::basis(dim, k);
    for (const Ket& b : basis) v -= b.dot(v) * b;
    if (v.norm() > 1e-8) basis.push_back(v.normalized());
  }
  return basis;
}

/// exp(-i s H) from an eigendecomposition, and its derivative in s.
struct Evolution {
  HermitianEig eig;

  Operator at(double s) const {
    const Eigen::VectorXcd phases =
        eig.values.unaryExpr([s](double l) { return std::polar(1.0, -s * l); }).eval();
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
  }
  Operator derivative(double s) const {
    const Eigen::VectorXcd phases =
        eig.values.unaryExpr([s](double l) { return Complex(0, -l) * std::polar(1.0, -s * l); })
            .eval();
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
  }
};

std::vector<std::string> numbered_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i + 1));
  return out;
}

void require_commute(const Operator& a, const Operator& b, const char* what) {
  if (commutator(a, b).cwiseAbs().maxCoeff() > kExactTol) {
    throw DomainError(std::string("dephasing: ") + what + " do not commute");
  }
}

Eigen::VectorXcd complex_normal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v;
}

struct Parts {
  double expected_iq = 0.0;
  Operator h0_shifted;
  Ket env_perp;
  Operator interaction;
  std::vector<Ket> env_basis;
  double weak_signal_residual = 0.0;
};

}  // namespace

Transducer build_transducer(const TransducerSpec& spec, std::set<std::string> retained) {
  const Eigen::Index de = spec.env_initial.size();
  const Eigen::Index ds = spec.sys_initial.size();
  if (spec.h0_env.rows() != de || spec.h0_env.cols() != de) {
    throw DimensionError("transducer: H0 does not act on the environment");
  }
  if (spec.flip.rows() != ds || spec.flip.cols() != ds) {
    throw DimensionError("transducer: flip does not act on the system");
  }
  if (!is_hermitian(spec.h0_env)) throw DomainError("transducer: H0 is not Hermitian");
  if (!is_unitary(spec.flip)) throw DomainError("transducer: flip is not unitary");
  if (!is_normalized(spec.env_initial, kExactTol) || !is_normalized(spec.sys_initial, kExactTol)) {
    throw DomainError("transducer: initial states must be normalized");
  }
  if (std::abs(spec.sys_initial.dot(spec.flip * spec.sys_initial)) > kExactTol) {
    throw DomainError("transducer: flip does not map |psi> to an orthogonal state");
  }
  if (!std::isfinite(spec.eps)) throw DomainError("transducer: eps must be finite");

  Parts out;
  const Ket& phi = spec.env_initial;
  const double mean = phi.dot(spec.h0_env * phi).real();
  out.h0_shifted = spec.h0_env - mean * Operator::Identity(de, de);
  const Ket h_phi = out.h0_shifted * phi;
  const double var = h_phi.squaredNorm();
  if (var <= kVarianceFloor) throw DomainError("transducer: H0 has no variance in |phi>");
  out.env_perp = h_phi / std::sqrt(var);
  out.expected_iq = 4.0 * spec.total_time * spec.total_time * var;

  const Operator perp = ops::projector(out.env_perp);
  const Operator id_e = Operator::Identity(de, de);
  out.interaction = tensor(Operator::Identity(ds, ds), Operator(id_e - perp)) + tensor(spec.flip, perp);

  const double norm = std::sqrt(1.0 + spec.eps * spec.eps);
  out.env_basis = complete_basis({(phi + spec.eps * out.env_perp) / norm,
                                  (out.env_perp - spec.eps * phi) / norm},
                                 de);

  const Ket start = tensor_ket(spec.sys_initial, phi);
  const Ket start_perp = tensor_ket(spec.sys_initial, out.env_perp);
  const Ket a = out.interaction * start;
  const Ket b = out.interaction * start_perp;
  for (const Ket& pi : out.env_basis) {
    const Operator proj = tensor(Operator::Identity(ds, ds), ops::projector(pi));
    out.weak_signal_residual = std::max(out.weak_signal_residual, std::abs(a.dot(proj * b)));
  }
  if (out.weak_signal_residual > kExactTol) {
    throw DomainError("transducer: weak-signal condition fails");
  }

  const Evolution evo{hermitian_eig(tensor(Operator::Identity(ds, ds), out.h0_shifted))};
  const Operator ui = out.interaction;
  const std::vector<Ket> basis = out.env_basis;
  const double t = spec.total_time;
  const auto labels = numbered_labels(basis.size());
  ChannelFamily family(
      [=](double x) {
        return kraus_from_dilation(ui * evo.at(x * t), phi, basis, labels, retained);
      },
      [=](double x) {
        return dilation_contract(ui * (t * evo.derivative(x * t)), phi, basis);
      });
  return {std::move(family), out.expected_iq, out.h0_shifted, out.env_perp, out.interaction,
          out.env_basis, out.weak_signal_residual};
}

TransducerSpec two_qubit_transducer(double eps, double x, double total_time) {
  TransducerSpec s;
  s.h0_env = ops::pauli_z();
  s.env_initial = ops::plus_x();
  s.sys_initial = ops::basis(2, 0);
  s.flip = ops::pauli_x();
  s.total_time = total_time;
  s.x = x;
  s.eps = eps;
  return s;
}

std::vector<Fig1bRow> fig1b_sweep(const TransducerSpec& spec, const std::vector<double>& eps_grid) {
  std::vector<Fig1bRow> rows;
  rows.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    TransducerSpec s = spec;
    s.eps = eps;
    const Transducer tr = build_transducer(s);
    const MeasurementChannel channel = tr.family(s.x);
    const KrausDerivatives dm = tr.family.analytic_derivative(s.x);
    const AmplificationReport amp = amplification_report(channel, dm, s.sys_initial);
    Fig1bRow r;
    r.eps = eps;
    r.p1 = amp.entries.at(0).probability;
    r.p2 = amp.entries.at(1).probability;
    r.i_sigma_1 = amp.entries[0].conditional_qfi;
    r.i_sigma_2 = amp.entries[1].conditional_qfi;
    r.avg_total = amp.avg_qfi;
    r.sum_total = amp.sum_qfi;
    r.i_q = amp.i_q;
    r.theorem1_residual = check_lossless_perp(channel, dm, s.sys_initial, 0.0).worst;
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> log_grid(double a, double b, int n) {
  if (n < 1) throw DomainError("grid needs at least one point");
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log grid bounds must be positive");
  std::vector<double> out(n);
  const double la = std::log10(a), lb = std::log10(b);
  for (int i = 0; i < n; ++i) {
    out[i] = n == 1 ? a : std::pow(10.0, la + (lb - la) * i / (n - 1));
  }
  if (n > 1) out.back() = b;
  out.front() = a;
  return out;
}

std::vector<double> lin_grid(double a, double b, int n) {
  if (n < 1) throw DomainError("grid needs at least one point");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  if (n > 1) out.back() = b;
  return out;
}

std::vector<double> default_eps_grid() { return log_grid(1e-3, 1e3, 41); }

CollisionSpec build_dephasing(const Operator& h0, std::function<Operator(double)> h1,
                              const Operator& jump, double gamma, double total_time,
                              const Ket& psi, double x) {
  const Eigen::Index d = h0.rows();
  if (h0.cols() != d || jump.rows() != d || jump.cols() != d || psi.size() != d) {
    throw DimensionError("dephasing: operator dimensions disagree");
  }
  if (!is_hermitian(h0)) throw DomainError("dephasing: H0 is not Hermitian");
  if (!std::isfinite(gamma) || gamma < 0.0) throw DomainError("dephasing: gamma must be >= 0");
  if (!std::isfinite(total_time) || total_time < 0.0) throw DomainError("dephasing: T must be >= 0");
  if (!std::isfinite(x)) throw DomainError("dephasing: x must be finite");
  if (!is_normalized(psi, kExactTol)) throw DomainError("dephasing: psi is not normalized");
  require_commute(h0, jump, "H0 and L");
  if (h1) {
    for (double t : {0.0, total_time / 2.0, total_time}) {
      const Operator h1t = h1(t);
      if (h1t.rows() != d || h1t.cols() != d) throw DimensionError("dephasing: H1 has wrong size");
      require_commute(h0, h1t, "H0 and H1");
      require_commute(h1t, jump, "H1 and L");
    }
  }
  CollisionSpec spec;
  spec.dim = d;
  spec.h0 = [h0](double, double xx) { return Operator(xx * h0); };
  spec.dh0 = [h0](double, double) { return h0; };
  spec.h1 = std::move(h1);
  spec.jumps.push_back({jump, [gamma](double) { return gamma; }});
  return spec;
}

ChannelFamily dephasing_channel(const Operator& h0, const Operator& l2, double total_time) {
  if (h0.rows() != l2.rows() || h0.cols() != l2.cols()) {
    throw DimensionError("dephasing: operator dimensions disagree");
  }
  if (!is_psd(l2)) throw DomainError("dephasing: rate operator is not positive semidefinite");
  require_commute(h0, l2, "H0 and L^2");
  const double t = total_time;
  const Operator survive = hermitian_function(l2, [t](double l) { return std::exp(-l * t / 2.0); });
  const Operator decay = hermitian_function(
      l2, [t](double l) { return std::sqrt(std::max(0.0, -std::expm1(-l * t))); });
  const Evolution evo{hermitian_eig(h0)};
  return ChannelFamily(
      [=](double x) {
        const Operator u = evo.at(x * t);
        return MeasurementChannel({{kNoJumpLabel, u * survive}, {"jump", u * decay}},
                                  {kNoJumpLabel});
      },
      [=](double x) {
        const Operator du = t * evo.derivative(x * t);
        return KrausDerivatives{du * survive, du * decay};
      });
}

Operator random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
  Operator g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) g.col(j) = complex_normal(dim, rng);
  return (g + g.adjoint()) / 2.0;
}

Operator haar_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  Operator g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) g.col(j) = complex_normal(dim, rng) / std::sqrt(2.0);
  Eigen::HouseholderQR<Operator> qr(g);
  Operator q = qr.householderQ();
  const Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

Ket random_ket(Eigen::Index dim, std::mt19937_64& rng) { return complex_normal(dim, rng).normalized(); }

MeasurementChannel random_channel(Eigen::Index dim, int n_outcomes, std::uint64_t seed) {
  if (dim < 2 || n_outcomes < 1) throw DomainError("random_channel: need dim >= 2, n >= 1");
  std::mt19937_64 rng(seed);
  const Operator u = haar_unitary(dim * n_outcomes, rng);
  return kraus_from_dilation(u, ops::basis(n_outcomes, 0), standard_basis(n_outcomes));
}

ChannelFamily random_family(Eigen::Index dim, int n_outcomes, std::uint64_t seed) {
  if (dim < 2 || n_outcomes < 1) throw DomainError("random_family: need dim >= 2, n >= 1");
  std::mt19937_64 rng(seed);
  const Operator u0 = haar_unitary(dim * n_outcomes, rng);
  const Evolution evo{hermitian_eig(random_hermitian(dim * n_outcomes, rng))};
  const Ket env = ops::basis(n_outcomes, 0);
  const std::vector<Ket> basis = standard_basis(n_outcomes);
  return ChannelFamily(
      [=](double x) { return kraus_from_dilation(u0 * evo.at(x), env, basis); },
      [=](double x) { return dilation_contract(u0 * evo.derivative(x), env, basis); });
}

std::vector<Operator> random_povm(Eigen::Index dim, int n_elements, std::mt19937_64& rng) {
  if (dim < 1 || n_elements < 1) throw DomainError("random_povm: need dim, n >= 1");
  const Operator u = haar_unitary(dim * n_elements, rng);
  std::vector<Operator> out;
  for (const Operator& k :
       dilation_contract(u, ops::basis(n_elements, 0), standard_basis(n_elements))) {
    const Operator e = k.adjoint() * k;
    out.push_back((e + e.adjoint()) / 2.0);
  }
  return out;
}

}  // namespace qfi
