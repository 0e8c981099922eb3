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

#include "qfi/core.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace qfi {

namespace ops {

Operator identity(Eigen::Index dim) { return Operator::Identity(dim, dim); }

Operator pauli_x() {
  Operator s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

Operator pauli_y() {
  Operator s(2, 2);
  s << 0, Complex(0, -1), Complex(0, 1), 0;
  return s;
}

Operator pauli_z() {
  Operator s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

Ket basis(Eigen::Index dim, Eigen::Index k) {
  if (k < 0 || k >= dim) throw DimensionError("basis: index out of range");
  Ket v = Ket::Zero(dim);
  v(k) = 1.0;
  return v;
}

Ket plus_x() { return (basis(2, 0) + basis(2, 1)) / std::sqrt(2.0); }
Ket minus_x() { return (basis(2, 0) - basis(2, 1)) / std::sqrt(2.0); }

Operator projector(const Ket& v) { return v * v.adjoint(); }

}  // namespace ops

double spectral_norm(const Operator& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Operator> svd(a);
  return svd.singularValues()(0);
}

bool is_hermitian(const Operator& a, double tol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

bool is_unitary(const Operator& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return spectral_norm(a.adjoint() * a - Operator::Identity(a.rows(), a.cols())) <= tol;
}

bool is_psd(const Operator& a, double tol) {
  if (!is_hermitian(a, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Operator> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

bool is_normalized(const Ket& psi, double tol) {
  return std::abs(psi.squaredNorm() - 1.0) <= tol;
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator expm(const Operator& a) { return a.exp(); }

std::pair<Operator, Operator> expm_with_derivative(const Operator& a, const Operator& da) {
  // exp([[A, dA], [0, A]]) = [[e^A, D e^A[dA]], [0, e^A]]
  const Eigen::Index n = a.rows();
  Operator block = Operator::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.topRightCorner(n, n) = da;
  block.bottomRightCorner(n, n) = a;
  const Operator e = block.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

HermitianEig hermitian_eig(const Operator& a) {
  if (a.rows() != a.cols()) throw DimensionError("hermitian_eig: operator is not square");
  const double scale = std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
  if (hermiticity_defect(a) > kExactTol * scale) {
    throw DomainError("hermitian_eig: operator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Operator> es(a);
  if (es.info() != Eigen::Success) throw DomainError("hermitian_eig: solver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

Operator hermitian_function(const Operator& a, const std::function<double(double)>& f) {
  const HermitianEig eig = hermitian_eig(a);
  RealVector fv = eig.values.unaryExpr(f);
  return eig.vectors * fv.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

// ---------------------------------------------------------------------------

MeasurementChannel::MeasurementChannel(std::vector<KrausOperator> kraus,
                                       std::set<std::string> retained, Completeness declared)
    : kraus_(std::move(kraus)), retained_(std::move(retained)), declared_(declared) {
  if (kraus_.empty()) throw DimensionError("channel: no Kraus operators");
  dim_ = kraus_.front().op.rows();
  std::set<std::string> seen;
  Operator sum = Operator::Zero(dim_, dim_);
  for (const auto& k : kraus_) {
    if (k.op.rows() != dim_ || k.op.cols() != dim_) {
      throw DimensionError("channel: Kraus operator '" + k.label + "' has mismatched dimension");
    }
    if (!seen.insert(k.label).second) {
      throw DomainError("channel: duplicate outcome label '" + k.label + "'");
    }
    sum.noalias() += k.op.adjoint() * k.op;
  }
  if (retained_.empty()) {
    retained_ = seen;
  } else {
    for (const auto& r : retained_) {
      if (!seen.count(r)) throw DomainError("channel: retained label '" + r + "' is not an outcome");
    }
  }
  sum -= Operator::Identity(dim_, dim_);
  residual_ = spectral_norm(sum);
}

bool MeasurementChannel::is_retained(std::string_view label) const {
  return retained_.count(std::string(label)) > 0;
}

std::vector<std::string> MeasurementChannel::labels() const {
  std::vector<std::string> out;
  out.reserve(kraus_.size());
  for (const auto& k : kraus_) out.push_back(k.label);
  return out;
}

MeasurementChannel MeasurementChannel::with_retained(std::set<std::string> retained) const {
  return MeasurementChannel(kraus_, std::move(retained), declared_);
}

KrausDerivatives ChannelFamily::analytic_derivative(double x) const {
  if (!analytic_) throw DomainError("channel family has no analytic derivative");
  return analytic_(x);
}

ChannelFamily ChannelFamily::rephased(std::function<double(double)> theta,
                                      std::function<double(double)> dtheta) const {
  auto eval = eval_;
  auto analytic = analytic_;
  Evaluator new_eval = [eval, theta](double x) {
    const MeasurementChannel base = eval(x);
    const Complex phase = std::polar(1.0, theta(x));
    std::vector<KrausOperator> kraus = base.kraus();
    for (auto& k : kraus) k.op *= phase;
    return MeasurementChannel(std::move(kraus), base.retained(),
                              base.exact() ? Completeness::exact : Completeness::approximate);
  };
  Differentiator new_diff;
  if (analytic) {
    new_diff = [eval, analytic, theta, dtheta](double x) {
      const MeasurementChannel base = eval(x);
      KrausDerivatives d = analytic(x);
      const Complex phase = std::polar(1.0, theta(x));
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = phase * (d[i] + Complex(0, dtheta(x)) * base[i].op);
      }
      return d;
    };
  }
  return ChannelFamily(std::move(new_eval), std::move(new_diff));
}

std::vector<Operator> dilation_contract(const Operator& u_se, const Ket& env_initial,
                                        const std::vector<Ket>& env_basis) {
  const Eigen::Index de = env_initial.size();
  if (de == 0 || u_se.rows() != u_se.cols() || u_se.rows() % de != 0) {
    throw DimensionError("dilation: U_SE does not act on dim_S * dim_E");
  }
  const Eigen::Index ds = u_se.rows() / de;
  std::vector<Operator> out;
  out.reserve(env_basis.size());
  for (const Ket& pi : env_basis) {
    if (pi.size() != de) throw DimensionError("dilation: environment basis vector has wrong size");
    Operator m = Operator::Zero(ds, ds);
    // (1 ⊗ <pi|) U (1 ⊗ |phi>): row index (s, e), column index (s', e').
    for (Eigen::Index e = 0; e < de; ++e) {
      if (pi(e) == Complex(0)) continue;
      for (Eigen::Index f = 0; f < de; ++f) {
        if (env_initial(f) == Complex(0)) continue;
        const Complex w = std::conj(pi(e)) * env_initial(f);
        for (Eigen::Index s = 0; s < ds; ++s) {
          for (Eigen::Index t = 0; t < ds; ++t) {
            m(s, t) += w * u_se(s * de + e, t * de + f);
          }
        }
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

MeasurementChannel kraus_from_dilation(const Operator& u_se, const Ket& env_initial,
                                       const std::vector<Ket>& env_basis,
                                       std::vector<std::string> labels,
                                       std::set<std::string> retained) {
  const Eigen::Index de = env_initial.size();
  if (static_cast<Eigen::Index>(env_basis.size()) != de) {
    throw DomainError("dilation: environment basis does not span the environment");
  }
  Operator gram(de, de);
  for (Eigen::Index i = 0; i < de; ++i) {
    if (env_basis[i].size() != de) throw DimensionError("dilation: basis vector has wrong size");
    for (Eigen::Index j = 0; j < de; ++j) gram(i, j) = env_basis[i].dot(env_basis[j]);
  }
  if ((gram - Operator::Identity(de, de)).cwiseAbs().maxCoeff() > kExactTol) {
    throw DomainError("dilation: environment basis is not orthonormal");
  }
  if (!is_normalized(env_initial, kExactTol)) {
    throw DomainError("dilation: environment initial state is not normalized");
  }
  std::vector<Operator> ms = dilation_contract(u_se, env_initial, env_basis);
  if (labels.empty()) {
    for (std::size_t i = 0; i < ms.size(); ++i) labels.push_back(std::to_string(i + 1));
  }
  if (labels.size() != ms.size()) throw DimensionError("dilation: label count mismatch");
  std::vector<KrausOperator> kraus;
  for (std::size_t i = 0; i < ms.size(); ++i) kraus.push_back({labels[i], std::move(ms[i])});
  return MeasurementChannel(std::move(kraus), std::move(retained));
}

OutcomeState apply_channel_outcome(const Operator& m, const Ket& psi) {
  if (m.cols() != psi.size()) throw DimensionError("apply_channel_outcome: dimension mismatch");
  if (!is_normalized(psi, kExactTol)) throw DomainError("apply_channel_outcome: psi not normalized");
  Ket out = m * psi;
  const double p = out.squaredNorm();
  return {std::move(out), p};
}

void require_same_dim(const MeasurementChannel& channel, const KrausDerivatives& dm,
                      const Ket& psi) {
  if (psi.size() != channel.dim()) throw DimensionError("state dimension does not match channel");
  if (dm.size() != channel.size()) throw DimensionError("derivative count does not match channel");
  for (const auto& d : dm) {
    if (d.rows() != channel.dim() || d.cols() != channel.dim()) {
      throw DimensionError("Kraus derivative has mismatched dimension");
    }
  }
}

Operator mixed_state(const MeasurementChannel& channel, const Ket& psi) {
  if (psi.size() != channel.dim()) throw DimensionError("mixed_state: dimension mismatch");
  Operator rho = Operator::Zero(channel.dim(), channel.dim());
  for (const auto& k : channel.kraus()) {
    const Ket v = k.op * psi;
    rho.noalias() += v * v.adjoint();
  }
  // symmetrize away rounding
  return (rho + rho.adjoint()) / 2.0;
}

Operator mixed_state_derivative(const MeasurementChannel& channel, const KrausDerivatives& dm,
                                const Ket& psi) {
  require_same_dim(channel, dm, psi);
  Operator drho = Operator::Zero(channel.dim(), channel.dim());
  for (std::size_t i = 0; i < channel.size(); ++i) {
    const Ket v = channel[i].op * psi;
    const Ket dv = dm[i] * psi;
    drho.noalias() += dv * v.adjoint();
  }
  return drho + drho.adjoint();
}

}  // namespace qfi
