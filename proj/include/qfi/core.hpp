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

#include <complex>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qfi {

template <typename Scalar>
using KetT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using OperatorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using Complex = std::complex<double>;
using Ket = KetT<double>;
using Operator = OperatorT<double>;
using RealVector = Eigen::VectorXd;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together (or a Ket was given where an Operator was expected).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical precondition does not hold (non-Hermitian input, non-orthonormal basis, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kNormalizationTol = 1e-12;
inline constexpr double kExactTol = 1e-10;

namespace ops {

Operator identity(Eigen::Index dim);
Operator pauli_x();
Operator pauli_y();
Operator pauli_z();
Ket basis(Eigen::Index dim, Eigen::Index k);
/// (|0> + |1>)/sqrt(2)
Ket plus_x();
/// (|0> - |1>)/sqrt(2)
Ket minus_x();
Operator projector(const Ket& v);

}  // namespace ops

// ---------------------------------------------------------------------------
// Matrix helpers

/// Largest singular value.
double spectral_norm(const Operator& a);

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Operator& a, double tol = kExactTol);
bool is_unitary(const Operator& a, double tol = kExactTol);
bool is_psd(const Operator& a, double tol = kExactTol);
bool is_normalized(const Ket& psi, double tol = kNormalizationTol);

Operator commutator(const Operator& a, const Operator& b);

/// Dense matrix exponential e^a.
Operator expm(const Operator& a);

/// Matrix exponential together with its directional derivative:
/// returns (e^a, d/ds e^{a + s da} at s = 0).
std::pair<Operator, Operator> expm_with_derivative(const Operator& a, const Operator& da);

struct HermitianEig {
  RealVector values;  // ascending
  Operator vectors;   // columns are eigenvectors
};

/// Eigendecomposition A = V diag(values) V^† of a Hermitian operator.
/// Throws DomainError when ||A - A^†|| exceeds 1e-10 (scaled by max(1, ||A||)).
HermitianEig hermitian_eig(const Operator& a);

/// f(A) for Hermitian A through its eigendecomposition.
Operator hermitian_function(const Operator& a, const std::function<double(double)>& f);

/// Kronecker product. Both operands must be of the same kind: two column vectors
/// (Kets) or two square matrices (Operators).
template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> tensor(
    const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const bool a_ket = a.cols() == 1 && a.rows() > 1;
  const bool b_ket = b.cols() == 1 && b.rows() > 1;
  const bool a_op = a.rows() == a.cols();
  const bool b_op = b.rows() == b.cols();
  if (!((a_ket && b_ket) || (a_op && b_op && !a_ket && !b_ket))) {
    throw DimensionError("tensor: operands must both be kets or both be square operators");
  }
  Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                        a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Ket tensor_ket(const Ket& a, const Ket& b) { return tensor(a, b); }

// ---------------------------------------------------------------------------
// Channels

struct KrausOperator {
  std::string label;
  Operator op;
};

enum class Completeness { exact, approximate };

/// Labeled Kraus set {M_w} with a retained / discarded partition of the outcomes.
class MeasurementChannel {
 public:
  /// Retained defaults to every label when `retained` is empty.
  /// Throws DimensionError on mixed dimensions, DomainError on duplicate labels or
  /// retained labels that are not outcomes.
  MeasurementChannel(std::vector<KrausOperator> kraus, std::set<std::string> retained = {},
                     Completeness declared = Completeness::exact);

  const std::vector<KrausOperator>& kraus() const { return kraus_; }
  const KrausOperator& operator[](std::size_t i) const { return kraus_[i]; }
  std::size_t size() const { return kraus_.size(); }
  Eigen::Index dim() const { return dim_; }

  const std::set<std::string>& retained() const { return retained_; }
  bool is_retained(std::string_view label) const;
  std::vector<std::string> labels() const;

  /// ||sum_w M_w^† M_w - 1|| in spectral norm.
  double completeness_residual() const { return residual_; }
  /// Declared exact and residual <= 1e-10.
  bool exact() const { return declared_ == Completeness::exact && residual_ <= kExactTol; }

  MeasurementChannel with_retained(std::set<std::string> retained) const;

 private:
  std::vector<KrausOperator> kraus_;
  std::set<std::string> retained_;
  Completeness declared_;
  Eigen::Index dim_ = 0;
  double residual_ = 0.0;
};

/// dM_w/dx, aligned index-by-index with MeasurementChannel::kraus().
using KrausDerivatives = std::vector<Operator>;

/// Smooth map x -> MeasurementChannel. Labels and the retained set must not depend on x.
class ChannelFamily {
 public:
  using Evaluator = std::function<MeasurementChannel(double)>;
  using Differentiator = std::function<KrausDerivatives(double)>;

  explicit ChannelFamily(Evaluator eval, Differentiator analytic = {})
      : eval_(std::move(eval)), analytic_(std::move(analytic)) {}

  MeasurementChannel operator()(double x) const { return eval_(x); }
  bool has_analytic_derivative() const { return static_cast<bool>(analytic_); }
  KrausDerivatives analytic_derivative(double x) const;

  /// Family with every Kraus operator multiplied by e^{i theta(x)}.
  ChannelFamily rephased(std::function<double(double)> theta,
                         std::function<double(double)> dtheta) const;

 private:
  Evaluator eval_;
  Differentiator analytic_;
};

/// M_w = (1 ⊗ <pi_w|) U_SE (1 ⊗ |phi_i>) for a system ⊗ environment ordering.
std::vector<Operator> dilation_contract(const Operator& u_se, const Ket& env_initial,
                                        const std::vector<Ket>& env_basis);

/// Kraus operators of a Stinespring dilation. Labels default to "1", "2", ...
/// Throws DomainError for a non-orthonormal (or incomplete) basis and DimensionError
/// when U_SE does not act on dim_S * dim_E.
MeasurementChannel kraus_from_dilation(const Operator& u_se, const Ket& env_initial,
                                       const std::vector<Ket>& env_basis,
                                       std::vector<std::string> labels = {},
                                       std::set<std::string> retained = {});

struct OutcomeState {
  Ket state;  // M|psi>, unnormalized
  double probability;
};

OutcomeState apply_channel_outcome(const Operator& m, const Ket& psi);

/// rho = sum_w M_w |psi><psi| M_w^†
Operator mixed_state(const MeasurementChannel& channel, const Ket& psi);

/// d rho / dx for rho = sum_w M_w |psi><psi| M_w^†.
Operator mixed_state_derivative(const MeasurementChannel& channel, const KrausDerivatives& dm,
                                const Ket& psi);

void require_same_dim(const MeasurementChannel& channel, const KrausDerivatives& dm,
                      const Ket& psi);

}  // namespace qfi
