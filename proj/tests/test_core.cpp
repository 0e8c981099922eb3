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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qfi/core.hpp"

using namespace qfi;
using qfi::testing::Gen;
using qfi::testing::Mat;
using qfi::testing::Vec;

namespace {

Mat taylor_exp(const Mat& a) {
  Mat term = Mat::Identity(a.rows(), a.cols());
  Mat sum = term;
  for (int k = 1; k < 60; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("pauli presets satisfy the algebra") {
  const Operator x = ops::pauli_x(), y = ops::pauli_y(), z = ops::pauli_z();
  CHECK((x * y - Complex(0, 1) * z).norm() < 1e-15);
  CHECK((x * x - ops::identity(2)).norm() < 1e-15);
  CHECK(is_hermitian(y));
  CHECK(is_unitary(z));
  CHECK(std::abs(ops::plus_x().dot(ops::minus_x())) < 1e-15);
  CHECK((ops::projector(ops::basis(3, 1)) * ops::basis(3, 1) - ops::basis(3, 1)).norm() < 1e-15);
  CHECK_THROWS_AS(ops::basis(2, 2), DimensionError);
}

TEST_CASE("spectral norm matches the largest singular value") {
  Gen gen(11);
  for (int k = 0; k < 5; ++k) {
    const Mat a = gen.gaussian(3, 3);
    CHECK(spectral_norm(a) == doctest::Approx(Eigen::JacobiSVD<Mat>(a).singularValues()(0)).epsilon(1e-12));
  }
}

TEST_CASE("predicates") {
  CHECK(is_psd(ops::projector(ops::plus_x())));
  CHECK_FALSE(is_psd(ops::pauli_z()));
  CHECK_FALSE(is_hermitian(Complex(0, 1) * ops::pauli_z()));
  CHECK_FALSE(is_unitary(2.0 * ops::identity(2)));
  CHECK(is_normalized(ops::plus_x()));
  CHECK_FALSE(is_normalized(Ket(2.0 * ops::plus_x())));
  CHECK(hermiticity_defect(ops::pauli_y()) == 0.0);
}

TEST_CASE("commutator of pauli matrices") {
  CHECK((commutator(ops::pauli_x(), ops::pauli_y()) - Complex(0, 2) * ops::pauli_z()).norm() < 1e-15);
}

TEST_CASE("expm agrees with a long Taylor series") {
  Gen gen(3);
  for (int k = 0; k < 5; ++k) {
    const Mat a = 0.5 * gen.gaussian(4, 4);
    CHECK((expm(a) - taylor_exp(a)).norm() < 1e-12);
  }
}

TEST_CASE("expm derivative agrees with central differences") {
  Gen gen(5);
  const Mat a = Complex(0, -1) * gen.hermitian(3);
  const Mat da = Complex(0, -1) * gen.hermitian(3);
  const auto [e, de] = expm_with_derivative(a, da);
  const double h = 1e-5;
  const Mat fd = (taylor_exp(a + h * da) - taylor_exp(a - h * da)) / (2 * h);
  CHECK((e - taylor_exp(a)).norm() < 1e-12);
  CHECK((de - fd).norm() < 1e-8);
}

TEST_CASE("hermitian eigendecomposition and functions") {
  Gen gen(7);
  const Mat a = gen.hermitian(4);
  const HermitianEig eig = hermitian_eig(a);
  for (Eigen::Index k = 1; k < eig.values.size(); ++k) CHECK(eig.values(k - 1) <= eig.values(k));
  CHECK((eig.vectors * eig.values.cast<Complex>().asDiagonal() * eig.vectors.adjoint() - a).norm() <
        1e-12);
  const Operator sq = hermitian_function(a, [](double v) { return v * v; });
  CHECK((sq - a * a).norm() < 1e-12);
  CHECK_THROWS_AS(hermitian_eig(Complex(0, 1) * ops::pauli_z()), DomainError);
}

TEST_CASE("tensor product ordering") {
  const Ket k = tensor_ket(ops::basis(2, 1), ops::basis(3, 2));
  CHECK(k.size() == 6);
  CHECK(std::abs(k(1 * 3 + 2) - 1.0) < 1e-15);
  const Operator zx = tensor(ops::pauli_z(), ops::pauli_x());
  CHECK(zx.rows() == 4);
  CHECK(std::abs(zx(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(zx(2, 3) + 1.0) < 1e-15);
  CHECK_THROWS_AS(tensor(ops::pauli_z(), ops::basis(2, 0)), DimensionError);
}

TEST_CASE("measurement channel validation") {
  const Operator p0 = ops::projector(ops::basis(2, 0));
  const Operator p1 = ops::projector(ops::basis(2, 1));

  SUBCASE("retained defaults to every outcome") {
    MeasurementChannel c({{"a", p0}, {"b", p1}});
    CHECK(c.retained() == std::set<std::string>{"a", "b"});
    CHECK(c.exact());
    CHECK(c.labels() == std::vector<std::string>{"a", "b"});
  }
  SUBCASE("with_retained keeps operators") {
    MeasurementChannel c({{"a", p0}, {"b", p1}});
    const MeasurementChannel r = c.with_retained({"b"});
    CHECK(r.is_retained("b"));
    CHECK_FALSE(r.is_retained("a"));
    CHECK(r.size() == 2);
  }
  SUBCASE("incomplete channels are not exact") {
    MeasurementChannel c({{"a", p0}});
    CHECK_FALSE(c.exact());
    CHECK(c.completeness_residual() == doctest::Approx(1.0));
  }
  SUBCASE("declared approximate channels are not exact") {
    MeasurementChannel c({{"a", p0}, {"b", p1}}, {}, Completeness::approximate);
    CHECK_FALSE(c.exact());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(MeasurementChannel({{"a", p0}, {"a", p1}}), DomainError);
    CHECK_THROWS_AS(MeasurementChannel({{"a", p0}, {"b", p1}}, {"c"}), DomainError);
    CHECK_THROWS_AS(MeasurementChannel({{"a", p0}, {"b", ops::identity(3)}}), DimensionError);
    CHECK_THROWS_AS(MeasurementChannel({}), DimensionError);
  }
}

TEST_CASE("completeness residual agrees with the direct Kraus sum") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Gen gen(seed);
    std::vector<Mat> ms;
    std::vector<KrausOperator> kraus;
    for (int w = 0; w < 3; ++w) {
      ms.push_back(0.6 * gen.gaussian(3, 3));
      kraus.push_back({std::to_string(w), ms.back()});
    }
    MeasurementChannel c(kraus, {}, Completeness::approximate);
    CHECK(c.completeness_residual() ==
          doctest::Approx(qfi::testing::kraus_sum_residual(ms)).epsilon(1e-10));
  }
}

TEST_CASE("channel family rephasing") {
  Gen gen(13);
  const auto fam = qfi::testing::dilated_family(gen, 2, 2).family();
  CHECK(fam.has_analytic_derivative());
  const double x = 0.3;
  const ChannelFamily rp = fam.rephased([](double y) { return 2 * y; }, [](double) { return 2.0; });
  const MeasurementChannel a = fam(x), b = rp(x);
  const KrausDerivatives da = fam.analytic_derivative(x), db = rp.analytic_derivative(x);
  const Complex phase = std::exp(Complex(0, 2 * x));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((b[i].op - phase * a[i].op).norm() < 1e-14);
    CHECK((db[i] - (phase * da[i] + Complex(0, 2) * phase * a[i].op)).norm() < 1e-13);
  }
  ChannelFamily bare([&](double y) { return fam(y); });
  CHECK_FALSE(bare.has_analytic_derivative());
  CHECK_THROWS_AS(bare.analytic_derivative(x), Error);
}

TEST_CASE("dilation produces complete Kraus operators") {
  Gen gen(17);
  const Mat u = gen.unitary(6);  // system 3 ⊗ environment 2
  const Ket env0 = ops::basis(2, 0);
  const std::vector<Ket> basis = {ops::plus_x(), ops::minus_x()};
  const MeasurementChannel c = kraus_from_dilation(u, env0, basis);
  CHECK(c.dim() == 3);
  CHECK(c.exact());
  // Direct matrix elements: M_w(i, j) = <i, w| U |j, 0>.
  const auto ms = dilation_contract(u, env0, basis);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Complex direct = tensor_ket(ops::basis(3, i), basis[1]).dot(u * tensor_ket(ops::basis(3, j), env0));
      CHECK(std::abs(ms[1](i, j) - direct) < 1e-14);
    }
  }
  CHECK_THROWS_AS(dilation_contract(gen.unitary(5), env0, basis), DimensionError);
}

TEST_CASE("outcome states and mixed states") {
  const MeasurementChannel c({{"0", ops::projector(ops::basis(2, 0))},
                              {"1", ops::projector(ops::basis(2, 1))}});
  const OutcomeState s = apply_channel_outcome(c[0].op, ops::plus_x());
  CHECK(s.probability == doctest::Approx(0.5));
  const Operator rho = mixed_state(c, ops::plus_x());
  CHECK((rho - 0.5 * ops::identity(2)).norm() < 1e-15);
  const KrausDerivatives dm = {Operator::Zero(2, 2), Operator::Zero(2, 2)};
  CHECK(mixed_state_derivative(c, dm, ops::plus_x()).norm() == 0.0);
  CHECK_THROWS_AS(require_same_dim(c, {Operator::Zero(2, 2)}, ops::plus_x()), DimensionError);
  CHECK_THROWS_AS(require_same_dim(c, dm, ops::basis(3, 0)), DimensionError);
}
