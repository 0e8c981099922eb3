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

// Seeded property tests. Each case draws its instances from testing::Gen so a
// failure is reproducible from the printed seed.

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qfi/collision.hpp"
#include "qfi/encoding.hpp"
#include "qfi/fisher.hpp"
#include "qfi/scenarios.hpp"

using namespace qfi;
namespace t = qfi::testing;

namespace {

constexpr double kSlack = 1e-8;

struct Instance {
  t::DilatedFamily family;
  t::Vec psi;
  double x = 0.0;
};

Instance draw(std::uint64_t seed) {
  t::Gen gen(seed);
  const Eigen::Index d = gen.integer(2, 4);
  const int n = gen.integer(1, 4);
  Instance in{t::dilated_family(gen, d, n), gen.ket(d), gen.uniform(-1.0, 1.0)};
  return in;
}

std::vector<std::set<std::string>> subsets(const std::vector<std::string>& labels) {
  std::vector<std::set<std::string>> out;
  for (unsigned mask = 1; mask < (1u << labels.size()); ++mask) {
    std::set<std::string> s;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (mask & (1u << i)) s.insert(labels[i]);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("property: information chain I^Q >= I(sigma_SE) >= I(rho)") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Instance in = draw(seed);
    const MeasurementChannel c = in.family.channel(in.x);
    const auto dm = in.family.derivative(in.x);
    const double iq = total_qfi(efg(c, dm, in.psi));
    const double se = sigma_se_qfi(c, dm, in.psi).total;
    const double mixed = mixed_qfi(c, dm, in.psi);
    CAPTURE(seed);
    CHECK(se <= iq + kSlack);
    CHECK(mixed <= se + kSlack);
  }
}

TEST_CASE("property: post-selection never exceeds I^Q") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Instance in = draw(100 + seed);
    const auto dm = in.family.derivative(in.x);
    for (const auto& retained : subsets(in.family.labels())) {
      const EfgReport r = analyze(in.family.channel(in.x, retained), dm, in.psi);
      CAPTURE(seed);
      CHECK(r.avg_ps_qfi <= r.i_q + kSlack);
      CHECK(r.kappa >= -kSlack);
    }
  }
}

TEST_CASE("property: quantities are invariant under x-dependent global phases") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    t::Gen gen(200 + seed);
    const Instance in = draw(300 + seed);
    const double a = gen.uniform(-5, 5), b = gen.uniform(-2, 2);
    const ChannelFamily base = in.family.family({"1"});
    const ChannelFamily phased = base.rephased([=](double y) { return a * y + b * y * y; },
                                               [=](double y) { return a + 2 * b * y; });
    const EfgReport r0 = analyze(base(in.x), base.analytic_derivative(in.x), in.psi);
    const EfgReport r1 = analyze(phased(in.x), phased.analytic_derivative(in.x), in.psi);
    CAPTURE(seed);
    CHECK(t::relative_gap(r0.i_q, r1.i_q, 1e-12) < 1e-8);
    CHECK(t::relative_gap(r0.avg_ps_qfi, r1.avg_ps_qfi, 1e-12) < 1e-8);
    const auto s0 = sigma_se_qfi(base(in.x), base.analytic_derivative(in.x), in.psi);
    const auto s1 = sigma_se_qfi(phased(in.x), phased.analytic_derivative(in.x), in.psi);
    for (std::size_t w = 0; w < s0.outcomes.size(); ++w) {
      CHECK(t::relative_gap(s0.outcomes[w].conditional_qfi, s1.outcomes[w].conditional_qfi, 1e-12) <
            1e-8);
    }
  }
}

TEST_CASE("property: a fixed unitary after the channel changes nothing") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    t::Gen gen(400 + seed);
    const Instance in = draw(500 + seed);
    const t::Mat v = gen.unitary(in.family.dim);
    const MeasurementChannel c = in.family.channel(in.x);
    const auto dm = in.family.derivative(in.x);
    std::vector<KrausOperator> ops;
    KrausDerivatives vdm;
    for (std::size_t i = 0; i < c.size(); ++i) {
      ops.push_back({c[i].label, v * c[i].op});
      vdm.push_back(v * dm[i]);
    }
    const MeasurementChannel vc(ops);
    CAPTURE(seed);
    CHECK(t::relative_gap(total_qfi(efg(c, dm, in.psi)), total_qfi(efg(vc, vdm, in.psi)), 1e-12) < 1e-10);
    CHECK(t::relative_gap(mixed_qfi(c, dm, in.psi), mixed_qfi(vc, vdm, in.psi), 1e-12) < 1e-7);
    CHECK(t::relative_gap(sigma_se_qfi(c, dm, in.psi).total, sigma_se_qfi(vc, vdm, in.psi).total, 1e-12) <
          1e-10);
  }
}

TEST_CASE("property: outcome order does not matter") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance in = draw(600 + seed);
    const MeasurementChannel c = in.family.channel(in.x);
    const auto dm = in.family.derivative(in.x);
    std::vector<KrausOperator> ops(c.kraus().rbegin(), c.kraus().rend());
    KrausDerivatives rdm(dm.rbegin(), dm.rend());
    const MeasurementChannel rc(ops);
    const EfgReport a = analyze(c, dm, in.psi), b = analyze(rc, rdm, in.psi);
    CAPTURE(seed);
    CHECK(a.i_q == doctest::Approx(b.i_q).epsilon(1e-12));
    CHECK(a.avg_ps_qfi == doctest::Approx(b.avg_ps_qfi).epsilon(1e-12));
  }
}

TEST_CASE("property: SLD is Hermitian and solves its defining equation") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance in = draw(700 + seed);
    const MeasurementChannel c = in.family.channel(in.x);
    const auto dm = in.family.derivative(in.x);
    const Operator rho = mixed_state(c, in.psi);
    const Operator drho = mixed_state_derivative(c, dm, in.psi);
    const SldResult r = sld(rho, drho);
    CAPTURE(seed);
    CHECK(hermiticity_defect(r.sld) < 1e-10);
    // Only the support of rho is constrained; project onto it.
    const HermitianEig eig = hermitian_eig(rho);
    Operator p = Operator::Zero(rho.rows(), rho.cols());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k)
      if (eig.values(k) > 1e-8) p += ops::projector(eig.vectors.col(k));
    const Operator lhs = (r.sld * rho + rho * r.sld) / 2.0;
    CHECK((p * (lhs - drho) * p).norm() < 1e-6);
  }
}

TEST_CASE("property: classical information of any POVM is below I(rho)") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(800 + seed);
    const Instance in = draw(900 + seed);
    const auto povm = random_povm(in.family.dim, 3, rng);
    const ConvexityReport r =
        refined_convexity_check(in.family.channel(in.x), in.family.derivative(in.x), in.psi, povm);
    double classical = 0.0, mixed = 0.0;
    for (const auto& term : r.terms) {
      classical += term.classical;
      mixed += term.mixed;
      CHECK(term.lower_holds);
    }
    CAPTURE(seed);
    CHECK(classical <= mixed + kSlack);
  }
}

TEST_CASE("property: perpendicular-gauge pass implies no loss") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    t::Gen gen(1000 + seed);
    const Eigen::Index de = gen.integer(2, 4);
    TransducerSpec spec;
    spec.h0_env = gen.hermitian(de);
    spec.env_initial = gen.ket(de);
    spec.sys_initial = ops::basis(2, 0);
    spec.flip = ops::pauli_x();
    spec.total_time = gen.uniform(0.2, 2.0);
    spec.x = 0.0;
    spec.eps = std::pow(10.0, gen.uniform(-2, 2));
    const Transducer tr = build_transducer(spec);
    const MeasurementChannel c = tr.family(0.0);
    const auto dm = tr.family.analytic_derivative(0.0);
    const PerpVerdict v = check_lossless_perp(c, dm, spec.sys_initial, 1e-9);
    const EfgReport r = analyze(c, dm, spec.sys_initial);
    CAPTURE(seed);
    CHECK(v.lossless);
    CHECK(std::abs(r.kappa) <= 1e-5);
    CHECK(r.i_q == doctest::Approx(tr.expected_iq).epsilon(1e-8));
  }
}

TEST_CASE("property: discrete channel and integrals agree") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    t::Gen gen(1100 + seed);
    const Eigen::Index d = gen.integer(2, 4);
    const t::Mat h = gen.hermitian(d), g = gen.hermitian(d);
    CollisionSpec spec;
    spec.dim = d;
    spec.h0 = [h, g](double, double x) { return Operator(h + x * g); };
    spec.dh0 = [g](double, double) { return g; };
    const int nj = gen.integer(1, 2);
    for (int j = 0; j < nj; ++j) {
      const double rate = gen.uniform(0.2, 1.0);
      spec.jumps.push_back({0.5 * gen.gaussian(d, d), [rate](double) { return rate; }});
    }
    const t::Vec psi = gen.ket(d);
    const TimeGrid grid(1.0, 512);
    const MeasurementChannel c = build_discrete_channel(spec, psi, grid, 0.2);
    const EfgReport r = efg(c, discrete_channel_derivatives(spec, grid, 0.2), psi);
    const CollisionEfg in = efg_integrals(spec, grid, 0.2, psi);
    CAPTURE(seed);
    CHECK(t::relative_gap(r.g_total, in.g_omega_first_jump) < 1e-10);
    CHECK(t::relative_gap(r.e_total, in.e_omega_first_jump) < 1e-10);
    // The full record is trace preserving to integration accuracy.
    CHECK(in.e_omega == doctest::Approx(1.0).epsilon(1e-8));
  }
}
