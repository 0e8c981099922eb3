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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "qfi/cli/runner.hpp"
#include "qfi/collision.hpp"
#include "qfi/encoding.hpp"
#include "qfi/fisher.hpp"
#include "qfi/scenarios.hpp"

namespace qfi::cli {

namespace {

struct Property {
  std::string name;
  long instances = 0;
  long checks = 0;
  long violations = 0;
  double worst = -std::numeric_limits<double>::infinity();

  /// Records `excess` (> 0 is a violation).
  void check(double excess) {
    ++checks;
    worst = std::max(worst, excess);
    if (excess > 0.0) ++violations;
  }
  bool pass() const { return violations == 0 && checks > 0; }
};

using Suite = std::function<std::vector<Property>(double tol)>;

double relative_drift(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 1e-12 ? std::abs(a - b) / scale : std::abs(a - b);
}

std::vector<Property> chain_suite(double tol) {
  const double slack = tol > 0 ? tol : 1e-8;
  Property se{"chain.qfi_ge_sigma_se"}, mixed{"chain.sigma_se_ge_mixed"},
      post{"chain.qfi_ge_postselected"};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 4);
    const double x = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const ChannelFamily family = random_family(dim, n, rng());
    const Ket psi = random_ket(dim, rng);
    const MeasurementChannel channel = family(x);
    const KrausDerivatives dm = family.analytic_derivative(x);
    const double iq = total_qfi(efg(channel, dm, psi));
    const SigmaSeQfi sse = sigma_se_qfi(channel, dm, psi);
    const double irho = mixed_qfi(channel, dm, psi);
    for (Property* p : {&se, &mixed, &post}) ++p->instances;
    se.check(sse.total - iq - slack);
    mixed.check(irho - sse.total - slack);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      double avg = 0.0;
      for (int w = 0; w < n; ++w) {
        if (mask & (1u << w)) avg += sse.outcomes[w].probability * sse.outcomes[w].conditional_qfi;
      }
      post.check(avg - iq - slack);
    }
  }
  return {se, mixed, post};
}

std::vector<Property> gauge_suite(double tol) {
  const double limit = tol > 0 ? tol : 1e-8;
  Property p{"gauge.relative_drift"};
  auto theta = [](double x) { return 5.0 * x + x * x; };
  auto dtheta = [](double x) { return 5.0 + 2.0 * x; };
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng() % 3);
    const int n = 2 + static_cast<int>(rng() % 3);
    const double x = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const ChannelFamily family = random_family(dim, n, rng());
    const ChannelFamily twisted = family.rephased(theta, dtheta);
    const Ket psi = random_ket(dim, rng);
    ++p.instances;
    std::vector<double> a, b;
    for (const ChannelFamily* f : {&family, &twisted}) {
      const MeasurementChannel ch = (*f)(x).with_retained({"1"});
      const KrausDerivatives dm = f->analytic_derivative(x);
      const EfgReport r = analyze(ch, dm, psi);
      std::vector<double>& v = f == &family ? a : b;
      v = {r.i_q, r.kappa, r.avg_ps_qfi};
      for (const auto& o : sigma_se_qfi(ch, dm, psi).outcomes) v.push_back(o.conditional_qfi);
    }
    for (std::size_t i = 0; i < a.size(); ++i) p.check(relative_drift(a[i], b[i]) - limit);
  }
  return {p};
}

CollisionSpec random_collision(Eigen::Index dim, int n_jumps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Operator h0 = random_hermitian(dim, rng);
  const Operator h1 = random_hermitian(dim, rng);
  CollisionSpec spec;
  spec.dim = dim;
  spec.h0 = [h0](double t, double x) { return Operator(x * (1.0 + 0.5 * std::sin(t)) * h0); };
  spec.dh0 = [h0](double t, double) { return Operator((1.0 + 0.5 * std::sin(t)) * h0); };
  spec.h1 = [h1](double) { return h1; };
  for (int j = 0; j < n_jumps; ++j) {
    const Operator l = random_hermitian(dim, rng) + Complex(0, 1) * random_hermitian(dim, rng);
    const double g = 0.2 + 0.3 * j;
    spec.jumps.push_back({l / l.norm(), [g](double t) { return g * (1.0 + 0.5 * std::cos(t)); }});
  }
  return spec;
}

std::vector<Property> completeness_suite(double) {
  Property halving{"completeness.euler_halving_ratio"};
  const CollisionSpec deph =
      build_dephasing(ops::pauli_z(), {}, ops::pauli_z(), 1.0, 1.0, ops::plus_x(), 0.0);
  double prev = 0.0;
  for (int k = 10; k <= 14; ++k) {
    const TimeGrid grid(1.0, 1L << k, Scheme::euler_paper);
    const double res = build_discrete_channel(deph, ops::plus_x(), grid, 0.0).completeness_residual();
    if (k > 10) {
      ++halving.instances;
      const double ratio = prev / res;
      halving.check(std::max(1.5 - ratio, ratio - 2.5));
    }
    prev = res;
  }

  Property integral{"completeness.integral_dephasing"};
  ++integral.instances;
  integral.check(check_integral_completeness(deph, TimeGrid(1.0, 4096), 0.0) - 1e-6);

  Property order{"completeness.integral_order_ratio"};
  const CollisionSpec spec = random_collision(4, 2, 77);
  prev = 0.0;
  for (long n : {64L, 128L, 256L, 512L}) {
    const double res = check_integral_completeness(spec, TimeGrid(1.0, n), 0.4);
    if (n > 64) {
      ++order.instances;
      const double ratio = prev / res;
      order.check(std::max(3.0 - ratio, ratio - 5.0));
    }
    prev = res;
  }
  return {halving, integral, order};
}

std::vector<Property> theorem_suite(double) {
  Property perp{"theorem.perp_pass_implies_no_loss"};
  auto perp_instance = [&](const MeasurementChannel& ch, const KrausDerivatives& dm, const Ket& psi) {
    ++perp.instances;
    if (!check_lossless_perp(ch, dm, psi, 1e-9).lossless) return;
    const EfgReport r = analyze(ch, dm, psi);
    if (!(r.i_q > 1e-14)) return;
    perp.check(r.kappa - 1e-5);
  };
  for (double eps : log_grid(1e-4, 1e4, 9)) {
    const Transducer tr = build_transducer(two_qubit_transducer(eps, 0.0));
    perp_instance(tr.family(0.0), tr.family.analytic_derivative(0.0), ops::basis(2, 0));
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    const ChannelFamily f = random_family(2, 1, rng());
    perp_instance(f(0.3), f.analytic_derivative(0.3), random_ket(2, rng));
  }

  Property t2{"theorem.theorem2_pass_implies_no_loss"};
  {
    // psi in span{|0>, |1>}, jumps only out of |2>.
    Operator h0 = Operator::Zero(3, 3);
    h0(0, 0) = 1.0;
    h0(1, 1) = -1.0;
    CollisionSpec spec;
    spec.dim = 3;
    spec.h0 = [h0](double, double x) { return Operator(x * h0); };
    spec.dh0 = [h0](double, double) { return h0; };
    spec.jumps.push_back({ops::projector(ops::basis(3, 2)), [](double) { return 1.0; }});
    Ket psi = (ops::basis(3, 0) + ops::basis(3, 1)) / std::sqrt(2.0);
    const TimeGrid grid(1.0, 1024);
    ++t2.instances;
    if (check_theorem2(spec, grid, 0.2, psi, 1e-8).lossless) {
      t2.check(nh_loss(spec, grid, 0.2, psi).kappa - 1e-5);
    }
  }

  Property deph{"theorem.dephasing_detects_loss"};
  {
    const CollisionSpec spec =
        build_dephasing(ops::pauli_z(), {}, ops::pauli_z(), 1.0, 1.0, ops::plus_x(), 0.0);
    const TimeGrid grid(1.0, 1024);
    const Theorem2Verdict v = check_theorem2(spec, grid, 0.0, ops::plus_x(), 1e-8);
    const double kappa = nh_loss(spec, grid, 0.0, ops::plus_x()).kappa;
    ++deph.instances;
    deph.check(v.energy_pass && !v.jump_pass && kappa > 0.0 ? -1.0 : 1.0);
  }
  return {perp, t2, deph};
}

std::vector<Property> convexity_suite(double tol) {
  const double slack = tol > 0 ? tol : 1e-8;
  Property lower{"convexity.classical_le_mixed"}, upper{"convexity.mixed_le_post"},
      outer{"convexity.classical_le_post"};
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(9000 + seed);
    const int n = 2 + static_cast<int>(rng() % 3);
    const ChannelFamily f = random_family(2, n, rng());
    const double x = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const Ket psi = random_ket(2, rng);
    const auto povm = random_povm(2, 2, rng);
    const ConvexityReport rep = refined_convexity_check(f(x), f.analytic_derivative(x), psi, povm, slack);
    for (Property* p : {&lower, &upper, &outer}) ++p->instances;
    for (const auto& t : rep.terms) {
      lower.check(t.classical - t.mixed - slack);
      upper.check(t.mixed - t.post_measurement - slack);
      outer.check(t.classical - t.post_measurement - slack);
    }
  }
  return {lower, upper, outer};
}

const std::vector<std::pair<std::string, Suite>>& registry() {
  static const std::vector<std::pair<std::string, Suite>> suites = {
      {"chain", chain_suite},           {"gauge", gauge_suite},
      {"completeness", completeness_suite}, {"theorem", theorem_suite},
      {"convexity", convexity_suite},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, suite] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

int cmd_verify(const std::string& suite, const GlobalOptions& opts, std::ostream& out,
               std::ostream& err) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& s) { return s.first == suite; });
  if (it == reg.end()) {
    err << "error: unknown suite '" << suite << "' (available:";
    for (const auto& name : verify_suites()) err << ' ' << name;
    err << ")\n";
    return kExitInvalid;
  }
  std::vector<Property> props;
  try {
    props = it->second(opts.tol.value_or(0.0));
  } catch (const Error& e) {
    err << "error: suite " << suite << ": " << e.what() << '\n';
    return kExitInvalid;
  }
  bool all = true;
  for (const auto& p : props) {
    all = all && p.pass();
    out << (p.pass() ? "PASS " : "FAIL ") << p.name << " instances=" << p.instances
        << " checks=" << p.checks << " violations=" << p.violations
        << " worst_excess=" << format_number(p.worst) << '\n';
  }
  return all ? kExitOk : kExitFailed;
}

}  // namespace qfi::cli
