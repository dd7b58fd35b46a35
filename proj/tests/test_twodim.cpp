#include <cmath>
#include <random>

#include "doctest.h"
#include "ruin/errors.hpp"
#include "ruin/finite_time.hpp"
#include "ruin/twodim.hpp"

using namespace ruin;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const RuinError& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidConfig;
}

const TwoLineModel kCpe = make_two_line(CompoundPoissonExp{1, 2}, 3, 1);
const TwoLineModel kBm = make_two_line(StandardBrownian{}, 3, 1);

double ratio(double log_a, double log_b) { return std::exp(log_a - log_b); }

}  // namespace

TEST_CASE("exact values against high-precision references") {
  const ExactValues c = exact_all(kCpe, 1, 3);
  CHECK(c.or_value == doctest::Approx(0.04805149565860746).epsilon(1e-10));
  CHECK(c.sim_value == doctest::Approx(0.005813308389434408).epsilon(1e-10));
  CHECK(c.and_value == doctest::Approx(0.008321305664918155).epsilon(1e-10));
  CHECK(c.T == 1.0);

  const ExactValues b = exact_all(kBm, 1, 3);
  CHECK(b.or_value == doctest::Approx(0.004708660403042589).epsilon(1e-12));
  CHECK(b.sim_value == doctest::Approx(0.0001279763415634294).epsilon(1e-12));
  CHECK(b.and_value == doctest::Approx(0.0002488439502901281).epsilon(1e-12));
}

TEST_CASE("lower cone short-circuits to one line") {
  for (const TwoLineModel* m : {&kCpe, &kBm}) {
    const ExactValues e = exact_all(*m, 4, 2);
    CHECK(e.or_value == doctest::Approx(ultimate_ruin(m->line2, 2)));
    CHECK(e.sim_value == doctest::Approx(ultimate_ruin(m->line1, 4)));
    CHECK(e.and_value == doctest::Approx(ultimate_ruin(m->line1, 4)));
    const RuinEstimate r = exact(*m, {Event::Or, 4, 2, Method::Exact});
    REQUIRE(r.cone.has_value());
    CHECK(*r.cone == ConeLabel::LowerCone);
  }
}

TEST_CASE("Brownian closed forms agree with the tilted assembly on a grid") {
  for (double x1 : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    for (double dx : {0.2, 0.7, 1.5, 3.0, 6.0}) {
      const ExactValues e = exact_all(kBm, x1, x1 + dx);
      const BrownianClosedForm f = brownian_closed_form(3, 1, x1, x1 + dx);
      CHECK(std::abs(e.or_value - f.or_value) < 1e-8);
      CHECK(std::abs(e.sim_value - f.sim_value) < 1e-8);
      CHECK(std::abs(e.and_value - f.and_value) < 1e-8);
    }
  }
}

TEST_CASE("renewal driver is refused by the exact engine") {
  const TwoLineModel r = make_two_line(Renewal{Distribution::deterministic(1), Distribution::exponential(2)}, 3, 1);
  CHECK(kind_of([&] { exact_all(r, 1, 3); }) == ErrorKind::UnsupportedDriver);
}

TEST_CASE("complementarity, sandwich, ordering and monotonicity") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 40; ++k) {
    const double lambda = 0.5 + u(gen);
    const double mu = 0.5 + 2 * u(gen);
    const double p2 = lambda / mu * (1.1 + u(gen));
    const double p1 = p2 * (1.2 + 2 * u(gen));
    const bool bm = k % 2 == 1;
    const TwoLineModel m = bm ? make_two_line(StandardBrownian{}, p1, p2) : make_two_line(CompoundPoissonExp{lambda, mu}, p1, p2);
    const double x1 = 3 * u(gen);
    const double x2 = x1 + 4 * u(gen);
    const ExactValues e = exact_all(m, x1, x2);
    const double tol = 2 * e.quad_err + 1e-13;
    CHECK(std::abs(e.and_value - (e.psi1 + e.psi2 - e.or_value)) <= tol);
    CHECK(e.or_value >= std::max(e.psi1, e.psi2) - tol);
    CHECK(e.or_value <= e.psi1 + e.psi2 + tol);
    CHECK(e.sim_value <= e.and_value + tol);
    CHECK(e.and_value <= std::min(e.psi1, e.psi2) + tol);
  }
  for (const TwoLineModel* m : {&kCpe, &kBm}) {
    for (double x1 = 0.5; x1 < 4; x1 += 0.75) {
      for (double x2 = x1 + 0.25; x2 < 6; x2 += 0.75) {
        const ExactValues e = exact_all(*m, x1, x2);
        const ExactValues f = exact_all(*m, x1 + 0.1, x2);
        const ExactValues g = exact_all(*m, x1, x2 + 0.1);
        CHECK(f.or_value <= e.or_value + 1e-12);
        CHECK(f.sim_value <= e.sim_value + 1e-12);
        CHECK(f.and_value <= e.and_value + 1e-12);
        CHECK(g.or_value <= e.or_value + 1e-12);
        CHECK(g.sim_value <= e.sim_value + 1e-12);
        CHECK(g.and_value <= e.and_value + 1e-12);
      }
    }
  }
}

TEST_CASE("logs of exact values survive underflow") {
  const ExactValues e = exact_all(kCpe, 0.5 * 1000, 1000);
  CHECK(e.sim_value == 0.0);
  CHECK(std::isfinite(e.log_sim));
  CHECK(std::isfinite(e.log_and));
  const ExactValues f = exact_all(kCpe, 0.5 * 40, 40);
  CHECK(std::log(f.sim_value) == doctest::Approx(f.log_sim).epsilon(1e-10));
  CHECK(std::log(f.and_value) == doctest::Approx(f.log_and).epsilon(1e-10));
}

TEST_CASE("sharp constants reproduce the Brownian bracket terms") {
  const SharpConstants s = sharp_constants(kBm, 2, 4.0);
  CHECK(s.theta_w == doctest::Approx(-5.0).epsilon(1e-14));
  CHECK(s.theta_conj == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(s.prime_bracket - 8.0 / 15) < 1e-12);
  CHECK(std::abs(s.sharp_bracket - 8.0 / 9) < 1e-12);
  // 2v/(v^2 - p2^2) and 2v/((p2 - 2 p1)^2 - v^2) at v = 4
  CHECK(std::abs(s.prime_bracket - 8.0 / (16.0 - 1.0)) < 1e-12);
  CHECK(std::abs(s.sharp_bracket - 8.0 / (25.0 - 16.0)) < 1e-12);
}

TEST_CASE("two-term OR constants") {
  // x1 + kappa1'(-gamma2) T > 0 selects the constant branch.
  const ExpansionTerms e = two_term_or(kCpe, 20, 40);
  CHECK(e.constant_branch);
  CHECK(e.constants.at("C2_tilde") == doctest::Approx(0.5));
  // The ratio to the exact value improves along a = 0.5.
  const auto r = [](double K) {
    const ExpansionTerms t = two_term_or(kCpe, 0.5 * K, K);
    return ratio(t.log_total(), exact_all(kCpe, 0.5 * K, K).log_or);
  };
  CHECK(std::abs(r(40) - 1) < 0.1);
  CHECK(std::abs(r(40) - 1) < std::abs(r(10) - 1));
  // With exact one-dimensional factors the expansion is exact for these drivers.
  const ExpansionTerms x = two_term_or(kCpe, 20, 40, Pieces::Exact);
  CHECK(x.total() == doctest::Approx(exact_all(kCpe, 20, 40).or_value).epsilon(1e-9));
}

TEST_CASE("two-term SIM: transform constant equals the quadrature of the limiting law") {
  // Brownian a = 0.5, v = 4 lies below -kappa2'(-gamma1) = 5: transform branch.
  const ExpansionTerms e = two_term_sim(kBm, 2, 4);
  CHECK(e.velocity == doctest::Approx(4.0));
  CHECK_FALSE(e.constant_branch);
  const double th = kBm.line2.inverse_slope(-4.0);
  const double tc = conjugate_root(kBm.line2, th);
  const double g1 = 6.0;
  const double k = (th + g1) * (tc + g1) / (tc - th);
  const auto f = [&](double y) { return ultimate_ruin(kBm.line1, y) * k * (std::exp(-th * y) - std::exp(-tc * y)); };
  ToleranceConfig tol;
  tol.quad_abs_tol = 1e-13;
  const double quad = integrate(f, 0.0, 80.0, tol).value;
  CHECK(std::abs(e.constants.at("C1_tilde") - quad) < 1e-8);
  CHECK(e.constants.at("C1_tilde_alt") == doctest::Approx(1.0));

  // Under the gamma1 tilt line 2 drifts down, so its survival is the after-branch.
  const LineModel t = tilt(kCpe.line2, -5.0 / 3).model;
  CHECK(t.drift() < 0);
  // Constant branch when x2 + kappa2'(-gamma1) T > 0.
  CHECK(two_term_sim(kCpe, 0.9 * 20, 20).constant_branch);
}

TEST_CASE("two-term SIM exponents match the Brownian three-cone table") {
  for (double a : {0.2, 0.5, 0.8}) {
    const double K = 400;
    const ExpansionTerms e = two_term_sim(kBm, a * K, K);
    const double rate = -e.log_total() / K;
    // Leading exponent per cone: a gamma1 on D1, gamma(a) on D0.
    const ConeLabel c = classify(kBm, a * K, K, PartitionKind::Sim);
    const double expected = c == ConeLabel::D1 ? a * 6.0 : gamma_ray(kBm, a);
    CHECK(rate == doctest::Approx(expected).epsilon(0.02));
  }
}

TEST_CASE("two-term AND branches") {
  // Small-v branch constants.
  const ExpansionTerms e = two_term_and(kCpe, 0.3 * 20, 20);
  CHECK(e.constant_branch);
  CHECK(e.constants.at("C2_bar") == 0.0);
  CHECK(e.constants.at("C1_bar") == doctest::Approx(1.0 / 3).epsilon(1e-12));
  double prev = 1e9;
  for (double K : {10.0, 20.0, 40.0}) {
    const ExpansionTerms t = two_term_and(kCpe, 0.3 * K, K);
    const double d = std::abs(ratio(t.log_total(), exact_all(kCpe, 0.3 * K, K).log_and) - 1);
    CHECK(d < prev);
    prev = d;
  }
  // Large-v branch with exact one-dimensional factors approaches the exact value.
  const ExpansionTerms lg = two_term_and(kBm, 0.5 * 40, 40, Pieces::Exact);
  CHECK_FALSE(lg.constant_branch);
  CHECK(lg.constants.at("C2_bar") > 0);
  CHECK(ratio(lg.log_total(), exact_all(kBm, 20, 40).log_and) == doctest::Approx(1.0).epsilon(0.01));
  // -kappa2'(-gamma3) = 3.5 for the compound Poisson model, i.e. a = 3/7.
  CHECK(kind_of([&] { two_term_and(kCpe, 3.0, 7.0); }) == ErrorKind::BoundaryVelocity);
}

TEST_CASE("leading asymptotics") {
  const AdjustmentData d = adjustment(kCpe);
  const RuinEstimate s = leading(kCpe, 0.9 * 20, 20, Event::Sim);
  CHECK(*s.cone == ConeLabel::D1);
  CHECK(s.value == doctest::Approx(std::exp(-(5.0 / 3) * 18) / 6).epsilon(1e-12));
  const RuinEstimate a = leading(kCpe, 0.3 * 20, 20, Event::And);
  CHECK(*a.cone == ConeLabel::D2_hat);
  CHECK(a.log_value == doctest::Approx(std::log(1.0 / 3) - 1.1 * 20).epsilon(1e-12));
  CHECK(d.C2_hat == doctest::Approx(1.0 / 3));

  // Far from cone boundaries the ratio to the exact value tends to 1.
  for (const auto& [m, x] : {std::pair{&kBm, 0.5}, std::pair{&kCpe, 0.95}, std::pair{&kCpe, 0.2}}) {
    for (Event ev : {Event::Sim, Event::And}) {
      const auto r = [&](double K) {
        const ExactValues e = exact_all(*m, x * K, K);
        return ratio(ev == Event::Sim ? e.log_sim : e.log_and, leading(*m, x * K, K, ev).log_value);
      };
      CHECK(std::abs(r(80) - 1) < std::abs(r(10) - 1));
      CHECK(std::abs(r(80) - 1) < 0.1);
    }
  }
  CHECK(kind_of([&] { leading(kCpe, 15.0, 17.0, Event::Sim); }) == ErrorKind::BoundaryRay);
}

TEST_CASE("OR leading term") {
  for (double a : {0.3, 0.6, 0.9}) {
    const double K = 40;
    const RuinEstimate l = leading(kCpe, a * K, K, Event::Or);
    CHECK(ratio(exact_all(kCpe, a * K, K).log_or, l.log_value) == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("exact SIM decay rate matches the exit rate") {
  for (double a : {0.2, 0.5, 0.8}) {
    const double K = 40;
    const double rate = -exact_all(kBm, a * K, K).log_sim / K;
    CHECK(std::abs(rate / exit_rate(kBm, a) - 1) < 0.05);
  }
}

TEST_CASE("renewal exponents") {
  // Poisson interarrivals give back the compound Poisson values.
  const Renewal pois{Distribution::exponential(1), Distribution::exponential(2)};
  const RenewalExponents p = renewal_exponents(pois, 3, 1, 0.5);
  CHECK(p.gamma1 == doctest::Approx(5.0 / 3).epsilon(1e-9));
  CHECK(p.gamma2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.rate == doctest::Approx(5.0 / 6).epsilon(1e-9));
  const RenewalExponents q = renewal_exponents(pois, 3, 1, 0.6);
  CHECK(q.equal_order);

  const Renewal det{Distribution::deterministic(1), Distribution::exponential(2)};
  const RenewalExponents r = renewal_exponents(det, 3, 1, 0.5);
  CHECK(r.rate == doctest::Approx(std::min(r.gamma2, 0.5 * r.gamma1)));
  CHECK(r.envelope(10, 0, 1) == doctest::Approx(std::exp(-10 * r.gamma2)));
}

TEST_CASE("event and method names round-trip") {
  for (Event e : {Event::Or, Event::Sim, Event::And, Event::Line1, Event::Line2}) CHECK(parse_event(to_string(e)) == e);
  for (Method m : {Method::Exact, Method::TwoTerm, Method::Leading, Method::MC}) CHECK(parse_method(to_string(m)) == m);
  CHECK(kind_of([] { parse_event("xor"); }) == ErrorKind::InvalidConfig);
}
