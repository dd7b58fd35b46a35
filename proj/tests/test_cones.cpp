#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "ruin/cones.hpp"
#include "ruin/errors.hpp"

using namespace ruin;

namespace {

const TwoLineModel kCpe = make_two_line(CompoundPoissonExp{1, 2}, 3, 1);
const TwoLineModel kBm = make_two_line(StandardBrownian{}, 3, 1);
const TwoLineModel kBm32 = make_two_line(StandardBrownian{}, 3, 2);

// Infimum of the rate function over the quadrant (-inf,-a) x (-inf,-1), by
// scanning its two boundary edges. Shares nothing with exit_rate's case split.
double brute_exit_rate(const TwoLineModel& m, double a) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4000; ++i) {
    const double b = a + (1.0 - a) * i / 4000.0;  // edge x2 = -1, x1 = -b
    if (b < 1.0 - 1e-9) best = std::min(best, rate_function(m, -b, -1.0));
    const double c = 1.0 + 40.0 * i / 4000.0;  // edge x1 = -a, x2 = -c
    best = std::min(best, rate_function(m, -a, -c));
  }
  return best;
}

}  // namespace

TEST_CASE("crossing time") {
  CHECK(crossing_time(1, 3, 3, 1) == 1.0);
  CHECK(crossing_time(2, 2, 3, 1) == 0.0);
  CHECK(crossing_time(0, 5, 2, 1) == 5.0);
}

TEST_CASE("partition slopes") {
  const auto c = partition(kCpe);
  CHECK(c.s1 == doctest::Approx(15.0 / 17).epsilon(1e-13));
  CHECK(c.s2 == 0.0);
  CHECK(c.s3 == doctest::Approx(3.0 / 7).epsilon(1e-13));
  CHECK(c.d2_empty);
  const auto b = partition(kBm);
  CHECK(b.s1 == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(b.s2 == 0.0);
  CHECK(b.s3 == doctest::Approx(1.0 / 3).epsilon(1e-13));
  const auto e = partition(kBm32);
  CHECK(e.s2 == doctest::Approx(0.5));
  CHECK_FALSE(e.d2_empty);
  CHECK(e.s3 == e.s2);
}

TEST_CASE("slope ordering and the gamma ratio on random models") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const double p2 = 0.2 + 2 * U(gen);
    const double p1 = p2 * (1.05 + 2 * U(gen));
    for (const TwoLineModel& m : {make_two_line(StandardBrownian{}, p1, p2),
                                  make_two_line(CompoundPoissonExp{p2 * (0.2 + 0.7 * U(gen)), 1.0}, p1, p2)}) {
      const auto part = partition(m);
      const auto d = adjustment(m);
      CHECK(part.s2 < d.gamma2 / d.gamma1);
      CHECK(d.gamma2 / d.gamma1 < part.s1);
      CHECK(part.s2 <= part.s3);
      CHECK(part.s3 < part.s1);
      CHECK(part.s1 < 1.0);
      if (!part.d2_empty) CHECK(part.s2 > 0);
    }
  }
}

TEST_CASE("classify") {
  CHECK(classify(kCpe, 9, 10, PartitionKind::Sim) == ConeLabel::D1);
  CHECK(classify(kCpe, 5, 10, PartitionKind::And) == ConeLabel::D0_hat);
  CHECK(classify(kCpe, 3, 10, PartitionKind::And) == ConeLabel::D2_hat);
  CHECK(classify(kCpe, 3, 10, PartitionKind::Sim) == ConeLabel::D0);
  CHECK(classify(kCpe, 10, 10, PartitionKind::Sim) == ConeLabel::LowerCone);
  CHECK(classify(kBm, 6, 10, PartitionKind::Sim) == ConeLabel::BoundaryRay);
  CHECK(classify(kBm32, 2, 10, PartitionKind::Sim) == ConeLabel::D2);
  CHECK(classify(kBm32, 2, 10, PartitionKind::And) == ConeLabel::D2_hat);
}

TEST_CASE("slope and time characterizations agree on random reserves") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.01, 50.0);
  for (const TwoLineModel* m : {&kCpe, &kBm, &kBm32}) {
    const auto part = partition(*m);
    for (int i = 0; i < 100; ++i) {
      const double x1 = U(gen);
      const double x2 = U(gen);
      CHECK_NOTHROW(classify(*m, part, x1, x2, PartitionKind::Sim));
      CHECK_NOTHROW(classify(*m, part, x1, x2, PartitionKind::And));
    }
  }
}

TEST_CASE("ray exponent") {
  CHECK(gamma_ray(kBm, 0.5) == doctest::Approx(3.125).epsilon(1e-12));
  CHECK(gamma_ray(kCpe, 0.6) == doctest::Approx(1.214359353944898).epsilon(1e-12));
  CHECK(gamma_ray(kCpe, 0.3) == doctest::Approx(1.105777790477642).epsilon(1e-12));
  CHECK(gamma_ray(kCpe, 0.5) == doctest::Approx(1.16886116991581).epsilon(1e-12));
  for (const TwoLineModel* m : {&kCpe, &kBm, &kBm32}) {
    const auto part = partition(*m);
    const auto d = adjustment(*m);
    CHECK(gamma_ray(*m, part.s1) == doctest::Approx(part.s1 * d.gamma1).epsilon(1e-10));
    for (double a = 0.05; a < 0.99; a += 0.07) {
      if (std::abs(a - part.s1) > 1e-3 && std::abs(a - part.s2) > 1e-3) CHECK(gamma_ray(*m, a) > std::max(a * d.gamma1, d.gamma2));
    }
  }
  // Towards the diagonal the ray exponent tends to -theta_lower.
  CHECK(gamma_ray(kCpe, 1 - 1e-7) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_THROWS_AS(gamma_ray(kCpe, 1.0), RuinError);
}

TEST_CASE("rate function") {
  CHECK(rate_function(kBm, -0.5, -1) == doctest::Approx(3.125));
  CHECK(rate_function(kBm, -1.0, -2) == doctest::Approx(2 * rate_function(kBm, -0.5, -1)));
  CHECK(rate_function(kCpe, -0.6 * 7, -7) == doctest::Approx(7 * 1.214359353944898).epsilon(1e-11));
  CHECK(rate_function(kCpe, -2, -2) == doctest::Approx(4.0));
  CHECK(std::isinf(rate_function(kBm, -2, -2)));
  CHECK(std::isinf(rate_function(kCpe, -3, -2)));
  const auto diag = diagonal_rate(kCpe);
  CHECK(diag.support_value == diag.domain_value);
  CHECK_THROWS_AS(rate_function(kBm, 0.5, -1), RuinError);
}

TEST_CASE("exit rate") {
  CHECK(exit_rate(kBm, 0.8) == doctest::Approx(4.8));
  CHECK(exit_rate(kBm, 0.5) == doctest::Approx(3.125));
  CHECK(exit_rate(kBm32, 0.3) == doctest::Approx(4.0));
  for (const TwoLineModel* m : {&kCpe, &kBm, &kBm32}) {
    const auto part = partition(*m);
    for (double s : {part.s1, part.s2}) {
      if (s <= 0) continue;
      CHECK(std::abs(exit_rate(*m, s * (1 - 1e-9)) - exit_rate(*m, s * (1 + 1e-9))) < 1e-8);
    }
    for (int i = 1; i <= 50; ++i) {
      const double a = 0.98 * i / 50.0;
      const double brute = brute_exit_rate(*m, a);
      CHECK(exit_rate(*m, a) <= brute + 1e-9);
      CHECK(exit_rate(*m, a) == doctest::Approx(brute).epsilon(2e-3));
    }
  }
}
