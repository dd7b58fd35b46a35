#include <cmath>

#include "doctest.h"
#include "ruin/errors.hpp"
#include "ruin/models.hpp"

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

const CompoundPoissonExp kCpe{1.0, 2.0};

}  // namespace

TEST_CASE("scale_to_canonical") {
  auto c = scale_to_canonical(1, 1, 1.5, 0.5, 0.5, 0.5);
  CHECK(c.x1 == 2);
  CHECK(c.x2 == 2);
  CHECK(c.p1 == 3);
  CHECK(c.p2 == 1);
  c = scale_to_canonical(0.6, 0.8, 1.8, 0.4, 0.6, 0.4);
  CHECK(c.x1 == doctest::Approx(1));
  CHECK(c.x2 == doctest::Approx(2));
  CHECK(c.p1 == doctest::Approx(3));
  CHECK(c.p2 == doctest::Approx(1));
  CHECK(kind_of([] { scale_to_canonical(2, 3, 3, 1, 1, 0); }) == ErrorKind::InvalidProportions);
}

TEST_CASE("cumulant values") {
  CHECK(cumulant(LineModel(kCpe, 3), -1.0) == doctest::Approx(-2.0));
  CHECK(cumulant(LineModel(kCpe, 3), 0.0) == 0.0);
  CHECK(cumulant(LineModel(StandardBrownian{}, 1), 0.0) == 0.0);
  CHECK(cumulant(LineModel(StandardBrownian{}, 1), -2.0) == doctest::Approx(0.0));
  CHECK(kind_of([] { cumulant(LineModel(kCpe, 3), -2.0); }) == ErrorKind::OutOfDomain);
}

TEST_CASE("convexity and derivative consistency on a grid") {
  for (const LineModel& m : {LineModel(kCpe, 3), LineModel(kCpe, 1), LineModel(StandardBrownian{}, 1.5)}) {
    const double g = adjustment_coefficient(m);
    const double lo = std::isfinite(m.theta_lower()) ? m.theta_lower() + 1e-3 : -4.0 * g;
    const double hi = 2.0 * g;
    for (int i = 0; i < 50; ++i) {
      const double th = lo + (hi - lo) * (i + 0.5) / 50.0;
      const double h1 = 1e-5 * std::min(1.0, std::abs(th - m.theta_lower()));
      const double h = 1e-3 * std::min(1.0, std::abs(th - m.theta_lower()));
      const double d1 = (m.kappa(th + h1) - m.kappa(th - h1)) / (2 * h1);
      const double d2 = (m.kappa(th + h) - 2 * m.kappa(th) + m.kappa(th - h)) / (h * h);
      CHECK(d2 > 0);
      CHECK(d1 == doctest::Approx(m.kappa1(th)).epsilon(1e-6));
      CHECK(d2 == doctest::Approx(m.kappa2(th)).epsilon(1e-5));
    }
  }
}

TEST_CASE("adjustment data for the reference compound Poisson model") {
  const auto m2 = make_two_line(kCpe, 3, 1);
  const auto d = adjustment(m2);
  CHECK(d.gamma1 == doctest::Approx(5.0 / 3).epsilon(1e-14));
  CHECK(d.gamma2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.gamma3 == doctest::Approx(4.0 / 3).epsilon(1e-12));
  CHECK(d.gamma_tilde == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(d.C1 == doctest::Approx(1.0 / 6));
  CHECK(d.C2 == doctest::Approx(0.5));
  CHECK(d.C2_hat == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(d.C2_hat == doctest::Approx(m2.p2 / m2.p1).epsilon(1e-12));
  CHECK(std::abs(m2.line1.kappa(-d.gamma3) - m2.line1.kappa(-d.gamma2)) < 1e-12);
  CHECK(d.zeta1 == d.gamma1);
  CHECK(m2.a_bar == 1.0);
}

TEST_CASE("gamma3 collapses to gamma2 when line 1 drifts down under the gamma2 tilt") {
  const auto d = adjustment(make_two_line(StandardBrownian{}, 3, 2));
  CHECK(d.gamma3 == d.gamma2);
  CHECK(d.gamma_tilde == 0.0);
  CHECK(d.C2_hat == d.C2);
  const auto e = adjustment(make_two_line(StandardBrownian{}, 3, 1));
  CHECK(e.gamma3 == doctest::Approx(4.0));
  CHECK(e.C1 == 1.0);
}

TEST_CASE("net-profit failures") {
  CHECK(kind_of([] { adjustment(make_two_line(CompoundPoissonExp{1, 2}, 3, 0.4)); }) == ErrorKind::NoAdjustment);
  CHECK(kind_of([] { make_two_line(kCpe, 1, 3); }) == ErrorKind::InvalidModel);
}

TEST_CASE("tilting") {
  const LineModel m(kCpe, 3);
  auto t = tilt(m, -5.0 / 3);
  const auto& c = std::get<CompoundPoissonExp>(t.model.driver());
  CHECK(c.lambda == doctest::Approx(6.0));
  CHECK(c.mu == doctest::Approx(1.0 / 3));
  auto t2 = tilt(m, -1.0);
  const auto& c2 = std::get<CompoundPoissonExp>(t2.model.driver());
  CHECK(c2.lambda == doctest::Approx(2.0));
  CHECK(c2.mu == doctest::Approx(1.0));
  CHECK(t2.model.drift() == doctest::Approx(1.0));
  auto id = tilt(m, 0.0);
  CHECK(std::get<CompoundPoissonExp>(id.model.driver()).lambda == 1.0);
  CHECK(kind_of([&] { tilt(m, -2.5); }) == ErrorKind::OutOfDomain);

  for (const LineModel& base : {m, LineModel(StandardBrownian{}, 1.0)}) {
    for (double c1 : {-0.7, 0.4}) {
      for (double cc : {-0.5, 0.3}) {
        const auto a = tilt(tilt(base, c1).model, cc).model;
        const auto b = tilt(base, c1 + cc).model;
        for (double th = -0.5; th < 2.0; th += 0.25) {
          CHECK(std::abs(a.kappa(th) - b.kappa(th)) < 1e-12);
          CHECK(std::abs(b.kappa(th) - (base.kappa(th + c1 + cc) - base.kappa(c1 + cc))) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("saddle points") {
  const auto b = saddle(LineModel(StandardBrownian{}, 1), 4);
  CHECK(b.theta_v == doctest::Approx(-5));
  CHECK(b.theta_v_conj == doctest::Approx(3).epsilon(1e-11));
  CHECK(b.kstar == doctest::Approx(12.5));

  const LineModel m(kCpe, 1);
  const auto s = saddle(m, 5);
  CHECK(s.theta_v == doctest::Approx(-1.422649730810374).epsilon(1e-13));
  CHECK(s.kstar == doctest::Approx(6.071796769724491).epsilon(1e-13));
  CHECK(s.theta_v_conj == doctest::Approx(1.464101615137755).epsilon(1e-11));
  CHECK(std::abs(m.kappa1(s.theta_v) + 5) < 1e-12);
  CHECK(std::abs(m.kappa(s.theta_v) - m.kappa(s.theta_v_conj)) < 1e-10);

  const double v0 = -m.drift();  // drift 0.5 > 0: mean velocity is negative here
  CHECK(v0 < 0);
  const LineModel down(CompoundPoissonExp{2, 1}, 1);
  const auto z = saddle(down, -down.drift());
  CHECK(std::abs(z.theta_v) < 1e-14);
  CHECK(std::abs(z.kstar) < 1e-14);
  CHECK(kind_of([&] { saddle(m, -1); }) == ErrorKind::OutOfRange);
}

TEST_CASE("tilted saddle shifts by the tilt") {
  const LineModel m(kCpe, 3);
  for (double c : {-1.0, -5.0 / 3, 0.5}) {
    const auto tm = tilt(m, c).model;
    for (double v : {0.5, 2.0, 7.0}) {
      const auto s = saddle(m, v);
      const auto st = saddle(tm, v);
      CHECK(st.theta_v == doctest::Approx(s.theta_v - c).epsilon(1e-10));
      CHECK(st.theta_v_conj == doctest::Approx(s.theta_v_conj - c).epsilon(1e-9));
    }
  }
}

TEST_CASE("joint cumulant") {
  const auto m2 = make_two_line(kCpe, 3, 1);
  const auto d = adjustment(m2);
  CHECK(joint_cumulant(m2, 0, 0) == 0);
  CHECK(std::abs(joint_cumulant(m2, -d.gamma1, 0)) < 1e-12);
  CHECK(std::abs(joint_cumulant(m2, 0, -d.gamma2)) < 1e-12);
  CHECK(joint_cumulant(m2, -1, 0) == doctest::Approx(-2));
  // Same identity written directly from the driver: p.theta + kappa_S(theta1 + theta2).
  for (double t1 = -0.8; t1 < 1; t1 += 0.4) {
    for (double t2 = -0.8; t2 < 1; t2 += 0.4) {
      const double s = t1 + t2;
      const double direct = 3 * t1 + 1 * t2 - 1.0 * s / (2.0 + s);
      CHECK(joint_cumulant(m2, t1, t2) == doctest::Approx(direct).epsilon(1e-13));
    }
  }
}

TEST_CASE("renewal adjustment") {
  Renewal poisson{Distribution::exponential(1.0), Distribution::exponential(2.0)};
  CHECK(renewal_adjustment(poisson, 3) == doctest::Approx(2.0 - 1.0 / 3).epsilon(1e-11));
  Renewal det{Distribution::deterministic(1.0), Distribution::exponential(2.0)};
  const double g1 = renewal_adjustment(det, 1);
  CHECK(g1 == doctest::Approx(1.59362426004004).epsilon(1e-11));
  CHECK(std::abs(std::exp(-g1) * 2.0 / (2.0 - g1) - 1.0) < 1e-12);
  CHECK(renewal_adjustment(det, 3) == doctest::Approx(1.994967075467531).epsilon(1e-11));
  Renewal heavy{Distribution::exponential(1.0),
                Distribution::custom("heavy", [](double s) { return s <= 0 ? 1.0 : INFINITY; }, 0.0, 0.5,
                                     [](Substream& r) { return r.uniform(); })};
  CHECK(kind_of([&] { renewal_adjustment(heavy, 3); }) == ErrorKind::NoAdjustment);
  CHECK(kind_of([&] { heavy.claim.tilted(0.1); }) == ErrorKind::UnsupportedDriver);
}

TEST_CASE("distributions") {
  auto e = Distribution::exponential(2.0);
  CHECK(e.mgf(1.0) == doctest::Approx(2.0));
  CHECK(std::isinf(e.mgf(2.0)));
  CHECK(e.tilted(0.5).mgf_sup() == doctest::Approx(1.5));
  auto g = Distribution::gamma(2.0, 3.0);
  CHECK(g.mean() == doctest::Approx(2.0 / 3));
  CHECK(g.mgf(1.0) == doctest::Approx(2.25));
  Substream rng(7, 0);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) sum += g.sample(rng);
  CHECK(sum / 20000 == doctest::Approx(2.0 / 3).epsilon(0.02));
}
