#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "segvote/error.hpp"
#include "segvote/rate.hpp"

using namespace segvote;

TEST_CASE("DiscreteDist validation") {
  CHECK_NOTHROW(DiscreteDist({-1, 1}, {0.5, 0.5}));
  CHECK_THROWS_AS(DiscreteDist({-1, 1}, {0.5, 0.6}), ParamError);
  CHECK_THROWS_AS(DiscreteDist({-1, 1}, {1.5, -0.5}), ParamError);
  CHECK_THROWS_AS(DiscreteDist({1, 1}, {0.5, 0.5}), ParamError);
  CHECK_THROWS_AS(DiscreteDist({1}, {0.5, 0.5}), ParamError);
  const DiscreteDist d({-1, 0, 2}, {0.25, 0.5, 0.25});
  CHECK(d.mean() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(d.prob_of(0) == 0.5);
  CHECK(d.prob_of(3) == 0.0);
}

TEST_CASE("cgf") {
  const DiscreteDist coin({-1, 1}, {0.5, 0.5});
  CHECK(cgf(coin, 1.0) == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-14));
  CHECK(std::abs(cgf(coin, 1.0) - 0.433781) < 5e-7);
  CHECK(cgf(coin, 0.0) == 0.0);

  // Quoted reference values for these laws carry a slip in the fifth
  // decimal; the closed forms are checked tightly and the quotes loosely.
  const auto x = model_a_segment_vote_dist(0.1);
  const double t = std::log(2.134375);
  CHECK(cgf(x, t) == doctest::Approx(-oracle::three_point_rate(0.09, 0.5, 0.41)).epsilon(1e-9));
  CHECK(std::abs(cgf(x, t) - -0.123126) < 5e-5);

  // no overflow far out on either side
  CHECK(std::isfinite(cgf(coin, 800.0)));
  CHECK(cgf(coin, 800.0) == doctest::Approx(800.0 - std::log(2.0)));
  CHECK(cgf(coin, -800.0) == doctest::Approx(800.0 - std::log(2.0)));
}

TEST_CASE("cgf_derivative matches a central difference") {
  const DiscreteDist d({-2, 0, 1, 3}, {0.4, 0.3, 0.2, 0.1});
  for (double t : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    const double h = 1e-5;
    const double fd = (cgf(d, t + h) - cgf(d, t - h)) / (2 * h);
    CHECK(cgf_derivative(d, t) == doctest::Approx(fd).epsilon(1e-8));
  }
  CHECK(cgf_derivative(d, 0.0) == doctest::Approx(d.mean()).epsilon(1e-14));
}

TEST_CASE("cgf is convex") {
  const auto x = model_a_segment_vote_dist(0.3);
  for (double t = -5.0; t <= 5.0; t += 0.25) {
    const double h = 0.1;
    CHECK(cgf(x, t - h) + cgf(x, t + h) - 2 * cgf(x, t) >= -1e-15);
  }
}

TEST_CASE("golden section search") {
  const auto r = golden_section_minimize([](double x) { return (x - 1.25) * (x - 1.25) + 3.0; },
                                         -10.0, 10.0);
  CHECK(r.converged);
  CHECK(r.x == doctest::Approx(1.25).epsilon(1e-7));
  CHECK(r.fx == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("rate_zero matches the three-point closed form") {
  const auto x = model_a_segment_vote_dist(0.1);
  const auto r = rate_zero(x);
  CHECK(r.converged);
  CHECK(std::abs(r.value - oracle::three_point_rate(0.09, 0.5, 0.41)) < 1e-9);
  CHECK(std::abs(r.value - 0.123126) < 5e-5);
  CHECK(std::exp(r.minimizer_t) == doctest::Approx(std::sqrt(0.41 / 0.09)).epsilon(1e-6));

  const auto coord = model_a_coordinate_dist(0.1);
  CHECK(coord.prob_of(0.0) == 0.0);
  CHECK(coord.prob_of(1.0) == doctest::Approx(0.34));
  CHECK(coord.prob_of(-1.0) == doctest::Approx(0.66));
  const auto rc = rate_zero(coord);
  CHECK(std::abs(rc.value - oracle::three_point_rate(0.34, 0.0, 0.66)) < 1e-9);
  CHECK(std::abs(rc.value - 0.054017) < 5e-6);
}

TEST_CASE("segment vote law at rho = 0.3") {
  const auto x = model_a_segment_vote_dist(0.3);
  CHECK(x.prob_of(1.0) == doctest::Approx(0.21));
  CHECK(x.prob_of(0.0) == doctest::Approx(0.5));
  CHECK(x.prob_of(-1.0) == doctest::Approx(0.29));
  const double closed = -std::log(0.5 + 2 * std::sqrt(0.21 * 0.29));
  CHECK(std::abs(rate_zero(x).value - closed) < 1e-9);
  CHECK(std::abs(closed - 0.006461) < 5e-6);
}

TEST_CASE("rate_zero on general laws") {
  SUBCASE("zero mean gives zero") {
    const auto r = rate_zero(DiscreteDist({-1, 1}, {0.5, 0.5}));
    CHECK(r.value == 0.0);
    CHECK(r.converged);
  }
  SUBCASE("asymmetric four-point law against a dense grid") {
    const DiscreteDist d({-3, -1, 0.5, 2}, {0.3, 0.4, 0.2, 0.1});
    double best = 1e300;
    for (double t = -5; t <= 5; t += 1e-4) best = std::min(best, cgf(d, t));
    CHECK(rate_zero(d).value == doctest::Approx(-best).epsilon(1e-7));
  }
  SUBCASE("positive mean mirrors") {
    const auto a = rate_zero(DiscreteDist({-1, 0, 1}, {0.2, 0.3, 0.5}));
    const auto b = rate_zero(DiscreteDist({-1, 0, 1}, {0.5, 0.3, 0.2}));
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  }
  SUBCASE("one-sided law") {
    CHECK_THROWS_AS(rate_zero(DiscreteDist({-1, -2}, {0.5, 0.5})), DegenerateSignError);
    CHECK_THROWS_AS(rate_zero(DiscreteDist({0, 1}, {0.5, 0.5})), DegenerateSignError);
  }
}

TEST_CASE("segment-vote rate dominates the coordinate rate") {
  for (int i = 1; i <= 9; ++i) {
    const double rho = 0.05 * i;
    const double seg = rate_zero(model_a_segment_vote_dist(rho)).value;
    const double coord = rate_zero(model_a_coordinate_dist(rho)).value;
    CHECK(seg >= coord - 1e-12);
    CHECK(seg >= 0.0);
    CHECK(coord >= 0.0);
  }
}

TEST_CASE("model A laws reject rho outside (0, 1/2)") {
  CHECK_THROWS_AS(model_a_segment_vote_dist(0.0), ParamError);
  CHECK_THROWS_AS(model_a_coordinate_dist(0.5), ParamError);
}

TEST_CASE("Bernoulli relative entropy") {
  CHECK(std::abs(bernoulli_relative_entropy(0.5, 0.1) - 0.510826) < 5e-7);
  CHECK(bernoulli_relative_entropy(0.3, 0.3) == 0.0);
  CHECK(bernoulli_relative_entropy(0.0, 0.2) == doctest::Approx(-std::log(0.8)));
  CHECK(bernoulli_relative_entropy(0.0, 0.0) == 0.0);
  CHECK(std::isinf(bernoulli_relative_entropy(0.5, 0.0)));
  CHECK(std::isinf(bernoulli_relative_entropy(0.5, 1.0)));
  for (double x = 0.0; x <= 1.0; x += 0.05) {
    for (double p = 0.05; p < 1.0; p += 0.05) CHECK(bernoulli_relative_entropy(x, p) >= 0.0);
  }
  CHECK_THROWS_AS(bernoulli_relative_entropy(1.2, 0.5), ParamError);
  CHECK_THROWS_AS(bernoulli_relative_entropy(0.5, -0.1), ParamError);
}
