#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "finsys/great_circles.hpp"

#include <cmath>
#include <numbers>

using namespace finsys;

namespace {

constexpr double kPi = std::numbers::pi;
using V3 = Eigen::Vector3d;

// Oracle: the great circle leaving the equator eastward at angle a peaks at
// latitude a. Find where it crosses latitude v by bisection and measure the
// angle between its finite-difference tangent and the parallel.
double crossing_angle(double a, double v) {
  const auto point = [&](double tau) {
    return V3(std::cos(tau), std::sin(tau) * std::cos(a), std::sin(tau) * std::sin(a));
  };
  double lo = 0, hi = kPi / 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (point(mid).z() < std::sin(v) ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi), h = 1e-6;
  const V3 tangent = (point(tau + h) - point(tau - h)).normalized();
  const V3 p = point(tau);
  const V3 east = V3(-p.y(), p.x(), 0).normalized();
  return std::acos(std::clamp(tangent.dot(east), -1.0, 1.0));
}

}  // namespace

TEST_CASE("Clairaut angles") {
  for (double a : {0.3, kPi / 4, 1.2}) {
    CHECK(clairaut_angle(a, 0.0) == doctest::Approx(a).epsilon(1e-14));
    CHECK(clairaut_angle(a, a) == doctest::Approx(0).scale(1));
    CHECK(clairaut_angle(a, -0.5 * a) == doctest::Approx(clairaut_angle(a, 0.5 * a)));
  }
  const double th = clairaut_angle(kPi / 3, kPi / 6);
  CHECK(th == doctest::Approx(std::acos(1 / std::sqrt(3.0))).epsilon(1e-14));
  CHECK(th == doctest::Approx(0.9553).epsilon(1e-4));
  CHECK(th == doctest::Approx(crossing_angle(kPi / 3, kPi / 6)).epsilon(1e-6));
  for (double v : {0.1, 0.4, 0.8}) CHECK(clairaut_angle(1.0, v) == doctest::Approx(crossing_angle(1.0, v)).epsilon(1e-6));
  CHECK_THROWS_AS(clairaut_angle(0.5, 0.6), std::invalid_argument);
  CHECK(clairaut_angle(0.5L, 0.25L) == doctest::Approx(clairaut_angle(0.5, 0.25)));
}

TEST_CASE("traced great circles") {
  const double a = kPi / 3;
  for (double theta0 : {0.0, 0.4, a}) {
    CAPTURE(theta0);
    const auto trace = trace_great_circle(0.7, theta0, a, 1440);
    REQUIRE(trace.size() == 1441);
    double top = 0, round = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      top = std::max(top, std::abs(trace[k].v));
      if (k > 0) {
        const auto& p = trace[k - 1];
        const auto& q = trace[k];
        const V3 x(std::cos(p.v) * std::cos(p.u), std::cos(p.v) * std::sin(p.u), std::sin(p.v));
        const V3 y(std::cos(q.v) * std::cos(q.u), std::cos(q.v) * std::sin(q.u), std::sin(q.v));
        round += (y - x).norm();
      }
    }
    CHECK(top == doctest::Approx(theta0).epsilon(1e-6).scale(1));
    CHECK(round == doctest::Approx(2 * kPi).epsilon(1e-5));
    // unit round speed
    for (const auto& q : trace)
      CHECK(std::hypot(std::cos(q.v) * q.du, q.dv) == doctest::Approx(1).epsilon(1e-9));
  }
  // the extreme circle touches the edge of the band
  const auto c = trace_great_circle(0.0, a, a, 4);
  CHECK(c[1].v == doctest::Approx(a));
  CHECK(c[1].dv == doctest::Approx(0).scale(1));
  // circles no steeper than the band keep every sample
  CHECK(trace_great_circle(0.0, 0.5, 1.0, 720).size() == 721);
  CHECK(trace_great_circle(0.0, 1.0, 1.2, 720).size() == 721);
  CHECK_THROWS_AS(trace_great_circle(0.0, 0.8, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(trace_great_circle(0.0, 0.1, kPi / 2), std::invalid_argument);
}

TEST_CASE("great circles in the band have F_a length pi") {
  for (double a : {kPi / 6, kPi / 4, kPi / 3, 1.4}) {
    CAPTURE(a);
    CHECK(fa_length_of_great_circle(0.0, a) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(fa_length_of_great_circle(a, a) == doctest::Approx(kPi).epsilon(1e-6));
    CHECK(fa_length_of_great_circle(0.6 * a, a) == doctest::Approx(kPi).epsilon(1e-6));
  }
}

TEST_CASE("F_a gauge is round inside the cone") {
  const double a = 1.0;
  for (double v : {0.0, 0.3, 0.9}) {
    const double th = clairaut_angle(a, v);
    for (double phi : {0.0, 0.5 * th, th}) CHECK(fa_gauge(a, v, Vec2<double>(std::cos(phi), std::sin(phi))) == doctest::Approx(1));
    const double phi = 0.5 * (th + kPi / 2);
    CHECK(fa_gauge(a, v, Vec2<double>(std::cos(phi), std::sin(phi))) > 1);
  }
  // at the edge the cone closes: only the parallel has finite length
  CHECK(fa_gauge(a, a, Vec2<double>(2, 0)) == doctest::Approx(2));
  CHECK(std::isinf(fa_gauge(a, a, Vec2<double>(0, 1))));
}

TEST_CASE("height integral equals pi") {
  CHECK(height_integrand_check(kPi / 4) == doctest::Approx(kPi).epsilon(1e-8));
  CHECK(height_integrand_check(kPi / 3) == doctest::Approx(kPi).epsilon(1e-8));
  CHECK(std::abs(height_integrand_check(1.57) - kPi) <= 1e-6);
  for (int k = 0; k < 20; ++k) {
    const double a = 0.1 + 1.4 * (k + 0.5) / 20;
    CAPTURE(a);
    CHECK(std::abs(height_integrand_check(a) - kPi) <= 1e-6);
  }
  CHECK_THROWS_AS(height_integrand_check(0.0), std::invalid_argument);
  CHECK_THROWS_AS(height_integrand_check(kPi / 2), std::invalid_argument);
}
