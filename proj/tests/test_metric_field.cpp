#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "finsys/great_circles.hpp"
#include "finsys/metric_field.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace finsys;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Surface> shipped() {
  return {flat_torus(SymBodyd::square(), {2, 0}, {0, 2}),
          sup_norm_cylinder(kPi, 1),
          sup_norm_mobius(0.5),
          spherical_finsler_mobius(kPi / 4),
          spherical_finsler_mobius(kPi / 3, true),
          glued_wide_mobius(2),
          almost_extremal_wide_mobius(2),
          sup_norm_klein(kPi / 2),
          klein_from_fa(),
          double_mobius(sup_norm_mobius(0.5)),
          mirrored_klein(spherical_finsler_mobius(kPi / 3)),
          cut_klein(sup_norm_klein(kPi / 2))};
}

}  // namespace

TEST_CASE("topology follows the generator parities") {
  CHECK(flat_torus(SymBodyd::disc(), {1, 0}, {0, 1}).topology() == Topology::Torus);
  CHECK(sup_norm_cylinder(1, 1).topology() == Topology::Cylinder);
  CHECK(sup_norm_mobius(1).topology() == Topology::Mobius);
  CHECK(sup_norm_klein(1).topology() == Topology::Klein);
  CHECK(klein_from_fa().topology() == Topology::Klein);
  CHECK(cut_klein(sup_norm_klein(1)).topology() == Topology::Mobius);
  CHECK(topology_from_string("klein") == Topology::Klein);
  CHECK_THROWS(topology_from_string("sphere"));
}

TEST_CASE("deck action and reduction are consistent") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (const Surface& s : shipped()) {
    const Chart& c = s.chart;
    for (int k = 0; k < 50; ++k) {
      const Vector2d p(c.x0 + u(rng) * c.L, c.y0 + u(rng) * c.T());
      const int n = static_cast<int>(u(rng) * 7) - 3;
      const int m = c.y_periodic ? static_cast<int>(u(rng) * 5) - 2 : 0;
      bool flip = false;
      const Vector2d q = c.reduce(c.apply(n, m, p), flip);
      CHECK((q - p).norm() < 1e-9);
      CHECK(flip == (c.glide && n % 2 != 0));
    }
  }
}

TEST_CASE("shipped fields are equivariant and continuous") {
  for (const Surface& s : shipped()) {
    CAPTURE(s.name);
    const FieldCheck fc = check_field(s, 64);
    CHECK(fc.equivariance <= 1e-6);
    CHECK(std::isfinite(fc.continuity));
  }
  CHECK(check_field(sup_norm_mobius(0.5)).equivariance <= 1e-10);
  CHECK(check_field(sup_norm_klein(kPi / 2)).equivariance <= 1e-10);
}

TEST_CASE("random fields descend to the quotient") {
  for (auto t : {Topology::Torus, Topology::Cylinder, Topology::Mobius, Topology::Klein}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Surface s = random_surface({seed, t, 0.6, {}});
      CHECK(check_field(s, 32).equivariance <= 1e-9);
    }
  }
}

TEST_CASE("imposed symmetries are detected") {
  const SymmetryFlags all = detect_symmetry(sup_norm_klein(kPi / 2));
  CHECK(all.soul);
  CHECK(all.soul_switching);
  CHECK(all.rotational);
  for (int k = 0; k < 3; ++k) {
    RandomSpec spec{static_cast<std::uint64_t>(10 + k), Topology::Klein, 0.5, {}};
    spec.symmetry.soul = k == 0;
    spec.symmetry.soul_switching = k == 1;
    spec.symmetry.rotational = k == 2;
    const SymmetryFlags f = detect_symmetry(random_surface(spec), 1e-9);
    // an x-independent field invariant under the glide is invariant under (x, -y)
    CHECK(f.soul == (spec.symmetry.soul || spec.symmetry.rotational));
    CHECK(f.soul_switching == spec.symmetry.soul_switching);
    CHECK(f.rotational == spec.symmetry.rotational);
  }
}

TEST_CASE("F_a is the round metric inside the systolic cone") {
  const double a = kPi / 3;
  const SphericalBandField f(a, false);
  for (double t : {-1.2, -0.5, 0.0, 0.4, 1.1}) {
    const double v = f.latitude(t);
    const double th = clairaut_angle(a, v);
    CHECK(f.theta(t) == doctest::Approx(th).epsilon(1e-12));
    // chart vector with round-frame angle phi: frame = diag(cos v, sin a |cos t| / cos v)
    const double fu = std::cos(v), ft = std::sin(a) * std::abs(std::cos(t)) / std::cos(v);
    for (double phi : {0.0, 0.3 * th, 0.9 * th, -0.7 * th}) {
      const Vector2d chart(std::cos(phi) / fu, std::sin(phi) / ft);
      CHECK(f.norm({0.2, t}, chart) == doctest::Approx(1).epsilon(1e-9));
    }
    // beyond the cone the gauge is |sin phi| / sin theta
    for (double phi : {th + 0.1, 1.4}) {
      if (phi >= kPi / 2) continue;
      const Vector2d chart(std::cos(phi) / fu, std::sin(phi) / ft);
      CHECK(f.norm({0.2, t}, chart) == doctest::Approx(std::sin(phi) / std::sin(th)).epsilon(1e-9));
      CHECK(fa_gauge(a, v, Vec2<double>(std::cos(phi), std::sin(phi))) ==
            doctest::Approx(std::sin(phi) / std::sin(th)).epsilon(1e-9));
    }
  }
}

TEST_CASE("local bodies reproduce the norm") {
  for (const Surface& s : shipped()) {
    CAPTURE(s.name);
    const Chart& c = s.chart;
    const Vector2d p(c.x0 + 0.3 * c.L, c.y0 + 0.37 * c.T());
    const LocalNorm ln = s.local(p);
    for (int k = 0; k < 16; ++k) {
      const Vector2d v = unit_direction<double>(kPi * (k + 0.5) / 16);
      CHECK(gauge(ln.body, Vector2d(ln.frame * v)) == doctest::Approx(s.norm(p, v)).epsilon(1e-3));
    }
  }
}

TEST_CASE("constructions reject bad parameters") {
  CHECK_THROWS_AS(flat_torus(SymBodyd::disc(), {1, 2}, {2, 4}), std::invalid_argument);
  CHECK_THROWS_AS(sup_norm_mobius(0), std::invalid_argument);
  CHECK_THROWS_AS(spherical_finsler_mobius(kPi / 2), std::invalid_argument);
  CHECK_THROWS_AS(glued_wide_mobius(0.5), std::invalid_argument);
  CHECK_THROWS_AS(double_mobius(sup_norm_klein(1)), std::invalid_argument);
  CHECK_THROWS_AS(random_surface({1, Topology::Torus, 1.5, {}}), std::invalid_argument);
}

TEST_CASE("double_mobius mirrors the field across the boundary") {
  const Surface m = spherical_finsler_mobius(kPi / 4);
  const Surface d = double_mobius(m);
  CHECK(d.chart.T() == doctest::Approx(2 * m.chart.T()));
  const double top = m.chart.y1;
  for (double y : {0.1, 0.7, 1.3}) {
    const Vector2d v(0.4, 0.9);
    CHECK(d.norm({0.3, top + y}, v) == doctest::Approx(m.norm({0.3, top - y}, {v.x(), -v.y()})));
    CHECK(d.norm({0.3, y}, v) == doctest::Approx(m.norm({0.3, y}, v)));
  }
}
