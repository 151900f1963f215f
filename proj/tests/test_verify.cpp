#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "finsys/surface_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

using namespace finsys;

namespace {

constexpr double kPi = std::numbers::pi;

const Verdict& verdict(const InvariantReport& r, const std::string& name) {
  for (const auto& v : r.verdicts)
    if (v.bound == name) return v;
  throw std::runtime_error("no verdict " + name);
}

// Same norm on a spread of points and directions.
bool same_field(const Surface& a, const Surface& b) {
  const Chart& c = a.chart;
  for (int k = 0; k < 40; ++k) {
    const Vector2d p(c.x0 + c.L * (0.13 + 0.021 * k), c.y0 + c.T() * (0.07 + 0.022 * k));
    const Vector2d v = unit_direction<double>(0.37 * k);
    if (std::abs(a.norm(p, v) - b.norm(p, v)) > 1e-12) return false;
  }
  return a.chart.L == b.chart.L && a.chart.T() == b.chart.T() && a.topology() == b.topology();
}

}  // namespace

TEST_CASE("fm bound") {
  CHECK(fm_bound(1) == doctest::Approx(2 / kPi));
  CHECK(fm_bound(1 - 1e-12) == doctest::Approx(fm_bound(1 + 1e-12)));
  CHECK(fm_bound(0.3) == doctest::Approx(2 / kPi));
  CHECK(fm_bound(2) == doctest::Approx(3 / (2 * kPi)));
  CHECK(fm_bound(1e9) == doctest::Approx(1 / kPi));
  double previous = fm_bound(0.01);
  for (double l = 0.02; l < 50; l *= 1.1) {
    const double b = fm_bound(l);
    CHECK(b <= previous + 1e-15);
    CHECK(b >= 1 / kPi);
    previous = b;
  }
  CHECK_THROWS_AS(fm_bound(0), std::invalid_argument);
  CHECK_THROWS_AS(fm_bound(-1), std::invalid_argument);
}

TEST_CASE("bound catalogue") {
  CHECK(bound_catalogue().size() == 8);
  for (const auto& b : bound_catalogue()) CHECK(bound_from_string(b.name) == b.id);
  CHECK(bound_info(BoundId::KleinJohnImproved).external);
  CHECK_FALSE(bound_info(BoundId::KleinSharp).external);
  CHECK_THROWS_AS(bound_from_string("systolic_freedom"), std::invalid_argument);
}

TEST_CASE("equality families sit on their bounds") {
  CheckOptions opt;
  opt.grid = 64;
  const InvariantReport wide = check(glued_wide_mobius(2), opt);
  const Verdict& fm = verdict(wide, "mobius_piecewise");
  CHECK(fm.bound_value == doctest::Approx(3 / (2 * kPi)));
  CHECK(std::abs(fm.margin) <= 0.02);
  CHECK(fm.pass);
  const InvariantReport klein = check(sup_norm_klein(kPi / 2), opt);
  const Verdict& ks = verdict(klein, "klein_sharp");
  CHECK(ks.ratio == doctest::Approx(2 / kPi).epsilon(0.02));
  CHECK(std::abs(ks.margin) <= 0.02);
  CHECK(ks.pass);
  CHECK_FALSE(ks.evidence_only);
  CHECK(klein.all_pass());
}

TEST_CASE("round square torus") {
  CheckOptions opt;
  opt.grid = 32;
  const InvariantReport r = check(flat_torus(SymBodyd::disc(), {1, 0}, {0, 1}), opt);
  const Verdict& v = verdict(r, "finsler_loewner_torus");
  CHECK(v.ratio == doctest::Approx(1).epsilon(1e-9));
  CHECK(v.margin == doctest::Approx(1 - 2 / kPi).epsilon(1e-9));
  CHECK(verdict(r, "keen_finsler").ratio == doctest::Approx(1).epsilon(1e-9));
  CHECK(r.all_pass());
}

TEST_CASE("inapplicable bounds are reported, not fatal") {
  CheckOptions opt;
  opt.grid = 16;
  opt.refine = 0;
  opt.bounds = {BoundId::KleinSharp, BoundId::FinslerLoewnerTorus};
  const InvariantReport r = check(flat_torus(SymBodyd::square(), {2, 0}, {0, 2}), opt);
  REQUIRE(r.verdicts.size() == 2);
  CHECK_FALSE(r.verdicts[0].applicable);
  CHECK_FALSE(r.verdicts[0].error.empty());
  CHECK(r.verdicts[1].applicable);
  CHECK(r.verdicts[1].ratio == doctest::Approx(2 / kPi));
  CHECK(r.all_pass());
}

TEST_CASE("a verdict fails only beyond its tolerance") {
  Invariants inv;
  inv.topology = Topology::Klein;
  inv.detected.soul = true;
  inv.sys = {kPi, 0.01};
  inv.vol_ht = {2 * kPi * 0.995, 0.0};
  const Verdict near = evaluate(BoundId::KleinSharp, inv);
  CHECK(near.margin < 0);
  CHECK(near.pass);
  inv.vol_ht = {2 * kPi * 0.95, 0.0};
  CHECK_FALSE(evaluate(BoundId::KleinSharp, inv).pass);
  // without a symmetry the sharp constant is only a conjecture
  inv.detected = {};
  const Verdict probe = evaluate(BoundId::KleinSharp, inv);
  CHECK(probe.evidence_only);
  InvariantReport rep;
  rep.verdicts = {probe};
  CHECK(rep.all_pass());
}

TEST_CASE("surface descriptions parse") {
  CHECK(same_field(surface_from_json(Json::parse(R"({"kind": "sup_norm_mobius", "lambda": 0.5})")), sup_norm_mobius(0.5)));
  CHECK(same_field(surface_from_json(Json::parse(R"({"kind": "spherical_finsler_mobius", "a": 0.7, "dual": true})")),
                   spherical_finsler_mobius(0.7, true)));
  CHECK(same_field(surface_from_json(Json::parse(R"({"kind": "flat_torus", "body": {"type": "square"}, "w1": [2, 0], "w2": [0, 2]})")),
                   flat_torus(SymBodyd::square(), {2, 0}, {0, 2})));
  CHECK(same_field(surface_from_json(Json::parse(R"({"kind": "double_mobius", "base": {"kind": "sup_norm_mobius", "lambda": 1}})")),
                   double_mobius(sup_norm_mobius(1))));
  CHECK(same_field(surface_from_json(Json::parse(R"({"kind": "random", "seed": 7, "topology": "klein", "symmetry": ["soul"]})")),
                   random_surface({7, Topology::Klein, 0.5, {true, false, false}})));
  const Json polygon = Json::parse(R"({"type": "polygon", "vertices": [[1, 0], [0, 2], [-1, 0], [0, -2]]})");
  CHECK(area(body_from_json(polygon)) == doctest::Approx(4));
  const Json td = Json::parse(R"({"type": "truncated_disc", "theta": 0.5})");
  CHECK(area(body_from_json(td)) == doctest::Approx(1 + std::sin(1.0)));
}

TEST_CASE("malformed descriptions are rejected") {
  CHECK_THROWS_AS(surface_from_json(Json::parse(R"({"lambda": 1})")), SurfaceFileError);
  CHECK_THROWS_AS(surface_from_json(Json::parse(R"({"kind": "sphere"})")), SurfaceFileError);
  CHECK_THROWS_AS(surface_from_json(Json::parse(R"({"kind": "sup_norm_mobius"})")), SurfaceFileError);
  CHECK_THROWS_AS(surface_from_json(Json::parse(R"({"kind": "sup_norm_mobius", "lambda": "one"})")), SurfaceFileError);
  CHECK_THROWS_AS(surface_from_json(Json::parse(R"({"kind": "sup_norm_mobius", "lambda": -1})")), SurfaceFileError);
  CHECK_THROWS_AS(body_from_json(Json::parse(R"({"type": "truncated_disc", "theta": 0})")), SurfaceFileError);
  CHECK_THROWS_AS(body_from_json(Json::parse(R"({"type": "blob"})")), SurfaceFileError);
  CHECK_THROWS_AS(load_surface("/nonexistent/surface.json"), SurfaceFileError);
  const std::string path = "test_verify_bad.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_surface(path), SurfaceFileError);
  std::remove(path.c_str());
}

TEST_CASE("reports serialize") {
  CheckOptions opt;
  opt.grid = 16;
  opt.refine = 0;
  const InvariantReport r = check(sup_norm_mobius(1), opt);
  const Json j = Json::parse(to_json(r).dump());
  CHECK(j.at("invariants").at("vol_ht").at("value").get<double>() == doctest::Approx(2 * kPi));
  CHECK(j.at("invariants").at("topology") == "mobius");
  CHECK(j.at("invariants").at("lambda").get<double>() == doctest::Approx(1).epsilon(0.02));
  CHECK(j.at("all_pass").get<bool>());
  for (const auto& v : j.at("verdicts")) CHECK(v.at("verdict") == "PASS");
  CHECK(to_json(Measured{kInfinity, 0}).at("value").is_null());
}

TEST_CASE("John field of the sup-norm Klein bottle") {
  const JohnReport r = john_lower_bound_check(sup_norm_klein(kPi / 2), 32, 8);
  CHECK(r.sandwich);
  CHECK(r.worst_upper <= 1 + 1e-6);
  CHECK(r.worst_lower >= 1 - 1e-6);
  CHECK(r.sys_link);
  CHECK(r.sys_g.value >= r.sys_f.value * (1 - 1e-9));
  // the John ellipse of the square is the unit disc
  CHECK(r.vol_g.value == doctest::Approx(kPi * kPi).epsilon(1e-4));
  CHECK(r.vol_link);
  CHECK(r.ratio >= std::sqrt(2.0) / kPi);
  CHECK(r.pass);
  CHECK_THROWS_AS(john_lower_bound_check(sup_norm_mobius(1)), std::invalid_argument);
}

TEST_CASE("small suites pass") {
  for (auto t : {Topology::Torus, Topology::Cylinder, Topology::Mobius, Topology::Klein}) {
    SuiteOptions opt;
    opt.topology = t;
    opt.seeds = 2;
    opt.grid = 24;
    opt.duran_grid = 16;
    opt.cycle_symmetry = t == Topology::Klein;
    const SuiteResult r = run_suite(opt);
    CAPTURE(to_string(t));
    CHECK(r.cases.size() == 2);
    CHECK(r.all_pass());
    for (const auto& c : r.cases) {
      CHECK(c.duran_pass);
      CHECK(c.duran_per_cell);
      CHECK(c.john_pass);
      CHECK(c.john_worst_outer <= std::sqrt(2.0) + 1e-9);
    }
  }
}

TEST_CASE("almost extremal wide bands approach the bound") {
  const auto rows = almost_extremal_margins(2, {0.2, 0.1, 0.05}, 48);
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].margin >= -0.02);
    if (k > 0) CHECK(std::abs(rows[k].margin) <= std::abs(rows[k - 1].margin) + 1e-3);
  }
  CHECK(std::abs(rows.back().margin) <= 0.02);
}
