#include "finsys/surface_io.hpp"

#include <cmath>
#include <fstream>

namespace finsys {

namespace {

double number(const Json& j, const char* key) {
  if (!j.contains(key)) throw SurfaceFileError(std::string("missing parameter '") + key + "'");
  if (!j.at(key).is_number()) throw SurfaceFileError(std::string("parameter '") + key + "' must be a number");
  return j.at(key).get<double>();
}

double number_or(const Json& j, const char* key, double fallback) { return j.contains(key) ? number(j, key) : fallback; }

Vector2d vec(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 2)
    throw SurfaceFileError(std::string("parameter '") + key + "' must be a pair of numbers");
  return {j.at(key)[0].get<double>(), j.at(key)[1].get<double>()};
}

Json finite(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

SymmetryFlags symmetry_from_json(const Json& j) {
  SymmetryFlags f;
  if (!j.contains("symmetry")) return f;
  for (const auto& item : j.at("symmetry")) {
    const std::string s = item.get<std::string>();
    if (s == "soul") f.soul = true;
    else if (s == "soul_switching") f.soul_switching = true;
    else if (s == "rotational") f.rotational = true;
    else throw SurfaceFileError("unknown symmetry '" + s + "'");
  }
  return f;
}

Json symmetry_to_json(const SymmetryFlags& f) {
  return {{"soul", f.soul}, {"soul_switching", f.soul_switching}, {"rotational", f.rotational}};
}

}  // namespace

SymBodyd body_from_json(const Json& j) {
  const std::string type = j.value("type", "");
  try {
    if (type == "disc") return SymBodyd::disc();
    if (type == "square") return SymBodyd::square();
    if (type == "diamond") return SymBodyd::diamond();
    if (type == "truncated_disc") return SymBodyd::truncated_disc(number(j, "theta"));
    if (type == "capped_disc") return SymBodyd::capped_disc(number(j, "theta"));
    if (type == "ellipse") {
      const auto& q = j.at("q");
      Matrix2d m;
      m << q[0][0].get<double>(), q[0][1].get<double>(), q[1][0].get<double>(), q[1][1].get<double>();
      return SymBodyd::ellipse(m);
    }
    if (type == "support") return SymBodyd::from_support(j.at("values").get<std::vector<double>>());
    if (type == "polygon") {
      std::vector<Vector2d> pts;
      for (const auto& p : j.at("vertices")) pts.emplace_back(p[0].get<double>(), p[1].get<double>());
      return SymBodyd::hull_of(pts);
    }
  } catch (const InvalidBody& e) {
    throw SurfaceFileError(std::string("invalid body: ") + e.what());
  } catch (const Json::exception& e) {
    throw SurfaceFileError(std::string("malformed body: ") + e.what());
  }
  throw SurfaceFileError("unknown body type '" + type + "'");
}

Surface surface_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw SurfaceFileError("surface description needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "flat_torus") return flat_torus(body_from_json(j.at("body")), vec(j, "w1"), vec(j, "w2"));
    if (kind == "sup_norm_cylinder") return sup_norm_cylinder(number(j, "circumference"), number(j, "width"));
    if (kind == "sup_norm_mobius") return sup_norm_mobius(number(j, "lambda"));
    if (kind == "spherical_finsler_mobius") return spherical_finsler_mobius(number(j, "a"), j.value("dual", false));
    if (kind == "glued_wide_mobius") return glued_wide_mobius(number(j, "lambda"));
    if (kind == "almost_extremal_wide_mobius")
      return almost_extremal_wide_mobius(number(j, "lambda"), number_or(j, "neck", 1e-2 * 3.141592653589793));
    if (kind == "sup_norm_klein") return sup_norm_klein(number(j, "b"));
    if (kind == "klein_from_fa") return klein_from_fa();
    if (kind == "double_mobius") return double_mobius(surface_from_json(j.at("base")));
    if (kind == "mirrored_klein") return mirrored_klein(surface_from_json(j.at("base")));
    if (kind == "cut_klein") return cut_klein(surface_from_json(j.at("base")));
    if (kind == "random") {
      RandomSpec spec;
      spec.seed = j.value("seed", std::uint64_t{0});
      spec.topology = topology_from_string(j.value("topology", "torus"));
      spec.roughness = number_or(j, "roughness", 0.5);
      spec.symmetry = symmetry_from_json(j);
      return random_surface(spec);
    }
    if (kind == "grid") {
      const Json& cj = j.at("chart");
      Chart c;
      c.x0 = number_or(cj, "x0", 0);
      c.L = number(cj, "L");
      c.y0 = number(cj, "y0");
      c.y1 = number(cj, "y1");
      c.glide = cj.value("glide", false);
      c.y_periodic = cj.value("y_periodic", false);
      const int nx = j.at("nx").get<int>(), ny = j.at("ny").get<int>();
      std::vector<SymBodyd> bodies;
      for (const auto& b : j.at("bodies")) bodies.push_back(body_from_json(b));
      if (bodies.size() != static_cast<std::size_t>(nx + 1) * (ny + 1))
        throw SurfaceFileError("grid surface needs (nx + 1) (ny + 1) bodies");
      Surface s = grid_surface(c, nx, ny, std::move(bodies), j.value("name", "grid"));
      s.symmetry = symmetry_from_json(j);
      return s;
    }
  } catch (const SurfaceFileError&) {
    throw;
  } catch (const Json::exception& e) {
    throw SurfaceFileError("malformed '" + kind + "' description: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw SurfaceFileError(e.what());
  }
  throw SurfaceFileError("unknown surface kind '" + kind + "'");
}

Surface load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SurfaceFileError("cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SurfaceFileError("'" + path + "' is not valid JSON: " + e.what());
  }
  return surface_from_json(j);
}

Json to_json(const Surface& s) {
  const Chart& c = s.chart;
  return {{"name", s.name},
          {"topology", to_string(s.topology())},
          {"chart",
           {{"x0", c.x0}, {"L", c.L}, {"y0", c.y0}, {"y1", c.y1}, {"glide", c.glide}, {"y_periodic", c.y_periodic}, {"y_breaks", c.y_breaks}}},
          {"field", s.field->describe()},
          {"symmetry_claimed", symmetry_to_json(s.symmetry)}};
}

Json to_json(const Measured& m) { return {{"value", finite(m.value)}, {"error", finite(m.error)}}; }

Json to_json(const Invariants& inv) {
  Json j = {{"surface", inv.surface},
            {"topology", to_string(inv.topology)},
            {"symmetry_claimed", symmetry_to_json(inv.claimed)},
            {"symmetry_detected", symmetry_to_json(inv.detected)},
            {"vol_ht", to_json(inv.vol_ht)},
            {"vol_b", to_json(inv.vol_b)},
            {"sys", to_json(inv.sys)},
            {"sys_plus", to_json(inv.sys_plus)},
            {"sys_minus", to_json(inv.sys_minus)},
            {"grids", inv.grids},
            {"sys_values", inv.sys_values}};
  if (inv.h.value < kInfinity) {
    j["h"] = to_json(inv.h);
    j["h_values"] = inv.h_values;
    j["lambda"] = inv.lambda();
  }
  if (inv.sys_second.value < kInfinity) j["sys_second"] = to_json(inv.sys_second);
  if (inv.collapsed.value < kInfinity) j["collapsed_sys"] = to_json(inv.collapsed);
  return j;
}

Json to_json(const Verdict& v) {
  if (!v.applicable) return {{"bound", v.bound}, {"applicable", false}, {"error", v.error}};
  const char* verdict = v.evidence_only ? "EVIDENCE" : (v.pass ? "PASS" : "FAIL");
  return {{"bound", v.bound},     {"ratio", finite(v.ratio)}, {"bound_value", v.bound_value}, {"margin", finite(v.margin)},
          {"tolerance", v.tolerance}, {"verdict", verdict},      {"external", v.external}};
}

Json to_json(const InvariantReport& r) {
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
  return {{"invariants", to_json(r.inv)},
          {"grid", r.options.grid},
          {"refine", r.options.refine},
          {"radius", r.options.radius},
          {"verdicts", verdicts},
          {"all_pass", r.all_pass()}};
}

Json to_json(const PathResult& p) {
  Json poly = Json::array();
  for (const auto& q : p.witness) poly.push_back({q.x(), q.y()});
  Json lifted = Json::array();
  for (const auto& q : p.lifted) lifted.push_back({q.x(), q.y()});
  return {{"length", finite(p.length)},
          {"witness_length", finite(p.witness_length)},
          {"deck", {p.deck_n, p.deck_m}},
          {"witness", poly},
          {"lifted", lifted}};
}

Json to_json(const VolumeResult& v) {
  return {{"kind", to_string(v.kind)}, {"value", v.value}, {"error", v.estimated_error}, {"grid", {v.nx, v.ny}}};
}

Json to_json(const JohnReport& r) {
  Json j = {{"samples", r.samples},
            {"worst_lower", finite(r.worst_lower)},
            {"worst_upper", r.worst_upper},
            {"sandwich", r.sandwich},
            {"vol_ht", to_json(r.vol_ht)},
            {"vol_g", to_json(r.vol_g)},
            {"sys_f", to_json(r.sys_f)},
            {"sys_g", to_json(r.sys_g)},
            {"sys_link", r.sys_link},
            {"vol_link", r.vol_link},
            {"improved_vol_link_external", r.improved_vol_link},
            {"riemannian_ratio", r.riemannian_ratio},
            {"ratio", r.ratio},
            {"pass", r.pass}};
  if (r.offending_point) j["offending_point"] = {r.offending_point->x(), r.offending_point->y()};
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

Json to_json(const SuiteResult& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases) {
    Json verdicts = Json::array();
    for (const auto& v : c.report.verdicts) verdicts.push_back(to_json(v));
    cases.push_back({{"seed", c.seed},
                     {"surface", c.report.inv.surface},
                     {"vol_ht", c.report.inv.vol_ht.value},
                     {"sys", c.report.inv.sys.value},
                     {"verdicts", verdicts},
                     {"duran", c.duran_pass && c.duran_per_cell},
                     {"duran_worst_cell_excess", c.duran_worst},
                     {"john", c.john_pass},
                     {"john_worst_outer", c.john_worst_outer}});
  }
  Json j = {{"topology", to_string(r.options.topology)},
            {"seeds", r.options.seeds},
            {"grid", r.options.grid},
            {"refine", r.options.refine},
            {"failures", r.failures},
            {"cases", cases}};
  if (r.min_ratio_asymmetric < kInfinity) j["conjecture_min_ratio_asymmetric"] = r.min_ratio_asymmetric;
  return j;
}

}  // namespace finsys
