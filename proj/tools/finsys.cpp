// finsys: command-line front end.
// Exit status: 0 when every verdict passes, 2 on a numerical FAIL, 1 on usage errors.

#include "finsys/great_circles.hpp"
#include "finsys/surface_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace {

using namespace finsys;

constexpr int kUsage = 1;
constexpr int kFail = 2;
constexpr double kPi = std::numbers::pi;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "--out json" writes to stdout; anything else is a file name.
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "json" || out == "csv" || out == "svg" || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  const std::string tmp = out + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw UsageError("cannot write '" + out + "'");
    f << text;
  }
  if (std::rename(tmp.c_str(), out.c_str()) != 0) throw UsageError("cannot write '" + out + "'");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::pair<int, int> parse_grid(const std::string& g) {
  int nx = 0, ny = 0;
  char x = 0;
  std::istringstream in(g);
  in >> nx;
  if (in >> x) {
    if (x != 'x' || !(in >> ny)) throw UsageError("grid must look like N or NxM");
  } else {
    ny = nx;
  }
  if (nx < 1 || ny < 1) throw UsageError("grid must be positive");
  return {nx, ny};
}

LoopClass parse_class(const std::string& c) {
  if (c == "all") return LoopClass::All;
  if (c == "orientable") return LoopClass::Orientable;
  if (c == "nonorientable") return LoopClass::Nonorientable;
  throw UsageError("class must be all, orientable or nonorientable");
}

Json convergence(const std::vector<int>& grids, const std::vector<double>& values) {
  RefinedValue r{grids, values};
  Json rows = Json::array();
  for (std::size_t k = 0; k < grids.size(); ++k) rows.push_back({{"grid", grids[k]}, {"value", values[k]}});
  return {{"rows", rows}, {"gaps", r.gaps()}, {"stable", r.stable()}};
}

std::string trace_svg(double a, double theta0, const std::vector<TracePoint<double>>& pts) {
  // u in [-pi, pi] scaled to 720 px, v in [-a, a] to 300 px, with the band edges and cone glyphs
  const double W = 720, H = 300, pad = 20;
  const auto X = [&](double u) { return pad + (u + kPi) / (2 * kPi) * W; };
  const auto Y = [&](double v) { return pad + (a - v) / (2 * a) * H; };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + 2 * pad << "\" height=\"" << H + 2 * pad << "\">\n";
  out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W << "\" height=\"" << H
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  out << "<line x1=\"" << X(-kPi) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(kPi) << "\" y2=\"" << Y(0)
      << "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";
  // systolic cones at a few latitudes
  for (int k = -3; k <= 3; ++k) {
    const double v = a * k / 4.0;
    const double th = clairaut_angle(a, v);
    const double cx = X(-kPi + kPi / 8), cy = Y(v), r = 18;
    for (int s : {-1, 1}) {
      out << "<line x1=\"" << cx - r * std::cos(th) << "\" y1=\"" << cy - s * r * std::sin(th) << "\" x2=\"" << cx + r * std::cos(th)
          << "\" y2=\"" << cy + s * r * std::sin(th) << "\" stroke=\"#c44\"/>\n";
    }
  }
  out << "<polyline fill=\"none\" stroke=\"#226\" stroke-width=\"1.5\" points=\"";
  for (const auto& p : pts) {
    const double u = std::remainder(p.u, 2 * kPi);
    out << X(u) << ',' << Y(p.v) << ' ';
  }
  out << "\"/>\n<text x=\"" << pad << "\" y=\"14\" font-size=\"12\">a = " << a << ", theta0 = " << theta0 << "</text>\n</svg>\n";
  return out.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Finsler systolic toolkit"};
  app.require_subcommand(1);

  std::string file, out, kind = "ht", grid = "128", klass = "all", bounds = "all", topology = "klein", symmetry = "none",
                     reproduce = "paper", format = "csv";
  int n = 128, refine = 1, seeds = 100, radius = 3, first_seed = 1, suite_grid = 48, table_grid = 256, john_grid = 64;
  double a = kPi / 3, theta0 = 0, roughness = 0.5;

  auto* describe = app.add_subcommand("describe", "parse a surface file and check its field");
  describe->add_option("file", file, "surface description")->required();
  describe->add_option("--out", out, "json or a file name");

  auto* volume = app.add_subcommand("volume", "Holmes-Thompson or Busemann area");
  volume->add_option("file", file)->required();
  volume->add_option("--kind", kind)->check(CLI::IsMember({"ht", "busemann"}))->capture_default_str();
  volume->add_option("--grid", grid, "N or NxM")->capture_default_str();
  volume->add_option("--out", out);

  auto* sys = app.add_subcommand("systole", "shortest noncontractible loop");
  sys->add_option("file", file)->required();
  sys->add_option("--class", klass)->check(CLI::IsMember({"all", "orientable", "nonorientable"}))->capture_default_str();
  sys->add_option("--grid", n)->capture_default_str();
  sys->add_option("--refine", refine)->capture_default_str();
  sys->add_option("--radius", radius)->capture_default_str();
  sys->add_option("--out", out);

  auto* hgt = app.add_subcommand("height", "shortest boundary-to-boundary arc");
  hgt->add_option("file", file)->required();
  hgt->add_option("--grid", n)->capture_default_str();
  hgt->add_option("--refine", refine)->capture_default_str();
  hgt->add_option("--radius", radius)->capture_default_str();
  hgt->add_option("--out", out);

  auto* trace = app.add_subcommand("trace", "great circle in the band S_a");
  trace->add_option("--a", a)->capture_default_str();
  trace->add_option("--theta0", theta0)->capture_default_str();
  trace->add_option("--out", format, "csv or svg, or a file name ending in .csv / .svg");

  auto* chk = app.add_subcommand("check", "invariants and bound verdicts");
  chk->add_option("file", file)->required();
  chk->add_option("--bounds", bounds, "all or a comma list")->capture_default_str();
  chk->add_option("--grid", n)->capture_default_str();
  chk->add_option("--refine", refine)->capture_default_str();
  chk->add_option("--radius", radius)->capture_default_str();
  chk->add_option("--out", out);

  auto* john = app.add_subcommand("john", "John ellipse chain on a Klein bottle");
  john->add_option("file", file)->required();
  john->add_option("--grid", john_grid)->capture_default_str();
  john->add_option("--out", out);

  auto* suite = app.add_subcommand("suite", "randomized property suite");
  suite->add_option("--topology", topology)->check(CLI::IsMember({"torus", "cylinder", "mobius", "klein"}))->capture_default_str();
  suite->add_option("--seeds", seeds)->capture_default_str();
  suite->add_option("--first-seed", first_seed)->capture_default_str();
  suite->add_option("--symmetry", symmetry)->check(CLI::IsMember({"none", "soul", "soul_switching", "rotational", "cycle"}))->capture_default_str();
  suite->add_option("--roughness", roughness)->capture_default_str();
  suite->add_option("--grid", suite_grid)->capture_default_str();
  suite->add_option("--out", out);

  auto* table = app.add_subcommand("table", "closed-form values against the pipeline, as CSV");
  table->add_option("--reproduce", reproduce)->check(CLI::IsMember({"paper"}))->capture_default_str();
  table->add_option("--grid", table_grid)->capture_default_str();
  table->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (*describe) {
    const Surface s = load_surface(file);
    Json j = to_json(s);
    const FieldCheck fc = check_field(s, 64);
    const SymmetryResidual sr = symmetry_residuals(s, 32);
    const SymmetryFlags det = detect_symmetry(s, 1e-8, 32);
    j["equivariance_residual"] = fc.equivariance;
    j["lipschitz_estimate"] = fc.continuity;
    j["symmetry_residual"] = {{"soul", sr.soul}, {"soul_switching", sr.soul_switching}, {"rotational", sr.rotational}};
    j["symmetry_detected"] = {{"soul", det.soul}, {"soul_switching", det.soul_switching}, {"rotational", det.rotational}};
    emit(out, j.dump(2));
    return 0;
  }
  if (*volume) {
    const Surface s = load_surface(file);
    const auto [nx, ny] = parse_grid(grid);
    const VolumeResult v = kind == "ht" ? volume_ht(s, nx, ny) : volume_busemann(s, nx, ny);
    emit(out, to_json(v).dump(2));
    return 0;
  }
  if (*sys || *hgt) {
    const Surface s = load_surface(file);
    const LoopClass c = parse_class(klass);
    if (*hgt && !s.chart.has_boundary()) throw UsageError("height needs a surface with boundary");
    std::vector<int> grids;
    std::vector<double> values;
    PathResult last;
    for (int k = refine; k >= 0; --k) {
      const int g = std::max(8, n >> k);
      SystoleOptions opt;
      opt.radius = radius;
      opt.witness = k == 0;
      last = *sys ? systole(s, g, opt).get(c) : height(s, g, radius);
      grids.push_back(g);
      values.push_back(last.length);
    }
    Json j = to_json(last);
    j["surface"] = s.name;
    j["quantity"] = *sys ? std::string("sys_") + to_string(c) : std::string("h");
    j["value"] = last.length;
    j["convergence"] = convergence(grids, values);
    emit(out, j.dump(2));
    return 0;
  }
  if (*trace) {
    const auto pts = trace_great_circle(0.0, theta0, a, 720);
    const bool svg = format == "svg" || ends_with(format, ".svg");
    if (!svg && format != "csv" && !ends_with(format, ".csv")) throw UsageError("trace output must be csv or svg");
    if (svg) {
      emit(format, trace_svg(a, theta0, pts));
    } else {
      std::ostringstream csv;
      csv << "tau,u,v,du,dv,theta_v\n";
      for (const auto& p : pts) csv << p.tau << ',' << p.u << ',' << p.v << ',' << p.du << ',' << p.dv << ',' << clairaut_angle(a, p.v) << '\n';
      emit(format, csv.str());
    }
    return 0;
  }
  if (*chk) {
    const Surface s = load_surface(file);
    CheckOptions opt;
    opt.grid = n;
    opt.refine = refine;
    opt.radius = radius;
    if (bounds != "all") {
      std::istringstream in(bounds);
      std::string item;
      try {
        while (std::getline(in, item, ',')) opt.bounds.push_back(bound_from_string(item));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    const InvariantReport rep = check(s, opt);
    Json j = to_json(rep);
    j["surface_description"] = to_json(s);
    emit(out, j.dump(2));
    return rep.all_pass() ? 0 : kFail;
  }
  if (*john) {
    const Surface s = load_surface(file);
    if (s.topology() != Topology::Klein) throw UsageError("john needs a Klein bottle");
    const JohnReport rep = john_lower_bound_check(s, john_grid);
    emit(out, to_json(rep).dump(2));
    return rep.pass ? 0 : kFail;
  }
  if (*suite) {
    SuiteOptions opt;
    opt.topology = topology_from_string(topology);
    opt.seeds = seeds;
    opt.first_seed = static_cast<std::uint64_t>(first_seed);
    opt.roughness = roughness;
    opt.grid = suite_grid;
    if (symmetry == "cycle") opt.cycle_symmetry = true;
    opt.symmetry.soul = symmetry == "soul";
    opt.symmetry.soul_switching = symmetry == "soul_switching";
    opt.symmetry.rotational = symmetry == "rotational";
    const SuiteResult r = run_suite(opt);
    emit(out, to_json(r).dump(2));
    return r.all_pass() ? 0 : kFail;
  }
  if (*table) {
    const auto rows = reproduction_table(table_grid);
    std::ostringstream csv;
    csv.precision(10);
    csv << "criterion,surface,quantity,computed,expected,rel_error,tolerance,verdict\n";
    bool ok = true;
    for (const auto& r : rows) {
      csv << r.criterion << ',' << r.surface << ',' << r.quantity << ',' << r.computed << ',' << r.expected << ',' << r.rel_error
          << ',' << r.tolerance << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
      ok = ok && r.pass;
    }
    emit(out, csv.str());
    return ok ? 0 : kFail;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "finsys: " << e.what() << '\n';
    return kUsage;
  } catch (const SurfaceFileError& e) {
    std::cerr << "finsys: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "finsys: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "finsys: " << e.what() << '\n';
    return kFail;
  }
}
