// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion 4   run one
//
// Exit status is 0 when every selected criterion passes.

#include "finsys/great_circles.hpp"
#include "finsys/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace finsys;

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Collects the individual checks of one criterion; details go to stdout as
// indented lines, the verdict line comes last.
struct Criterion {
  int id;
  std::string title;
  bool ok = true;
  int checks = 0;

  void expect(bool cond, const std::string& what) {
    ++checks;
    if (!cond) {
      ok = false;
      std::printf("    FAIL %s\n", what.c_str());
    }
  }
  void note(const std::string& what) const { std::printf("    %s\n", what.c_str()); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double value, double expected) { return std::abs(value - expected) / std::abs(expected); }

// Graph values are lengths of actual curves: at or above the closed form.
void from_above(Criterion& c, const std::string& what, double value, double expected, double tol) {
  const bool ok = value >= expected * (1 - 1e-9) && value <= expected * (1 + tol);
  c.expect(ok, fmt("%s = %.6f, expected %.6f from above within %.0f%%", what.c_str(), value, expected, 100 * tol));
  if (ok) c.note(fmt("%s = %.6f (expected %.6f, %+.3f%%)", what.c_str(), value, expected, 100 * (value / expected - 1)));
}

void within(Criterion& c, const std::string& what, double value, double expected, double tol) {
  const double r = rel(value, expected);
  c.expect(r <= tol, fmt("%s = %.8f, expected %.8f within %g (rel error %.3g)", what.c_str(), value, expected, tol, r));
  if (r <= tol) c.note(fmt("%s = %.8f (expected %.8f, rel error %.3g)", what.c_str(), value, expected, r));
}

void ladder(Criterion& c, const std::string& what, const RefinedValue& v) {
  std::ostringstream s;
  for (std::size_t k = 0; k < v.values.size(); ++k) s << (k ? ", " : "") << v.grids[k] << ": " << v.values[k];
  c.expect(v.stable(), what + " refinement not stable (" + s.str() + ")");
  if (v.stable()) c.note(what + " ladder " + s.str());
}

const std::vector<int> kLadder = {64, 128, 256};

std::string label(const char* base, double p) { return fmt("%s(%.4f)", base, p); }

// 1. HT area of M_{F_a} is 2 pi.
void criterion1(Criterion& c) {
  for (double a : {kPi / 6, kPi / 4, kPi / 3}) {
    const Stopwatch t;
    const VolumeResult v = volume_ht(spherical_finsler_mobius(a), 256, 256);
    within(c, label("vol_HT F_a", a), v.value, 2 * kPi, 0.01);
    c.expect(t.seconds() <= 10, fmt("runtime %.1f s > 10 s", t.seconds()));
  }
}

// 2. (sys-, sys+, h) of M_{F_a} is (pi, 2 pi cos a, pi).
void criterion2(Criterion& c) {
  SystoleOptions so;
  so.witness = false;
  for (double a : {kPi / 6, kPi / 4, kPi / 3}) {
    const Stopwatch t;
    const Surface s = spherical_finsler_mobius(a);
    RefinedValue minus{kLadder, {}}, plus{kLadder, {}}, h{kLadder, {}};
    for (int n : kLadder) {
      const SystoleResult r = systole(s, n, so);
      minus.values.push_back(r.nonorientable.length);
      plus.values.push_back(r.orientable.length);
      h.values.push_back(height(s, n).length);
    }
    from_above(c, label("sys- F_a", a), minus.value(), kPi, 0.02);
    from_above(c, label("sys+ F_a", a), plus.value(), 2 * kPi * std::cos(a), 0.02);
    from_above(c, label("h F_a", a), h.value(), kPi, 0.02);
    ladder(c, label("sys- F_a", a), minus);
    ladder(c, label("sys+ F_a", a), plus);
    ladder(c, label("h F_a", a), h);
    c.expect(t.seconds() <= 120, fmt("runtime %.1f s > 120 s", t.seconds()));
    c.note(fmt("a = %.4f done in %.1f s", a, t.seconds()));
  }
}

// 3. Dual family: h = pi (1 - cos a), vol_HT = 2 pi sin^2 a.
void criterion3(Criterion& c) {
  for (double a : {kPi / 4, kPi / 3}) {
    const Stopwatch t;
    const Surface s = spherical_finsler_mobius(a, true);
    const VolumeResult v = volume_ht(s, 256, 256);
    within(c, label("vol_HT dual F_a", a), v.value, 2 * kPi * std::sin(a) * std::sin(a), 0.01);
    RefinedValue h{kLadder, {}};
    for (int n : kLadder) h.values.push_back(height(s, n).length);
    from_above(c, label("h dual F_a", a), h.value(), kPi * (1 - std::cos(a)), 0.02);
    ladder(c, label("h dual F_a", a), h);
    c.expect(t.seconds() <= 120, fmt("runtime %.1f s > 120 s", t.seconds()));
  }
}

// 4. sup_norm_mobius(lambda): (vol, sys, h) = (2 lambda pi, pi, lambda pi).
void criterion4(Criterion& c) {
  SystoleOptions so;
  so.witness = false;
  for (double l : {0.25, 0.5, 1.0, 2.0}) {
    const Surface s = sup_norm_mobius(l);
    within(c, label("vol_HT sup_norm_mobius", l), volume_ht(s, 256, 256).value, 2 * l * kPi, 0.01);
    from_above(c, label("sys sup_norm_mobius", l), systole(s, 256, so).all.length, kPi, 0.02);
    from_above(c, label("h sup_norm_mobius", l), height(s, 256).length, l * kPi, 0.02);
  }
}

// 5. glued_wide_mobius(lambda) is an equality case of the Mobius bound.
void criterion5(Criterion& c) {
  SystoleOptions so;
  so.witness = false;
  for (double l : {1.0, 1.5, 2.0}) {
    const Surface s = glued_wide_mobius(l);
    const double vol = volume_ht(s, 256, 256).value;
    const double sys = systole(s, 256, so).all.length;
    const double h = height(s, 256).length;
    within(c, label("vol/(sys h) glued_wide_mobius", l), vol / (sys * h), fm_bound(l), 0.02);
  }
}

// 6. Klein equality cases: (vol_HT, sys) = (2 pi, pi), ratio 2 / pi.
void criterion6(Criterion& c) {
  SystoleOptions so;
  so.witness = false;
  for (const Surface& s : {sup_norm_klein(kPi / 2), klein_from_fa()}) {
    const double vol = volume_ht(s, 256, 256).value;
    const double sys = systole(s, 256, so).all.length;
    within(c, s.name + " vol_HT", vol, 2 * kPi, 0.01);
    within(c, s.name + " sys", sys, kPi, 0.02);
    within(c, s.name + " vol/sys^2", vol / (sys * sys), 2 / kPi, 0.02);
  }
}

// 7. Height integral identity on 20 band widths.
void criterion7(Criterion& c) {
  const Stopwatch t;
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    const double a = 0.1 + 1.4 * (k + 0.5) / 20;
    const double err = std::abs(height_integrand_check(a) - kPi);
    worst = std::max(worst, err);
    c.expect(err <= 1e-6, fmt("a = %.4f: |integral - pi| = %.3g", a, err));
  }
  c.note(fmt("worst |integral - pi| = %.3g over 20 widths", worst));
  c.expect(t.seconds() < 1, fmt("runtime %.3f s >= 1 s", t.seconds()));
}

// Refinement gap of a pair of grid values, for combined tolerances.
double gap(double coarse, double fine) { return std::abs(coarse - fine); }

// 8. Collapsing the boundary of a Mobius band leaves systole min(h, sys).
void criterion8(Criterion& c) {
  SystoleOptions so;
  so.witness = false;
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Surface m = random_surface({seed, Topology::Mobius, 0.5, {}});
    const double c32 = collapsed_systole(m, 32).length, c64 = collapsed_systole(m, 64).length;
    const double h32 = height(m, 32).length, h64 = height(m, 64).length;
    const double s32 = systole(m, 32, so).all.length, s64 = systole(m, 64, so).all.length;
    const double expected = std::min(h64, s64);
    const double tol = gap(c32, c64) + std::max(gap(h32, h64), gap(s32, s64)) + 1e-9 * expected;
    const double diff = std::abs(c64 - expected);
    worst = std::max(worst, diff / expected);
    c.expect(diff <= tol, fmt("seed %llu: collapsed %.6f vs min(h, sys) %.6f, tolerance %.3g",
                              static_cast<unsigned long long>(seed), c64, expected, tol));
  }
  c.note(fmt("worst relative deviation %.3g over 20 bands", worst));
}

// 9. Doubling: sys(2M) = sys(M), h(2M) = 2 h(M).
void criterion9(Criterion& c) {
  SystoleOptions so;
  so.witness = false;
  double worst_sys = 0, worst_h = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Surface m = random_surface({seed, Topology::Mobius, 0.5, {}});
    const Surface d = double_mobius(m);
    const double sm = systole(m, 64, so).all.length, sd = systole(d, 64, so).all.length;
    const double hm = height(m, 64).length, hd = height(d, 64).length;
    worst_sys = std::max(worst_sys, rel(sd, sm));
    worst_h = std::max(worst_h, rel(hd, 2 * hm));
    const auto tag = static_cast<unsigned long long>(seed);
    c.expect(rel(sd, sm) <= 0.02, fmt("seed %llu: sys(2M) %.6f vs sys(M) %.6f", tag, sd, sm));
    c.expect(rel(hd, 2 * hm) <= 0.02, fmt("seed %llu: h(2M) %.6f vs 2 h(M) %.6f", tag, hd, 2 * hm));
  }
  c.note(fmt("worst relative deviation: sys %.3g, h %.3g", worst_sys, worst_h));
}

// 10. Randomized property suites, 100 surfaces per topology.
void criterion10(Criterion& c) {
  const Stopwatch t;
  for (auto topo : {Topology::Torus, Topology::Cylinder, Topology::Mobius, Topology::Klein}) {
    SuiteOptions opt;
    opt.topology = topo;
    opt.seeds = 100;
    opt.cycle_symmetry = topo == Topology::Klein;
    const Stopwatch tt;
    const SuiteResult r = run_suite(opt);
    int fm = 0, sharp = 0, john = 0, duran = 0, inclusion = 0;
    for (std::size_t k = 0; k < r.cases.size(); ++k) {
      const SuiteCase& sc = r.cases[k];
      const auto tag = static_cast<unsigned long long>(sc.seed);
      c.expect(sc.duran_pass && sc.duran_per_cell, fmt("%s seed %llu: Duran vol_HT <= vol_B violated (worst cell %.3g)",
                                                       to_string(topo), tag, sc.duran_worst));
      c.expect(sc.john_pass, fmt("%s seed %llu: John inclusion violated (outer %.6f)", to_string(topo), tag, sc.john_worst_outer));
      duran += sc.duran_pass && sc.duran_per_cell;
      inclusion += sc.john_pass;
      for (const Verdict& v : sc.report.verdicts) {
        if (!v.applicable) continue;
        if (v.bound == "klein_sharp") {
          const bool symmetric = sc.report.inv.claimed.any();
          if (!symmetric) continue;  // conjecture probe, logged below
          c.expect(!v.evidence_only, fmt("klein seed %llu: imposed symmetry not detected", tag));
          c.expect(v.pass, fmt("klein seed %llu: klein_sharp margin %.4g < -%.3g", tag, v.margin, v.tolerance));
          sharp += v.pass && !v.evidence_only;
          continue;
        }
        if (v.evidence_only || v.external) continue;
        c.expect(v.pass, fmt("%s seed %llu: %s margin %.4g < -%.3g", to_string(topo), tag, v.bound.c_str(), v.margin, v.tolerance));
        if (v.bound == "mobius_piecewise") fm += v.pass;
        if (v.bound == "klein_john") john += v.pass;
      }
    }
    std::string line = fmt("%s: %d surfaces, %d failing, Duran %d, John inclusion %d", to_string(topo),
                           static_cast<int>(r.cases.size()), r.failures, duran, inclusion);
    if (topo == Topology::Mobius) line += fmt(", fm_bound PASS %d", fm);
    if (topo == Topology::Klein) {
      line += fmt(", 2/pi PASS %d symmetric, sqrt(2)/pi PASS %d", sharp, john);
      if (r.min_ratio_asymmetric < kInfinity)
        line += fmt(", min vol/sys^2 asymmetric %.4f (2/pi = %.4f, evidence only)", r.min_ratio_asymmetric, 2 / kPi);
    }
    c.note(line + fmt(", %.0f s", tt.seconds()));
    c.expect(r.failures == 0, fmt("%s suite: %d failing surfaces", to_string(topo), r.failures));
  }
  c.expect(t.seconds() <= 1800, fmt("runtime %.0f s > 30 min", t.seconds()));
}

// 11. Convex-core micro-oracles.
void criterion11(Criterion& c) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ang(0, kPi), rad(0.5, 2.0);
  double worst_involution = 0, lo = kInfinity, hi = 0;
  for (int k = 0; k < 50; ++k) {
    std::vector<Vector2d> pts;
    for (int j = 0; j < 2 + k % 9; ++j) {
      const Vector2d p = rad(rng) * unit_direction(ang(rng));
      pts.push_back(p);
      pts.push_back(-p);
    }
    const SymBodyd b = SymBodyd::hull_of(pts);
    worst_involution = std::max(worst_involution, hausdorff_distance(polar(polar(b)), b));
    const double m = area(b) * area(polar(b));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  for (double th : {0.2, 0.6, 1.0, 1.4}) {
    const SymBodyd b = SymBodyd::truncated_disc(th);
    worst_involution = std::max(worst_involution, hausdorff_distance(polar(polar(b)), b));
    const double m = area(b) * area(polar(b));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  c.expect(worst_involution <= 1e-9, fmt("polar involution off by %.3g", worst_involution));
  c.expect(lo >= 8 - 1e-9 && hi <= kPi * kPi + 1e-9, fmt("Mahler products in [%.6f, %.6f]", lo, hi));
  c.note(fmt("polar involution error %.3g; Mahler products in [%.4f, %.4f]", worst_involution, lo, hi));
  for (double th : {0.3, kPi / 3, 1.2}) {
    const SymBodyd p = polar(SymBodyd::truncated_disc(th));
    // Monte-Carlo membership on the bounding box [-1, 1] x [-1/sin th, 1/sin th]
    std::mt19937_64 mc(static_cast<std::uint64_t>(th * 1e6));
    const double ymax = 1 / std::sin(th);
    std::uniform_real_distribution<double> ux(-1, 1), uy(-ymax, ymax);
    const int samples = 1000000;
    int hits = 0;
    for (int k = 0; k < samples; ++k) hits += gauge(p, Vector2d(ux(mc), uy(mc))) <= 1;
    const double estimate = 4 * ymax * hits / samples;
    const double closed = 2 * th + 2 / std::tan(th);
    within(c, label("area(polar truncated_disc) Monte-Carlo", th), estimate, closed, 0.005);
    within(c, label("area(polar truncated_disc) exact", th), area(p), closed, 1e-12);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> all = {
      {"vol_HT(M_Fa) = 2 pi", criterion1},
      {"(sys-, sys+, h)(M_Fa) = (pi, 2 pi cos a, pi)", criterion2},
      {"dual F_a: h = pi (1 - cos a), vol_HT = 2 pi sin^2 a", criterion3},
      {"sup_norm_mobius: (vol, sys, h) = (2 lambda pi, pi, lambda pi)", criterion4},
      {"glued_wide_mobius: vol/(sys h) = fm_bound(lambda)", criterion5},
      {"Klein equality cases: (vol_HT, sys) = (2 pi, pi)", criterion6},
      {"height integral = pi", criterion7},
      {"boundary collapse: sys(M/dM) = min(h, sys)", criterion8},
      {"doubling: sys(2M) = sys(M), h(2M) = 2 h(M)", criterion9},
      {"property suites, 100 surfaces per topology", criterion10},
      {"convex-core micro-oracles", criterion11},
  };
  bool ok = true;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (only != 0 && id != only) continue;
    Criterion c{id, all[k].first};
    const Stopwatch t;
    try {
      all[k].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %2d: %s  %s  (%d checks, %.1f s)\n", id, c.ok ? "PASS" : "FAIL", c.title.c_str(), c.checks,
                t.seconds());
    std::fflush(stdout);
    ok = ok && c.ok;
  }
  return ok ? 0 : 1;
}
