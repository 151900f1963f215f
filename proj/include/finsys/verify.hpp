// Systolic bounds, invariant reports and randomized suites.
//
// A verdict compares a measured ratio with the lower bound of a theorem. The
// tolerance is the combined error bar of the ratio: the Richardson estimate of
// the volume plus the last refinement gap of each graph length. A FAIL beyond
// that tolerance contradicts a theorem and therefore signals a toolkit bug.

#ifndef FINSYS_VERIFY_HPP
#define FINSYS_VERIFY_HPP

#include "finsys/measure.hpp"
#include "finsys/topology_paths.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finsys {

/// Lower bound on vol_HT / (sys h) for a Mobius band with lambda = h / sys.
double fm_bound(double lambda);

enum class BoundId {
  FinslerLoewnerTorus,
  IvanovRp2,
  KeenFinsler,
  Cylinder,
  MobiusPiecewise,
  KleinSharp,
  KleinJohn,
  KleinJohnImproved,
};

struct BoundInfo {
  BoundId id;
  const char* name;
  Topology topology;
  const char* ratio;  // what is compared with the bound
  bool external;      // constant quoted without proof
};

const std::vector<BoundInfo>& bound_catalogue();
const BoundInfo& bound_info(BoundId id);
BoundId bound_from_string(const std::string& name);

/// A graph or quadrature value with its error bar.
struct Measured {
  double value = kInfinity;
  double error = 0;
  double rel() const { return value > 0 && value < kInfinity ? error / value : 0; }
};

struct CheckOptions {
  int grid = 128;
  int refine = 1;  // graph lengths also on grid / 2, ..., grid / 2^refine
  int radius = 3;
  int volume_grid = 0;  // 0: same as grid
  std::vector<BoundId> bounds;  // empty: every bound of the surface's topology
};

struct Invariants {
  std::string surface;
  Topology topology = Topology::Torus;
  SymmetryFlags claimed, detected;
  Measured vol_ht, vol_b;
  Measured sys, sys_plus, sys_minus;
  Measured sys_second;  // tori: shortest loop independent of the systolic class
  Measured h;           // surfaces with boundary
  Measured collapsed;   // Mobius bands: systole of M / dM
  std::vector<int> grids;
  std::vector<double> sys_values, h_values;
  double lambda() const { return h.value < kInfinity && sys.value > 0 ? h.value / sys.value : 0; }
};

struct Verdict {
  std::string bound;
  bool applicable = true;
  std::string error;  // reason when not applicable
  double ratio = 0, bound_value = 0, margin = 0, tolerance = 0;
  bool pass = false;
  bool external = false;
  bool evidence_only = false;  // conjecture probe: logged, never a FAIL
};

struct InvariantReport {
  Invariants inv;
  CheckOptions options;
  std::vector<Verdict> verdicts;
  /// no applicable, non-evidence verdict failed
  bool all_pass() const;
};

Invariants compute_invariants(const Surface& s, const CheckOptions& opt);
Verdict evaluate(BoundId id, const Invariants& inv);
InvariantReport check(const Surface& s, const CheckOptions& opt);

/// Riemannian metric whose unit balls are the John ellipses of the bodies of
/// s, sampled on an (nx + 1) x (ny + 1) node grid and interpolated bilinearly
/// in the quadratic form.
Surface john_metric(const Surface& s, int nx, int ny);

struct JohnReport {
  int samples = 0;
  double worst_lower = kInfinity;  // min sqrt(2) F / sqrt(g) over sampled vectors, should be >= 1
  double worst_upper = 0;          // max F / sqrt(g), should be <= 1
  std::optional<Vector2d> offending_point;
  std::string failure;
  Measured vol_ht, vol_g, sys_f, sys_g;
  bool sandwich = false;         // both gauge inequalities at the nodes
  bool sys_link = false;         // sys(F) <= sys(g)
  bool vol_link = false;         // vol(g) <= 2 vol_HT(F)
  bool improved_vol_link = false;  // vol(g) <= (pi / 2) vol_HT(F), external
  double riemannian_ratio = 0;   // vol(g) / sys(g)^2, compared with 2 sqrt(2) / pi
  double ratio = 0;              // vol_HT(F) / sys(F)^2, compared with sqrt(2) / pi
  bool pass = false;
};

JohnReport john_lower_bound_check(const Surface& k, int grid = 64, int john_grid = 32);

struct SuiteOptions {
  Topology topology = Topology::Klein;
  int seeds = 100;
  std::uint64_t first_seed = 1;
  double roughness = 0.5;
  SymmetryFlags symmetry;
  bool cycle_symmetry = false;  // Klein: force soul, soul switching, rotation in turn
  int grid = 48;
  int refine = 1;
  int duran_grid = 24;
  int john_samples = 8;  // tangent bodies per surface for the double inclusion
};

struct SuiteCase {
  std::uint64_t seed = 0;
  InvariantReport report;
  bool duran_pass = false;
  bool duran_per_cell = false;
  double duran_worst = 0;
  bool john_pass = false;
  double john_worst_outer = 0;  // max t with C in t E, at most sqrt(2)
};

struct SuiteResult {
  SuiteOptions options;
  std::vector<SuiteCase> cases;
  int failures = 0;
  double min_ratio_asymmetric = kInfinity;  // conjecture evidence for Klein bottles
  bool all_pass() const { return failures == 0; }
};

SuiteResult run_suite(const SuiteOptions& opt);

/// Margin of the wide Mobius bound on the almost-extremal family, one row per neck.
struct NeckRow {
  double neck = 0;
  double lambda = 0;
  double ratio = 0;
  double bound = 0;
  double margin = 0;
};

std::vector<NeckRow> almost_extremal_margins(double lambda, const std::vector<double>& necks, int grid);

struct TableRow {
  int criterion = 0;
  std::string surface;
  std::string quantity;
  double computed = 0;
  double expected = 0;
  double rel_error = 0;
  double tolerance = 0;
  bool pass = false;
};

/// Closed-form values checked against the pipeline.
std::vector<TableRow> reproduction_table(int grid = 256);

}  // namespace finsys

#endif  // FINSYS_VERIFY_HPP
