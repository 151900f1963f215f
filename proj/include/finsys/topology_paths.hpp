// Weighted grid graphs on covers of a quotient surface: distances, systoles
// by deck class, heights, boundary collapse and soul distance fields.
//
// Nodes sit at (x0 + I hx, y0 + J hy) in the universal cover. Each node is
// joined to the nodes at offsets (dx, dy) with max(|dx|, |dy|) <= radius and
// gcd(|dx|, |dy|) = 1; the weight is the Simpson estimate of the Finsler length
// of the straight chord. Weights are computed once per node of the
// fundamental domain and looked up through the deck group.

#ifndef FINSYS_TOPOLOGY_PATHS_HPP
#define FINSYS_TOPOLOGY_PATHS_HPP

#include "finsys/metric_field.hpp"

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace finsys {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GridSize {
  int nx = 0;  // columns per x period
  int ny = 0;  // rows span y0..y1 in ny steps
};

/// nx = n and ny the multiple of 4 closest to n (y1 - y0) / L.
GridSize grid_for(const Surface& s, int n);

struct Node {
  long I = 0;
  long J = 0;
  bool operator==(const Node& o) const { return I == o.I && J == o.J; }
};

class LiftedGrid {
 public:
  LiftedGrid(const Surface& s, GridSize size, int radius = 3);

  const Surface& surface() const { return *surface_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int rows() const { return bounded_ ? ny_ + 1 : ny_; }
  bool bounded() const { return bounded_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int radius() const { return radius_; }
  int directions() const { return static_cast<int>(stencil_.size()); }
  const std::vector<std::pair<int, int>>& stencil() const { return stencil_; }
  /// Direction index of (dx, -dy).
  int mirrored(int d) const { return mirror_[static_cast<std::size_t>(d)]; }

  Vector2d position(long I, long J) const;
  /// Cover row of the image of fundamental row j under deck element (n, m).
  long image_row(int j, int n, int m) const;
  /// Fundamental-domain node (i, j) of a cover node and the parity of its x shift.
  void rep(long I, long J, int& i, int& j, bool& flipped) const;
  /// Weight of the edge from fundamental node (i, j) in direction d; infinite
  /// when the chord leaves a bounded strip.
  double rep_weight(int i, int j, int d) const {
    return weights_[(static_cast<std::size_t>(j) * nx_ + i) * stencil_.size() + static_cast<std::size_t>(d)];
  }
  const double* rep_weights(int i, int j) const {
    return weights_.data() + (static_cast<std::size_t>(j) * nx_ + i) * stencil_.size();
  }
  double weight(long I, long J, int d) const;
  /// Simpson chord length straight from the field, bypassing the cache.
  double chord_length(const Vector2d& p, const Vector2d& q) const;
  /// Lower bounds on weight per column / row crossed.
  double min_speed_x() const { return min_speed_x_; }
  double min_speed_y() const { return min_speed_y_; }

 private:
  const Surface* surface_;
  int nx_, ny_, radius_;
  bool bounded_;
  double hx_, hy_;
  std::vector<std::pair<int, int>> stencil_;
  std::vector<int> mirror_;
  std::vector<double> weights_;
  double min_speed_x_ = 0, min_speed_y_ = 0;
};

/// Node allowed in a search; indexed j * nx + i over fundamental nodes.
using NodeMask = std::vector<std::uint8_t>;

struct Axis {
  enum Kind { Open, Wrap, Bounded } kind = Open;
  long lo = 0, hi = 0;  // Open: [lo, hi]; Wrap: period hi, lo = 0; Bounded: [0, ny]
  static Axis open(long lo, long hi) { return {Open, lo, hi}; }
  static Axis wrap(long period) { return {Wrap, 0, period}; }
  static Axis bounded(long ny) { return {Bounded, 0, ny}; }
  long size() const { return kind == Wrap ? hi : hi - lo + 1; }
};

/// Dijkstra over a window (or a finite cover) of the lifted graph.
class GraphSearch {
 public:
  GraphSearch(const LiftedGrid& g, Axis x, Axis y, const NodeMask* mask = nullptr);

  /// Multi-source run; nodes farther than cutoff are left unsettled.
  void run(const std::vector<Node>& sources, double cutoff = kInfinity, bool keep_parents = false);
  double dist(long I, long J) const;
  bool inside(long I, long J) const { return index(I, J) >= 0; }
  std::vector<Node> path_to(long I, long J) const;
  /// Some node on an open window edge settled below the cutoff.
  bool touched_open_edge() const { return touched_edge_; }
  std::size_t settled() const { return settled_; }

 private:
  long index(long I, long J) const;
  Node node_at(long k) const;

  const LiftedGrid* g_;
  Axis x_, y_;
  const NodeMask* mask_;
  long w_, h_;
  std::vector<double> dist_;
  std::vector<long> parent_;
  std::vector<long> touched_;
  std::vector<int> col_i_;
  std::vector<std::uint8_t> col_flip_;
  std::vector<int> row_j_[2];
  bool touched_edge_ = false;
  std::size_t settled_ = 0;
};

/// Shortest path length between two cover nodes, searched in an open window
/// wide enough for the answer; kInfinity when the mask disconnects them.
double graph_distance(const LiftedGrid& g, Node p, Node q, const NodeMask* mask = nullptr);

enum class LoopClass { All, Orientable, Nonorientable };

const char* to_string(LoopClass c);

struct PathResult {
  double length = kInfinity;
  std::vector<Vector2d> lifted;   // polyline in the universal cover
  std::vector<Vector2d> witness;  // the same polyline reduced to the fundamental domain
  double witness_length = kInfinity;  // recomputed from the field chord by chord
  int deck_n = 0, deck_m = 0;
  Node base;
};

struct SystoleResult {
  PathResult all, orientable, nonorientable;
  GridSize grid;
  int basepoints = 0;
  const PathResult& get(LoopClass c) const;
};

struct SystoleOptions {
  int radius = 3;
  int coarse_step = 4;  // every k-th node of the cut in the first sweep
  int refine_top = 3;   // best coarse basepoints refined locally
  bool witness = true;
  /// When nonzero, only deck classes not parallel to this one count (second
  /// successive minimum on a torus).
  int independent_n = 0, independent_m = 0;
};

SystoleResult systole(const Surface& s, int n, const SystoleOptions& opt = {}, const NodeMask* mask = nullptr);
SystoleResult systole(const LiftedGrid& g, const SystoleOptions& opt = {}, const NodeMask* mask = nullptr);

/// Shortest arc between the boundary lines of the orientation double cover.
PathResult height(const Surface& s, int n, int radius = 3);
PathResult height(const LiftedGrid& g);

/// Systole of M / dM: the boundary collapsed to one point. Built as an
/// explicit graph on the orientation double cover with one pole per boundary
/// circle; a loop is essential iff it lifts to a path from a node to its
/// antipode.
PathResult collapsed_systole(const Surface& m, int n, int radius = 3, int coarse_step = 4);

struct SoulDistances {
  GridSize grid;
  std::vector<double> to_soul;        // per fundamental node j * nx + i
  std::vector<double> to_other_soul;  // Klein bottles only: the soul at y = y1
};

SoulDistances soul_distance_field(const Surface& s, int n, int radius = 3);

struct SplitResult {
  Surface klein;
  SoulDistances distances;
  NodeMask mask1, mask2;
  double vol1 = 0, vol2 = 0, vol_klein = 0;
  double h1 = kInfinity, h2 = kInfinity;  // interface-to-interface heights
  double sys1 = kInfinity;                // systole of K restricted to mask1
  double interface_residual = 0;          // max |l2 d(.,s) - l1 d(.,s')| / h on interface nodes
};

/// Splits the Klein bottle made of m and its mirror image by the weighted
/// soul distances l2 d(x, s) <= l1 d(x, s').
SplitResult weighted_split(const Surface& m, double l1, double l2, int n, int radius = 3);

struct RefinedValue {
  std::vector<int> grids;
  std::vector<double> values;
  double value() const { return values.back(); }
  /// successive differences values[k] - values[k+1]
  std::vector<double> gaps() const;
  /// decreasing and each gap at most previous / 1.5, up to a relative floor
  bool stable(double floor = 1e-9) const;
  double last_gap() const;
};

}  // namespace finsys

#endif  // FINSYS_TOPOLOGY_PATHS_HPP
