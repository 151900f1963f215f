#include "finsys/topology_paths.hpp"

#include "finsys/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace finsys {

namespace {

long floordiv(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long mod(long a, long b) { return a - floordiv(a, b) * b; }

using Entry = std::pair<double, long>;
using MinHeap = std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>>;

}  // namespace

GridSize grid_for(const Surface& s, int n) {
  if (n < 4) throw std::invalid_argument("grid: need at least 4 columns");
  const double ratio = s.chart.T() / s.chart.L;
  const int ny = std::max(4, 4 * static_cast<int>(std::lround(n * ratio / 4)));
  return {n, ny};
}

LiftedGrid::LiftedGrid(const Surface& s, GridSize size, int radius)
    : surface_(&s), nx_(size.nx), ny_(size.ny), radius_(radius), bounded_(!s.chart.y_periodic) {
  if (nx_ < 2 || ny_ < 2) throw std::invalid_argument("lifted grid: too few nodes");
  if (s.chart.glide && ny_ % 2 != 0) throw std::invalid_argument("lifted grid: glide charts need an even row count");
  if (radius_ < 1) throw std::invalid_argument("lifted grid: radius must be at least 1");
  hx_ = s.chart.L / nx_;
  hy_ = s.chart.T() / ny_;
  for (int dy = -radius_; dy <= radius_; ++dy) {
    for (int dx = -radius_; dx <= radius_; ++dx) {
      if ((dx != 0 || dy != 0) && std::gcd(std::abs(dx), std::abs(dy)) == 1) stencil_.emplace_back(dx, dy);
    }
  }
  const int dirs = directions();
  mirror_.resize(static_cast<std::size_t>(dirs));
  for (int d = 0; d < dirs; ++d) {
    const auto target = std::make_pair(stencil_[d].first, -stencil_[d].second);
    mirror_[d] = static_cast<int>(std::find(stencil_.begin(), stencil_.end(), target) - stencil_.begin());
  }
  std::vector<Vector2d> vecs;
  for (const auto& [dx, dy] : stencil_) vecs.emplace_back(dx * hx_, dy * hy_);

  const int nrows = rows();
  std::vector<double> node_norms(static_cast<std::size_t>(nrows) * nx_ * dirs);
  for (int j = 0; j < nrows; ++j) {
    for (int i = 0; i < nx_; ++i) {
      s.norms(position(i, j), vecs.data(), dirs, &node_norms[(static_cast<std::size_t>(j) * nx_ + i) * dirs]);
    }
  }
  weights_.assign(node_norms.size(), kInfinity);
  min_speed_x_ = min_speed_y_ = kInfinity;
  for (int j = 0; j < nrows; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const Vector2d p = position(i, j);
      for (int d = 0; d < dirs; ++d) {
        const auto [dx, dy] = stencil_[d];
        if (bounded_ && (j + dy < 0 || j + dy > ny_)) continue;
        int qi, qj;
        bool flip;
        rep(i + dx, j + dy, qi, qj, flip);
        const double fq = node_norms[(static_cast<std::size_t>(qj) * nx_ + qi) * dirs + (flip ? mirror_[d] : d)];
        const double fp = node_norms[(static_cast<std::size_t>(j) * nx_ + i) * dirs + d];
        const double fm = s.norm(p + 0.5 * vecs[d], vecs[d]);
        const double w = (fp + 4 * fm + fq) / 6;
        weights_[(static_cast<std::size_t>(j) * nx_ + i) * dirs + d] = w;
        if (dx != 0) min_speed_x_ = std::min(min_speed_x_, w / std::abs(dx));
        if (dy != 0) min_speed_y_ = std::min(min_speed_y_, w / std::abs(dy));
      }
    }
  }
  if (!(min_speed_x_ > 0) || !(min_speed_y_ > 0)) throw std::runtime_error("lifted grid: degenerate edge weights");
}

Vector2d LiftedGrid::position(long I, long J) const {
  const Chart& c = surface_->chart;
  return {c.x0 + I * hx_, c.y0 + J * hy_};
}

long LiftedGrid::image_row(int j, int n, int m) const {
  const bool flip = surface_->chart.glide && (n % 2 != 0);
  const long base = flip ? ny_ - j : j;
  return bounded_ ? base : base + static_cast<long>(m) * ny_;
}

void LiftedGrid::rep(long I, long J, int& i, int& j, bool& flipped) const {
  const long n = floordiv(I, nx_);
  i = static_cast<int>(I - n * nx_);
  flipped = surface_->chart.glide && (n % 2 != 0);
  const long J2 = flipped ? ny_ - J : J;
  j = static_cast<int>(bounded_ ? J2 : mod(J2, ny_));
}

double LiftedGrid::weight(long I, long J, int d) const {
  int i, j;
  bool flip;
  rep(I, J, i, j, flip);
  if (bounded_ && (j < 0 || j > ny_)) return kInfinity;
  return rep_weight(i, j, flip ? mirror_[d] : d);
}

double LiftedGrid::chord_length(const Vector2d& p, const Vector2d& q) const {
  const Vector2d v = q - p;
  return (surface_->norm(p, v) + 4 * surface_->norm(0.5 * (p + q), v) + surface_->norm(q, v)) / 6;
}

GraphSearch::GraphSearch(const LiftedGrid& g, Axis x, Axis y, const NodeMask* mask)
    : g_(&g), x_(x), y_(y), mask_(mask) {
  const Chart& c = g.surface().chart;
  if (x_.kind == Axis::Bounded) throw std::invalid_argument("graph search: x cannot be bounded");
  if (x_.kind == Axis::Wrap && x_.hi % (c.glide ? 2L * g.nx() : long(g.nx())) != 0)
    throw std::invalid_argument("graph search: x wrap must be a multiple of the orientable period");
  if (g.bounded() != (y_.kind == Axis::Bounded)) throw std::invalid_argument("graph search: y axis does not match the chart");
  if (y_.kind == Axis::Bounded) y_ = Axis::bounded(g.ny());
  if (y_.kind == Axis::Wrap && y_.hi % g.ny() != 0) throw std::invalid_argument("graph search: y wrap must be a multiple of ny");
  if (mask_ && mask_->size() != static_cast<std::size_t>(g.rows()) * g.nx())
    throw std::invalid_argument("graph search: mask size mismatch");
  w_ = x_.size();
  h_ = y_.size();
  dist_.assign(static_cast<std::size_t>(w_ * h_), kInfinity);
  parent_.assign(dist_.size(), -1);
  col_i_.resize(static_cast<std::size_t>(w_));
  col_flip_.resize(static_cast<std::size_t>(w_));
  for (long ix = 0; ix < w_; ++ix) {
    const long I = x_.kind == Axis::Open ? x_.lo + ix : ix;
    const long n = floordiv(I, g.nx());
    col_i_[ix] = static_cast<int>(I - n * g.nx());
    col_flip_[ix] = c.glide && (n % 2 != 0);
  }
  for (int p = 0; p < 2; ++p) {
    row_j_[p].resize(static_cast<std::size_t>(h_));
    for (long iy = 0; iy < h_; ++iy) {
      const long J = y_.kind == Axis::Open ? y_.lo + iy : iy;
      const long J2 = p ? g.ny() - J : J;
      row_j_[p][iy] = static_cast<int>(g.bounded() ? J2 : mod(J2, g.ny()));
    }
  }
}

long GraphSearch::index(long I, long J) const {
  long ix, iy;
  if (x_.kind == Axis::Open) {
    if (I < x_.lo || I > x_.hi) return -1;
    ix = I - x_.lo;
  } else {
    ix = mod(I, x_.hi);
  }
  if (y_.kind == Axis::Wrap) {
    iy = mod(J, y_.hi);
  } else {
    if (J < y_.lo || J > y_.hi) return -1;
    iy = J - y_.lo;
  }
  return iy * w_ + ix;
}

Node GraphSearch::node_at(long k) const {
  const long ix = k % w_, iy = k / w_;
  return {x_.kind == Axis::Open ? x_.lo + ix : ix, y_.kind == Axis::Open ? y_.lo + iy : iy};
}

void GraphSearch::run(const std::vector<Node>& sources, double cutoff, bool keep_parents) {
  for (long k : touched_) {
    dist_[k] = kInfinity;
    parent_[k] = -1;
  }
  touched_.clear();
  touched_edge_ = false;
  settled_ = 0;
  const int nx = g_->nx();
  const int dirs = g_->directions();
  const auto& stencil = g_->stencil();
  const int r = g_->radius();
  const auto allowed = [&](long ix, long iy) {
    if (!mask_) return true;
    const int j = row_j_[col_flip_[ix]][iy];
    return (*mask_)[static_cast<std::size_t>(j) * nx + col_i_[ix]] != 0;
  };
  MinHeap heap;
  for (const Node& s : sources) {
    const long k = index(s.I, s.J);
    if (k < 0) continue;
    if (!allowed(k % w_, k / w_)) continue;
    if (dist_[k] > 0) {
      if (dist_[k] == kInfinity) touched_.push_back(k);
      dist_[k] = 0;
      heap.emplace(0.0, k);
    }
  }
  while (!heap.empty()) {
    const auto [d, k] = heap.top();
    heap.pop();
    if (d > dist_[k]) continue;
    if (d > cutoff) break;
    ++settled_;
    const long ix = k % w_, iy = k / w_;
    if ((x_.kind == Axis::Open && (ix < r || ix >= w_ - r)) || (y_.kind == Axis::Open && (iy < r || iy >= h_ - r)))
      touched_edge_ = true;
    const bool flip = col_flip_[ix];
    const int i = col_i_[ix];
    const int j = row_j_[flip][iy];
    const double* wrow = g_->rep_weights(i, j);
    for (int dd = 0; dd < dirs; ++dd) {
      const auto [dx, dy] = stencil[dd];
      long jx = ix + dx, jy = iy + dy;
      if (x_.kind == Axis::Wrap) {
        if (jx < 0) jx += w_;
        else if (jx >= w_) jx -= w_;
      } else if (jx < 0 || jx >= w_) {
        continue;
      }
      if (y_.kind == Axis::Wrap) {
        if (jy < 0) jy += h_;
        else if (jy >= h_) jy -= h_;
      } else if (jy < 0 || jy >= h_) {
        continue;
      }
      const double w = wrow[flip ? g_->mirrored(dd) : dd];
      if (w == kInfinity) continue;
      const double nd = d + w;
      const long k2 = jy * w_ + jx;
      if (nd < dist_[k2]) {
        if (!allowed(jx, jy)) continue;
        if (dist_[k2] == kInfinity) touched_.push_back(k2);
        dist_[k2] = nd;
        if (keep_parents) parent_[k2] = k;
        if (nd <= cutoff) heap.emplace(nd, k2);
      }
    }
  }
}

double GraphSearch::dist(long I, long J) const {
  const long k = index(I, J);
  return k < 0 ? kInfinity : dist_[k];
}

std::vector<Node> GraphSearch::path_to(long I, long J) const {
  std::vector<Node> out;
  long k = index(I, J);
  if (k < 0 || dist_[k] == kInfinity) return out;
  // unwrap so that consecutive nodes differ by a stencil offset
  Node cur{I, J};
  out.push_back(cur);
  while (parent_[k] >= 0) {
    const long p = parent_[k];
    Node prev = node_at(p);
    const Node here = node_at(k);
    long dx = prev.I - here.I, dy = prev.J - here.J;
    if (x_.kind == Axis::Wrap) dx -= w_ * std::lround(double(dx) / w_);
    if (y_.kind == Axis::Wrap) dy -= h_ * std::lround(double(dy) / h_);
    cur = {cur.I + dx, cur.J + dy};
    out.push_back(cur);
    k = p;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double graph_distance(const LiftedGrid& g, Node p, Node q, const NodeMask* mask) {
  long margin = std::max(std::abs(p.I - q.I), std::abs(p.J - q.J)) + 2L * g.radius() + 2;
  for (int attempt = 0; attempt < 12; ++attempt) {
    const Axis xa = Axis::open(std::min(p.I, q.I) - margin, std::max(p.I, q.I) + margin);
    const Axis ya = g.bounded() ? Axis::bounded(g.ny()) : Axis::open(std::min(p.J, q.J) - margin, std::max(p.J, q.J) + margin);
    GraphSearch search(g, xa, ya, mask);
    search.run({p});
    const double d = search.dist(q.I, q.J);
    // any path leaving the window costs at least this much
    const double escape = std::min(g.min_speed_x() * (margin - g.radius()),
                                   g.bounded() ? kInfinity : g.min_speed_y() * (margin - g.radius()));
    if (d <= escape) return d;
    if (!search.touched_open_edge()) return d;  // window not saturated: nothing better outside
    margin *= 2;
  }
  return kInfinity;
}

const char* to_string(LoopClass c) {
  switch (c) {
    case LoopClass::All: return "all";
    case LoopClass::Orientable: return "orientable";
    case LoopClass::Nonorientable: return "nonorientable";
  }
  return "?";
}

const PathResult& SystoleResult::get(LoopClass c) const {
  switch (c) {
    case LoopClass::Orientable: return orientable;
    case LoopClass::Nonorientable: return nonorientable;
    default: return all;
  }
}

namespace {

void finish_witness(const LiftedGrid& g, const std::vector<Node>& nodes, PathResult& r) {
  r.lifted.clear();
  r.witness.clear();
  for (const Node& n : nodes) {
    const Vector2d p = g.position(n.I, n.J);
    r.lifted.push_back(p);
    bool flip;
    r.witness.push_back(g.surface().chart.reduce(p, flip));
  }
  r.witness_length = 0;
  for (std::size_t k = 1; k < r.lifted.size(); ++k) r.witness_length += g.chord_length(r.lifted[k - 1], r.lifted[k]);
}

bool node_allowed(const LiftedGrid& g, const NodeMask* mask, long I, long J) {
  if (!mask) return true;
  int i, j;
  bool flip;
  g.rep(I, J, i, j, flip);
  return (*mask)[static_cast<std::size_t>(j) * g.nx() + i] != 0;
}

// Length of the straight lattice loop from (I, J) taking `steps` unit steps
// in direction (sx, sy); infinite if a node is masked.
double straight_loop(const LiftedGrid& g, const NodeMask* mask, long I, long J, int sx, int sy, long steps) {
  const auto& st = g.stencil();
  const int d = static_cast<int>(std::find(st.begin(), st.end(), std::make_pair(sx, sy)) - st.begin());
  double total = 0;
  for (long k = 0; k < steps; ++k) {
    if (!node_allowed(g, mask, I, J)) return kInfinity;
    total += g.weight(I, J, d);
    I += sx;
    J += sy;
  }
  return total;
}

struct Basepoint {
  int i, j;
};

struct ClassBest {
  double length = kInfinity;
  Basepoint base{0, 0};
  int n = 0, m = 0;
};

}  // namespace

SystoleResult systole(const Surface& s, int n, const SystoleOptions& opt, const NodeMask* mask) {
  const LiftedGrid g(s, grid_for(s, n), opt.radius);
  return systole(g, opt, mask);
}

SystoleResult systole(const LiftedGrid& g, const SystoleOptions& opt, const NodeMask* mask) {
  const Chart& c = g.surface().chart;
  const bool glide = c.glide;
  const bool periodic = !g.bounded();
  const int nx = g.nx(), ny = g.ny(), r = g.radius();

  // 0: orientable, 1: nonorientable (glide charts); torus and cylinder use 0 only
  ClassBest best[2];
  const bool filtered = opt.independent_n != 0 || opt.independent_m != 0;
  const auto consider = [&](int cls, double len, Basepoint b, int dn, int dm) {
    if (filtered && static_cast<long>(dn) * opt.independent_m == static_cast<long>(dm) * opt.independent_n) return;
    if (len < best[cls].length) best[cls] = {len, b, dn, dm};
  };
  // explicit loops give the first cutoffs
  const int soul = ny / 2;
  if (glide) {
    consider(1, straight_loop(g, mask, 0, soul, 1, 0, nx), {0, soul}, 1, 0);
    for (int j = 0; j <= (periodic ? ny - 1 : ny); j += std::max(1, opt.coarse_step))
      consider(0, straight_loop(g, mask, 0, j, 1, 0, 2L * nx), {0, j}, 2, 0);
  } else {
    for (int j = 0; j <= (periodic ? ny - 1 : ny); j += std::max(1, opt.coarse_step))
      consider(0, straight_loop(g, mask, 0, j, 1, 0, nx), {0, j}, 1, 0);
  }
  if (periodic) {
    for (int i = 0; i < nx; i += std::max(1, opt.coarse_step))
      consider(0, straight_loop(g, mask, i, 0, 0, 1, ny), {i, 0}, 0, 1);
  }
  const int classes = glide ? 2 : 1;
  const auto cutoff = [&]() {
    double d = 0;
    for (int k = 0; k < classes; ++k) d = std::max(d, best[k].length);
    return d;
  };

  int runs = 0;
  std::vector<std::pair<double, Basepoint>> scored;
  const auto sweep = [&](Basepoint b) {
    if (!node_allowed(g, mask, b.i, b.j)) return;
    double D = cutoff();
    long wx, wy;
    if (D == kInfinity) {
      wx = 3L * nx;
      wy = 3L * ny;
    } else {
      wx = static_cast<long>(std::ceil(D / g.min_speed_x())) + r;
      wy = static_cast<long>(std::ceil(D / g.min_speed_y())) + r;
    }
    const Axis xa = Axis::open(b.i - wx, b.i + wx);
    const Axis ya = periodic ? Axis::open(b.j - wy, b.j + wy) : Axis::bounded(ny);
    GraphSearch search(g, xa, ya, mask);
    search.run({{b.i, b.j}}, D);
    ++runs;
    double local = kInfinity;
    const int nmax = static_cast<int>(wx / nx) + 1;
    const int mmax = periodic ? static_cast<int>(wy / ny) + 1 : 0;
    for (int dn = -nmax; dn <= nmax; ++dn) {
      for (int dm = -mmax; dm <= mmax; ++dm) {
        if (dn == 0 && dm == 0) continue;
        const double len = search.dist(b.i + static_cast<long>(dn) * nx, g.image_row(b.j, dn, dm));
        if (len == kInfinity) continue;
        const int cls = (glide && (dn % 2 != 0)) ? 1 : 0;
        consider(cls, len, b, dn, dm);
        local = std::min(local, len);
      }
    }
    scored.emplace_back(local, b);
  };

  const int step = std::max(1, opt.coarse_step);
  const int last_row = periodic ? ny - 1 : ny;
  for (int j = 0; j <= last_row; j += step) sweep({0, j});
  if (periodic) {
    for (int i = step; i < nx; i += step) sweep({i, 0});
  }
  // refine around the best coarse basepoints, over the full cut width
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Basepoint> seeds;
  for (const auto& [len, b] : scored) {
    if (static_cast<int>(seeds.size()) >= opt.refine_top) break;
    seeds.push_back(b);
  }
  for (int k = 0; k < classes; ++k) {
    if (best[k].length < kInfinity) seeds.push_back(best[k].base);
  }
  std::vector<std::pair<int, int>> done;
  const auto once = [&](Basepoint b) {
    const auto key = std::make_pair(b.i, b.j);
    if (std::find(done.begin(), done.end(), key) != done.end()) return;
    done.push_back(key);
    sweep(b);
  };
  for (const auto& seed : seeds) {
    const bool horizontal_cut = periodic && seed.j == 0 && seed.i != 0;
    if (!horizontal_cut) {
      for (int j = seed.j - step; j <= seed.j + step; ++j) {
        if (!periodic && (j < 0 || j > ny)) continue;
        const int jj = periodic ? static_cast<int>(mod(j, ny)) : j;
        for (int i = 0; i < r; ++i) once({i, jj});
      }
    }
    if (periodic) {
      for (int i = seed.i - step; i <= seed.i + step; ++i) {
        const int ii = static_cast<int>(mod(i, nx));
        for (int j = 0; j < r; ++j) once({ii, j});
      }
    }
  }

  SystoleResult out;
  out.grid = {nx, ny};
  out.basepoints = runs;
  const auto fill = [&](const ClassBest& b, PathResult& res) {
    res.length = b.length;
    res.deck_n = b.n;
    res.deck_m = b.m;
    res.base = {b.base.i, b.base.j};
    if (!opt.witness || b.length == kInfinity) return;
    const long tI = b.base.i + static_cast<long>(b.n) * nx;
    const long tJ = g.image_row(b.base.j, b.n, b.m);
    const long wx = std::abs(tI - b.base.i) + static_cast<long>(std::ceil(b.length / g.min_speed_x())) + r;
    const long wy = std::abs(tJ - b.base.j) + static_cast<long>(std::ceil(b.length / g.min_speed_y())) + r;
    GraphSearch search(g, Axis::open(b.base.i - wx, b.base.i + wx),
                       periodic ? Axis::open(b.base.j - wy, b.base.j + wy) : Axis::bounded(ny), mask);
    search.run({{b.base.i, b.base.j}}, b.length * (1 + 1e-12), true);
    finish_witness(g, search.path_to(tI, tJ), res);
  };
  if (glide) {
    fill(best[0], out.orientable);
    fill(best[1], out.nonorientable);
    out.all = best[0].length <= best[1].length ? out.orientable : out.nonorientable;
  } else {
    fill(best[0], out.all);
    out.orientable = out.all;
  }
  if (out.all.length == kInfinity) throw std::runtime_error("systole: no essential loop found under the cutoff");
  return out;
}

PathResult height(const Surface& s, int n, int radius) {
  const LiftedGrid g(s, grid_for(s, n), radius);
  return height(g);
}

PathResult height(const LiftedGrid& g) {
  const Chart& c = g.surface().chart;
  if (!g.bounded()) throw std::invalid_argument("height: surface has no boundary");
  const long period = c.glide ? 2L * g.nx() : g.nx();
  GraphSearch search(g, Axis::wrap(period), Axis::bounded(g.ny()));
  std::vector<Node> sources;
  for (long I = 0; I < period; ++I) sources.push_back({I, 0});
  search.run(sources, kInfinity, true);
  PathResult res;
  long arg = 0;
  for (long I = 0; I < period; ++I) {
    const double d = search.dist(I, g.ny());
    if (d < res.length) {
      res.length = d;
      arg = I;
    }
  }
  if (res.length < kInfinity) finish_witness(g, search.path_to(arg, g.ny()), res);
  return res;
}

PathResult collapsed_systole(const Surface& m, int n, int radius, int coarse_step) {
  if (m.topology() != Topology::Mobius) throw std::invalid_argument("collapse_boundary: needs a Mobius band");
  const LiftedGrid g(m, grid_for(m, n), radius);
  const long W = 2L * g.nx();
  const long H = g.ny() + 1;
  const long poles = W * H;
  const long north = poles, south = poles + 1;
  const long count = poles + 2;
  // explicit adjacency of the sphere double cover
  std::vector<long> start(static_cast<std::size_t>(count + 1), 0);
  std::vector<long> target;
  std::vector<double> weight;
  const auto id = [&](long I, long J) { return J * W + I; };
  for (long J = 0; J < H; ++J) {
    for (long I = 0; I < W; ++I) {
      start[id(I, J)] = static_cast<long>(target.size());
      for (int d = 0; d < g.directions(); ++d) {
        const auto [dx, dy] = g.stencil()[d];
        if (J + dy < 0 || J + dy >= H) continue;
        target.push_back(id(mod(I + dx, W), J + dy));
        weight.push_back(g.weight(I, J, d));
      }
      if (J == 0) {
        target.push_back(south);
        weight.push_back(0);
      }
      if (J == H - 1) {
        target.push_back(north);
        weight.push_back(0);
      }
    }
  }
  start[north] = static_cast<long>(target.size());
  for (long I = 0; I < W; ++I) {
    target.push_back(id(I, H - 1));
    weight.push_back(0);
  }
  start[south] = static_cast<long>(target.size());
  for (long I = 0; I < W; ++I) {
    target.push_back(id(I, 0));
    weight.push_back(0);
  }
  start[count] = static_cast<long>(target.size());
  const auto antipode = [&](long v) {
    if (v == north) return south;
    if (v == south) return north;
    const long I = v % W, J = v / W;
    return id(mod(I + g.nx(), W), H - 1 - J);
  };

  std::vector<double> dist(static_cast<std::size_t>(count), kInfinity);
  std::vector<long> parent(static_cast<std::size_t>(count), -1);
  std::vector<long> touched;
  const auto shortest = [&](long src, long dst, double cutoff) {
    for (long v : touched) {
      dist[v] = kInfinity;
      parent[v] = -1;
    }
    touched.clear();
    MinHeap heap;
    dist[src] = 0;
    touched.push_back(src);
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[v]) continue;
      if (v == dst || d > cutoff) break;
      for (long e = start[v]; e < start[v + 1]; ++e) {
        const double nd = d + weight[e];
        const long u = target[e];
        if (nd < dist[u]) {
          if (dist[u] == kInfinity) touched.push_back(u);
          dist[u] = nd;
          parent[u] = v;
          heap.emplace(nd, u);
        }
      }
    }
    return dist[dst];
  };

  double best = shortest(north, south, kInfinity);
  long best_src = north;
  std::vector<std::pair<double, long>> scored;
  const auto sweep = [&](long v) {
    const double d = shortest(v, antipode(v), best);
    scored.emplace_back(d, v);
    if (d < best) {
      best = d;
      best_src = v;
    }
  };
  const int step = std::max(1, coarse_step);
  for (long J = 0; J < H; J += step) sweep(id(0, J));
  std::sort(scored.begin(), scored.end());
  std::vector<long> seeds;
  for (std::size_t k = 0; k < scored.size() && k < 3; ++k) seeds.push_back(scored[k].second);
  for (long seed : seeds) {
    const long J0 = seed / W;
    for (long J = std::max(0L, J0 - step); J <= std::min(H - 1, J0 + step); ++J) {
      for (long I = 0; I < radius; ++I) sweep(id(I, J));
    }
  }
  PathResult res;
  res.length = shortest(best_src, antipode(best_src), kInfinity);
  // witness through the explicit graph; the poles are drawn at the x of their neighbour
  std::vector<long> chain;
  for (long v = antipode(best_src); v >= 0; v = parent[v]) chain.push_back(v);
  std::reverse(chain.begin(), chain.end());
  std::vector<Node> nodes;
  for (long v : chain) {
    if (v >= poles) continue;
    nodes.push_back({v % W, v / W});
  }
  res.lifted.clear();
  res.witness.clear();
  for (const Node& nd : nodes) {
    const Vector2d p = g.position(nd.I, nd.J);
    res.lifted.push_back(p);
    bool flip;
    res.witness.push_back(m.chart.reduce(p, flip));
  }
  // segments through a pole have zero length; skip them when re-measuring
  res.witness_length = 0;
  for (std::size_t k = 1; k < chain.size(); ++k) {
    if (chain[k] >= poles || chain[k - 1] >= poles) continue;
    const Node a{chain[k - 1] % W, chain[k - 1] / W}, b{chain[k] % W, chain[k] / W};
    long dxl = b.I - a.I;
    dxl -= W * std::lround(double(dxl) / W);
    res.witness_length += g.chord_length(g.position(a.I, a.J), g.position(a.I + dxl, b.J));
  }
  return res;
}

namespace {

std::vector<double> distance_to_row(const LiftedGrid& g, long row) {
  const Chart& c = g.surface().chart;
  const long period = c.glide ? 2L * g.nx() : g.nx();
  const Axis ya = g.bounded() ? Axis::bounded(g.ny()) : Axis::wrap(g.ny());
  GraphSearch search(g, Axis::wrap(period), ya);
  std::vector<Node> sources;
  for (long I = 0; I < period; ++I) sources.push_back({I, row});
  search.run(sources);
  std::vector<double> out(static_cast<std::size_t>(g.rows()) * g.nx());
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.nx(); ++i) out[static_cast<std::size_t>(j) * g.nx() + i] = search.dist(i, j);
  }
  return out;
}

SoulDistances soul_distances(const LiftedGrid& g) {
  const Chart& c = g.surface().chart;
  if (!c.glide) throw std::invalid_argument("soul distance: needs a Mobius band or Klein bottle");
  SoulDistances sd;
  sd.grid = {g.nx(), g.ny()};
  sd.to_soul = distance_to_row(g, g.ny() / 2);
  if (!g.bounded()) sd.to_other_soul = distance_to_row(g, 0);
  return sd;
}

// Allowed nodes with a 4-neighbour outside the mask, in cover coordinates
// of the window rows [jlo, jhi] over the x double cover.
std::vector<Node> interface_nodes(const LiftedGrid& g, const NodeMask& mask, long period, long jlo, long jhi) {
  std::vector<Node> out;
  for (long J = jlo; J <= jhi; ++J) {
    for (long I = 0; I < period; ++I) {
      if (!node_allowed(g, &mask, I, J)) continue;
      const long nb[4][2] = {{I + 1, J}, {I - 1, J}, {I, J + 1}, {I, J - 1}};
      bool edge = false;
      for (const auto& q : nb) edge = edge || !node_allowed(g, &mask, q[0], q[1]);
      if (edge) out.push_back({I, J});
    }
  }
  return out;
}

double masked_height(const LiftedGrid& g, const NodeMask& mask, long centre) {
  const long period = 2L * g.nx();
  const long half = g.ny() / 2;
  const auto iface = interface_nodes(g, mask, period, centre - half, centre + half);
  std::vector<Node> lower, upper;
  for (const Node& n : iface) (n.J < centre ? lower : upper).push_back(n);
  GraphSearch search(g, Axis::wrap(period), Axis::open(centre - half, centre + half), &mask);
  search.run(lower);
  double h = kInfinity;
  for (const Node& n : upper) h = std::min(h, search.dist(n.I, n.J));
  return h;
}

}  // namespace

SoulDistances soul_distance_field(const Surface& s, int n, int radius) {
  const LiftedGrid g(s, grid_for(s, n), radius);
  return soul_distances(g);
}

SplitResult weighted_split(const Surface& m, double l1, double l2, int n, int radius) {
  if (m.topology() != Topology::Mobius) throw std::invalid_argument("weighted_split: needs a Mobius band");
  if (!(l1 > 0 && l1 < l2 && l2 <= 1)) throw std::invalid_argument("weighted_split: need 0 < l1 < l2 <= 1");
  SplitResult out;
  out.klein = mirrored_klein(m);
  const LiftedGrid g(out.klein, grid_for(out.klein, n), radius);
  out.distances = soul_distances(g);
  const int nx = g.nx(), ny = g.ny();
  const std::size_t nodes = static_cast<std::size_t>(g.rows()) * nx;
  std::vector<double> phi(nodes);
  out.mask1.assign(nodes, 0);
  out.mask2.assign(nodes, 0);
  for (std::size_t k = 0; k < nodes; ++k) {
    phi[k] = l2 * out.distances.to_soul[k] - l1 * out.distances.to_other_soul[k];
    out.mask1[k] = phi[k] <= 0;
    out.mask2[k] = phi[k] >= 0;
  }
  for (int i = 0; i < nx; ++i) {
    const std::size_t s = static_cast<std::size_t>(ny / 2) * nx + i;
    const std::size_t t = static_cast<std::size_t>(i);
    if (!(phi[s] < 0) || !(phi[t] > 0))
      throw std::runtime_error("weighted_split: grid too coarse to separate the souls; refine");
  }
  // bilinear phi on the cover, for cell-centre region tests
  const auto phi_at = [&](const Vector2d& p) {
    const Chart& c = out.klein.chart;
    const double fx = (p.x() - c.x0) / g.hx(), fy = (p.y() - c.y0) / g.hy();
    const long I = static_cast<long>(std::floor(fx)), J = static_cast<long>(std::floor(fy));
    const double s = fx - I, t = fy - J;
    const auto at = [&](long a, long b) {
      int i, j;
      bool flip;
      g.rep(a, b, i, j, flip);
      return phi[static_cast<std::size_t>(j) * nx + i];
    };
    return (1 - s) * (1 - t) * at(I, J) + s * (1 - t) * at(I + 1, J) + (1 - s) * t * at(I, J + 1) + s * t * at(I + 1, J + 1);
  };
  out.vol_klein = midpoint_volume(out.klein, VolumeKind::HolmesThompson, nx, ny);
  out.vol1 = midpoint_volume(out.klein, VolumeKind::HolmesThompson, nx, ny, [&](const Vector2d& p) { return phi_at(p) <= 0; });
  out.vol2 = midpoint_volume(out.klein, VolumeKind::HolmesThompson, nx, ny, [&](const Vector2d& p) { return phi_at(p) > 0; });
  out.h1 = masked_height(g, out.mask1, ny / 2);
  out.h2 = masked_height(g, out.mask2, ny);
  SystoleOptions opt;
  opt.radius = radius;
  opt.witness = false;
  out.sys1 = systole(g, opt, &out.mask1).all.length;
  double scale = 0;
  for (double d : out.distances.to_soul) scale = std::max(scale, d);
  for (const Node& v : interface_nodes(g, out.mask1, 2L * nx, 0, ny)) {
    int i, j;
    bool flip;
    g.rep(v.I, v.J, i, j, flip);
    out.interface_residual = std::max(out.interface_residual, std::abs(phi[static_cast<std::size_t>(j) * nx + i]) / scale);
  }
  return out;
}

std::vector<double> RefinedValue::gaps() const {
  std::vector<double> g;
  for (std::size_t k = 1; k < values.size(); ++k) g.push_back(values[k - 1] - values[k]);
  return g;
}

bool RefinedValue::stable(double floor) const {
  const auto g = gaps();
  const double tiny = floor * std::abs(value());
  for (double x : g) {
    if (x < -tiny) return false;
  }
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (g[k] > tiny && g[k] > g[k - 1] / 1.5) return false;
  }
  return true;
}

double RefinedValue::last_gap() const {
  const auto g = gaps();
  return g.empty() ? 0.0 : std::abs(g.back());
}

}  // namespace finsys
