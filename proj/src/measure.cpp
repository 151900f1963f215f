#include "finsys/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace finsys {

namespace {

struct Row {
  double y;
  double h;
};

// Rows of the quadrature grid, seam-aligned: each segment between seams gets
// a share of the ny rows proportional to its height, at least one.
std::vector<Row> rows_for(const Chart& c, int ny) {
  std::vector<double> cuts{c.y0};
  for (double b : c.y_breaks) cuts.push_back(b);
  cuts.push_back(c.y1);
  std::sort(cuts.begin(), cuts.end());
  const int segments = static_cast<int>(cuts.size()) - 1;
  if (ny < segments) throw std::invalid_argument("volume: fewer rows than seam segments");
  std::vector<int> counts(segments);
  int used = 0;
  for (int k = 0; k < segments; ++k) {
    counts[k] = std::max(1, static_cast<int>(std::floor(ny * (cuts[k + 1] - cuts[k]) / c.T())));
    used += counts[k];
  }
  // hand out the remaining rows to the tallest cells
  while (used < ny) {
    int best = 0;
    for (int k = 1; k < segments; ++k) {
      if ((cuts[k + 1] - cuts[k]) / counts[k] > (cuts[best + 1] - cuts[best]) / counts[best]) best = k;
    }
    ++counts[best];
    ++used;
  }
  while (used > ny) {
    int best = -1;
    for (int k = 0; k < segments; ++k) {
      if (counts[k] > 1 && (best < 0 || (cuts[k + 1] - cuts[k]) / counts[k] < (cuts[best + 1] - cuts[best]) / counts[best]))
        best = k;
    }
    --counts[best];
    --used;
  }
  std::vector<Row> rows;
  for (int k = 0; k < segments; ++k) {
    const double h = (cuts[k + 1] - cuts[k]) / counts[k];
    for (int j = 0; j < counts[k]; ++j) rows.push_back({cuts[k] + h * (j + 0.5), h});
  }
  return rows;
}

// deterministic pairwise sum
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double density(const Surface& s, VolumeKind kind, const Vector2d& p) {
  return kind == VolumeKind::HolmesThompson ? s.ht_density(p) : s.busemann_density(p);
}

}  // namespace

const char* to_string(VolumeKind k) { return k == VolumeKind::HolmesThompson ? "ht" : "busemann"; }

double midpoint_volume(const Surface& s, VolumeKind kind, int nx, int ny, const Region& region) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("volume: empty grid");
  const Chart& c = s.chart;
  const auto rows = rows_for(c, ny);
  const double hx = c.L / nx;
  std::vector<double> row_sums(rows.size());
  std::vector<double> cells(static_cast<std::size_t>(nx));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vector2d p(c.x0 + hx * (i + 0.5), rows[j].y);
      cells[static_cast<std::size_t>(i)] = (!region || region(p)) ? density(s, kind, p) : 0.0;
    }
    row_sums[j] = pairwise_sum(cells.data(), cells.size()) * hx * rows[j].h;
  }
  return pairwise_sum(row_sums.data(), row_sums.size());
}

VolumeResult volume(const Surface& s, VolumeKind kind, int nx, int ny, const Region& region) {
  if (nx < 16 || ny < 16) throw std::invalid_argument("volume: grid must be at least 16 x 16");
  VolumeResult r;
  r.kind = kind;
  r.nx = nx;
  r.ny = ny;
  r.value = midpoint_volume(s, kind, nx, ny, region);
  r.refined = midpoint_volume(s, kind, 2 * nx, 2 * ny, region);
  r.estimated_error = 4.0 / 3.0 * std::abs(r.value - r.refined);
  return r;
}

VolumeResult volume_ht(const Surface& s, int nx, int ny, const Region& region) {
  return volume(s, VolumeKind::HolmesThompson, nx, ny, region);
}

VolumeResult volume_busemann(const Surface& s, int nx, int ny, const Region& region) {
  return volume(s, VolumeKind::Busemann, nx, ny, region);
}

DuranVerdict duran_check(const Surface& s, int nx, int ny) {
  DuranVerdict d;
  d.ht = volume_ht(s, nx, ny);
  d.busemann = volume_busemann(s, nx, ny);
  d.gap = d.busemann.value - d.ht.value;
  const double tol = d.ht.estimated_error + d.busemann.estimated_error + 1e-12 * d.busemann.value;
  d.pass = d.ht.value <= d.busemann.value + tol;

  const Chart& c = s.chart;
  const auto rows = rows_for(c, ny);
  const double hx = c.L / nx;
  d.per_cell_pass = true;
  d.riemannian = true;
  for (const auto& row : rows) {
    for (int i = 0; i < nx; ++i) {
      const Vector2d p(c.x0 + hx * (i + 0.5), row.y);
      const double ht = s.ht_density(p), bu = s.busemann_density(p);
      const double excess = (ht - bu) / bu;
      d.worst_cell_excess = std::max(d.worst_cell_excess, excess);
      if (excess > 1e-9) d.per_cell_pass = false;
      // area * polar area = pi^2 exactly when the body is an ellipse
      if (std::abs(ht / bu - 1) > 1e-6) d.riemannian = false;
    }
  }
  return d;
}

}  // namespace finsys
