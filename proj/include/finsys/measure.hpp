// Holmes-Thompson and Busemann areas by midpoint quadrature over the
// fundamental domain, with a Richardson error estimate from grid n vs 2n.

#ifndef FINSYS_MEASURE_HPP
#define FINSYS_MEASURE_HPP

#include "finsys/metric_field.hpp"

#include <functional>
#include <string>

namespace finsys {

enum class VolumeKind { HolmesThompson, Busemann };

const char* to_string(VolumeKind k);

struct VolumeResult {
  double value = 0;            // midpoint rule on the requested grid
  double estimated_error = 0;  // 4/3 |V(n) - V(2n)|
  double refined = 0;          // V(2n)
  int nx = 0, ny = 0;
  VolumeKind kind = VolumeKind::HolmesThompson;
};

/// Region filter in chart coordinates; cells whose centre fails it are skipped.
using Region = std::function<bool(const Vector2d&)>;

/// Sum of density * cell area at cell centres. Rows are distributed over the
/// y segments between seams so that no cell straddles a seam.
double midpoint_volume(const Surface& s, VolumeKind kind, int nx, int ny, const Region& region = {});

VolumeResult volume(const Surface& s, VolumeKind kind, int nx, int ny, const Region& region = {});
VolumeResult volume_ht(const Surface& s, int nx, int ny, const Region& region = {});
VolumeResult volume_busemann(const Surface& s, int nx, int ny, const Region& region = {});

struct DuranVerdict {
  bool pass = false;
  bool per_cell_pass = false;
  double worst_cell_excess = 0;  // max over cells of (ht - busemann) / busemann
  VolumeResult ht, busemann;
  double gap = 0;                // busemann - ht
  bool riemannian = false;       // every sampled body has area * polar area = pi^2
};

DuranVerdict duran_check(const Surface& s, int nx, int ny);

}  // namespace finsys

#endif  // FINSYS_MEASURE_HPP
