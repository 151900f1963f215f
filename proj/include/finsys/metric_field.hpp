// Finsler surfaces as quotients of a rectangle chart.
//
// A chart is the rectangle [x0, x0 + L) x [y0, y1] together with the deck
// group generated by x -> x + L (a glide (x, y) -> (x + L, -y) for one-sided
// surfaces) and, when y is periodic, the translation y -> y + T with
// T = y1 - y0. Deck element (n, m) acts as (x + nL, (-1)^n y + mT) on glide
// charts and as (x + nL, y + mT) otherwise.

#ifndef FINSYS_METRIC_FIELD_HPP
#define FINSYS_METRIC_FIELD_HPP

#include "finsys/convex_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace finsys {

using Eigen::Matrix2d;
using Eigen::Vector2d;

enum class Topology { Torus, Cylinder, Mobius, Klein };

const char* to_string(Topology t);
Topology topology_from_string(const std::string& name);

struct Chart {
  double x0 = 0;
  double L = 1;
  double y0 = 0;
  double y1 = 1;
  bool glide = false;
  bool y_periodic = false;
  std::vector<double> y_breaks;  // seams of piecewise fields, strictly inside (y0, y1)

  double T() const { return y1 - y0; }
  Topology topology() const;
  bool has_boundary() const { return !y_periodic; }

  Vector2d apply(int n, int m, const Vector2d& p) const;
  Matrix2d linear(int n) const;  // derivative of deck element (n, m)
  /// Moves p into the fundamental domain; on return `flip` tells whether the
  /// deck element used reverses the y direction.
  Vector2d reduce(const Vector2d& p, bool& flip) const;
  void validate() const;
};

struct LocalNorm {
  SymBodyd body;  // unit ball in frame coordinates
  Matrix2d frame;  // chart vector v has frame coordinates frame * v
};

/// Field of norms on the chart rectangle. Implementations may assume the point
/// lies in the closed fundamental domain.
class NormField {
 public:
  virtual ~NormField() = default;
  virtual double norm(const Vector2d& p, const Vector2d& v) const = 0;
  /// Several vectors at one base point.
  virtual void norms(const Vector2d& p, const Vector2d* v, int count, double* out) const;
  /// Unit ball and frame. The default samples norm() on 256 directions and
  /// takes the dual polygon from_support(F(u_k)) and the body as its polar.
  virtual LocalNorm local(const Vector2d& p) const;
  /// area(B_p polar) |det frame| / pi per unit chart area.
  virtual double ht_density(const Vector2d& p) const;
  /// pi |det frame| / area(B_p) per unit chart area.
  virtual double busemann_density(const Vector2d& p) const;
  virtual std::string describe() const = 0;
};

class ConstantField : public NormField {
 public:
  ConstantField(SymBodyd body, Matrix2d frame = Matrix2d::Identity());
  double norm(const Vector2d& p, const Vector2d& v) const override;
  LocalNorm local(const Vector2d& p) const override;
  double ht_density(const Vector2d& p) const override;
  double busemann_density(const Vector2d& p) const override;
  std::string describe() const override;

 private:
  SymBodyd body_;
  Matrix2d frame_;
  double ht_;
  double busemann_;
};

/// F_a (or its dual) on the Mobius band S_a / antipodal map, written in the
/// regular latitude t with sin v = sin a sin t. In (u, t) coordinates the
/// round frame is diag(cos v, sin a cos t / cos v) and the cone half-angle
/// satisfies tan theta = sin a cos t / cos a.
class SphericalBandField : public NormField {
 public:
  SphericalBandField(double a, bool dual);
  double norm(const Vector2d& p, const Vector2d& v) const override;
  LocalNorm local(const Vector2d& p) const override;
  double ht_density(const Vector2d& p) const override;
  double busemann_density(const Vector2d& p) const override;
  std::string describe() const override;

  double a() const { return a_; }
  bool dual() const { return dual_; }
  double latitude(double t) const;
  double theta(double t) const;

 private:
  double a_, sa_, ca_;
  bool dual_;
};

/// max(s(y) |dx|, |dy|): a sup-norm whose horizontal scale depends on y.
class ScaledSupField : public NormField {
 public:
  ScaledSupField(std::function<double(double)> scale, std::string label);
  double norm(const Vector2d& p, const Vector2d& v) const override;
  LocalNorm local(const Vector2d& p) const override;
  double ht_density(const Vector2d& p) const override;
  double busemann_density(const Vector2d& p) const override;
  std::string describe() const override;

 private:
  std::function<double(double)> scale_;
  std::string label_;
};

/// Piecewise field in |y|: band k covers |y| in [edges[k], edges[k+1]).
class BandedField : public NormField {
 public:
  BandedField(std::vector<double> edges, std::vector<std::shared_ptr<const NormField>> bands);
  double norm(const Vector2d& p, const Vector2d& v) const override;
  LocalNorm local(const Vector2d& p) const override;
  double ht_density(const Vector2d& p) const override;
  double busemann_density(const Vector2d& p) const override;
  std::string describe() const override;

 private:
  const NormField& pick(double y) const;
  std::vector<double> edges_;
  std::vector<std::shared_ptr<const NormField>> bands_;
};

/// Mirror of a field given on |y| <= w across the lines y = +-w, defined on
/// |y| <= 2w: F~(x, y) = F(x, 2w - y) with dy reversed for y > w.
class MirroredField : public NormField {
 public:
  MirroredField(std::shared_ptr<const NormField> base, double w);
  double norm(const Vector2d& p, const Vector2d& v) const override;
  LocalNorm local(const Vector2d& p) const override;
  double ht_density(const Vector2d& p) const override;
  double busemann_density(const Vector2d& p) const override;
  std::string describe() const override;

 private:
  Vector2d fold(const Vector2d& p, bool& flipped) const;
  std::shared_ptr<const NormField> base_;
  double w_;
};

/// Bilinear blend of gauges over a grid of bodies covering the chart; node
/// (i, j) sits at (x0 + i L / nx, y0 + j (y1 - y0) / ny), i = 0..nx, j = 0..ny.
class GridField : public NormField {
 public:
  GridField(Chart chart, int nx, int ny, std::vector<SymBodyd> bodies);
  double norm(const Vector2d& p, const Vector2d& v) const override;
  std::string describe() const override;

 private:
  Chart chart_;
  int nx_, ny_;
  std::vector<SymBodyd> bodies_;
};

struct SymmetryFlags {
  bool soul = false;
  bool soul_switching = false;
  bool rotational = false;
  bool any() const { return soul || soul_switching || rotational; }
};

struct RandomSpec {
  std::uint64_t seed = 0;
  Topology topology = Topology::Torus;
  double roughness = 0.5;
  SymmetryFlags symmetry;
};

struct Surface {
  std::string name;
  Chart chart;
  std::shared_ptr<const NormField> field;
  SymmetryFlags symmetry;  // symmetries the construction claims

  Topology topology() const { return chart.topology(); }
  /// Norm at any lifted point: reduced to the fundamental domain first.
  double norm(const Vector2d& p, const Vector2d& v) const;
  void norms(const Vector2d& p, const Vector2d* v, int count, double* out) const;
  LocalNorm local(const Vector2d& p) const;
  double ht_density(const Vector2d& p) const;
  double busemann_density(const Vector2d& p) const;
};

Surface flat_torus(const SymBodyd& body, const Vector2d& w1, const Vector2d& w2);
Surface sup_norm_cylinder(double circumference, double width);
Surface sup_norm_mobius(double lambda);
Surface spherical_finsler_mobius(double a, bool dual = false);
Surface glued_wide_mobius(double lambda);
/// Sup-norm band M_pi joined to the wide cylinder through a funnel of height
/// neck whose horizontal scale drops from 1 to 1/2.
Surface almost_extremal_wide_mobius(double lambda, double neck = 1e-2 * 3.141592653589793);
Surface sup_norm_klein(double b);
Surface klein_from_fa();
/// Mobius band of doubled height, the field mirrored across the boundary.
Surface double_mobius(const Surface& m);
/// Klein bottle made of m and its mirror image, glued along the boundary.
Surface mirrored_klein(const Surface& m);
/// Mobius band obtained by cutting a Klein bottle along the soul y = y1.
Surface cut_klein(const Surface& k);
Surface random_surface(const RandomSpec& spec);
Surface grid_surface(const Chart& chart, int nx, int ny, std::vector<SymBodyd> bodies, std::string name);

struct FieldCheck {
  double equivariance = 0;  // max relative mismatch across identified edges
  double continuity = 0;    // max |F(p,u) - F(q,u)| / |p - q| over grid edges
};

/// Compares the raw field on identified edges of the domain and estimates a
/// Lipschitz constant in the base point, on an n x n sample grid.
FieldCheck check_field(const Surface& s, int n = 64);

struct SymmetryResidual {
  double soul = 0;
  double soul_switching = 0;
  double rotational = 0;
};

/// Invariance residuals of the lifted metric under (x, -y), (x, b - y) with
/// b = T / 2, and x-translations; relative, on an n x n grid.
SymmetryResidual symmetry_residuals(const Surface& s, int n = 32);
SymmetryFlags detect_symmetry(const Surface& s, double tol = 1e-9, int n = 32);

}  // namespace finsys

#endif  // FINSYS_METRIC_FIELD_HPP
