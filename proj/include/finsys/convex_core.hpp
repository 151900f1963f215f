// Origin-symmetric planar convex bodies: gauges, support functions, polar
// duality, areas and the inscribed John ellipse.
//
// Every body is immutable after construction. Closed-form bodies (disc,
// square, diamond, ellipse, truncated disc and its polar) keep their exact
// formulas; everything else is an explicit symmetric polygon.

#ifndef FINSYS_CONVEX_CORE_HPP
#define FINSYS_CONVEX_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace finsys {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

class InvalidBody : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class JohnNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BodyKind {
  Disc,
  Square,
  Diamond,
  Ellipse,
  TruncatedDisc,  // unit disc cut by |y| <= sin(theta)
  CappedDisc,     // polar of TruncatedDisc: hull of the disc and (0, +-1/sin(theta))
  Polygon,
};

inline const char* to_string(BodyKind kind) {
  switch (kind) {
    case BodyKind::Disc: return "disc";
    case BodyKind::Square: return "square";
    case BodyKind::Diamond: return "diamond";
    case BodyKind::Ellipse: return "ellipse";
    case BodyKind::TruncatedDisc: return "truncated_disc";
    case BodyKind::CappedDisc: return "capped_disc";
    case BodyKind::Polygon: return "polygon";
  }
  return "?";
}

template <typename Scalar>
Vec2<Scalar> unit_direction(Scalar angle) {
  return {std::cos(angle), std::sin(angle)};
}

template <typename Scalar>
Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Origin-symmetric convex body in the plane with the origin in its interior.
template <typename Scalar>
class SymBody {
 public:
  using Vector = Vec2<Scalar>;
  using Matrix = Mat2<Scalar>;

  static SymBody disc() { return SymBody(BodyKind::Disc); }
  static SymBody square() { return SymBody(BodyKind::Square); }
  static SymBody diamond() { return SymBody(BodyKind::Diamond); }

  /// {x : x^T q x <= 1}; q must be symmetric positive definite.
  static SymBody ellipse(const Matrix& q) {
    if (std::abs(q(0, 1) - q(1, 0)) > Scalar(1e-12) * q.norm())
      throw InvalidBody("ellipse: shape matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
    if (eig.eigenvalues().minCoeff() <= Scalar(0))
      throw InvalidBody("ellipse: shape matrix is not positive definite");
    SymBody body(BodyKind::Ellipse);
    body.shape_ = Scalar(0.5) * (q + q.transpose());
    return body;
  }

  /// Unit disc cut by the horizontal lines y = +-sin(theta), 0 < theta <= pi/2.
  static SymBody truncated_disc(Scalar theta) {
    check_theta(theta, "truncated_disc");
    SymBody body(BodyKind::TruncatedDisc);
    body.theta_ = theta;
    return body;
  }

  static SymBody capped_disc(Scalar theta) {
    check_theta(theta, "capped_disc");
    SymBody body(BodyKind::CappedDisc);
    body.theta_ = theta;
    return body;
  }

  /// Convex hull of the points and their reflections through the origin.
  static SymBody hull_of(const std::vector<Vector>& points) {
    std::vector<Vector> all;
    all.reserve(2 * points.size());
    for (const auto& p : points) {
      all.push_back(p);
      all.push_back(-p);
    }
    auto hull = convex_hull(std::move(all));
    if (hull.size() < 4) throw InvalidBody("hull_of: degenerate hull");
    SymBody body(BodyKind::Polygon);
    body.set_polygon(std::move(hull));
    return body;
  }

  /// Body given by support values h(2 pi k / N), k = 0..N-1. The body is the
  /// intersection of the half-planes {x . u_k <= h_k}.
  static SymBody from_support(std::vector<Scalar> values) {
    const std::size_t n = values.size();
    if (n < 8 || n % 2 != 0) throw InvalidBody("from_support: need an even count >= 8");
    const Scalar hmax = *std::max_element(values.begin(), values.end());
    for (std::size_t k = 0; k < n; ++k) {
      if (!(values[k] > Scalar(0)) || !std::isfinite(values[k]))
        throw InvalidBody("from_support: support values must be positive");
      if (std::abs(values[k] - values[(k + n / 2) % n]) > Scalar(1e-9) * hmax)
        throw InvalidBody("from_support: samples are not origin-symmetric");
    }
    const Scalar step = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(n);
    std::vector<Vector> corners(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t k1 = (k + 1) % n;
      Matrix rows;
      rows.row(0) = unit_direction<Scalar>(step * Scalar(k)).transpose();
      rows.row(1) = unit_direction<Scalar>(step * Scalar(k1)).transpose();
      corners[k] = rows.inverse() * Vector(values[k], values[k1]);
    }
    // Edge k lies on line k between corner k-1 and corner k. A negative edge
    // length means line k is not a supporting line of the intersection, so the
    // samples are not a support function.
    for (std::size_t k = 0; k < n; ++k) {
      const Vector tangent = unit_direction<Scalar>(step * Scalar(k) + std::numbers::pi_v<Scalar> / 2);
      const Scalar edge = (corners[k] - corners[(k + n - 1) % n]).dot(tangent);
      if (edge < -Scalar(1e-9) * hmax)
        throw InvalidBody("from_support: samples are not a convex support function");
    }
    std::vector<Vector> vertices;
    vertices.reserve(n);
    for (const auto& c : corners) {
      if (vertices.empty() || (c - vertices.back()).norm() > Scalar(1e-13) * hmax) vertices.push_back(c);
    }
    while (vertices.size() > 1 && (vertices.front() - vertices.back()).norm() <= Scalar(1e-13) * hmax)
      vertices.pop_back();
    SymBody body(BodyKind::Polygon);
    body.set_polygon(std::move(vertices));
    body.samples_ = std::move(values);
    return body;
  }

  BodyKind kind() const { return kind_; }
  Scalar theta() const { return theta_; }
  const Matrix& shape() const { return shape_; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  /// Support samples the body was built from (empty unless from_support).
  const std::vector<Scalar>& support_samples() const { return samples_; }

  /// Minkowski functional inf{t > 0 : v / t in body}; 0 for v = 0.
  Scalar gauge(const Vector& v) const {
    const Scalar ax = std::abs(v.x()), ay = std::abs(v.y());
    switch (kind_) {
      case BodyKind::Disc: return v.norm();
      case BodyKind::Square: return std::max(ax, ay);
      case BodyKind::Diamond: return ax + ay;
      case BodyKind::Ellipse: return std::sqrt(std::max(Scalar(0), v.dot(shape_ * v)));
      case BodyKind::TruncatedDisc: return std::max(v.norm(), ay / std::sin(theta_));
      case BodyKind::CappedDisc: return truncated_support(v, theta_);
      case BodyKind::Polygon: return polygon_gauge(v);
    }
    return Scalar(0);
  }

  /// Support function h(u) = max over the body of <u, x>.
  Scalar support(const Vector& u) const {
    const Scalar ax = std::abs(u.x()), ay = std::abs(u.y());
    switch (kind_) {
      case BodyKind::Disc: return u.norm();
      case BodyKind::Square: return ax + ay;
      case BodyKind::Diamond: return std::max(ax, ay);
      case BodyKind::Ellipse: return std::sqrt(std::max(Scalar(0), u.dot(shape_.inverse() * u)));
      case BodyKind::TruncatedDisc: return truncated_support(u, theta_);
      case BodyKind::CappedDisc: return std::max(u.norm(), ay / std::sin(theta_));
      case BodyKind::Polygon: {
        Scalar best = Scalar(0);
        for (const auto& p : vertices_) best = std::max(best, std::abs(u.dot(p)));
        return best;
      }
    }
    return Scalar(0);
  }

  bool contains(const Vector& x, Scalar tol = Scalar(0)) const { return gauge(x) <= Scalar(1) + tol; }

 private:
  explicit SymBody(BodyKind kind) : kind_(kind) {}

  static void check_theta(Scalar theta, const char* what) {
    if (!(theta > Scalar(0)) || theta > std::numbers::pi_v<Scalar> / 2 + Scalar(1e-12)) {
      std::ostringstream msg;
      msg << what << ": theta must lie in (0, pi/2], got " << theta;
      throw InvalidBody(msg.str());
    }
  }

  static Scalar truncated_support(const Vector& u, Scalar theta) {
    const Scalar s = std::sin(theta), c = std::cos(theta);
    const Scalar r = u.norm();
    if (std::abs(u.y()) <= r * s) return r;
    return std::abs(u.x()) * c + std::abs(u.y()) * s;
  }

  // Andrew's monotone chain; collinear points dropped; counter-clockwise.
  static std::vector<Vector> convex_hull(std::vector<Vector> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    if (pts.size() < 3) return pts;
    std::vector<Vector> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross2<Scalar>(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= Scalar(0)) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross2<Scalar>(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= Scalar(0)) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
  }

  void set_polygon(std::vector<Vector> raw) {
    // merge near-coincident vertices; tiny edges give noisy normals
    Scalar rmax = Scalar(0);
    for (const auto& p : raw) rmax = std::max(rmax, p.norm());
    std::vector<Vector> vertices;
    for (const auto& p : raw) {
      if (vertices.empty() || (p - vertices.back()).norm() > Scalar(1e-10) * rmax) vertices.push_back(p);
    }
    while (vertices.size() > 1 && (vertices.front() - vertices.back()).norm() <= Scalar(1e-10) * rmax)
      vertices.pop_back();
    const std::size_t n = vertices.size();
    if (n < 3) throw InvalidBody("polygon: fewer than three vertices");
    // rotate so that the smallest polar angle comes first
    std::vector<Scalar> angles(n);
    for (std::size_t k = 0; k < n; ++k) angles[k] = std::atan2(vertices[k].y(), vertices[k].x());
    const auto first = static_cast<std::size_t>(std::min_element(angles.begin(), angles.end()) - angles.begin());
    std::rotate(vertices.begin(), vertices.begin() + static_cast<std::ptrdiff_t>(first), vertices.end());
    std::rotate(angles.begin(), angles.begin() + static_cast<std::ptrdiff_t>(first), angles.end());
    for (std::size_t k = 1; k < n; ++k) {
      while (angles[k] < angles[k - 1]) angles[k] += 2 * std::numbers::pi_v<Scalar>;
    }
    normals_.resize(n);
    offsets_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vector d = vertices[(k + 1) % n] - vertices[k];
      const Vector normal(d.y(), -d.x());
      const Scalar offset = normal.dot(vertices[k]);
      if (!(offset > Scalar(0))) throw InvalidBody("polygon: origin is not interior");
      normals_[k] = normal / offset;  // edge line: <normals_[k], x> = 1
      offsets_[k] = offset;
    }
    vertices_ = std::move(vertices);
    angles_ = std::move(angles);
  }

  Scalar polygon_gauge(const Vector& v) const {
    if (v.x() == Scalar(0) && v.y() == Scalar(0)) return Scalar(0);
    const std::size_t n = vertices_.size();
    const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
    Scalar alpha = std::atan2(v.y(), v.x());
    while (alpha < angles_.front()) alpha += two_pi;
    while (alpha >= angles_.front() + two_pi) alpha -= two_pi;
    const auto it = std::upper_bound(angles_.begin(), angles_.end(), alpha);
    const std::size_t k = static_cast<std::size_t>(it - angles_.begin()) - 1;
    Scalar best = Scalar(0);
    for (std::size_t d = 0; d < 3; ++d) best = std::max(best, normals_[(k + n - 1 + d) % n].dot(v));
    return best;
  }

  BodyKind kind_;
  Scalar theta_ = Scalar(0);
  Matrix shape_ = Matrix::Identity();
  std::vector<Vector> vertices_;
  std::vector<Scalar> angles_;
  std::vector<Vector> normals_;  // scaled so that the edge line is <n, x> = 1
  std::vector<Scalar> offsets_;
  std::vector<Scalar> samples_;

  template <typename S>
  friend SymBody<S> polar(const SymBody<S>& body);
};

using SymBodyd = SymBody<double>;

template <typename Scalar>
Scalar gauge(const SymBody<Scalar>& body, const std::type_identity_t<Vec2<Scalar>>& v) {
  return body.gauge(v);
}

template <typename Scalar>
Scalar support(const SymBody<Scalar>& body, const std::type_identity_t<Vec2<Scalar>>& u) {
  return body.support(u);
}

/// Polar body {u : <u, v> <= 1 for all v in body}. Its support function is the
/// gauge of the body.
template <typename Scalar>
SymBody<Scalar> polar(const SymBody<Scalar>& body) {
  using Body = SymBody<Scalar>;
  switch (body.kind()) {
    case BodyKind::Disc: return Body::disc();
    case BodyKind::Square: return Body::diamond();
    case BodyKind::Diamond: return Body::square();
    case BodyKind::Ellipse: return Body::ellipse(body.shape().inverse());
    case BodyKind::TruncatedDisc: return Body::capped_disc(body.theta());
    case BodyKind::CappedDisc: return Body::truncated_disc(body.theta());
    case BodyKind::Polygon: {
      // vertices of the polar are the edge normals n_e / c_e
      std::vector<Vec2<Scalar>> dual;
      dual.reserve(body.normals_.size());
      const Scalar scale = [&] {
        Scalar m = Scalar(0);
        for (const auto& n : body.normals_) m = std::max(m, n.norm());
        return m;
      }();
      for (std::size_t k = 0; k < body.normals_.size(); ++k) {
        // skip zero-length edges: their "normal" is meaningless
        const auto& a = body.vertices_[k];
        const auto& b = body.vertices_[(k + 1) % body.vertices_.size()];
        if ((b - a).norm() <= Scalar(1e-14) * a.norm()) continue;
        if (!dual.empty() && (body.normals_[k] - dual.back()).norm() <= Scalar(1e-13) * scale) continue;
        dual.push_back(body.normals_[k]);
      }
      return Body::hull_of(dual);
    }
  }
  return body;
}

template <typename Scalar>
Scalar area(const SymBody<Scalar>& body) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  switch (body.kind()) {
    case BodyKind::Disc: return pi;
    case BodyKind::Square: return Scalar(4);
    case BodyKind::Diamond: return Scalar(2);
    case BodyKind::Ellipse: return pi / std::sqrt(body.shape().determinant());
    case BodyKind::TruncatedDisc: return 2 * body.theta() + std::sin(2 * body.theta());
    case BodyKind::CappedDisc: return 2 * body.theta() + 2 / std::tan(body.theta());
    case BodyKind::Polygon: {
      const auto& v = body.vertices();
      Scalar twice = Scalar(0);
      for (std::size_t k = 0; k < v.size(); ++k) twice += cross2<Scalar>(v[k], v[(k + 1) % v.size()]);
      return twice / 2;
    }
  }
  return Scalar(0);
}

/// Support values at the N uniform angles 2 pi k / N.
template <typename Scalar>
std::vector<Scalar> support_samples(const SymBody<Scalar>& body, std::size_t n) {
  std::vector<Scalar> h(n);
  const Scalar step = 2 * std::numbers::pi_v<Scalar> / Scalar(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = body.support(unit_direction<Scalar>(step * Scalar(k)));
  return h;
}

/// Sampled body with the same support values at N uniform angles.
template <typename Scalar>
SymBody<Scalar> sampled(const SymBody<Scalar>& body, std::size_t n) {
  return SymBody<Scalar>::from_support(support_samples(body, n));
}

/// max_k |h_A(u_k) - h_B(u_k)| over N uniform directions.
template <typename Scalar>
Scalar hausdorff_distance(const SymBody<Scalar>& a, const SymBody<Scalar>& b, std::size_t n = 4096) {
  Scalar worst = Scalar(0);
  const Scalar step = 2 * std::numbers::pi_v<Scalar> / Scalar(n);
  for (std::size_t k = 0; k < n / 2; ++k) {  // symmetric bodies: half the circle suffices
    const auto u = unit_direction<Scalar>(step * Scalar(k));
    worst = std::max(worst, std::abs(a.support(u) - b.support(u)));
  }
  return worst;
}

template <typename Scalar>
Scalar circumradius(const SymBody<Scalar>& body, std::size_t n = 1024) {
  Scalar r = Scalar(0);
  const Scalar step = 2 * std::numbers::pi_v<Scalar> / Scalar(n);
  for (std::size_t k = 0; k < n / 2; ++k) r = std::max(r, body.support(unit_direction<Scalar>(step * Scalar(k))));
  return r;
}

/// Unit disc cut at +-sin(theta).
template <typename Scalar>
SymBody<Scalar> truncated_disc(Scalar theta) {
  return SymBody<Scalar>::truncated_disc(theta);
}

/// Origin-centred ellipse {x : x^T Q x <= 1}.
template <typename Scalar>
struct Ellipse {
  Mat2<Scalar> shape;

  Scalar gauge(const Vec2<Scalar>& v) const { return std::sqrt(std::max(Scalar(0), v.dot(shape * v))); }
  Scalar area() const { return std::numbers::pi_v<Scalar> / std::sqrt(shape.determinant()); }
  /// Symmetric square root of the inverse shape: E = L * unit disc.
  Mat2<Scalar> axes() const {
    Eigen::SelfAdjointEigenSolver<Mat2<Scalar>> eig(shape);
    return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           eig.eigenvectors().transpose();
  }
  SymBody<Scalar> body() const { return SymBody<Scalar>::ellipse(shape); }
};

struct JohnOptions {
  int mesh = 2048;           // directions for containment of curved bodies
  int verify_mesh = 4096;    // boundary points of E checked with the body's gauge
  int max_iterations = 4000;
  double tolerance = 1e-12;  // simplex size in the shape parameters
};

struct JohnDiagnostics {
  int iterations = 0;
  int restarts = 0;
  double inner_excess = 0;  // max gauge_C over boundary of E, minus 1, before rescaling
};

namespace detail {

// exp of the traceless symmetric matrix [[p, q], [q, -p]]
template <typename Scalar>
Mat2<Scalar> exp_traceless(Scalar p, Scalar q) {
  const Scalar r = std::hypot(p, q);
  Mat2<Scalar> s;
  s << p, q, q, -p;
  const Scalar sinc = r > Scalar(1e-300) ? std::sinh(r) / r : Scalar(1);
  return std::cosh(r) * Mat2<Scalar>::Identity() + sinc * s;
}

template <typename Scalar>
void containment_constraints(const SymBody<Scalar>& body, int mesh, std::vector<Vec2<Scalar>>& dirs,
                             std::vector<Scalar>& offsets) {
  dirs.clear();
  offsets.clear();
  if (body.kind() == BodyKind::Polygon || body.kind() == BodyKind::Square || body.kind() == BodyKind::Diamond) {
    // exact: one constraint per edge, i.e. per vertex of the polar polygon
    const SymBody<Scalar> poly = body.kind() == BodyKind::Polygon ? body
                                 : body.kind() == BodyKind::Square
                                     ? SymBody<Scalar>::hull_of({{1, 1}, {-1, 1}})
                                     : SymBody<Scalar>::hull_of({{1, 0}, {0, 1}});
    const SymBody<Scalar> normals = polar(poly);
    for (const auto& n : normals.vertices()) {
      dirs.push_back(n.normalized());
      offsets.push_back(Scalar(1) / n.norm());
    }
    return;
  }
  const Scalar step = std::numbers::pi_v<Scalar> / Scalar(mesh);
  for (int k = 0; k < mesh; ++k) {  // half circle; bodies are symmetric
    const auto u = unit_direction<Scalar>(step * Scalar(k));
    dirs.push_back(u);
    offsets.push_back(body.support(u));
  }
}

}  // namespace detail

/// Maximal-area origin-centred ellipse contained in the body.
///
/// The ellipse is written E = s * exp(S) * disc with S traceless symmetric.
/// For a fixed S the largest admissible scale is min_k c_k / |exp(S) d_k| over
/// the containment constraints h_E(d_k) <= c_k, so the search runs over the
/// two entries of S only. The objective is a min of smooth functions, hence
/// Nelder-Mead with restarts rather than a gradient method.
template <typename Scalar>
Ellipse<Scalar> john_ellipse(const SymBody<Scalar>& body, const JohnOptions& opts = {},
                             JohnDiagnostics* diag = nullptr) {
  using V2 = Vec2<Scalar>;
  std::vector<V2> dirs;
  std::vector<Scalar> offsets;
  detail::containment_constraints(body, opts.mesh, dirs, offsets);

  const auto scale_for = [&](Scalar p, Scalar q) {
    const Mat2<Scalar> l = detail::exp_traceless(p, q);
    Scalar s = std::numeric_limits<Scalar>::infinity();
    for (std::size_t k = 0; k < dirs.size(); ++k) s = std::min(s, offsets[k] / (l * dirs[k]).norm());
    return s;
  };
  const auto objective = [&](const V2& x) { return -scale_for(x.x(), x.y()); };

  int iterations = 0, restarts = 0;
  V2 best = V2::Zero();
  Scalar best_value = objective(best);
  for (int round = 0; round < 8; ++round) {
    std::array<V2, 3> simplex{best, best + V2(Scalar(0.25), 0), best + V2(0, Scalar(0.25))};
    std::array<Scalar, 3> values{objective(simplex[0]), objective(simplex[1]), objective(simplex[2])};
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it, ++iterations) {
      std::array<int, 3> order{0, 1, 2};
      std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
      const int lo = order[0], mid = order[1], hi = order[2];
      const Scalar size = std::max((simplex[mid] - simplex[lo]).norm(), (simplex[hi] - simplex[lo]).norm());
      if (size < Scalar(opts.tolerance)) {
        converged = true;
        break;
      }
      const V2 centroid = (simplex[lo] + simplex[mid]) / 2;
      const V2 reflected = centroid + (centroid - simplex[hi]);
      const Scalar fr = objective(reflected);
      if (fr < values[lo]) {
        const V2 expanded = centroid + 2 * (centroid - simplex[hi]);
        const Scalar fe = objective(expanded);
        if (fe < fr) {
          simplex[hi] = expanded;
          values[hi] = fe;
        } else {
          simplex[hi] = reflected;
          values[hi] = fr;
        }
      } else if (fr < values[mid]) {
        simplex[hi] = reflected;
        values[hi] = fr;
      } else {
        const V2 contracted = fr < values[hi] ? V2(centroid + (reflected - centroid) / 2)
                                              : V2(centroid + (simplex[hi] - centroid) / 2);
        const Scalar fc = objective(contracted);
        if (fc < std::min(fr, values[hi])) {
          simplex[hi] = contracted;
          values[hi] = fc;
        } else {
          for (int idx : {mid, hi}) {
            simplex[idx] = simplex[lo] + (simplex[idx] - simplex[lo]) / 2;
            values[idx] = objective(simplex[idx]);
          }
        }
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "john_ellipse: Nelder-Mead did not converge after " << iterations << " iterations ("
          << restarts << " restarts), best area " << std::numbers::pi_v<Scalar> * best_value * best_value;
      throw JohnNotConverged(msg.str());
    }
    const auto it = std::min_element(values.begin(), values.end());
    const V2 candidate = simplex[static_cast<std::size_t>(it - values.begin())];
    const Scalar improvement = best_value - *it;
    if (*it < best_value) {
      best = candidate;
      best_value = *it;
    }
    ++restarts;
    if (round > 0 && improvement <= Scalar(1e-14) * std::abs(best_value)) break;
  }

  Mat2<Scalar> axes = -best_value * detail::exp_traceless(best.x(), best.y());
  // gauge-based containment check on the boundary of E
  Scalar worst = Scalar(0);
  const Scalar step = std::numbers::pi_v<Scalar> / Scalar(opts.verify_mesh);
  for (int k = 0; k < opts.verify_mesh; ++k) worst = std::max(worst, body.gauge(axes * unit_direction<Scalar>(step * Scalar(k))));
  if (diag != nullptr) {
    diag->iterations = iterations;
    diag->restarts = restarts;
    diag->inner_excess = static_cast<double>(worst - Scalar(1));
  }
  if (worst > Scalar(1)) axes /= worst;
  const Mat2<Scalar> inv = axes.inverse();
  Mat2<Scalar> q = inv.transpose() * inv;
  q = Scalar(0.5) * (q + q.transpose()).eval();
  return Ellipse<Scalar>{q};
}

/// Largest t with E subset C subset t * E, estimated on a mesh of boundary points
/// of C. For the John ellipse of a planar symmetric body t <= sqrt(2).
template <typename Scalar>
Scalar outer_ratio(const SymBody<Scalar>& body, const Ellipse<Scalar>& e, int mesh = 4096) {
  Scalar worst = Scalar(0);
  const Scalar step = std::numbers::pi_v<Scalar> / Scalar(mesh);
  for (int k = 0; k < mesh; ++k) {
    const auto u = unit_direction<Scalar>(step * Scalar(k));
    const Scalar g = body.gauge(u);
    if (g > Scalar(0)) worst = std::max(worst, e.gauge(u / g));
  }
  return worst;
}

/// Largest gauge of C over boundary points of E; <= 1 means E subset C.
template <typename Scalar>
Scalar inner_ratio(const SymBody<Scalar>& body, const Ellipse<Scalar>& e, int mesh = 4096) {
  const Mat2<Scalar> axes = e.axes();
  Scalar worst = Scalar(0);
  const Scalar step = std::numbers::pi_v<Scalar> / Scalar(mesh);
  for (int k = 0; k < mesh; ++k) worst = std::max(worst, body.gauge(axes * unit_direction<Scalar>(step * Scalar(k))));
  return worst;
}

}  // namespace finsys

#endif  // FINSYS_CONVEX_CORE_HPP
