#include "finsys/metric_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace finsys {

namespace {

constexpr double kPi = std::numbers::pi;

Vector2d flip_y(const Vector2d& v) { return {v.x(), -v.y()}; }

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

const char* to_string(Topology t) {
  switch (t) {
    case Topology::Torus: return "torus";
    case Topology::Cylinder: return "cylinder";
    case Topology::Mobius: return "mobius";
    case Topology::Klein: return "klein";
  }
  return "?";
}

Topology topology_from_string(const std::string& name) {
  if (name == "torus") return Topology::Torus;
  if (name == "cylinder") return Topology::Cylinder;
  if (name == "mobius") return Topology::Mobius;
  if (name == "klein") return Topology::Klein;
  throw std::invalid_argument("unknown topology '" + name + "'");
}

Topology Chart::topology() const {
  if (glide) return y_periodic ? Topology::Klein : Topology::Mobius;
  return y_periodic ? Topology::Torus : Topology::Cylinder;
}

Vector2d Chart::apply(int n, int m, const Vector2d& p) const {
  const double y = (glide && (n % 2 != 0)) ? -p.y() : p.y();
  return {p.x() + n * L, y + m * T()};
}

Matrix2d Chart::linear(int n) const {
  Matrix2d d = Matrix2d::Identity();
  if (glide && (n % 2 != 0)) d(1, 1) = -1;
  return d;
}

Vector2d Chart::reduce(const Vector2d& p, bool& flip) const {
  const double n = std::floor((p.x() - x0) / L);
  double x = p.x() - n * L;
  if (x >= x0 + L) x -= L;  // rounding
  double y = p.y();
  flip = glide && (static_cast<long long>(n) % 2 != 0);
  if (flip) y = -y;
  if (y_periodic) {
    const double m = std::floor((y - y0) / T());
    y -= m * T();
    if (y >= y1) y -= T();
  }
  return {x, y};
}

void Chart::validate() const {
  if (!(L > 0) || !(y1 > y0)) throw std::invalid_argument("chart: empty fundamental domain");
  if (glide && std::abs(y0 + y1) > 1e-12 * (y1 - y0))
    throw std::invalid_argument("chart: glide charts need a y range symmetric about 0");
  for (double b : y_breaks) {
    if (!(b > y0 && b < y1)) throw std::invalid_argument("chart: seam outside the domain");
  }
}

void NormField::norms(const Vector2d& p, const Vector2d* v, int count, double* out) const {
  for (int k = 0; k < count; ++k) out[k] = norm(p, v[k]);
}

LocalNorm NormField::local(const Vector2d& p) const {
  constexpr int n = 256;
  std::vector<double> h(n);
  for (int k = 0; k < n; ++k) h[k] = norm(p, unit_direction<double>(2 * kPi * k / n));
  // the support function of the polar body is the norm itself
  SymBodyd dual = SymBodyd::from_support(std::move(h));
  return {polar(dual), Matrix2d::Identity()};
}

double NormField::ht_density(const Vector2d& p) const {
  const LocalNorm l = local(p);
  return area(polar(l.body)) * std::abs(l.frame.determinant()) / kPi;
}

double NormField::busemann_density(const Vector2d& p) const {
  const LocalNorm l = local(p);
  return kPi * std::abs(l.frame.determinant()) / area(l.body);
}

ConstantField::ConstantField(SymBodyd body, Matrix2d frame)
    : body_(std::move(body)), frame_(frame) {
  const double det = std::abs(frame_.determinant());
  if (!(det > 0)) throw std::invalid_argument("constant field: singular frame");
  ht_ = area(polar(body_)) * det / kPi;
  busemann_ = kPi * det / area(body_);
}

double ConstantField::norm(const Vector2d&, const Vector2d& v) const { return body_.gauge(frame_ * v); }
LocalNorm ConstantField::local(const Vector2d&) const { return {body_, frame_}; }
double ConstantField::ht_density(const Vector2d&) const { return ht_; }
double ConstantField::busemann_density(const Vector2d&) const { return busemann_; }

std::string ConstantField::describe() const {
  std::ostringstream out;
  out << "constant " << to_string(body_.kind()) << " body, frame [" << frame_(0, 0) << ' ' << frame_(0, 1) << "; "
      << frame_(1, 0) << ' ' << frame_(1, 1) << ']';
  return out.str();
}

SphericalBandField::SphericalBandField(double a, bool dual)
    : a_(a), sa_(std::sin(a)), ca_(std::cos(a)), dual_(dual) {
  if (!(a > 0 && a < kPi / 2)) throw std::invalid_argument("spherical band: a must lie in (0, pi/2)");
}

double SphericalBandField::latitude(double t) const { return std::asin(sa_ * std::sin(t)); }

double SphericalBandField::theta(double t) const { return std::atan2(sa_ * std::abs(std::cos(t)), ca_); }

double SphericalBandField::norm(const Vector2d& p, const Vector2d& v) const {
  const double ct = std::abs(std::cos(p.y()));
  const double sv = sa_ * std::sin(p.y());
  const double cv = std::sqrt(1 - sv * sv);
  const double xu = cv * v.x();
  const double xv = sa_ * ct / cv * v.y();
  const double r = std::hypot(xu, xv);
  if (!dual_) return std::max(r, std::abs(v.y()));
  const double sin_t = sa_ * ct / cv;
  const double cos_t = ca_ / cv;
  if (std::abs(xv) <= r * sin_t) return r;
  return std::abs(xu) * cos_t + std::abs(xv) * sin_t;
}

LocalNorm SphericalBandField::local(const Vector2d& p) const {
  // at the boundary the frame degenerates; a tiny floor keeps it invertible
  const double ct = std::max(std::abs(std::cos(p.y())), 1e-12);
  const double sv = sa_ * std::sin(p.y());
  const double cv = std::sqrt(1 - sv * sv);
  const double th = std::atan2(sa_ * ct, ca_);
  Matrix2d frame = Matrix2d::Zero();
  frame(0, 0) = cv;
  frame(1, 1) = sa_ * ct / cv;
  return {dual_ ? SymBodyd::capped_disc(th) : SymBodyd::truncated_disc(th), frame};
}

double SphericalBandField::ht_density(const Vector2d& p) const {
  const double ct = std::abs(std::cos(p.y()));
  const double th = std::atan2(sa_ * ct, ca_);
  if (!dual_) return (2 * th * sa_ * ct + 2 * ca_) / kPi;
  return (2 * th + std::sin(2 * th)) * sa_ * ct / kPi;
}

double SphericalBandField::busemann_density(const Vector2d& p) const {
  const double ct = std::abs(std::cos(p.y()));
  const double sv = sa_ * std::sin(p.y());
  const double cv = std::sqrt(1 - sv * sv);
  const double th = std::atan2(sa_ * ct, ca_);
  const double s = std::sin(th);
  if (!dual_) {
    if (th < 1e-7) return kPi * cv / 4;
    return kPi * cv * s / (2 * th + std::sin(2 * th));
  }
  return kPi * cv * s * s / (2 * th * s + 2 * std::cos(th));
}

std::string SphericalBandField::describe() const {
  std::ostringstream out;
  out << (dual_ ? "dual " : "") << "F_a band field, a = " << a_;
  return out.str();
}

ScaledSupField::ScaledSupField(std::function<double(double)> scale, std::string label)
    : scale_(std::move(scale)), label_(std::move(label)) {}

double ScaledSupField::norm(const Vector2d& p, const Vector2d& v) const {
  return std::max(scale_(p.y()) * std::abs(v.x()), std::abs(v.y()));
}

LocalNorm ScaledSupField::local(const Vector2d& p) const {
  Matrix2d frame = Matrix2d::Identity();
  frame(0, 0) = scale_(p.y());
  return {SymBodyd::square(), frame};
}

double ScaledSupField::ht_density(const Vector2d& p) const { return 2 * scale_(p.y()) / kPi; }
double ScaledSupField::busemann_density(const Vector2d& p) const { return kPi * scale_(p.y()) / 4; }
std::string ScaledSupField::describe() const { return label_; }

BandedField::BandedField(std::vector<double> edges, std::vector<std::shared_ptr<const NormField>> bands)
    : edges_(std::move(edges)), bands_(std::move(bands)) {
  if (edges_.size() != bands_.size() || edges_.empty() || edges_.front() != 0)
    throw std::invalid_argument("banded field: need one lower edge per band, starting at 0");
}

const NormField& BandedField::pick(double y) const {
  const double ay = std::abs(y);
  std::size_t k = 0;
  while (k + 1 < edges_.size() && ay >= edges_[k + 1]) ++k;
  return *bands_[k];
}

double BandedField::norm(const Vector2d& p, const Vector2d& v) const { return pick(p.y()).norm(p, v); }
LocalNorm BandedField::local(const Vector2d& p) const { return pick(p.y()).local(p); }
double BandedField::ht_density(const Vector2d& p) const { return pick(p.y()).ht_density(p); }
double BandedField::busemann_density(const Vector2d& p) const { return pick(p.y()).busemann_density(p); }

std::string BandedField::describe() const {
  std::ostringstream out;
  out << "banded field:";
  for (std::size_t k = 0; k < bands_.size(); ++k) out << " [|y| >= " << edges_[k] << ": " << bands_[k]->describe() << ']';
  return out.str();
}

MirroredField::MirroredField(std::shared_ptr<const NormField> base, double w) : base_(std::move(base)), w_(w) {}

Vector2d MirroredField::fold(const Vector2d& p, bool& flipped) const {
  flipped = false;
  if (p.y() > w_) {
    flipped = true;
    return {p.x(), 2 * w_ - p.y()};
  }
  if (p.y() < -w_) {
    flipped = true;
    return {p.x(), -2 * w_ - p.y()};
  }
  return p;
}

double MirroredField::norm(const Vector2d& p, const Vector2d& v) const {
  bool flipped;
  const Vector2d q = fold(p, flipped);
  return base_->norm(q, flipped ? flip_y(v) : v);
}

LocalNorm MirroredField::local(const Vector2d& p) const {
  bool flipped;
  LocalNorm l = base_->local(fold(p, flipped));
  if (flipped) l.frame.col(1) *= -1;
  return l;
}

double MirroredField::ht_density(const Vector2d& p) const {
  bool flipped;
  return base_->ht_density(fold(p, flipped));
}

double MirroredField::busemann_density(const Vector2d& p) const {
  bool flipped;
  return base_->busemann_density(fold(p, flipped));
}

std::string MirroredField::describe() const {
  std::ostringstream out;
  out << "mirror across |y| = " << w_ << " of (" << base_->describe() << ')';
  return out.str();
}

GridField::GridField(Chart chart, int nx, int ny, std::vector<SymBodyd> bodies)
    : chart_(std::move(chart)), nx_(nx), ny_(ny), bodies_(std::move(bodies)) {
  if (nx < 1 || ny < 1 || bodies_.size() != static_cast<std::size_t>((nx + 1) * (ny + 1)))
    throw std::invalid_argument("grid field: need (nx + 1) * (ny + 1) bodies");
}

double GridField::norm(const Vector2d& p, const Vector2d& v) const {
  const double fx = std::clamp((p.x() - chart_.x0) / chart_.L * nx_, 0.0, double(nx_));
  const double fy = std::clamp((p.y() - chart_.y0) / chart_.T() * ny_, 0.0, double(ny_));
  const int i = std::min(static_cast<int>(fx), nx_ - 1);
  const int j = std::min(static_cast<int>(fy), ny_ - 1);
  const double s = fx - i, t = fy - j;
  const auto g = [&](int a, int b) { return bodies_[static_cast<std::size_t>(b * (nx_ + 1) + a)].gauge(v); };
  return (1 - s) * (1 - t) * g(i, j) + s * (1 - t) * g(i + 1, j) + (1 - s) * t * g(i, j + 1) + s * t * g(i + 1, j + 1);
}

std::string GridField::describe() const {
  std::ostringstream out;
  out << "bilinear gauge grid " << nx_ << 'x' << ny_;
  return out.str();
}

double Surface::norm(const Vector2d& p, const Vector2d& v) const {
  bool flip;
  const Vector2d q = chart.reduce(p, flip);
  return field->norm(q, flip ? flip_y(v) : v);
}

void Surface::norms(const Vector2d& p, const Vector2d* v, int count, double* out) const {
  bool flip;
  const Vector2d q = chart.reduce(p, flip);
  if (!flip) return field->norms(q, v, count, out);
  std::vector<Vector2d> w(v, v + count);
  for (auto& x : w) x.y() = -x.y();
  field->norms(q, w.data(), count, out);
}

LocalNorm Surface::local(const Vector2d& p) const {
  bool flip;
  LocalNorm l = field->local(chart.reduce(p, flip));
  if (flip) l.frame.col(1) *= -1;
  return l;
}

double Surface::ht_density(const Vector2d& p) const {
  bool flip;
  return field->ht_density(chart.reduce(p, flip));
}

double Surface::busemann_density(const Vector2d& p) const {
  bool flip;
  return field->busemann_density(chart.reduce(p, flip));
}

Surface flat_torus(const SymBodyd& body, const Vector2d& w1, const Vector2d& w2) {
  Matrix2d frame;
  frame.col(0) = w1;
  frame.col(1) = w2;
  if (std::abs(frame.determinant()) <= 1e-12 * w1.norm() * w2.norm())
    throw std::invalid_argument("flat_torus: basis vectors are linearly dependent");
  Surface s;
  s.name = "flat_torus";
  s.chart = Chart{0, 1, 0, 1, false, true, {}};
  s.field = std::make_shared<ConstantField>(body, frame);
  s.symmetry = {false, false, true};
  return s;
}

Surface sup_norm_cylinder(double circumference, double width) {
  if (!(circumference > 0 && width > 0)) throw std::invalid_argument("sup_norm_cylinder: sizes must be positive");
  Surface s;
  s.name = "sup_norm_cylinder";
  s.chart = Chart{0, circumference, 0, width, false, false, {}};
  s.field = std::make_shared<ConstantField>(SymBodyd::square());
  s.symmetry = {false, false, true};
  return s;
}

Surface sup_norm_mobius(double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("sup_norm_mobius: lambda must be positive");
  Surface s;
  s.name = "sup_norm_mobius";
  s.chart = Chart{0, kPi, -lambda * kPi / 2, lambda * kPi / 2, true, false, {}};
  s.field = std::make_shared<ConstantField>(SymBodyd::square());
  s.symmetry = {true, false, true};
  return s;
}

Surface spherical_finsler_mobius(double a, bool dual) {
  Surface s;
  s.name = dual ? "spherical_finsler_mobius_dual" : "spherical_finsler_mobius";
  s.chart = Chart{-kPi / 2, kPi, -kPi / 2, kPi / 2, true, false, {}};
  s.field = std::make_shared<SphericalBandField>(a, dual);
  s.symmetry = {true, false, true};
  return s;
}

Surface glued_wide_mobius(double lambda) {
  if (!(lambda >= 1)) throw std::invalid_argument("glued_wide_mobius: lambda must be >= 1");
  const double a = kPi / 3;
  const double w = (lambda - 1) * kPi / 2;
  Surface s;
  s.name = "glued_wide_mobius";
  s.chart = Chart{-kPi / 2, kPi, -kPi / 2 - w, kPi / 2 + w, true, false, {}};
  auto band = std::make_shared<SphericalBandField>(a, false);
  if (w > 0) {
    s.chart.y_breaks = {-kPi / 2, kPi / 2};
    const double ca = std::cos(a);
    auto cyl = std::make_shared<ScaledSupField>([ca](double) { return ca; }, "sup-norm cylinder of circumference pi");
    s.field = std::make_shared<BandedField>(std::vector<double>{0, kPi / 2},
                                            std::vector<std::shared_ptr<const NormField>>{band, cyl});
  } else {
    s.field = band;
  }
  s.symmetry = {true, false, true};
  return s;
}

Surface almost_extremal_wide_mobius(double lambda, double neck) {
  if (!(lambda >= 1)) throw std::invalid_argument("almost_extremal_wide_mobius: lambda must be >= 1");
  if (!(neck > 0)) throw std::invalid_argument("almost_extremal_wide_mobius: neck must be positive");
  const double w = (lambda - 1) * kPi / 2;
  const double top = kPi / 2 + neck + w;
  Surface s;
  s.name = "almost_extremal_wide_mobius";
  s.chart = Chart{0, kPi, -top, top, true, false, {}};
  s.chart.y_breaks = {-kPi / 2, kPi / 2};
  if (w > 0) s.chart.y_breaks = {-kPi / 2 - neck, -kPi / 2, kPi / 2, kPi / 2 + neck};
  const auto scale = [neck](double y) {
    const double ay = std::abs(y);
    if (ay <= kPi / 2) return 1.0;
    if (ay >= kPi / 2 + neck) return 0.5;
    return 1.0 - 0.5 * (ay - kPi / 2) / neck;
  };
  s.field = std::make_shared<ScaledSupField>(scale, "sup-norm band, funnel and cylinder");
  s.symmetry = {true, false, true};
  return s;
}

Surface sup_norm_klein(double b) {
  if (!(b > 0)) throw std::invalid_argument("sup_norm_klein: b must be positive");
  Surface s;
  s.name = "sup_norm_klein";
  s.chart = Chart{0, kPi, -b, b, true, true, {}};
  s.field = std::make_shared<ConstantField>(SymBodyd::square());
  s.symmetry = {true, true, true};
  return s;
}

Surface klein_from_fa() {
  Surface s = spherical_finsler_mobius(kPi / 3, false);
  s.name = "klein_from_fa";
  // (u, a) ~ (u, -a): in the regular latitude this is t -> t + pi
  s.chart.y_periodic = true;
  s.symmetry = {true, true, true};
  return s;
}

namespace {

void require(const Surface& m, Topology t, const char* what) {
  if (m.topology() != t) throw std::invalid_argument(std::string(what) + ": wrong topology " + to_string(m.topology()));
}

std::vector<double> mirrored_breaks(const Chart& c) {
  const double w = c.y1;
  std::vector<double> out;
  for (double b : c.y_breaks) {
    out.push_back(b);
    out.push_back(b > 0 ? 2 * w - b : -2 * w - b);
  }
  out.push_back(-w);
  out.push_back(w);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double p, double q) { return std::abs(p - q) < 1e-12; }), out.end());
  return out;
}

}  // namespace

Surface double_mobius(const Surface& m) {
  require(m, Topology::Mobius, "double_mobius");
  const double w = m.chart.y1;
  Surface s;
  s.name = "double(" + m.name + ")";
  s.chart = m.chart;
  s.chart.y0 = -2 * w;
  s.chart.y1 = 2 * w;
  s.chart.y_breaks = mirrored_breaks(m.chart);
  s.field = std::make_shared<MirroredField>(m.field, w);
  s.symmetry = {m.symmetry.soul, false, m.symmetry.rotational};
  return s;
}

Surface mirrored_klein(const Surface& m) {
  Surface s = double_mobius(m);
  s.name = "mirrored_klein(" + m.name + ")";
  s.chart.y_periodic = true;
  s.chart.y_breaks.erase(std::remove_if(s.chart.y_breaks.begin(), s.chart.y_breaks.end(),
                                        [&](double b) { return b <= s.chart.y0 || b >= s.chart.y1; }),
                         s.chart.y_breaks.end());
  s.symmetry = {m.symmetry.soul, true, m.symmetry.rotational};
  return s;
}

Surface cut_klein(const Surface& k) {
  require(k, Topology::Klein, "cut_klein");
  Surface s = k;
  s.name = "cut(" + k.name + ")";
  s.chart.y_periodic = false;
  s.symmetry.soul_switching = false;
  return s;
}

Surface grid_surface(const Chart& chart, int nx, int ny, std::vector<SymBodyd> bodies, std::string name) {
  chart.validate();
  Surface s;
  s.name = std::move(name);
  s.chart = chart;
  s.field = std::make_shared<GridField>(chart, nx, ny, std::move(bodies));
  return s;
}

FieldCheck check_field(const Surface& s, int n) {
  const Chart& c = s.chart;
  const NormField& f = *s.field;
  FieldCheck out;
  std::vector<Vector2d> dirs;
  for (int k = 0; k < 16; ++k) dirs.push_back(unit_direction<double>(kPi * k / 16));
  for (int j = 0; j <= n; ++j) {
    const double y = c.y0 + c.T() * j / n;
    for (const auto& u : dirs) {
      // x -> x + L identification
      const Vector2d right(c.x0 + c.L, y);
      const Vector2d left(c.x0, c.glide ? -y : y);
      const double a = f.norm(right, u);
      const double b = f.norm(left, c.glide ? flip_y(u) : u);
      out.equivariance = std::max(out.equivariance, rel_diff(a, b));
    }
  }
  if (c.y_periodic) {
    for (int i = 0; i <= n; ++i) {
      const double x = c.x0 + c.L * i / n;
      for (const auto& u : dirs) {
        out.equivariance = std::max(out.equivariance, rel_diff(f.norm({x, c.y1}, u), f.norm({x, c.y0}, u)));
      }
    }
  }
  const double hx = c.L / n, hy = c.T() / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const Vector2d p(c.x0 + hx * (i + 0.5), c.y0 + hy * j);
      const Vector2d qx = p + Vector2d(hx, 0);
      const Vector2d qy = p + Vector2d(0, hy);
      for (const auto& u : dirs) {
        const double fp = f.norm(p, u);
        out.continuity = std::max(out.continuity, std::abs(fp - f.norm(qx, u)) / hx);
        if (j < n) out.continuity = std::max(out.continuity, std::abs(fp - f.norm(qy, u)) / hy);
      }
    }
  }
  return out;
}

SymmetryResidual symmetry_residuals(const Surface& s, int n) {
  const Chart& c = s.chart;
  SymmetryResidual r;
  if (!c.y_periodic) r.soul_switching = std::numeric_limits<double>::infinity();
  const double b = c.T() / 2;
  std::vector<Vector2d> dirs;
  for (int k = 0; k < 12; ++k) dirs.push_back(unit_direction<double>(kPi * (k + 0.37) / 12));
  const double shifts[] = {0.173, 0.5, 0.731};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const Vector2d p(c.x0 + c.L * (i + 0.3) / n, c.y0 + c.T() * j / n);
      for (const auto& u : dirs) {
        const double f = s.norm(p, u);
        r.soul = std::max(r.soul, rel_diff(f, s.norm({p.x(), -p.y()}, flip_y(u))));
        if (c.y_periodic) r.soul_switching = std::max(r.soul_switching, rel_diff(f, s.norm({p.x(), b - p.y()}, flip_y(u))));
        for (double t : shifts) r.rotational = std::max(r.rotational, rel_diff(f, s.norm({p.x() + t * c.L, p.y()}, u)));
      }
    }
  }
  return r;
}

SymmetryFlags detect_symmetry(const Surface& s, double tol, int n) {
  const SymmetryResidual r = symmetry_residuals(s, n);
  return {r.soul <= tol, r.soul_switching <= tol, r.rotational <= tol};
}

}  // namespace finsys
