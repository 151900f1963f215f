// Seeded random Finsler fields: a blend of a Riemannian part and an l^8
// polygon-like part, symmetrized over the deck group and any requested
// symmetries so that the field descends to the quotient.

#include "finsys/metric_field.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace finsys {

namespace {

constexpr double kPi = std::numbers::pi;

// exp(2 pi i (k x / px + l y / py)) for k = 0..2, l = -2..2
struct Basis {
  std::complex<double> e[3][5];

  Basis(double x, double y, double px, double py) {
    const std::complex<double> ex = std::polar(1.0, 2 * kPi * x / px);
    const std::complex<double> ey = std::polar(1.0, 2 * kPi * y / py);
    std::complex<double> ly[5];
    ly[2] = 1;
    ly[3] = ey;
    ly[4] = ey * ey;
    ly[1] = std::conj(ey);
    ly[0] = std::conj(ly[4]);
    std::complex<double> kx = 1;
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 5; ++l) e[k][l] = kx * ly[l];
      kx *= ex;
    }
  }
};

struct TrigPoly {
  struct Term {
    int k, l;
    double c, s;
  };
  double mean = 0;
  std::vector<Term> terms;

  double operator()(const Basis& b) const {
    double f = mean;
    for (const auto& t : terms) {
      const auto& z = b.e[t.k][t.l + 2];
      f += t.c * z.real() + t.s * z.imag();
    }
    return f;
  }
};

TrigPoly make_poly(std::mt19937_64& rng, double amplitude, bool x_dependent) {
  std::uniform_real_distribution<double> u(-1, 1);
  TrigPoly p;
  p.mean = amplitude * u(rng);
  for (int k = 0; k <= (x_dependent ? 2 : 0); ++k) {
    for (int l = -2; l <= 2; ++l) {
      if (k == 0 && l <= 0) continue;
      const double decay = amplitude / (1.0 + k * k + l * l);
      p.terms.push_back({k, l, decay * u(rng), decay * u(rng)});
    }
  }
  return p;
}

// Affine map (x, y) -> (x + tx, e y + ty), derivative diag(1, e).
struct Element {
  int e;
  double tx, ty;
};

class RandomField : public NormField {
 public:
  RandomField(const RandomSpec& spec, const Chart& chart) : roughness_(spec.roughness) {
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ULL + 17);
    px_ = chart.glide ? 2 * chart.L : chart.L;
    py_ = chart.y_periodic ? chart.T() : 2 * chart.T();
    const double px = px_, py = py_;
    const bool xdep = !spec.symmetry.rotational;
    angle_ = make_poly(rng, 1.2, xdep);
    s1_ = make_poly(rng, 0.5, xdep);
    s2_ = make_poly(rng, 0.5, xdep);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 3; ++i) {
      dir_[i] = make_poly(rng, 0.25, xdep);
      dir_[i].mean += i * kPi / 3 + 0.3 * u(rng);
      len_[i] = make_poly(rng, 0.3, xdep);
    }
    build_group(chart, spec.symmetry, px, py);
  }

  double norm(const Vector2d& p, const Vector2d& v) const override { return eval(at(p), v); }

  void norms(const Vector2d& p, const Vector2d* v, int count, double* out) const override {
    const Frozen f = at(p);
    for (int k = 0; k < count; ++k) out[k] = eval(f, v[k]);
  }

  LocalNorm local(const Vector2d& p) const override {
    const Frozen f = at(p);
    if (roughness_ <= 0) return {SymBodyd::ellipse(f.q), Matrix2d::Identity()};
    return {polar(dual_body(f)), Matrix2d::Identity()};
  }

  double ht_density(const Vector2d& p) const override {
    const Frozen f = at(p);
    if (roughness_ <= 0) return std::sqrt(f.q.determinant());
    return area(dual_body(f)) / kPi;
  }

  double busemann_density(const Vector2d& p) const override {
    const Frozen f = at(p);
    if (roughness_ <= 0) return std::sqrt(f.q.determinant());
    return kPi / area(polar(dual_body(f)));
  }

  std::string describe() const override {
    std::ostringstream out;
    out << "random field, roughness " << roughness_ << ", symmetrized over " << group_.size() << " maps";
    return out.str();
  }

 private:
  // everything about the field at one point; directions are then cheap
  struct Frozen {
    Matrix2d q;
    std::vector<Vector2d> forms;  // three per group element, already flipped
  };

  Frozen at(const Vector2d& p) const {
    Frozen f;
    f.q = Matrix2d::Zero();
    if (roughness_ > 0) f.forms.reserve(3 * group_.size());
    for (const auto& g : group_) {
      const Vector2d gp = apply(g, p);
      const Basis basis(gp.x(), gp.y(), px_, py_);
      Matrix2d d = Matrix2d::Identity();
      d(1, 1) = g.e;
      f.q += d * raw_shape(basis) * d;
      if (roughness_ <= 0) continue;
      for (int i = 0; i < 3; ++i) {
        const double phi = dir_[i](basis);
        const double scale = std::exp(len_[i](basis));
        f.forms.emplace_back(scale * std::cos(phi), g.e * scale * std::sin(phi));
      }
    }
    f.q /= double(group_.size());
    f.q = (0.5 * (f.q + f.q.transpose())).eval();
    return f;
  }

  double eval(const Frozen& f, const Vector2d& v) const {
    const double riem = std::sqrt(std::max(0.0, v.dot(f.q * v)));
    if (roughness_ <= 0) return riem;
    double poly = 0;
    for (std::size_t g = 0; g < f.forms.size(); g += 3) {
      double s = 0;
      for (std::size_t i = g; i < g + 3; ++i) {
        const double d = f.forms[i].dot(v);
        const double d2 = d * d, d4 = d2 * d2;
        s += d4 * d4;
      }
      poly += std::pow(s, 0.125);
    }
    return (1 - roughness_) * riem + roughness_ * poly / double(group_.size());
  }

  // the norm is the support function of the dual ball
  SymBodyd dual_body(const Frozen& f) const {
    constexpr int n = 256;
    std::vector<double> h(n);
    for (int k = 0; k < n; ++k) h[k] = eval(f, unit_direction<double>(2 * kPi * k / n));
    return SymBodyd::from_support(std::move(h));
  }

  static Vector2d apply(const Element& g, const Vector2d& p) { return {p.x() + g.tx, g.e * p.y() + g.ty}; }

  Matrix2d raw_shape(const Basis& b) const {
    const double phi = angle_(b);
    Matrix2d r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    const Eigen::Vector2d d(std::exp(s1_(b)), std::exp(s2_(b)));
    return r * d.asDiagonal() * r.transpose();
  }

  void build_group(const Chart& chart, const SymmetryFlags& sym, double px, double py) {
    std::vector<Element> gens;
    if (chart.glide) gens.push_back({-1, chart.L, 0});
    if (sym.soul) gens.push_back({-1, 0, 0});
    if (sym.soul_switching && chart.y_periodic) gens.push_back({-1, 0, chart.T() / 2});
    const auto wrap = [](double t, double period) {
      double r = std::fmod(t, period);
      if (r < 0) r += period;
      if (period - r < 1e-12 * period) r = 0;
      return r;
    };
    const auto normal = [&](Element g) {
      g.tx = wrap(g.tx, px);
      if (chart.y_periodic) g.ty = wrap(g.ty, py);
      return g;
    };
    const auto same = [&](const Element& a, const Element& b) {
      return a.e == b.e && std::abs(a.tx - b.tx) < 1e-9 && std::abs(a.ty - b.ty) < 1e-9;
    };
    group_ = {Element{1, 0, 0}};
    for (std::size_t k = 0; k < group_.size(); ++k) {
      for (const auto& g : gens) {
        // g after group_[k]
        const Element h = group_[k];
        const Element c = normal({g.e * h.e, h.tx + g.tx, g.e * h.ty + g.ty});
        bool seen = false;
        for (const auto& e : group_) seen = seen || same(e, c);
        if (!seen) group_.push_back(c);
        if (group_.size() > 64) throw std::logic_error("random field: symmetry group is not finite");
      }
    }
  }

  double roughness_;
  double px_ = 1, py_ = 1;
  TrigPoly angle_, s1_, s2_;
  TrigPoly dir_[3], len_[3];
  std::vector<Element> group_;
};

}  // namespace

Surface random_surface(const RandomSpec& spec) {
  if (!(spec.roughness >= 0 && spec.roughness <= 1)) throw std::invalid_argument("random_surface: roughness must lie in [0, 1]");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0, 1);
  Chart c;
  c.x0 = 0;
  c.L = 1;
  switch (spec.topology) {
    case Topology::Torus:
      c.y0 = 0;
      c.y1 = 0.6 + 0.8 * u(rng);
      c.y_periodic = true;
      break;
    case Topology::Cylinder:
      c.y0 = 0;
      c.y1 = 0.3 + 1.2 * u(rng);
      break;
    case Topology::Mobius: {
      const double w = 0.15 + 0.5 * u(rng);
      c.y0 = -w;
      c.y1 = w;
      c.glide = true;
      break;
    }
    case Topology::Klein: {
      const double b = 0.25 + 0.55 * u(rng);
      c.y0 = -b;
      c.y1 = b;
      c.glide = true;
      c.y_periodic = true;
      break;
    }
  }
  Surface s;
  std::ostringstream name;
  name << "random_" << to_string(spec.topology) << '_' << spec.seed;
  s.name = name.str();
  s.chart = c;
  s.field = std::make_shared<RandomField>(spec, c);
  s.symmetry = spec.symmetry;
  if (!c.y_periodic) s.symmetry.soul_switching = false;
  return s;
}

}  // namespace finsys
