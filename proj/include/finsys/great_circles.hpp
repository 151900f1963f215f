// Spherical band S_a: Clairaut angles, systolic cones, great-circle traces and
// the F_a length machinery used to calibrate the graph engine.

#ifndef FINSYS_GREAT_CIRCLES_HPP
#define FINSYS_GREAT_CIRCLES_HPP

#include "finsys/convex_core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace finsys {

template <typename Scalar>
void check_band_width(Scalar a) {
  if (!(a > Scalar(0)) || !(a < std::numbers::pi_v<Scalar> / 2)) {
    std::ostringstream msg;
    msg << "band half-width must lie in (0, pi/2), got " << a;
    throw std::invalid_argument(msg.str());
  }
}

/// Half-angle of the systolic cone at latitude v: arccos(cos a / cos v).
template <typename Scalar>
Scalar clairaut_angle(Scalar a, Scalar v) {
  if (!(a < std::numbers::pi_v<Scalar> / 2) || std::abs(v) > a * (Scalar(1) + Scalar(1e-14))) {
    std::ostringstream msg;
    msg << "clairaut_angle: latitude " << v << " outside the band of half-width " << a;
    throw std::invalid_argument(msg.str());
  }
  // sin(theta) cos(v) = sqrt(sin^2 a - sin^2 v), cos(theta) cos(v) = cos a
  const Scalar s2 = std::sin(a) * std::sin(a) - std::sin(v) * std::sin(v);
  return std::atan2(std::sqrt(std::max(Scalar(0), s2)), std::cos(a));
}

template <typename Scalar>
struct ConeProfile {
  Scalar a;
  Scalar theta(Scalar v) const { return clairaut_angle(a, v); }
};

/// F_a length of a tangent vector (xi_u, xi_v) written in the orthonormal
/// longitude/latitude frame at latitude v.
template <typename Scalar>
Scalar fa_gauge(Scalar a, Scalar v, const Vec2<Scalar>& xi) {
  const Scalar theta = clairaut_angle(a, v);
  if (theta <= Scalar(0)) {
    // tangency latitude: only the parallel direction survives; allow round-off in xi_v
    const Scalar slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::abs(xi.x());
    return std::abs(xi.y()) <= slack ? std::abs(xi.x()) : std::numeric_limits<Scalar>::infinity();
  }
  return SymBody<Scalar>::truncated_disc(theta).gauge(xi);
}

template <typename Scalar>
struct TracePoint {
  Scalar tau;  // round arclength from the equator crossing
  Scalar u;    // longitude, continuous along the trace
  Scalar v;    // latitude
  Scalar du;   // derivative of u in tau
  Scalar dv;   // derivative of v in tau
};

/// Great circle through (s, 0) leaving the equator at angle theta0, sampled at
/// `samples` + 1 points of round arclength tau in [0, length]. Points with
/// |v| > a are dropped. Built by rotating the equator in R^3, no ODE involved.
template <typename Scalar>
std::vector<TracePoint<Scalar>> trace_great_circle(Scalar s, Scalar theta0, Scalar a, int samples = 720,
                                                   Scalar length = 2 * std::numbers::pi_v<Scalar>) {
  check_band_width(a);
  if (std::abs(theta0) > a * (Scalar(1) + Scalar(1e-14)))
    throw std::invalid_argument("trace_great_circle: |theta0| must not exceed a");
  using V3 = Eigen::Matrix<Scalar, 3, 1>;
  const V3 p0(std::cos(s), std::sin(s), 0);
  const V3 eu(-std::sin(s), std::cos(s), 0);
  const V3 ev(0, 0, 1);
  const V3 t0 = std::cos(theta0) * eu + std::sin(theta0) * ev;
  std::vector<TracePoint<Scalar>> out;
  out.reserve(static_cast<std::size_t>(samples) + 1);
  Scalar previous_u = s;
  for (int k = 0; k <= samples; ++k) {
    const Scalar tau = length * Scalar(k) / Scalar(samples);
    const V3 p = std::cos(tau) * p0 + std::sin(tau) * t0;
    const V3 dp = -std::sin(tau) * p0 + std::cos(tau) * t0;
    const Scalar v = std::asin(std::clamp(p.z(), Scalar(-1), Scalar(1)));
    Scalar u = std::atan2(p.y(), p.x());
    const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
    u += two_pi * std::round((previous_u - u) / two_pi);
    previous_u = u;
    const Scalar cv = std::cos(v);
    const Scalar du = (-std::sin(u) * dp.x() + std::cos(u) * dp.y()) / cv;
    const Scalar dv = dp.z() / cv;
    if (std::abs(v) <= a * (Scalar(1) + Scalar(1e-14))) out.push_back({tau, u, v, du, dv});
  }
  return out;
}

/// F_a length of the great circle through (s, 0) at angle theta0, over round
/// arclength [0, length]; composite Simpson rule on the exact tangent.
template <typename Scalar>
Scalar fa_length_of_great_circle(Scalar theta0, Scalar a, Scalar length = std::numbers::pi_v<Scalar>,
                                 int panels = 2048) {
  const auto trace = trace_great_circle(Scalar(0), theta0, a, 2 * panels, length);
  if (trace.size() != static_cast<std::size_t>(2 * panels + 1))
    throw std::invalid_argument("fa_length_of_great_circle: circle leaves the band");
  const Scalar step = length / Scalar(2 * panels);
  Scalar total = Scalar(0);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& q = trace[k];
    const Scalar w = (k == 0 || k + 1 == trace.size()) ? Scalar(1) : (k % 2 == 1 ? Scalar(4) : Scalar(2));
    total += w * fa_gauge(a, q.v, Vec2<Scalar>(std::cos(q.v) * q.du, q.dv));
  }
  return total * step / 3;
}

/// Integral of dv / sin(theta(v)) over [-a, a]. The substitution
/// sin v = sin a sin t removes both endpoint singularities; the transformed
/// integrand is evaluated numerically and integrated by Gauss-Legendre.
template <typename Scalar>
Scalar height_integrand_check(Scalar a) {
  check_band_width(a);
  // 20-point Gauss-Legendre on [-1, 1], applied on 8 panels of [-pi/2, pi/2]
  static const Scalar nodes[10] = {Scalar(0.0765265211334973), Scalar(0.2277858511416451),
                                   Scalar(0.3737060887154195), Scalar(0.5108670019508271),
                                   Scalar(0.6360536807265150), Scalar(0.7463319064601508),
                                   Scalar(0.8391169718222188), Scalar(0.9122344282513259),
                                   Scalar(0.9639719272779138), Scalar(0.9931285991850949)};
  static const Scalar weights[10] = {Scalar(0.1527533871307258), Scalar(0.1491729864726037),
                                     Scalar(0.1420961093183820), Scalar(0.1316886384491766),
                                     Scalar(0.1181945319615184), Scalar(0.1019301198172404),
                                     Scalar(0.0832767415767048), Scalar(0.0626720483341091),
                                     Scalar(0.0406014298003869), Scalar(0.0176140071391521)};
  const Scalar sa = std::sin(a);
  const auto integrand = [&](Scalar t) {
    const Scalar v = std::asin(sa * std::sin(t));
    const Scalar dv_dt = sa * std::cos(t) / std::cos(v);
    const Scalar sin_theta = std::sqrt(std::max(Scalar(0), sa * sa - std::sin(v) * std::sin(v))) / std::cos(v);
    if (sin_theta <= Scalar(0)) return Scalar(1);  // limit at the endpoints
    return dv_dt / sin_theta;
  };
  const int panels = 8;
  const Scalar lo = -std::numbers::pi_v<Scalar> / 2;
  const Scalar width = std::numbers::pi_v<Scalar> / Scalar(panels);
  Scalar total = Scalar(0);
  for (int p = 0; p < panels; ++p) {
    const Scalar mid = lo + width * (Scalar(p) + Scalar(0.5));
    for (int k = 0; k < 10; ++k) {
      const Scalar off = Scalar(0.5) * width * nodes[k];
      total += weights[k] * (integrand(mid - off) + integrand(mid + off));
    }
  }
  return Scalar(0.5) * width * total;
}

}  // namespace finsys

#endif  // FINSYS_GREAT_CIRCLES_HPP
