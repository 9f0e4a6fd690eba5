#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fracshape/common.hpp"
#include "fracshape/nonlocal.hpp"
#include "fracshape/shapes.hpp"

namespace fracshape {

struct CurvatureValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

// ---------------------------------------------------------------------------
// N = 1: exact evaluation at an endpoint of an interval union. The PV pairing
// of t -> x +- t makes the first segment vanish identically; the rest is a
// telescoping sum of power antiderivatives.
// ---------------------------------------------------------------------------
inline CurvatureValue fractional_mean_curvature(const IntervalUnion& e, double x,
                                                const QuadratureSpec& q) {
  q.validate();
  const double s = q.s;
  double scale = e.intervals().back().second - e.intervals().front().first;
  bool on_boundary = false;
  for (auto& [a, b] : e.intervals())
    if (std::abs(x - a) < 1e-9 * scale || std::abs(x - b) < 1e-9 * scale)
      on_boundary = true;
  if (!on_boundary) throw std::invalid_argument("x not on boundary");

  std::vector<double> radii;
  for (auto& [a, b] : e.intervals()) {
    if (std::abs(a - x) > 1e-9 * scale) radii.push_back(std::abs(a - x));
    if (std::abs(b - x) > 1e-9 * scale) radii.push_back(std::abs(b - x));
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end(),
                          [&](double u, double v) { return std::abs(u - v) < 1e-12 * scale; }),
              radii.end());

  auto sgn = [&](double p) { return e.contains(p) ? -1.0 : 1.0; };
  KahanSum acc;
  double prev = 0.0;
  for (std::size_t i = 0; i <= radii.size(); ++i) {
    double lo = prev;
    double hi = i < radii.size() ? radii[i] : std::numeric_limits<double>::infinity();
    double mid = std::isinf(hi) ? lo * 2.0 + scale : 0.5 * (lo + hi);
    double pair_sign = sgn(x + mid) + sgn(x - mid);
    if (pair_sign != 0.0 && lo > 0.0) {
      double hi_term = std::isinf(hi) ? 0.0 : std::pow(hi, -s);
      acc.add(pair_sign * (std::pow(lo, -s) - hi_term) / s);
    }
    prev = hi;
  }
  return {acc.value(), 0.0};
}

// ---------------------------------------------------------------------------
// N = 2: PV ray integration about a boundary point of a star-shaped set.
//
// Directions are graded toward the tangent line (where the per-ray integral
// has an integrable angular singularity) and come in reflection pairs, so the
// eps^{-s} cutoff terms cancel. Each ray integral is the exact telescoping
// power sum between boundary crossings of the interpolated profile; all mass
// beyond B_R(x) is exterior and is closed by the analytic tail.
// ---------------------------------------------------------------------------
namespace detail {

inline double grading(double u, int g) {
  double a = std::pow(u, g), b = std::pow(1.0 - u, g);
  return a / (a + b);
}
inline double grading_deriv(double u, int g) {
  double a = std::pow(u, g), b = std::pow(1.0 - u, g);
  double da = g * std::pow(u, g - 1), db = -g * std::pow(1.0 - u, g - 1);
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

// All crossings of the profile along x + t*dir for t in (t_lo, t_hi).
inline void ray_crossings(const RadialShape& e, const Vec2& x, const Vec2& dir,
                          double t_lo, double t_hi, std::vector<double>& out) {
  out.clear();
  const Vec2 c = e.center();
  auto f = [&](double t) {
    Vec2 p = x + dir * t - c;
    double r = p.norm();
    if (r < 1e-300) return -e.radii()[0];
    return r - e.radius_at(std::atan2(p.y, p.x));
  };
  // geometric samples near the source, linear samples farther out
  constexpr int kGeom = 48, kLin = 96;
  double t_switch = std::min(0.25 * t_hi, std::max(64.0 * t_lo, 1e-3 * t_hi));
  double ratio = std::pow(t_switch / t_lo, 1.0 / kGeom);
  double prev_t = t_lo, prev_f = f(t_lo);
  auto scan = [&](double t) {
    double ft = f(t);
    if ((prev_f < 0.0) != (ft < 0.0)) {
      double a = prev_t, b = t, fa = prev_f;
      for (int it = 0; it < 60; ++it) {
        double m = 0.5 * (a + b), fm = f(m);
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    prev_t = t;
    prev_f = ft;
  };
  double t = t_lo;
  for (int i = 0; i < kGeom; ++i) {
    t *= ratio;
    scan(t);
  }
  double step = (t_hi - t) / kLin;
  for (int i = 1; i <= kLin; ++i) scan(t + i * step);
}

// exact per-ray integral of sgn * r^{-1-s} over (eps, R) given the crossings
inline double ray_integral(const RadialShape& e, const Vec2& x, const Vec2& dir,
                           const std::vector<double>& crossings, double eps, double big_r,
                           double s) {
  KahanSum acc;
  double lo = eps;
  std::size_t first = 0;
  while (first < crossings.size() && crossings[first] <= eps) ++first;
  for (std::size_t j = first; j <= crossings.size(); ++j) {
    double hi = j < crossings.size() ? crossings[j] : big_r;
    if (hi <= lo) continue;
    double mid = 0.5 * (lo + hi);
    double sg = e.contains(x + dir * mid) ? -1.0 : 1.0;
    acc.add(sg * (std::pow(lo, -s) - std::pow(hi, -s)) / s);
    lo = hi;
  }
  return acc.value();
}

}  // namespace detail

namespace detail {

template <bool Parallel>
CurvatureValue curvature_impl(const RadialShape& e, const Vec2& x, const QuadratureSpec& q) {
  q.validate();
  const double s = q.s;
  const Vec2 c = e.center();
  Vec2 d = x - c;
  double r = d.norm();
  if (r <= 0.0) throw std::invalid_argument("x not on boundary");
  double theta = std::atan2(d.y, d.x);
  double rho = e.radius_at(theta);
  if (std::abs(r - rho) > 1e-6 * std::max(1.0, rho))
    throw std::invalid_argument("x not on boundary");
  Vec2 omega = d / r;
  Vec2 omega_perp{-omega.y, omega.x};
  double drho = e.radius_deriv_at(theta);
  Vec2 tangent = omega * drho + omega_perp * rho;
  tangent = tangent / tangent.norm();

  double big_r = 0.0;
  for (int k = 0; k < e.samples(); ++k)
    big_r = std::max(big_r, (e.boundary_point(k) - x).norm());
  big_r *= 1.0 + 1e-3;

  const int m = std::max(q.angular, 8);
  const int g = 6;  // grading order toward the tangent directions
  const double eps = q.pv_eps;

  // Three nested cutoff levels: the truncation error of the PV integral at
  // cutoff eps behaves like C * eps^{1-s}, so a Richardson step across the
  // levels removes the leading term; the two extrapolants gauge the residue.
  std::vector<std::array<double, 3>> contrib(m);
  auto body = [&](std::size_t i) {
    thread_local std::vector<double> crossings;
    double u = (static_cast<double>(i) + 0.5) / m;
    double psi = kPi * detail::grading(u, g);
    double w = kPi * detail::grading_deriv(u, g) / m;
    double cp = std::cos(psi), sp = std::sin(psi);
    Vec2 dir_a{tangent.x * cp - tangent.y * sp, tangent.x * sp + tangent.y * cp};
    Vec2 dir_b{tangent.x * cp + tangent.y * sp, -tangent.x * sp + tangent.y * cp};
    contrib[i] = {0.0, 0.0, 0.0};
    for (const Vec2& dir : {dir_a, dir_b}) {
      detail::ray_crossings(e, x, dir, eps / 4.0, big_r, crossings);
      for (int lev = 0; lev < 3; ++lev) {
        double cut = eps / static_cast<double>(1 << (2 - lev));
        contrib[i][lev] += w * detail::ray_integral(e, x, dir, crossings, cut, big_r, s);
      }
    }
  };
  if constexpr (Parallel) {
    parallel_for(m, body);
  } else {
    for (int i = 0; i < m; ++i) body(i);
  }
  std::array<double, 3> sum;
  for (int lev = 0; lev < 3; ++lev) {
    KahanSum acc;
    for (int i = 0; i < m; ++i) acc.add(contrib[i][lev]);
    sum[lev] = acc.value();
  }
  double fac = std::pow(2.0, 1.0 - s) - 1.0;
  double extrap_fine = sum[0] + (sum[0] - sum[1]) / fac;
  double extrap_coarse = sum[1] + (sum[1] - sum[2]) / fac;
  double tail = 2.0 * kPi * std::pow(big_r, -s) / s;
  CurvatureValue out;
  out.value = extrap_fine + tail;
  out.error_estimate = std::abs(extrap_fine - extrap_coarse);
  return out;
}

}  // namespace detail

inline CurvatureValue fractional_mean_curvature(const RadialShape& e, const Vec2& x,
                                                const QuadratureSpec& q) {
  return detail::curvature_impl<true>(e, x, q);
}

inline CurvatureValue fractional_mean_curvature_at_vertex(const RadialShape& e, int k,
                                                          const QuadratureSpec& q) {
  return fractional_mean_curvature(e, e.boundary_point(k), q);
}

// Diagnostic: the same graded-pair quadrature applied to an exact half plane
// at an edge point.  Every reflection pair is one fully interior and one fully
// exterior ray, so the result should vanish to roundoff; a weight or pairing
// bug would show up here.  The far field cancels by the same odd symmetry, so
// there is no tail term.
inline CurvatureValue half_plane_curvature_probe(const QuadratureSpec& q) {
  q.validate();
  const double s = q.s;
  const int m = std::max(q.angular, 8);
  const int g = 6;
  const double eps = q.pv_eps, big_r = 2.0;
  KahanSum acc;
  for (int i = 0; i < m; ++i) {
    double u = (i + 0.5) / static_cast<double>(m);
    double psi = kPi * detail::grading(u, g);
    double w = kPi * detail::grading_deriv(u, g) / m;
    double seg = (std::pow(eps, -s) - std::pow(big_r, -s)) / s;
    auto in_set = [](const Vec2& p) { return p.y < 0.0; };
    for (double sp : {std::sin(psi), -std::sin(psi)}) {
      Vec2 dir{std::cos(psi), sp};
      Vec2 probe = dir * (0.5 * (eps + big_r));
      acc.add(w * seg * (in_set(probe) ? -1.0 : 1.0));
    }
  }
  return {acc.value(), 0.0};
}

// curvature at every boundary sample; parallelism is over samples, the
// per-point work stays serial so results match the single-point entry point.
inline std::vector<CurvatureValue> boundary_curvature(const RadialShape& e,
                                                      const QuadratureSpec& q) {
  std::vector<CurvatureValue> out(e.samples());
  parallel_for(e.samples(), [&](std::size_t k) {
    out[k] = detail::curvature_impl<false>(e, e.boundary_point(static_cast<int>(k)), q);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Boundary double integral for P_s of a radial shape:
//   P_s(E) = (1/s^2) oint oint (n_x . n_y) |x-y|^{-s} dl(x) dl(y)
// (divergence theorem applied in both variables; valid for N + s > 2).
// The weakly singular diagonal is closed analytically and the first few
// off-diagonal bands are subsampled on the smooth interpolant.
// ---------------------------------------------------------------------------
inline PerimeterValue fractional_perimeter_radial(const RadialShape& e, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must be in (0,1)");
  const int k = e.samples();
  const double dth = 2.0 * kPi / k;

  struct Node {
    Vec2 p, n;
    double dl;
  };
  auto node_at = [&](double theta) {
    double rho = e.radius_at(theta);
    double drho = e.radius_deriv_at(theta);
    Vec2 omega{std::cos(theta), std::sin(theta)};
    Vec2 omega_perp{-omega.y, omega.x};
    Vec2 tangent = omega * drho + omega_perp * rho;
    double speed = tangent.norm();
    Node nd;
    nd.p = e.center() + omega * rho;
    nd.n = Vec2{tangent.y, -tangent.x} / speed;
    nd.dl = speed;
    return nd;
  };
  std::vector<Node> nodes(k);
  for (int i = 0; i < k; ++i) nodes[i] = node_at(i * dth);

  constexpr int kNearBand = 4;
  constexpr int kSub = 8;

  std::vector<double> partial(k, 0.0);
  parallel_for(k, [&](std::size_t i) {
    KahanSum acc;
    const Node& a = nodes[i];
    for (int j = 0; j < k; ++j) {
      if (j == static_cast<int>(i)) continue;
      int band = std::abs(j - static_cast<int>(i));
      band = std::min(band, k - band);
      if (band <= kNearBand) continue;  // handled below
      const Node& b = nodes[j];
      double dist = (a.p - b.p).norm();
      acc.add(a.n.dot(b.n) * std::pow(dist, -s) * a.dl * b.dl * dth * dth);
    }
    // near bands, subsampled on the interpolant
    for (int off = 1; off <= kNearBand; ++off) {
      for (int sgn : {-1, 1}) {
        double tj = (static_cast<int>(i) + sgn * off) * dth;
        for (int a_sub = 0; a_sub < kSub; ++a_sub)
          for (int b_sub = 0; b_sub < kSub; ++b_sub) {
            double ta = (static_cast<double>(i) + (a_sub + 0.5) / kSub - 0.5) * dth;
            double tb = tj + ((b_sub + 0.5) / kSub - 0.5) * dth;
            Node na = node_at(ta), nb = node_at(tb);
            double dist = (na.p - nb.p).norm();
            acc.add(na.n.dot(nb.n) * std::pow(dist, -s) * na.dl * nb.dl * dth * dth /
                    (kSub * kSub));
          }
      }
    }
    // diagonal cell: 2 L^{2-s} / ((1-s)(2-s)) with L the local arc length
    double arc = a.dl * dth;
    acc.add(2.0 * std::pow(arc, 2.0 - s) / ((1.0 - s) * (2.0 - s)));
    partial[i] = acc.value();
  });

  KahanSum total;
  for (double v : partial) total.add(v);
  PerimeterValue out;
  out.value = total.value() / (s * s);
  out.error_estimate = std::abs(out.value) * std::pow(dth, 2.0 - s) * 0.5;
  return out;
}

}  // namespace fracshape
