#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "fracshape/common.hpp"
#include "fracshape/shapes.hpp"

namespace fracshape {

struct QuadratureSpec {
  double s = 0.5;          // fractional order, in (0,1)
  double far_radius = 1.5; // analytic tail beyond this distance from each source point
  int depth = 3;           // near-diagonal subdivision depth
  double pv_eps = 1e-4;    // PV cutoff for curvature evaluation
  int angular = 64;        // curvature directions per half-plane
  long mc_samples = 1000000;

  void validate() const {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must be in (0,1)");
    if (!(far_radius > 0.0)) throw std::invalid_argument("far_radius must be positive");
    if (depth < 0) throw std::invalid_argument("depth must be >= 0");
    if (!(pv_eps > 0.0)) throw std::invalid_argument("pv_eps must be positive");
  }
};

struct PerimeterValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

// ---------------------------------------------------------------------------
// N = 1 closed form.
//
// For disjoint intervals A = (a1,b1), B = (a2,b2) with a2 >= b1,
//   int_A int_B (y-x)^{-1-s} = [d(a2-a1) - d(a2-b1) - d(b2-a1) + d(b2-b1)] / (s(1-s))
// with d(t) = t^{1-s}; half-lines are the b2 -> inf limit.
// ---------------------------------------------------------------------------
inline PerimeterValue fractional_perimeter_intervals(const IntervalUnion& e, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must be in (0,1)");
  const auto& iv = e.intervals();
  if (iv.empty()) throw std::runtime_error("empty set");
  auto pot = [s](double t) { return std::pow(t, 1.0 - s); };
  double denom = s * (1.0 - s);
  // cross term with B=(a2,b2) strictly to the right of A=(a1,b1)
  auto cross_finite = [&](double a1, double b1, double a2, double b2) {
    return (pot(a2 - a1) - pot(a2 - b1) - pot(b2 - a1) + pot(b2 - b1)) / denom;
  };
  auto cross_halfline = [&](double a1, double b1, double a2) {
    return (pot(a2 - a1) - pot(a2 - b1)) / denom;
  };
  KahanSum acc;
  for (std::size_t i = 0; i < iv.size(); ++i) {
    auto [a, b] = iv[i];
    // complement components to the right of component i
    for (std::size_t j = i; j + 1 < iv.size(); ++j)
      acc.add(cross_finite(a, b, iv[j].second, iv[j + 1].first));
    acc.add(cross_halfline(a, b, iv.back().second));
    // complement components to the left, by reflection
    for (std::size_t j = i; j >= 1; --j)
      acc.add(cross_finite(-b, -a, -iv[j].first, -iv[j - 1].second));
    acc.add(cross_halfline(-b, -a, -iv.front().first));
  }
  return {acc.value(), 0.0};
}

// ---------------------------------------------------------------------------
// Grid pair sum.
//
// Everything is reduced to integer-offset pair counts:
//   P = h^{N-s} [ sum_{|z|<=R/h} f(z) C_oe(z)  -  sum_{|z|>R/h} f(z) C_oo(z) ]
//       + |E| * N omega_N / (s R^s)
// where f(z) is the midpoint kernel in cell units (near offsets refined by
// recursive subdivision), C_oe counts (occupied, empty-in-window) pairs and
// C_oo counts occupied pairs beyond the tail radius. The tail is exact over
// the complement of B_R(x); the C_oo sum removes the set points it overcounts.
// Counts are exact integers, so the value is independent of the reduction
// strategy and scales exactly under integer regridding.
// ---------------------------------------------------------------------------
namespace detail {

// Average kernel over a pair of unit cells at integer offset (dx,dy),
// recursive 2^N-way subdivision while the cells are closer than twice their
// side length.
inline double refined_cell_kernel_2d(double dx, double dy, double side, int depth, double s) {
  double d2 = dx * dx + dy * dy;
  if (depth == 0 || d2 >= 4.0 * side * side)
    return side * side * side * side * std::pow(d2, -(2.0 + s) / 2.0);
  double h2 = side / 2.0, q = side / 4.0;
  double acc = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double ax = (a & 1) ? q : -q, ay = (a & 2) ? q : -q;
      double bx = (b & 1) ? q : -q, by = (b & 2) ? q : -q;
      acc += refined_cell_kernel_2d(dx + bx - ax, dy + by - ay, h2, depth - 1, s);
    }
  return acc;
}

inline double refined_cell_kernel_1d(double dx, double side, int depth, double s) {
  if (depth == 0 || std::abs(dx) >= 2.0 * side)
    return side * side * std::pow(std::abs(dx), -(1.0 + s));
  double h2 = side / 2.0, q = side / 4.0;
  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      acc += refined_cell_kernel_1d(dx + ((b ? q : -q) - (a ? q : -q)), h2, depth - 1, s);
  return acc;
}

// Exact ordered-pair autocorrelation counts A(z) = #{(x,y) occupied pairs, y-x=z},
// computed either directly or through an FFT and rounded back to integers.
inline std::vector<std::int64_t> occupied_autocorrelation(const GridSet& e, int& off_nx,
                                                          int& off_ny) {
  int nx = e.nx(), ny = e.ny();
  off_nx = 2 * nx - 1;
  off_ny = e.dim() == 2 ? 2 * ny - 1 : 1;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(off_nx) * off_ny, 0);

  std::vector<std::pair<int, int>> occ;
  occ.reserve(e.count());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (e.occupied(i, j)) occ.emplace_back(i, j);

  double direct_cost = static_cast<double>(occ.size()) * occ.size();
  if (e.dim() == 1 || direct_cost < 1.5e8) {
    for (auto [xi, xj] : occ)
      for (auto [yi, yj] : occ) {
        int dz = yi - xi + (nx - 1);
        int dj = e.dim() == 2 ? yj - xj + (ny - 1) : 0;
        ++counts[static_cast<std::size_t>(dj) * off_nx + dz];
      }
    return counts;
  }

  // FFT path: autocorrelation of the occupancy indicator on a padded grid.
  int px = 1, py = 1;
  while (px < 2 * nx) px <<= 1;
  while (py < 2 * ny) py <<= 1;
  std::size_t pn = static_cast<std::size_t>(px) * py;
  std::vector<double> in(pn, 0.0);
  for (auto [i, j] : occ) in[static_cast<std::size_t>(j) * px + i] = 1.0;
  std::size_t cn = static_cast<std::size_t>(py) * (px / 2 + 1);
  std::vector<std::complex<double>> freq(cn);
  fftw_plan fwd = fftw_plan_dft_r2c_2d(py, px, in.data(),
                                       reinterpret_cast<fftw_complex*>(freq.data()),
                                       FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);
  for (auto& c : freq) c = c * std::conj(c);
  std::vector<double> out(pn);
  fftw_plan bwd = fftw_plan_dft_c2r_2d(py, px,
                                       reinterpret_cast<fftw_complex*>(freq.data()),
                                       out.data(), FFTW_ESTIMATE);
  fftw_execute(bwd);
  fftw_destroy_plan(bwd);
  double scale = 1.0 / static_cast<double>(pn);
  for (int dj = -(ny - 1); dj <= ny - 1; ++dj)
    for (int di = -(nx - 1); di <= nx - 1; ++di) {
      int wi = di < 0 ? di + px : di;
      int wj = dj < 0 ? dj + py : dj;
      double v = out[static_cast<std::size_t>(wj) * px + wi] * scale;
      counts[static_cast<std::size_t>(dj + ny - 1) * off_nx + (di + nx - 1)] =
          std::llround(v);
    }
  return counts;
}

}  // namespace detail

inline PerimeterValue fractional_perimeter_grid(const GridSet& e, const QuadratureSpec& q) {
  q.validate();
  if (e.count() == 0) throw std::runtime_error("empty set");
  const int dim = e.dim();
  const double h = e.spacing();
  const double r_cells = q.far_radius / h;  // tail radius in cell units
  const int nx = e.nx(), ny = e.ny();

  // occupied bounding box, for the E (+) B_{R_far} window check
  int lo_i = nx, hi_i = -1, lo_j = ny, hi_j = -1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (e.occupied(i, j)) {
        lo_i = std::min(lo_i, i); hi_i = std::max(hi_i, i);
        lo_j = std::min(lo_j, j); hi_j = std::max(hi_j, j);
      }
  int margin = static_cast<int>(std::floor(r_cells));
  if (lo_i - margin < 0 || hi_i + margin >= nx ||
      (dim == 2 && (lo_j - margin < 0 || hi_j + margin >= ny)))
    throw std::invalid_argument("window too small for far_radius");

  int off_nx = 0, off_ny = 0;
  std::vector<std::int64_t> auto_counts = detail::occupied_autocorrelation(e, off_nx, off_ny);

  // prefix sums of occupancy, for W(z) = #{occupied x : x+z in window}
  std::vector<std::int64_t> pref(static_cast<std::size_t>(nx + 1) * (ny + 1), 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      pref[static_cast<std::size_t>(j + 1) * (nx + 1) + (i + 1)] =
          pref[static_cast<std::size_t>(j) * (nx + 1) + (i + 1)] +
          pref[static_cast<std::size_t>(j + 1) * (nx + 1) + i] -
          pref[static_cast<std::size_t>(j) * (nx + 1) + i] + (e.occupied(i, j) ? 1 : 0);
  auto occ_in_rect = [&](int i0, int i1, int j0, int j1) -> std::int64_t {
    i0 = std::max(i0, 0); j0 = std::max(j0, 0);
    i1 = std::min(i1, nx - 1); j1 = std::min(j1, ny - 1);
    if (i0 > i1 || j0 > j1) return 0;
    return pref[static_cast<std::size_t>(j1 + 1) * (nx + 1) + (i1 + 1)] -
           pref[static_cast<std::size_t>(j0) * (nx + 1) + (i1 + 1)] -
           pref[static_cast<std::size_t>(j1 + 1) * (nx + 1) + i0] +
           pref[static_cast<std::size_t>(j0) * (nx + 1) + i0];
  };

  const double r2_cells = r_cells * r_cells;
  auto pair_sum = [&](int depth) {
    KahanSum acc;
    for (int dj = -(off_ny - 1) / 2; dj <= (off_ny - 1) / 2; ++dj)
      for (int di = -(off_nx - 1) / 2; di <= (off_nx - 1) / 2; ++di) {
        if (di == 0 && dj == 0) continue;
        double d2 = static_cast<double>(di) * di + static_cast<double>(dj) * dj;
        std::int64_t a = auto_counts[static_cast<std::size_t>(dj + (off_ny - 1) / 2) * off_nx +
                                     (di + (off_nx - 1) / 2)];
        if (d2 <= r2_cells) {
          // W(z): occupied cells whose translate by z stays in the window
          std::int64_t w = dim == 2
                               ? occ_in_rect(-di, nx - 1 - di, -dj, ny - 1 - dj)
                               : occ_in_rect(-di, nx - 1 - di, 0, 0);
          std::int64_t c_oe = w - a;
          if (c_oe == 0) continue;
          double f = d2 < 4.0
                         ? (dim == 2 ? detail::refined_cell_kernel_2d(di, dj, 1.0, depth, q.s)
                                     : detail::refined_cell_kernel_1d(di, 1.0, depth, q.s))
                         : std::pow(d2, -(dim + q.s) / 2.0);
          acc.add(f * static_cast<double>(c_oe));
        } else if (a > 0) {
          acc.add(-std::pow(d2, -(dim + q.s) / 2.0) * static_cast<double>(a));
        }
      }
    return acc.value();
  };

  double sum_d = pair_sum(q.depth);
  double sum_prev = q.depth > 0 ? pair_sum(q.depth - 1) : sum_d;

  double geom = std::pow(h, dim - q.s);
  double tail = static_cast<double>(e.count()) * std::pow(h, dim) *
                unit_sphere_measure(dim) / (q.s * std::pow(q.far_radius, q.s));
  PerimeterValue out;
  out.value = geom * sum_d + tail;
  out.error_estimate = std::abs(geom * (sum_d - sum_prev));
  return out;
}

// ---------------------------------------------------------------------------
// Importance-sampled Monte Carlo oracle.
//
// P_s = int_E dx int k(z) chi_{E^c}(x+z) dz. Source points are uniform in E;
// offsets are drawn with radial density proportional to r^{-1-s}, stratified
// geometrically in r with a pilot pass for Neyman allocation. Offsets beyond
// the bounding diameter always land in E^c and are accounted analytically.
// ---------------------------------------------------------------------------
namespace detail {

struct SampleDomain {
  int dim = 2;
  double vol = 0.0;
  Vec2 lo, hi;  // bounding box (1D uses x only)
};

inline SampleDomain sample_domain(const RadialShape& s) {
  SampleDomain d;
  d.dim = 2;
  d.vol = s.volume();
  double r = s.max_radius();
  d.lo = s.center() - Vec2{r, r};
  d.hi = s.center() + Vec2{r, r};
  return d;
}
inline SampleDomain sample_domain(const GridSet& s) {
  SampleDomain d;
  d.dim = s.dim();
  d.vol = s.volume();
  d.lo = s.origin();
  d.hi = {s.origin().x + s.nx() * s.spacing(),
          s.dim() == 2 ? s.origin().y + s.ny() * s.spacing() : 0.0};
  return d;
}
inline SampleDomain sample_domain(const IntervalUnion& s) {
  SampleDomain d;
  d.dim = 1;
  d.vol = s.volume();
  d.lo = {s.intervals().front().first, 0.0};
  d.hi = {s.intervals().back().second, 0.0};
  return d;
}

template <typename ShapeT>
Vec2 sample_uniform(const ShapeT& s, const SampleDomain& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(d.lo.x, d.hi.x);
  std::uniform_real_distribution<double> uy(d.lo.y, d.hi.y);
  for (int it = 0; it < 100000; ++it) {
    Vec2 p{ux(rng), d.dim == 2 ? uy(rng) : 0.0};
    if (s.contains(p)) return p;
  }
  throw std::runtime_error("rejection sampling failed");
}

}  // namespace detail

template <typename ShapeT>
PerimeterValue fractional_perimeter_mc(const ShapeT& e, const QuadratureSpec& q,
                                       std::uint64_t seed) {
  q.validate();
  detail::SampleDomain dom = detail::sample_domain(e);
  if (!(dom.vol > 0.0)) throw std::runtime_error("zero-volume set");
  const int dim = dom.dim;
  const double s = q.s;
  double diam = dim == 2 ? (dom.hi - dom.lo).norm() : (dom.hi.x - dom.lo.x);
  const double r_min = 1e-9 * diam;
  const double r_max = diam * 1.0000001;

  // geometric strata in |z|
  std::vector<double> edges{r_min};
  while (edges.back() < r_max) edges.push_back(std::min(edges.back() * 2.0, r_max));
  const int ns = static_cast<int>(edges.size()) - 1;

  // kernel mass of stratum j (integrated over all angles)
  std::vector<double> mass(ns);
  for (int j = 0; j < ns; ++j)
    mass[j] = unit_sphere_measure(dim) *
              (std::pow(edges[j], -s) - std::pow(edges[j + 1], -s)) / s;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto draw = [&](int j) -> double {
    // radius with density ~ r^{-1-s} restricted to the stratum
    double a = std::pow(edges[j], -s), b = std::pow(edges[j + 1], -s);
    return std::pow(a - u01(rng) * (a - b), -1.0 / s);
  };
  auto run_stratum = [&](int j, long n, long& hits) {
    for (long i = 0; i < n; ++i) {
      Vec2 x = detail::sample_uniform(e, dom, rng);
      double r = draw(j);
      Vec2 z;
      if (dim == 2) {
        double th = 2.0 * kPi * u01(rng);
        z = {r * std::cos(th), r * std::sin(th)};
      } else {
        z = {u01(rng) < 0.5 ? -r : r, 0.0};
      }
      if (!e.contains(x + z)) ++hits;
    }
  };

  long budget = std::max<long>(q.mc_samples, 1000);
  long pilot = std::max<long>(budget / 20 / ns, 32);
  std::vector<long> n_j(ns, 0);
  std::vector<long> hits(ns, 0);
  for (int j = 0; j < ns; ++j) {
    run_stratum(j, pilot, hits[j]);
    n_j[j] = pilot;
  }
  // Neyman allocation from pilot deviations
  std::vector<double> sigma(ns);
  double sig_total = 0.0;
  for (int j = 0; j < ns; ++j) {
    double p = (hits[j] + 1.0) / (n_j[j] + 2.0);
    sigma[j] = mass[j] * std::sqrt(p * (1.0 - p));
    sig_total += sigma[j];
  }
  long remaining = budget - pilot * ns;
  for (int j = 0; j < ns && remaining > 0; ++j) {
    long extra = static_cast<long>(remaining * sigma[j] / sig_total);
    run_stratum(j, extra, hits[j]);
    n_j[j] += extra;
  }

  KahanSum val, var;
  for (int j = 0; j < ns; ++j) {
    double p = static_cast<double>(hits[j]) / n_j[j];
    val.add(dom.vol * mass[j] * p);
    var.add(dom.vol * dom.vol * mass[j] * mass[j] * p * (1.0 - p) / n_j[j]);
  }
  double tail = dom.vol * unit_sphere_measure(dim) / (s * std::pow(r_max, s));
  PerimeterValue out;
  out.value = val.value() + tail;
  out.error_estimate = 1.96 * std::sqrt(var.value());
  return out;
}

inline PerimeterValue fractional_perimeter_mc(const Shape& e, const QuadratureSpec& q,
                                              std::uint64_t seed) {
  return std::visit([&](const auto& v) { return fractional_perimeter_mc(v, q, seed); }, e);
}

}  // namespace fracshape
