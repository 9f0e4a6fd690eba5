#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fracshape/common.hpp"
#include "fracshape/curvature.hpp"
#include "fracshape/nonlocal.hpp"
#include "fracshape/potentials.hpp"
#include "fracshape/shapes.hpp"

namespace fracshape {

// ---------------------------------------------------------------------------
// Reference perimeter of the volume-v ball.  In 1D this is closed-form; in 2D
// the unit disk is evaluated on occupancy grids at n in {256, 512, 1024} and
// Richardson-extrapolated, then cached per s.  Other volumes follow by
// homogeneity of degree N - s.
// ---------------------------------------------------------------------------
namespace detail {

inline PerimeterValue reference_disk_perimeter(double s) {
  static std::mutex mu;
  static std::map<double, PerimeterValue> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
  }
  const double window = 5.2;
  QuadratureSpec q;
  q.s = s;
  q.depth = 4;
  double vals[3];
  int idx = 0;
  for (int n : {256, 512, 1024}) {
    GridSet grid = rasterize(RadialShape::ball(1.0, 512), {-window / 2, -window / 2},
                             window / n, n, n);
    vals[idx++] = fractional_perimeter_grid(grid, q).value;
  }
  double d1 = vals[1] - vals[0], d2 = vals[2] - vals[1];
  PerimeterValue out;
  if (d2 != 0.0 && d1 / d2 > 1.05) {
    double rate = d1 / d2;  // = 2^p for error C h^p
    out.value = vals[2] + d2 / (rate - 1.0);
    out.error_estimate = 0.5 * std::abs(out.value - vals[2]);
  } else {
    out.value = vals[2];
    out.error_estimate = std::abs(d2) + std::abs(d1);
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[s] = out;
  return out;
}

}  // namespace detail

inline PerimeterValue reference_ball_perimeter(double s, double v, int dim = 2) {
  if (!(v > 0.0)) throw std::invalid_argument("volume must be positive");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must be in (0,1)");
  if (dim == 1) {
    // interval of length v: P_s = 2 v^{1-s} / (s(1-s)), no quadrature involved
    return {2.0 * std::pow(v, 1.0 - s) / (s * (1.0 - s)), 0.0};
  }
  if (dim != 2) throw std::invalid_argument("dim must be 1 or 2");
  PerimeterValue unit = detail::reference_disk_perimeter(s);
  double factor = std::pow(v / unit_ball_volume(2), (2.0 - s) / 2.0);
  return {unit.value * factor, unit.error_estimate * factor};
}

struct IsoReport {
  double asymmetry = 0.0;
  double deficit = 0.0;
  Vec2 center;
  PerimeterValue perimeter;
  PerimeterValue reference;
  double asymmetry_tolerance = 0.0;  // rasterization granularity of A
  double deficit_error = 0.0;        // combined quadrature error on delta_s
};

// ---------------------------------------------------------------------------
// Fraenkel asymmetry: A(E) = min_c |E symdiff B(c)| / |E| over centers of the
// equal-volume ball.  The minimum is approached by pattern search with step
// halving; the result is an upper bound on the true infimum.  Only strictly
// improving moves are taken; with a fixed direction order the search is
// deterministic, and flat plateaus cannot cause drift.
// ---------------------------------------------------------------------------
namespace detail {

// generic pattern search: step starts at diameter scale (so disconnected
// shapes do not trap the search at an empty barycenter) and is halved until
// it drops below the floor
template <typename F>
Vec2 pattern_search_2d(F&& f, Vec2 seed, double step, double step_floor) {
  Vec2 best = seed;
  double best_val = f(best);
  while (step > step_floor) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (Vec2 d : {Vec2{step, 0}, Vec2{-step, 0}, Vec2{0, step}, Vec2{0, -step}}) {
        Vec2 cand = best + d;
        double v = f(cand);
        if (v < best_val) {
          best = cand;
          best_val = v;
          moved = true;
        }
      }
    }
    step *= 0.5;
  }
  return best;
}

template <typename F>
double pattern_search_1d(F&& f, double seed, double step, double step_floor) {
  double best = seed, best_val = f(best);
  while (step > step_floor) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (double d : {step, -step}) {
        double cand = best + d;
        double v = f(cand);
        if (v < best_val) {
          best = cand;
          best_val = v;
          moved = true;
        }
      }
    }
    step *= 0.5;
  }
  return best;
}

// exact Lebesgue measure of E symdiff (lo, hi) for an interval union
inline double interval_symdiff(const IntervalUnion& e, double lo, double hi) {
  double inter = 0.0, vol = 0.0;
  for (auto& [a, b] : e.intervals()) {
    vol += b - a;
    inter += std::max(0.0, std::min(b, hi) - std::max(a, lo));
  }
  return vol + (hi - lo) - 2.0 * inter;
}

}  // namespace detail

inline IsoReport fraenkel_asymmetry(const RadialShape& e) {
  double vol = e.volume();
  double r = std::sqrt(vol / kPi);
  auto mismatch = [&](Vec2 c) {
    return symmetric_difference_volume(e, RadialShape::ball(r, e.samples(), c));
  };
  Vec2 lo, hi;
  detail::bounds(e, lo, hi);
  double diam = std::max(hi.x - lo.x, hi.y - lo.y);
  Vec2 best = detail::pattern_search_2d(mismatch, e.barycenter(), 0.25 * diam,
                                       0.25 * diam / 512.0);
  IsoReport rep;
  rep.center = best;
  rep.asymmetry = mismatch(best) / vol;
  rep.asymmetry_tolerance = 2.0 * (diam + 2.0 * r) / 512.0 * (2.0 * kPi * r) / vol;
  return rep;
}

inline IsoReport fraenkel_asymmetry(const GridSet& e) {
  // Work entirely in cell units so the result depends on the occupancy
  // pattern alone (exact invariance under whole-cell translations).
  std::size_t count = e.count();
  if (count == 0) throw std::runtime_error("empty set");
  const int nx = e.nx(), ny = e.ny();
  double cx = 0.0, cy = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (e.occupied(i, j)) {
        cx += i + 0.5;
        cy += j + 0.5;
      }
  cx /= count;
  cy /= count;
  IsoReport rep;
  if (e.dim() == 2) {
    double r2 = count / kPi;  // squared ball radius in cells
    // |E symdiff B| in cell units: the ball satisfies |B| = |E| by the choice
    // of r2, so the symmetric difference is twice the part of E outside the
    // ball.  Counting occupied cells only keeps the value correct even when
    // the candidate ball pokes outside the grid window.
    std::vector<std::pair<int, int>> cells;
    cells.reserve(count);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (e.occupied(i, j)) cells.emplace_back(i, j);
    auto mismatch = [&](Vec2 c) {
      long long inside = 0;
      for (auto& [i, j] : cells) {
        double dx = i + 0.5 - c.x, dy = j + 0.5 - c.y;
        if (dx * dx + dy * dy < r2) ++inside;
      }
      return 2.0 * static_cast<double>(count - inside);
    };
    double extent = std::max(nx, ny);
    Vec2 best = detail::pattern_search_2d(mismatch, {cx, cy}, 0.25 * extent,
                                          std::min(0.3, 0.01 * std::sqrt(r2)));
    rep.asymmetry = mismatch(best) / count;
    rep.center = {e.origin().x + best.x * e.spacing(), e.origin().y + best.y * e.spacing()};
    rep.asymmetry_tolerance = 4.0 * std::sqrt(kPi * static_cast<double>(count)) / count;
  } else {
    double half = 0.5 * count;
    auto mismatch = [&](double c) {
      long long inside = 0;
      for (int i = 0; i < nx; ++i)
        if (e.occupied(i, 0) && std::abs(i + 0.5 - c) < half) ++inside;
      return 2.0 * static_cast<double>(count - inside);
    };
    double best = detail::pattern_search_1d(mismatch, cx, 0.5 * nx, 0.3);
    rep.asymmetry = mismatch(best) / count;
    rep.center = {e.origin().x + best * e.spacing(), 0.0};
    rep.asymmetry_tolerance = 4.0 / static_cast<double>(count);
  }
  return rep;
}

inline IsoReport fraenkel_asymmetry(const IntervalUnion& e) {
  double vol = e.volume();
  auto mismatch = [&](double c) { return detail::interval_symdiff(e, c - vol / 2, c + vol / 2); };
  double lo = e.intervals().front().first, hi = e.intervals().back().second;
  double best =
      detail::pattern_search_1d(mismatch, 0.5 * (lo + hi), 0.5 * (hi - lo), (hi - lo) * 1e-9);
  IsoReport rep;
  rep.asymmetry = mismatch(best) / vol;
  rep.center = {best, 0.0};
  rep.asymmetry_tolerance = 0.0;  // exact measure; only the search is inexact
  return rep;
}

inline IsoReport fraenkel_asymmetry(const Shape& e) {
  return std::visit([](const auto& v) { return fraenkel_asymmetry(v); }, e);
}

// ---------------------------------------------------------------------------
// Wulff s-deficit: relative perimeter excess over the equal-volume ball.
// ---------------------------------------------------------------------------
inline PerimeterValue best_perimeter(const RadialShape& e, double s) {
  return fractional_perimeter_radial(e, s);
}
inline PerimeterValue best_perimeter(const GridSet& e, double s) {
  QuadratureSpec q;
  q.s = s;
  return fractional_perimeter_grid(e, q);
}
inline PerimeterValue best_perimeter(const IntervalUnion& e, double s) {
  return fractional_perimeter_intervals(e, s);
}

template <typename ShapeT>
IsoReport wulff_deficit(const ShapeT& e, double s) {
  IsoReport rep;
  rep.perimeter = best_perimeter(e, s);
  int dim = 2;
  if constexpr (std::is_same_v<ShapeT, IntervalUnion>)
    dim = 1;
  else if constexpr (std::is_same_v<ShapeT, GridSet>)
    dim = e.dim();
  rep.reference = reference_ball_perimeter(s, e.volume(), dim);
  rep.deficit = rep.perimeter.value / rep.reference.value - 1.0;
  rep.deficit_error = (rep.perimeter.error_estimate +
                       rep.reference.error_estimate * rep.perimeter.value / rep.reference.value) /
                      rep.reference.value;
  return rep;
}

inline IsoReport wulff_deficit(const Shape& e, double s) {
  return std::visit([&](const auto& v) { return wulff_deficit(v, s); }, e);
}

// combined report (asymmetry + deficit at the optimal center)
template <typename ShapeT>
IsoReport iso_report(const ShapeT& e, double s) {
  IsoReport a = fraenkel_asymmetry(e);
  IsoReport d = wulff_deficit(e, s);
  d.asymmetry = a.asymmetry;
  d.center = a.center;
  d.asymmetry_tolerance = a.asymmetry_tolerance;
  return d;
}

// ---------------------------------------------------------------------------
// Quantitative isoperimetric inequality on a corpus: delta_s >= C A^2 with
// some C > 0, so the fitted constant min delta_s / A^2 must stay positive
// beyond the quadrature error bars.
// ---------------------------------------------------------------------------
struct QuantitativeResult {
  double c_fit = 0.0;
  double c_fit_error = 0.0;  // error bar at the minimizing shape
  bool pass = false;
  std::vector<IsoReport> rows;
};

template <typename ShapeT>
QuantitativeResult quantitative_check(const std::vector<ShapeT>& corpus, double s) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  QuantitativeResult out;
  out.rows.resize(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) { out.rows[i] = iso_report(corpus[i], s); });
  out.c_fit = std::numeric_limits<double>::infinity();
  for (auto& r : out.rows) {
    if (!(r.asymmetry > r.asymmetry_tolerance))
      throw std::invalid_argument("corpus shape indistinguishable from a ball (A ~ 0)");
    double ratio = r.deficit / (r.asymmetry * r.asymmetry);
    if (ratio < out.c_fit) {
      out.c_fit = ratio;
      out.c_fit_error = r.deficit_error / (r.asymmetry * r.asymmetry);
    }
  }
  out.pass = out.c_fit > out.c_fit_error;
  return out;
}

// 50-shape style corpus: rho = 1 + sum a_k cos(k theta + phi_k), renormalized
// to unit-disk volume; seeded for reproducibility.
inline std::vector<RadialShape> fourier_corpus(int count, unsigned seed, int k_samples = 256,
                                               int modes = 6, double amplitude = 0.3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uphase(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> uamp(-1.0, 1.0);
  std::vector<RadialShape> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> a(modes), phi(modes);
    double norm = 0.0;
    for (int k = 0; k < modes; ++k) {
      a[k] = uamp(rng);
      phi[k] = uphase(rng);
      norm += a[k] * a[k];
    }
    norm = std::sqrt(norm);
    // amplitude bounded away from zero so every shape is visibly non-spherical
    double scale = amplitude / std::max(norm, 1e-12) * (0.35 + 0.65 * std::abs(uamp(rng)));
    std::vector<double> radii(k_samples);
    bool ok = true;
    for (int i = 0; i < k_samples; ++i) {
      double th = 2.0 * kPi * i / k_samples;
      double rho = 1.0;
      for (int k = 0; k < modes; ++k) rho += scale * a[k] * std::cos((k + 2) * th + phi[k]);
      if (rho < 0.2) ok = false;
      radii[i] = std::max(rho, 0.2);
    }
    if (!ok) continue;
    RadialShape shape({0.0, 0.0}, std::move(radii));
    out.push_back(shape.scaled_radii(std::sqrt(kPi / shape.volume())));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric rearrangement: replacing E by the ball of equal volume centered
// at the minimum of a radial convex potential lowers both energy terms.
// ---------------------------------------------------------------------------
struct RearrangementResult {
  bool perimeter_ok = false;
  bool potential_ok = false;
  double perimeter_margin = 0.0;  // P_s(E) - P_s(E*)
  double potential_margin = 0.0;  // int_E g - int_{E*} g
  bool pass() const { return perimeter_ok && potential_ok; }
};

inline RearrangementResult symmetric_rearrangement_check(const RadialShape& e,
                                                         const Potential& g, double s) {
  bool radial = g.kind() != Potential::Kind::quadratic_form ||
                (g.matrix()[0][1] == 0.0 && g.matrix()[0][0] == g.matrix()[1][1]);
  if (!radial) throw std::invalid_argument("potential is not radially symmetric");

  double vol = e.volume();
  auto star = RadialShape::ball(std::sqrt(vol / kPi), e.samples(), g.argmin());
  PerimeterValue pe = fractional_perimeter_radial(e, s);
  PerimeterValue ps = fractional_perimeter_radial(star, s);
  double ge = potential_integral(e, g);
  double gs = potential_integral(star, g);

  RearrangementResult out;
  out.perimeter_margin = pe.value - ps.value;
  out.potential_margin = ge - gs;
  double perr = pe.error_estimate + ps.error_estimate;
  out.perimeter_ok = out.perimeter_margin >= -perr;
  out.potential_ok = out.potential_margin >= -1e-9 * (1.0 + std::abs(ge));
  return out;
}

}  // namespace fracshape
