#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fracshape/common.hpp"
#include "json.hpp"

namespace fracshape {

// ---------------------------------------------------------------------------
// Star-shaped set in R^2: boundary radii sampled at uniform angles about a
// center. The continuous boundary is the periodic Catmull-Rom interpolant of
// the samples.
// ---------------------------------------------------------------------------
class RadialShape {
 public:
  RadialShape(Vec2 center, std::vector<double> radii)
      : center_(center), radii_(std::move(radii)) {
    if (radii_.size() < 16) throw std::invalid_argument("RadialShape: need K >= 16 radii");
    for (double r : radii_)
      if (!(r > 0.0)) throw std::invalid_argument("RadialShape: radii must be positive");
  }

  static RadialShape ball(double radius, int k = 256, Vec2 center = {}) {
    return RadialShape(center, std::vector<double>(k, radius));
  }

  const Vec2& center() const { return center_; }
  const std::vector<double>& radii() const { return radii_; }
  int samples() const { return static_cast<int>(radii_.size()); }
  double angle(int k) const { return 2.0 * kPi * k / samples(); }

  // Periodic cubic interpolation of the radius profile.
  double radius_at(double theta) const {
    int k = samples();
    double t = theta / (2.0 * kPi) * k;
    double fl = std::floor(t);
    double u = t - fl;
    int i = static_cast<int>(fl) % k;
    if (i < 0) i += k;
    double rm = radii_[(i - 1 + k) % k], r0 = radii_[i];
    double r1 = radii_[(i + 1) % k], r2 = radii_[(i + 2) % k];
    double a = r0;
    double b = 0.5 * (r1 - rm);
    double c = rm - 2.5 * r0 + 2.0 * r1 - 0.5 * r2;
    double d = 0.5 * (r2 - rm) + 1.5 * (r0 - r1);
    return a + u * (b + u * (c + u * d));
  }

  // d rho / d theta of the interpolant.
  double radius_deriv_at(double theta) const {
    int k = samples();
    double t = theta / (2.0 * kPi) * k;
    double fl = std::floor(t);
    double u = t - fl;
    int i = static_cast<int>(fl) % k;
    if (i < 0) i += k;
    double rm = radii_[(i - 1 + k) % k], r0 = radii_[i];
    double r1 = radii_[(i + 1) % k], r2 = radii_[(i + 2) % k];
    double b = 0.5 * (r1 - rm);
    double c = rm - 2.5 * r0 + 2.0 * r1 - 0.5 * r2;
    double d = 0.5 * (r2 - rm) + 1.5 * (r0 - r1);
    return (b + u * (2.0 * c + u * 3.0 * d)) * k / (2.0 * kPi);
  }

  bool contains(const Vec2& p) const {
    Vec2 d = p - center_;
    double r = d.norm();
    if (r == 0.0) return true;
    return r < radius_at(std::atan2(d.y, d.x));
  }

  Vec2 boundary_point(int k) const {
    double th = angle(k);
    return center_ + Vec2{radii_[k] * std::cos(th), radii_[k] * std::sin(th)};
  }

  std::vector<Vec2> polygon() const {
    std::vector<Vec2> p(radii_.size());
    for (int k = 0; k < samples(); ++k) p[k] = boundary_point(k);
    return p;
  }

  // (1/2) \oint rho^2 dtheta by the periodic trapezoidal rule.
  double volume() const {
    KahanSum acc;
    for (double r : radii_) acc.add(r * r);
    return 0.5 * acc.value() * 2.0 * kPi / samples();
  }

  Vec2 barycenter() const {
    // centroid of the sampled sector decomposition: (2/3) rho * omega weight
    KahanSum sx, sy, sa;
    for (int k = 0; k < samples(); ++k) {
      double th = angle(k);
      double w = 0.5 * radii_[k] * radii_[k];
      sx.add(w * (2.0 / 3.0) * radii_[k] * std::cos(th));
      sy.add(w * (2.0 / 3.0) * radii_[k] * std::sin(th));
      sa.add(w);
    }
    return center_ + Vec2{sx.value() / sa.value(), sy.value() / sa.value()};
  }

  double max_radius() const { return *std::max_element(radii_.begin(), radii_.end()); }
  double min_radius() const { return *std::min_element(radii_.begin(), radii_.end()); }

  RadialShape translated(const Vec2& t) const { return RadialShape(center_ + t, radii_); }

  RadialShape scaled_radii(double factor) const {
    std::vector<double> r = radii_;
    for (double& v : r) v *= factor;
    return RadialShape(center_, std::move(r));
  }

  // Re-express the same boundary as a radial graph about `c`. Throws if a ray
  // from `c` misses the boundary (c outside or shape not star-shaped about c).
  RadialShape resampled_about(const Vec2& c, int k_out = -1) const;

 private:
  Vec2 center_;
  std::vector<double> radii_;
};

// ---------------------------------------------------------------------------
// Occupancy grid in R^1 or R^2.
// ---------------------------------------------------------------------------
class GridSet {
 public:
  GridSet(int dim, Vec2 origin, double h, int nx, int ny, std::vector<std::uint8_t> occ)
      : dim_(dim), origin_(origin), h_(h), nx_(nx), ny_(ny), occ_(std::move(occ)) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("GridSet: dim must be 1 or 2");
    if (!(h > 0.0)) throw std::invalid_argument("GridSet: h must be positive");
    if (dim == 1) ny_ = 1;
    if (occ_.size() != static_cast<std::size_t>(nx_) * ny_)
      throw std::invalid_argument("GridSet: occupancy size mismatch");
  }

  int dim() const { return dim_; }
  const Vec2& origin() const { return origin_; }
  double spacing() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  bool occupied(int i, int j = 0) const {
    return occ_[static_cast<std::size_t>(j) * nx_ + i] != 0;
  }
  const std::vector<std::uint8_t>& occupancy() const { return occ_; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto v : occ_) c += v != 0;
    return c;
  }

  double volume() const {
    std::size_t c = count();
    if (c == 0) throw std::runtime_error("empty set");
    return std::pow(h_, dim_) * static_cast<double>(c);
  }

  Vec2 cell_center(int i, int j = 0) const {
    return {origin_.x + (i + 0.5) * h_, dim_ == 2 ? origin_.y + (j + 0.5) * h_ : 0.0};
  }

  bool contains(const Vec2& p) const {
    int i = static_cast<int>(std::floor((p.x - origin_.x) / h_));
    if (i < 0 || i >= nx_) return false;
    int j = 0;
    if (dim_ == 2) {
      j = static_cast<int>(std::floor((p.y - origin_.y) / h_));
      if (j < 0 || j >= ny_) return false;
    }
    return occupied(i, j);
  }

 private:
  int dim_;
  Vec2 origin_;
  double h_;
  int nx_, ny_;
  std::vector<std::uint8_t> occ_;
};

// ---------------------------------------------------------------------------
// Finite union of disjoint open intervals on the line.
// ---------------------------------------------------------------------------
class IntervalUnion {
 public:
  explicit IntervalUnion(std::vector<std::pair<double, double>> iv) : iv_(std::move(iv)) {
    std::sort(iv_.begin(), iv_.end());
    for (std::size_t i = 0; i < iv_.size(); ++i) {
      if (!(iv_[i].first < iv_[i].second))
        throw std::invalid_argument("IntervalUnion: need a < b");
      if (i > 0 && iv_[i].first < iv_[i - 1].second)
        throw std::invalid_argument("IntervalUnion: overlapping intervals");
    }
  }

  const std::vector<std::pair<double, double>>& intervals() const { return iv_; }

  double volume() const {
    if (iv_.empty()) throw std::runtime_error("empty set");
    KahanSum acc;
    for (auto& [a, b] : iv_) acc.add(b - a);
    return acc.value();
  }

  bool contains(double x) const {
    for (auto& [a, b] : iv_)
      if (x > a && x < b) return true;
    return false;
  }
  bool contains(const Vec2& p) const { return contains(p.x); }

 private:
  std::vector<std::pair<double, double>> iv_;
};

using Shape = std::variant<RadialShape, GridSet, IntervalUnion>;

inline double volume(const Shape& s) {
  return std::visit([](const auto& v) { return v.volume(); }, s);
}

// ---------------------------------------------------------------------------
// Rescaling between E_m and its unit-volume normalization.
// ---------------------------------------------------------------------------
struct RescaleMap {
  double sigma = 1.0;  // (m / |B_1|)^{1/N}
  Vec2 x_m;            // translation center
  double m = 0.0;      // volume
  int dim = 2;

  static RescaleMap for_volume(double m, Vec2 x_m = {}, int dim = 2) {
    if (!(m > 0.0)) throw std::invalid_argument("RescaleMap: volume must be positive");
    RescaleMap map;
    map.sigma = std::pow(m / unit_ball_volume(dim), 1.0 / dim);
    map.x_m = x_m;
    map.m = m;
    map.dim = dim;
    return map;
  }

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("RescaleMap: sigma must be positive");
    double rec = std::pow(sigma, dim) * unit_ball_volume(dim);
    if (std::abs(rec - m) > 1e-12 * std::max(1.0, std::abs(m)))
      throw std::invalid_argument("RescaleMap: sigma^N |B_1| != m");
  }
};

struct SandwichResult {
  double r_inner = 0.0;
  double r_outer = 0.0;
  double r0 = 0.0;  // max(1 - r_inner, r_outer - 1)
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline RadialShape rescale_to_unit(const RadialShape& e, const RescaleMap& map) {
  map.validate();
  double v = e.volume();
  if (std::abs(v - map.m) > 1e-6 * std::max(1.0, std::abs(map.m)))
    throw std::invalid_argument("rescale_to_unit: volume mismatch");
  std::vector<double> r = e.radii();
  for (double& x : r) x /= map.sigma;
  return RadialShape((e.center() - map.x_m) / map.sigma, std::move(r));
}

inline RadialShape descale(const RadialShape& e_tilde, const RescaleMap& map) {
  map.validate();
  std::vector<double> r = e_tilde.radii();
  for (double& x : r) x *= map.sigma;
  return RadialShape(e_tilde.center() * map.sigma + map.x_m, std::move(r));
}

inline GridSet rescale_to_unit(const GridSet& e, const RescaleMap& map) {
  map.validate();
  double v = e.volume();
  if (std::abs(v - map.m) > 1e-6 * std::max(1.0, std::abs(map.m)))
    throw std::invalid_argument("rescale_to_unit: volume mismatch");
  return GridSet(e.dim(), (e.origin() - map.x_m) / map.sigma, e.spacing() / map.sigma,
                 e.nx(), e.ny(), e.occupancy());
}

inline SandwichResult ball_sandwich_radii(const RadialShape& e, const Vec2& center) {
  if (!e.contains(center)) throw std::invalid_argument("not star center");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int k = 0; k < e.samples(); ++k) {
    double d = (e.boundary_point(k) - center).norm();
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  SandwichResult r;
  r.r_inner = lo;
  r.r_outer = hi;
  r.r0 = std::max(1.0 - lo, hi - 1.0);
  r.r0 = std::max(r.r0, 0.0);
  return r;
}

inline double polygon_area(const std::vector<Vec2>& p) {
  KahanSum acc;
  std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    acc.add(a.x * b.y - b.x * a.y);
  }
  return 0.5 * std::abs(acc.value());
}

// Andrew monotone chain.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double convexity_defect(const RadialShape& e) {
  std::vector<Vec2> poly = e.polygon();
  double a = polygon_area(poly);
  double ah = polygon_area(convex_hull(poly));
  double d = (ah - a) / a;
  return std::max(d, 0.0);
}

// Cell-center rasterization onto an explicit window.
template <typename ShapeT>
GridSet rasterize(const ShapeT& s, Vec2 origin, double h, int nx, int ny) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(nx) * ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Vec2 c{origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h};
      if (s.contains(c)) occ[static_cast<std::size_t>(j) * nx + i] = 1;
    }
  return GridSet(2, origin, h, nx, ny, std::move(occ));
}

namespace detail {

struct Window {
  Vec2 origin;
  double h;
  int nx, ny;
};

inline Window common_window(const Vec2& lo_a, const Vec2& hi_a, const Vec2& lo_b,
                            const Vec2& hi_b, double h) {
  Vec2 lo{std::min(lo_a.x, lo_b.x) - 2 * h, std::min(lo_a.y, lo_b.y) - 2 * h};
  Vec2 hi{std::max(hi_a.x, hi_b.x) + 2 * h, std::max(hi_a.y, hi_b.y) + 2 * h};
  Window w;
  w.origin = lo;
  w.h = h;
  w.nx = static_cast<int>(std::ceil((hi.x - lo.x) / h));
  w.ny = static_cast<int>(std::ceil((hi.y - lo.y) / h));
  return w;
}

inline void bounds(const RadialShape& s, Vec2& lo, Vec2& hi) {
  double r = s.max_radius();
  lo = s.center() - Vec2{r, r};
  hi = s.center() + Vec2{r, r};
}
inline void bounds(const GridSet& s, Vec2& lo, Vec2& hi) {
  lo = s.origin();
  hi = {s.origin().x + s.nx() * s.spacing(), s.origin().y + s.ny() * s.spacing()};
}

}  // namespace detail

// |A \triangle B| by rasterizing both onto a shared grid. The resolution is
// the finer of the two inputs; radial shapes default to h = diameter/512.
template <typename A, typename B>
double symmetric_difference_volume(const A& a, const B& b, double h_hint = 0.0) {
  Vec2 lo_a, hi_a, lo_b, hi_b;
  detail::bounds(a, lo_a, hi_a);
  detail::bounds(b, lo_b, hi_b);
  double h = h_hint;
  if (h <= 0.0) {
    double diam = std::max({hi_a.x - lo_a.x, hi_a.y - lo_a.y, hi_b.x - lo_b.x,
                            hi_b.y - lo_b.y});
    h = diam / 512.0;
    if constexpr (std::is_same_v<A, GridSet>) h = std::min(h, a.spacing());
    if constexpr (std::is_same_v<B, GridSet>) h = std::min(h, b.spacing());
  }
  detail::Window w = detail::common_window(lo_a, hi_a, lo_b, hi_b, h);
  std::size_t diff = 0;
  for (int j = 0; j < w.ny; ++j)
    for (int i = 0; i < w.nx; ++i) {
      Vec2 c{w.origin.x + (i + 0.5) * h, w.origin.y + (j + 0.5) * h};
      if (a.contains(c) != b.contains(c)) ++diff;
    }
  return h * h * static_cast<double>(diff);
}

// Hausdorff distance between sampled boundaries.
inline double boundary_hausdorff(const RadialShape& a, const RadialShape& b) {
  std::vector<Vec2> pa = a.polygon(), pb = b.polygon();
  auto one_sided = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    double worst = 0.0;
    for (const Vec2& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < q.size(); ++i) {
        // distance to segment q[i] -> q[i+1]
        const Vec2& u = q[i];
        const Vec2& v = q[(i + 1) % q.size()];
        Vec2 d = v - u;
        double len2 = d.norm2();
        double t = len2 > 0 ? std::clamp((x - u).dot(d) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (x - (u + d * t)).norm());
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(pa, pb), one_sided(pb, pa));
}

inline RadialShape RadialShape::resampled_about(const Vec2& c, int k_out) const {
  if (!contains(c)) throw std::invalid_argument("not star center");
  int k = k_out > 0 ? k_out : samples();
  std::vector<Vec2> poly = polygon();
  std::vector<double> out(k);
  for (int i = 0; i < k; ++i) {
    double th = 2.0 * kPi * i / k;
    Vec2 u{std::cos(th), std::sin(th)};
    // farthest crossing of the ray c + t u with the boundary polygon
    double best = -1.0;
    for (std::size_t e = 0; e < poly.size(); ++e) {
      Vec2 p = poly[e], q = poly[(e + 1) % poly.size()];
      Vec2 d = q - p;
      double det = u.x * (-d.y) - u.y * (-d.x);
      if (std::abs(det) < 1e-14) continue;
      Vec2 rhs = p - c;
      double t = (rhs.x * (-d.y) - rhs.y * (-d.x)) / det;
      double w = (u.x * rhs.y - u.y * rhs.x) / det;
      if (t > 0.0 && w >= -1e-12 && w <= 1.0 + 1e-12) best = std::max(best, t);
    }
    if (best <= 0.0) throw std::runtime_error("resample: ray misses boundary (star-shapedness lost)");
    out[i] = best;
  }
  return RadialShape(c, std::move(out));
}

// ---------------------------------------------------------------------------
// JSON persistence
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const RadialShape& s) {
  return {{"kind", "radial"},
          {"center", {s.center().x, s.center().y}},
          {"radii", s.radii()}};
}

inline nlohmann::json to_json(const GridSet& s) {
  std::vector<std::string> rows(s.ny());
  for (int j = 0; j < s.ny(); ++j) {
    std::string& r = rows[j];
    r.resize(s.nx());
    for (int i = 0; i < s.nx(); ++i) r[i] = s.occupied(i, j) ? '1' : '0';
  }
  return {{"kind", "grid"},
          {"origin", {s.origin().x, s.origin().y}},
          {"h", s.spacing()},
          {"dim", s.dim()},
          {"rows", rows}};
}

inline nlohmann::json to_json(const IntervalUnion& s) {
  nlohmann::json pairs = nlohmann::json::array();
  for (auto& [a, b] : s.intervals()) pairs.push_back({a, b});
  return {{"kind", "intervals"}, {"pairs", pairs}};
}

inline nlohmann::json to_json(const Shape& s) {
  return std::visit([](const auto& v) { return to_json(v); }, s);
}

inline Shape shape_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "radial") {
    auto c = j.at("center");
    return RadialShape(Vec2{c.at(0).get<double>(), c.at(1).get<double>()},
                       j.at("radii").get<std::vector<double>>());
  }
  if (kind == "grid") {
    auto o = j.at("origin");
    auto rows = j.at("rows").get<std::vector<std::string>>();
    int dim = j.value("dim", 2);
    int ny = static_cast<int>(rows.size());
    int nx = ny > 0 ? static_cast<int>(rows[0].size()) : 0;
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(nx) * ny, 0);
    for (int jj = 0; jj < ny; ++jj) {
      if (static_cast<int>(rows[jj].size()) != nx)
        throw std::invalid_argument("grid rows must have equal length");
      for (int i = 0; i < nx; ++i)
        occ[static_cast<std::size_t>(jj) * nx + i] = rows[jj][i] == '1';
    }
    return GridSet(dim, Vec2{o.at(0).get<double>(), o.at(1).get<double>()},
                   j.at("h").get<double>(), nx, ny, std::move(occ));
  }
  if (kind == "intervals") {
    std::vector<std::pair<double, double>> pairs;
    for (auto& p : j.at("pairs"))
      pairs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return IntervalUnion(std::move(pairs));
  }
  throw std::invalid_argument("unknown shape kind: " + kind);
}

}  // namespace fracshape
