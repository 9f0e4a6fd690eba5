#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fracshape {

inline constexpr double kPi = 3.14159265358979323846;

// |B_1| in R^N.
inline double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return kPi;
    default: throw std::invalid_argument("unit_ball_volume: dim must be 1 or 2");
  }
}

// Surface measure of the unit sphere, N*omega_N.
inline double unit_sphere_measure(int dim) {
  return dim * unit_ball_volume(dim);
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {x * a, y * a}; }
  Vec2 operator/(double a) const { return {x / a, y / a}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double a, const Vec2& v) { return v * a; }

// Compensated accumulator; all kernel reductions route through this so the
// result is independent of chunking.
class KahanSum {
 public:
  void add(double v) {
    double y = v - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline int thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  int n = hw == 0 ? 1 : static_cast<int>(hw);
  if (const char* env = std::getenv("FRACSHAPE_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

// Index-parallel loop. Workers own disjoint index ranges; callers must write
// results into per-index slots and reduce sequentially afterwards, so the
// outcome does not depend on the thread count.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  int nt = thread_budget();
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + nt - 1) / static_cast<std::size_t>(nt);
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Nodes by Newton iteration on P_n; cached per order.
inline const GaussLegendre& gauss_legendre(int order) {
  static thread_local std::vector<GaussLegendre> cache(65);
  if (order < 1 || order > 64) throw std::invalid_argument("gauss_legendre order");
  GaussLegendre& gl = cache[order];
  if (!gl.nodes.empty()) return gl;
  gl.nodes.resize(order);
  gl.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = order * (x * p1 - p0) / (x * x - 1.0);
    gl.nodes[i] = x;
    gl.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

// Integrate f on [a, b] with a fixed-order Gauss rule.
template <typename F>
double integrate_gl(F&& f, double a, double b, int order = 32) {
  const GaussLegendre& gl = gauss_legendre(order);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  KahanSum acc;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i)
    acc.add(gl.weights[i] * f(mid + half * gl.nodes[i]));
  return acc.value() * half;
}

template <typename F>
double integrate_gl_composite(F&& f, double a, double b, int panels, int order = 16) {
  KahanSum acc;
  double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    acc.add(integrate_gl(f, a + p * w, a + (p + 1) * w, order));
  return acc.value();
}

}  // namespace fracshape
