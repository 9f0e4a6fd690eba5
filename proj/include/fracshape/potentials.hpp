#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fracshape/common.hpp"
#include "fracshape/shapes.hpp"

namespace fracshape {

// ---------------------------------------------------------------------------
// Confining potentials.  A closed registry of analytic families so that
// gradients and Lipschitz constants are exact:
//   power          g(x) = |x|^p,           p >= 1
//   shifted_power  g(x) = |x - x0|^p
//   quadratic_form g(x) = (x - x0)' Q (x - x0),  Q symmetric positive definite
// All are nonnegative, vanish at their minimum point, and grow at infinity.
// ---------------------------------------------------------------------------

using Matrix2 = std::array<std::array<double, 2>, 2>;

inline double operator_norm_power_iteration(const Matrix2& q, int iters = 200) {
  double vx = 1.0, vy = 0.7071067811865476;
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    double wx = q[0][0] * vx + q[0][1] * vy;
    double wy = q[1][0] * vx + q[1][1] * vy;
    double n = std::sqrt(wx * wx + wy * wy);
    if (n == 0.0) return 0.0;
    lam = n;
    vx = wx / n;
    vy = wy / n;
  }
  return lam;
}

class Potential {
 public:
  enum class Kind { power, shifted_power, quadratic_form };

  static Potential power(double p) { return Potential(Kind::power, p, {}, {}); }
  static Potential shifted_power(double p, Vec2 x0) {
    return Potential(Kind::shifted_power, p, x0, {});
  }
  static Potential quadratic_form(const Matrix2& q, Vec2 x0 = {}) {
    return Potential(Kind::quadratic_form, 2.0, x0, q);
  }

  Kind kind() const { return kind_; }
  double exponent() const { return p_; }
  Vec2 center() const { return x0_; }
  const Matrix2& matrix() const { return q_; }

  // the (unique) zero of g
  Vec2 argmin() const { return x0_; }

  double operator()(const Vec2& x) const {
    Vec2 d = x - x0_;
    if (kind_ == Kind::quadratic_form)
      return d.x * (q_[0][0] * d.x + q_[0][1] * d.y) + d.y * (q_[1][0] * d.x + q_[1][1] * d.y);
    return std::pow(d.norm(), p_);
  }
  double operator()(double x) const { return (*this)(Vec2{x, 0.0}); }

  Vec2 grad(const Vec2& x) const {
    Vec2 d = x - x0_;
    if (kind_ == Kind::quadratic_form)
      return Vec2{2.0 * (q_[0][0] * d.x + q_[0][1] * d.y), 2.0 * (q_[1][0] * d.x + q_[1][1] * d.y)};
    double r = d.norm();
    if (r == 0.0) return {};
    return d * (p_ * std::pow(r, p_ - 2.0));
  }

  // Lipschitz constant of g on the centered ball B_R (sup of |grad g| there)
  double lipschitz_bound(double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("lipschitz_bound: R must be positive");
    double reach = r + x0_.norm();
    if (kind_ == Kind::quadratic_form) return 2.0 * operator_norm_power_iteration(q_) * reach;
    return p_ * std::pow(reach, p_ - 1.0);
  }

 private:
  Potential(Kind kind, double p, Vec2 x0, Matrix2 q) : kind_(kind), p_(p), x0_(x0), q_(q) {
    if (kind_ != Kind::quadratic_form) {
      if (!(p_ >= 1.0)) throw std::invalid_argument("potential exponent must be >= 1");
    } else {
      if (std::abs(q_[0][1] - q_[1][0]) > 1e-14 * (1.0 + std::abs(q_[0][1])))
        throw std::invalid_argument("quadratic form must be symmetric");
      double tr = q_[0][0] + q_[1][1];
      double det = q_[0][0] * q_[1][1] - q_[0][1] * q_[1][0];
      if (!(tr > 0.0 && det > 0.0))
        throw std::invalid_argument("quadratic form must be positive definite");
    }
  }

  Kind kind_;
  double p_;
  Vec2 x0_;
  Matrix2 q_{{{0.0, 0.0}, {0.0, 0.0}}};
};

// Volume-rescaled potential sigma^s * g(sigma*x + x_m): the potential seen by
// the unit-volume rescaling of a set of volume m.
class RescaledPotential {
 public:
  RescaledPotential(Potential base, RescaleMap map, double s)
      : base_(std::move(base)), map_(map), s_(s) {
    if (!(s_ > 0.0 && s_ < 1.0)) throw std::invalid_argument("s must be in (0,1)");
    map_.validate();
  }

  const Potential& base() const { return base_; }
  const RescaleMap& map() const { return map_; }
  double s() const { return s_; }

  double operator()(const Vec2& x) const {
    return std::pow(map_.sigma, s_) * base_(x * map_.sigma + map_.x_m);
  }
  double operator()(double x) const { return (*this)(Vec2{x, 0.0}); }

  Vec2 grad(const Vec2& x) const {
    return base_.grad(x * map_.sigma + map_.x_m) * std::pow(map_.sigma, s_ + 1.0);
  }

 private:
  Potential base_;
  RescaleMap map_;
  double s_;
};

inline RescaledPotential rescaled_potential(const Potential& g, const RescaleMap& map, double s) {
  return RescaledPotential(g, map, s);
}

// ---------------------------------------------------------------------------
// JSON config fragment: {"kind":"power","p":2} /
// {"kind":"shifted_power","p":2,"center":[0.3,0]} /
// {"kind":"quadratic_form","Q":[[2,0.5],[0.5,1]],"center":[0,0]}
// ---------------------------------------------------------------------------
inline Potential potential_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  Vec2 center{};
  if (j.contains("center")) {
    auto c = j.at("center");
    center = {c.at(0).get<double>(), c.size() > 1 ? c.at(1).get<double>() : 0.0};
  }
  if (kind == "power") {
    if (center.norm() != 0.0) return Potential::shifted_power(j.at("p").get<double>(), center);
    return Potential::power(j.at("p").get<double>());
  }
  if (kind == "shifted_power") return Potential::shifted_power(j.at("p").get<double>(), center);
  if (kind == "quadratic_form") {
    auto q = j.at("Q");
    Matrix2 m{{{q.at(0).at(0).get<double>(), q.at(0).at(1).get<double>()},
               {q.at(1).at(0).get<double>(), q.at(1).at(1).get<double>()}}};
    return Potential::quadratic_form(m, center);
  }
  throw std::invalid_argument("unknown potential kind: " + kind);
}

inline nlohmann::json to_json(const Potential& g) {
  nlohmann::json j;
  switch (g.kind()) {
    case Potential::Kind::power:
      j["kind"] = "power";
      j["p"] = g.exponent();
      break;
    case Potential::Kind::shifted_power:
      j["kind"] = "shifted_power";
      j["p"] = g.exponent();
      j["center"] = {g.center().x, g.center().y};
      break;
    case Potential::Kind::quadratic_form:
      j["kind"] = "quadratic_form";
      j["Q"] = {{g.matrix()[0][0], g.matrix()[0][1]}, {g.matrix()[1][0], g.matrix()[1][1]}};
      j["center"] = {g.center().x, g.center().y};
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Integrals of smooth scalar fields over shapes.  For radial shapes the area
// integral is taken in polar form about the star center,
//   Integral_E f = oint dtheta Integral_0^{rho(theta)} f(c + r omega) r dr,
// with Gauss-Legendre in r and the periodic trapezoid rule in theta.
// ---------------------------------------------------------------------------
template <typename F>
double shape_integral(const RadialShape& e, F&& f, int radial_order = 24) {
  const int k = e.samples();
  KahanSum acc;
  for (int i = 0; i < k; ++i) {
    double theta = e.angle(i);
    Vec2 omega{std::cos(theta), std::sin(theta)};
    double rho = e.radii()[i];
    acc.add(integrate_gl([&](double r) { return f(e.center() + omega * r) * r; }, 0.0, rho,
                         radial_order));
  }
  return acc.value() * 2.0 * kPi / k;
}

template <typename F>
double shape_integral(const IntervalUnion& e, F&& f, int order = 32) {
  KahanSum acc;
  for (auto& [a, b] : e.intervals())
    acc.add(integrate_gl([&](double x) { return f(Vec2{x, 0.0}); }, a, b, order));
  return acc.value();
}

template <typename F>
double shape_integral(const GridSet& e, F&& f, int /*order*/ = 0) {
  KahanSum acc;
  double cell = std::pow(e.spacing(), e.dim());
  for (int j = 0; j < e.ny(); ++j)
    for (int i = 0; i < e.nx(); ++i)
      if (e.occupied(i, j)) acc.add(f(e.cell_center(i, j)) * cell);
  return acc.value();
}

// Integral of g over the shape (the potential term of the energy).
template <typename ShapeT, typename G>
double potential_integral(const ShapeT& e, const G& g) {
  return shape_integral(e, [&](const Vec2& x) { return g(x); });
}

// Integral of grad(g) . x over the shape (enters the multiplier identity).
template <typename ShapeT, typename G>
double grad_dot_position_integral(const ShapeT& e, const G& g) {
  return shape_integral(e, [&](const Vec2& x) { return g.grad(x).dot(x); });
}

}  // namespace fracshape
