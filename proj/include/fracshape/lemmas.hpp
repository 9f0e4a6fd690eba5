#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fracshape/common.hpp"

namespace fracshape {

// ---------------------------------------------------------------------------
// Numerical checks of two one-dimensional analytic estimates:
//   * a fractional-derivative bound:  for f non-increasing with f(inf) = 0,
//       -(1-s) int_a^b dr int_r^inf f'(t) (t-r)^{-s} dt  <=  (b-a)^{1-s} f(a),
//     together with its mirror for non-decreasing f on [0,b] with f(0) = 0;
//   * a comparison estimate: if u >= 0 is non-increasing on [a,b] and
//       2c int_rho^b u(r)^{(N-s)/N} dr <= u(rho)  for all rho in (a,b),
//     then u vanishes at a + (2u(a))^{s/N} N / (s c).
// These are theorems, so a reported failure beyond the quadrature error bar
// indicates a quadrature bug, not a counterexample.  To keep inputs absolutely
// continuous the admissible functions form a closed registry of smooth (or
// piecewise-C^1) families with analytic derivatives and tails.
// ---------------------------------------------------------------------------

// closed registry of monotone function families on [a, +inf) resp. [0, b]
class LemmaFamily {
 public:
  enum class Kind {
    zero,            // f = 0
    exponential,     // f(t) = exp(-alpha t), non-increasing, f(inf) = 0
    power_cutoff,    // f(t) = max(0, 1 - t/T)^q, non-increasing, compact support
    power_growth,    // f(t) = (t / b)^q on [0, b], non-decreasing, f(0) = 0
    saturating_exp,  // f(t) = 1 - exp(-alpha t), non-decreasing, f(0) = 0
  };

  static LemmaFamily zero() { return LemmaFamily(Kind::zero, 0.0, 0.0); }
  static LemmaFamily exponential(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("exponential family needs alpha > 0");
    return LemmaFamily(Kind::exponential, alpha, 0.0);
  }
  static LemmaFamily power_cutoff(double big_t, double q) {
    if (!(big_t > 0.0) || !(q >= 1.0))
      throw std::invalid_argument("power_cutoff family needs T > 0 and q >= 1");
    return LemmaFamily(Kind::power_cutoff, big_t, q);
  }
  static LemmaFamily power_growth(double b, double q) {
    if (!(b > 0.0) || !(q >= 1.0))
      throw std::invalid_argument("power_growth family needs b > 0 and q >= 1");
    return LemmaFamily(Kind::power_growth, b, q);
  }
  static LemmaFamily saturating_exp(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("saturating_exp family needs alpha > 0");
    return LemmaFamily(Kind::saturating_exp, alpha, 0.0);
  }

  Kind kind() const { return kind_; }

  double value(double t) const {
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::exponential:
        return std::exp(-p0_ * t);
      case Kind::power_cutoff: {
        double base = 1.0 - t / p0_;
        return base > 0.0 ? std::pow(base, p1_) : 0.0;
      }
      case Kind::power_growth:
        return std::pow(t / p0_, p1_);
      case Kind::saturating_exp:
        return 1.0 - std::exp(-p0_ * t);
    }
    return 0.0;
  }

  double deriv(double t) const {
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::exponential:
        return -p0_ * std::exp(-p0_ * t);
      case Kind::power_cutoff: {
        double base = 1.0 - t / p0_;
        return base > 0.0 ? -(p1_ / p0_) * std::pow(base, p1_ - 1.0) : 0.0;
      }
      case Kind::power_growth:
        return (p1_ / p0_) * std::pow(t / p0_, p1_ - 1.0);
      case Kind::saturating_exp:
        return p0_ * std::exp(-p0_ * t);
    }
    return 0.0;
  }

  bool non_increasing() const {
    return kind_ == Kind::zero || kind_ == Kind::exponential || kind_ == Kind::power_cutoff;
  }
  bool non_decreasing() const {
    return kind_ == Kind::zero || kind_ == Kind::power_growth || kind_ == Kind::saturating_exp;
  }

  // t beyond which |f| and |f'| are below ~1e-20 (exact support end when finite)
  double decay_cut() const {
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::exponential:
        return 46.0 / p0_;
      case Kind::power_cutoff:
        return p0_;
      default:
        throw std::logic_error("decay_cut only defined for non-increasing families");
    }
  }

 private:
  LemmaFamily(Kind k, double p0, double p1) : kind_(k), p0_(p0), p1_(p1) {}
  Kind kind_;
  double p0_, p1_;
};

struct FracDerivativeReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double error = 0.0;   // quadrature error bar on lhs
  double margin = 0.0;  // rhs - lhs
  bool pass = false;    // lhs <= rhs + 3 * error
};

namespace detail {

// LHS of the non-increasing bound at panel count n.  The substitution
// t = r + u^{1/(1-s)} absorbs the (t-r)^{-s} kernel exactly:
//   -(1-s) int_r^inf f'(t) (t-r)^{-s} dt = -int_0^{U} f'(r + u^{1/(1-s)}) du,
// with U = (cut - r)^{1-s} once f' vanishes (or is negligible) past `cut`.
inline double frac_der_lhs_decreasing(const LemmaFamily& f, double a, double b, double s, int n) {
  double cut = std::max(f.decay_cut(), b + 1.0);
  double inv = 1.0 / (1.0 - s);
  auto inner = [&](double r) {
    double upper = std::pow(std::max(cut - r, 0.0), 1.0 - s);
    if (upper <= 0.0) return 0.0;
    return -integrate_gl_composite([&](double u) { return f.deriv(r + std::pow(u, inv)); }, 0.0,
                                   upper, n);
  };
  return integrate_gl_composite(inner, a, b, n);
}

// LHS of the non-decreasing mirror: (1-s) int_a^b dr int_0^r f'(t) (r-t)^{-s} dt
// with t = r - u^{1/(1-s)} so the inner integral runs over u in (0, r^{1-s}).
inline double frac_der_lhs_increasing(const LemmaFamily& f, double a, double b, double s, int n) {
  double inv = 1.0 / (1.0 - s);
  auto inner = [&](double r) {
    double upper = std::pow(r, 1.0 - s);
    if (upper <= 0.0) return 0.0;
    return integrate_gl_composite([&](double u) { return f.deriv(r - std::pow(u, inv)); }, 0.0,
                                  upper, n);
  };
  return integrate_gl_composite(inner, a, b, n);
}

inline void check_sab(double s, double a, double b) {
  if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
  if (!(a < b)) throw std::invalid_argument("need a < b");
}

}  // namespace detail

// non-increasing case: -(1-s) int_a^b int_r^inf f'(t)(t-r)^{-s} <= (b-a)^{1-s} f(a)
inline FracDerivativeReport frac_derivative_bound_check(const LemmaFamily& f, double a, double b,
                                                        double s, int panels = 24) {
  detail::check_sab(s, a, b);
  if (!f.non_increasing())
    throw std::invalid_argument("fractional derivative bound needs a non-increasing family");
  FracDerivativeReport rep;
  double coarse = detail::frac_der_lhs_decreasing(f, a, b, s, panels);
  rep.lhs = detail::frac_der_lhs_decreasing(f, a, b, s, 2 * panels);
  rep.error = std::abs(rep.lhs - coarse) + 1e-14 * std::abs(rep.lhs);
  rep.rhs = std::pow(b - a, 1.0 - s) * f.value(a);
  rep.margin = rep.rhs - rep.lhs;
  rep.pass = rep.lhs <= rep.rhs + 3.0 * rep.error;
  return rep;
}

// non-decreasing mirror on [0, b] with f(0) = 0, bound (b-a)^{1-s} f(b)
inline FracDerivativeReport frac_derivative_bound_check_increasing(const LemmaFamily& f, double a,
                                                                   double b, double s,
                                                                   int panels = 24) {
  detail::check_sab(s, a, b);
  if (!(a >= 0.0)) throw std::invalid_argument("mirror bound needs 0 <= a");
  if (!f.non_decreasing())
    throw std::invalid_argument("mirror bound needs a non-decreasing family");
  FracDerivativeReport rep;
  double coarse = detail::frac_der_lhs_increasing(f, a, b, s, panels);
  rep.lhs = detail::frac_der_lhs_increasing(f, a, b, s, 2 * panels);
  rep.error = std::abs(rep.lhs - coarse) + 1e-14 * std::abs(rep.lhs);
  rep.rhs = std::pow(b - a, 1.0 - s) * f.value(b);
  rep.margin = rep.rhs - rep.lhs;
  rep.pass = rep.lhs <= rep.rhs + 3.0 * rep.error;
  return rep;
}

// ---------------------------------------------------------------------------
// Auxiliary profile for the comparison estimate:
//   h(rho) = [ (2 u_a)^{s/N} - c (s/N) (rho - a) ]_+^{N/s},
// which satisfies  c int_rho^b h(r)^{(N-s)/N} dr = h(rho)  for all rho >= a
// (the integrand has the exact antiderivative -h/c), h(a) = 2 u_a, and
// vanishes at  a + (2 u_a)^{s/N} N / (s c).
// ---------------------------------------------------------------------------
inline double aux_profile(double rho, double u_a, double a, double s, double c, int dim) {
  double base = std::pow(2.0 * u_a, s / dim) - c * (s / dim) * (rho - a);
  return base > 0.0 ? std::pow(base, dim / s) : 0.0;
}

inline double aux_profile_support_end(double u_a, double a, double s, double c, int dim) {
  return a + std::pow(2.0 * u_a, s / dim) * dim / (s * c);
}

struct AuxIdentityReport {
  double max_abs_error = 0.0;  // worst |c int - h| over the probe points
  double scale = 0.0;          // h(a), the natural magnitude
  bool pass = false;
};

// verifies the integral identity at `probes` points spread over [a, b]
inline AuxIdentityReport aux_h_identity(double u_a, double a, double b, double s, double c, int dim,
                                        int probes = 50) {
  detail::check_sab(s, a, b);
  if (!(u_a > 0.0) || !(c > 0.0)) throw std::invalid_argument("need u(a) > 0 and c > 0");
  if (dim != 1 && dim != 2) throw std::invalid_argument("dim must be 1 or 2");
  double end = aux_profile_support_end(u_a, a, s, c, dim);
  if (!(b >= end))
    throw std::runtime_error("support condition violated: b must reach the vanishing point");
  double beta = (dim - s) / static_cast<double>(dim);
  AuxIdentityReport rep;
  rep.scale = 2.0 * u_a;
  for (int k = 0; k < probes; ++k) {
    double rho = a + (b - a) * (k + 0.5) / probes;
    double hi = std::min(b, end);
    double integral = rho >= hi ? 0.0
                                : integrate_gl_composite(
                                      [&](double r) {
                                        return std::pow(aux_profile(r, u_a, a, s, c, dim), beta);
                                      },
                                      rho, hi, 32);
    double err = std::abs(c * integral - aux_profile(rho, u_a, a, s, c, dim));
    rep.max_abs_error = std::max(rep.max_abs_error, err);
  }
  rep.pass = rep.max_abs_error <= 1e-6 * rep.scale;
  return rep;
}

// ---------------------------------------------------------------------------
// Comparison estimate.  The probe function u must be non-negative and
// non-increasing on [a, b]; the hypothesis 2c int_rho^b u^{(N-s)/N} <= u(rho)
// is verified on a rho-grid before the conclusion u(vanish_point) = 0 is
// asserted.  A failed hypothesis is reported as such, never as a lemma
// failure.  The mirror flag runs the non-decreasing variant via reflection.
// ---------------------------------------------------------------------------
struct LemmaProbe {
  std::function<double(double)> u;
  double a = 0.0, b = 1.0;
  double s = 0.5;
  double c = 1.0;
  int grid = 400;  // rho-grid resolution for the hypothesis check
};

struct ComparisonReport {
  bool hypothesis_satisfied = false;
  double worst_slack = 0.0;   // min over the grid of u(rho) - 2c int (can be < 0)
  double vanish_point = 0.0;  // a + (2u(a))^{s/N} N / (s c)
  double residual = 0.0;      // u(vanish_point)
  double tolerance = 0.0;
  bool pass = false;
};

inline ComparisonReport comparison_lemma_check(const LemmaProbe& probe, int dim,
                                               bool mirror = false) {
  detail::check_sab(probe.s, probe.a, probe.b);
  if (!(probe.c > 0.0)) throw std::invalid_argument("need c > 0");
  if (probe.grid < 8) throw std::invalid_argument("rho-grid too coarse");
  if (dim != 1 && dim != 2) throw std::invalid_argument("dim must be 1 or 2");
  const double a = probe.a, b = probe.b, s = probe.s, c = probe.c;
  // with mirror set, probe.u is the non-decreasing variant w; reflecting it by
  // r -> a + b - r maps its hypothesis and vanishing point onto the
  // non-increasing case, so only that case needs direct treatment
  auto u = mirror ? std::function<double(double)>(
                        [&probe, a, b](double r) { return probe.u(a + b - r); })
                  : probe.u;

  // monotone non-increasing and non-negative on the grid, else the probe is invalid
  double prev = u(a);
  if (!(prev >= 0.0)) throw std::invalid_argument("u must be non-negative");
  for (int k = 1; k <= probe.grid; ++k) {
    double v = u(a + (b - a) * k / probe.grid);
    if (!(v >= 0.0)) throw std::invalid_argument("u must be non-negative");
    if (v > prev + 1e-12 * (1.0 + prev))
      throw std::invalid_argument("u must be monotone non-increasing");
    prev = v;
  }

  double beta = (dim - s) / static_cast<double>(dim);
  auto ubeta = [&](double r) { return std::pow(u(r), beta); };

  ComparisonReport rep;
  double u_a = u(a);
  double vanish = a + std::pow(2.0 * u_a, s / dim) * dim / (s * c);
  rep.vanish_point = mirror ? a + b - vanish : vanish;
  if (!(vanish <= b))
    throw std::invalid_argument("vanishing point beyond b: comparison hypothesis ill-posed");

  // tail integrals on the rho-grid by one backward sweep
  std::vector<double> tail(probe.grid + 1, 0.0);
  for (int k = probe.grid - 1; k >= 0; --k) {
    double lo = a + (b - a) * k / probe.grid;
    double hi = a + (b - a) * (k + 1) / probe.grid;
    tail[k] = tail[k + 1] + integrate_gl(ubeta, lo, hi, 16);
  }
  rep.worst_slack = std::numeric_limits<double>::infinity();
  double quad_err = 0.0;
  for (int k = 0; k <= probe.grid; ++k) {
    double rho = a + (b - a) * k / probe.grid;
    double slack = u(rho) - 2.0 * c * tail[k];
    rep.worst_slack = std::min(rep.worst_slack, slack);
    quad_err = std::max(quad_err, 1e-10 * (u(rho) + 2.0 * c * tail[k]));
  }
  rep.hypothesis_satisfied = rep.worst_slack >= -3.0 * quad_err;
  rep.tolerance = std::max(1e-9 * (1.0 + u_a), 3.0 * quad_err);
  if (!rep.hypothesis_satisfied) {
    rep.pass = false;  // "hypothesis not satisfied": no claim about the conclusion
    return rep;
  }
  rep.residual = u(vanish);
  rep.pass = rep.residual <= rep.tolerance;
  return rep;
}

// probe u = theta * h built on the auxiliary profile; the hypothesis holds
// exactly when theta^{s/N} >= 2, i.e. theta >= 2^{N/s}
inline LemmaProbe scaled_aux_probe(double theta, double u_a, double a, double b, double s, double c,
                                   int dim) {
  LemmaProbe probe;
  probe.u = [=](double rho) { return theta * aux_profile(rho, u_a, a, s, c, dim); };
  probe.a = a;
  probe.b = b;
  probe.s = s;
  probe.c = c;
  return probe;
}

}  // namespace fracshape
