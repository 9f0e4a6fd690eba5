#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fracshape/common.hpp"
#include "fracshape/curvature.hpp"
#include "fracshape/isoperimetry.hpp"
#include "fracshape/potentials.hpp"
#include "fracshape/shapes.hpp"

namespace fracshape {

// ---------------------------------------------------------------------------
// Constrained minimization of  E(F) = P_s(F) + int_F g  at fixed volume.
// The problem is solved in rescaled coordinates F = (E - x_m) / sigma with
// sigma = (m/|B_1|)^{1/N} and x_m at the potential minimum, so the target
// volume is always |B_1| and the potential enters as the rescaled
// g~(x) = sigma^s g(sigma x + x_m).  Shapes are star-shaped radial graphs;
// the descent direction is the Euler-Lagrange field H_s + g~ - lambda.
// ---------------------------------------------------------------------------

struct EnergyBreakdown {
  double perimeter = 0.0;
  double perimeter_error = 0.0;
  double potential = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

template <typename ShapeT, typename G>
EnergyBreakdown total_energy(const ShapeT& e, const G& g, double s) {
  EnergyBreakdown b;
  PerimeterValue p = best_perimeter(e, s);
  b.perimeter = p.value;
  b.perimeter_error = p.error_estimate;
  b.potential = potential_integral(e, g);
  b.total = b.perimeter + b.potential;
  return b;
}

namespace detail {

inline double max_boundary_distance(const RadialShape& e) {
  double worst = 0.0;
  for (int k = 0; k < e.samples(); ++k) worst = std::max(worst, e.boundary_point(k).norm());
  return worst;
}

// two passes of the [1/4, 1/2, 1/4] kernel: kills the top frequency octave of
// the update so explicit steps cannot inject grid-scale oscillation, while
// leaving the smooth modes that carry the actual descent nearly untouched
inline void smooth_update(std::vector<double>& v) {
  const int k = static_cast<int>(v.size());
  std::vector<double> tmp(k);
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < k; ++i)
      tmp[i] = 0.25 * v[(i + k - 1) % k] + 0.5 * v[i] + 0.25 * v[(i + 1) % k];
    v.swap(tmp);
  }
}

// grid-scale roughness guard: the perimeter and curvature quadratures assume a
// smooth radial graph, so candidates with large discrete second differences
// are rejected before their (unreliable) energy is ever compared
inline bool smooth_enough(const std::vector<double>& rho) {
  const int k = static_cast<int>(rho.size());
  const double dth = 2.0 * kPi / k;
  for (int i = 0; i < k; ++i) {
    double second = rho[(i + 1) % k] - 2.0 * rho[i] + rho[(i + k - 1) % k];
    if (std::abs(second) > 10.0 * dth * dth) return false;
  }
  return true;
}

}  // namespace detail

// unconstrained relaxation: volume deviation is charged at rate mu, and the
// competitor must stay inside the window ball
template <typename G>
EnergyBreakdown penalized_energy(const RadialShape& e, const G& g, double s, double mu,
                                 double window_radius = 3.0) {
  if (!(mu >= 0.0)) throw std::invalid_argument("penalty weight must be non-negative");
  if (detail::max_boundary_distance(e) > window_radius)
    throw std::runtime_error("shape escapes the window ball");
  EnergyBreakdown b = total_energy(e, g, s);
  b.penalty = mu * std::abs(e.volume() - kPi);
  b.total += b.penalty;
  return b;
}

struct SolveConfig {
  double s = 0.5;
  double m = 0.01;  // prescribed volume of the unscaled problem
  Potential potential = Potential::power(2.0);
  enum class Mode { projected, penalized };
  Mode mode = Mode::projected;
  double mu = 64.0;      // penalty weight (penalized mode only)
  int k = 256;           // angular resolution
  double tau0 = 0.4;     // initial step
  double backtrack = 0.5;
  double tol = 1e-6;     // energy-decrease stop tolerance
  int max_iter = 300;
  double window_radius = 3.0;
  int starts = 4;        // ball + (starts-1) seeded perturbations
  int angular = 64;      // curvature quadrature rays

  void validate() const {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must be in (0,1)");
    if (!(m > 0.0)) throw std::invalid_argument("volume must be positive");
    if (!(mu >= 0.0)) throw std::invalid_argument("penalty weight must be non-negative");
    if (!(tau0 > 0.0)) throw std::invalid_argument("initial step must be positive");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("backtracking factor");
    if (k < 16) throw std::invalid_argument("angular resolution too low");
    if (starts < 1) throw std::invalid_argument("need at least one start");
  }
};

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double volume = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct SolveResult {
  RadialShape shape = RadialShape::ball(1.0);     // rescaled minimizer
  EnergyBreakdown energy;                         // of the rescaled shape
  double lambda_flow = 0.0;                       // weighted boundary mean of H_s + g~
  double lambda_identity = 0.0;                   // from the scaling identity
  double el_residual = 0.0;                       // sup |H_s + g~ - lambda| over the boundary
  int iterations = 0;
  bool converged = false;
  RadialShape descaled = RadialShape::ball(1.0);  // E_m = x_m + sigma F
  double lambda_m = 0.0;                          // sigma^{-s} * lambda_flow
  RescaleMap map;
  std::vector<TraceRow> trace;
};

namespace detail {

struct FlowField {
  std::vector<double> h;       // H_s at the samples
  std::vector<double> gval;    // rescaled potential at the samples
  std::vector<double> weight;  // rho * J, the linearized volume weights
  std::vector<double> jac;     // J = rho / sqrt(rho^2 + rho'^2)
  double lambda = 0.0;         // weighted mean of H_s + g~ (projected multiplier)
  double residual = 0.0;       // sup |H_s + g~ - lambda|
};

template <typename G>
FlowField flow_field(const RadialShape& e, const G& g, const QuadratureSpec& q) {
  const int k = e.samples();
  FlowField f;
  f.h.resize(k);
  f.gval.resize(k);
  f.weight.resize(k);
  f.jac.resize(k);
  auto hs = boundary_curvature(e, q);
  const auto& rho = e.radii();
  double dth = 2.0 * kPi / k;
  KahanSum num, den;
  for (int i = 0; i < k; ++i) {
    f.h[i] = hs[i].value;
    f.gval[i] = g(e.boundary_point(i));
    double drho = (rho[(i + 1) % k] - rho[(i + k - 1) % k]) / (2.0 * dth);
    f.jac[i] = rho[i] / std::sqrt(rho[i] * rho[i] + drho * drho);
    f.weight[i] = rho[i] * f.jac[i];
    num.add(f.weight[i] * (f.h[i] + f.gval[i]));
    den.add(f.weight[i]);
  }
  f.lambda = num.value() / den.value();
  for (int i = 0; i < k; ++i)
    f.residual = std::max(f.residual, std::abs(f.h[i] + f.gval[i] - f.lambda));
  return f;
}

// single descent run from one starting shape; throws only on invalid input,
// a lost star shape ends the run with converged = false
template <typename G>
SolveResult descend(const SolveConfig& cfg, const G& gres, RadialShape shape) {
  QuadratureSpec q;
  q.s = cfg.s;
  q.angular = cfg.angular;
  const bool projected = cfg.mode == SolveConfig::Mode::projected;
  const double target = kPi;

  auto project_volume = [&](RadialShape& e) {
    double v = e.volume();
    if (v <= 0.0) return false;
    e = e.scaled_radii(std::sqrt(target / v));
    return true;
  };
  auto energy_of = [&](const RadialShape& e) {
    return projected ? total_energy(e, gres, cfg.s).total
                     : penalized_energy(e, gres, cfg.s, cfg.mu, cfg.window_radius).total;
  };
  auto admissible = [&](const RadialShape& e) {
    double lo = *std::min_element(e.radii().begin(), e.radii().end());
    return lo > 1e-3 && max_boundary_distance(e) <= cfg.window_radius &&
           smooth_enough(e.radii());
  };

  SolveResult res;
  if (projected && !project_volume(shape)) throw std::invalid_argument("degenerate start shape");
  if (!admissible(shape)) throw std::invalid_argument("start shape outside the window");

  double energy = energy_of(shape);
  double tau = cfg.tau0;
  int small_streak = 0;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    FlowField f = flow_field(shape, gres, q);
    double vol = shape.volume();
    double lambda = projected ? f.lambda : 0.0;
    double drive = projected ? 0.0 : cfg.mu * (vol > target ? 1.0 : -1.0);

    std::vector<double> update(shape.samples());
    for (int i = 0; i < shape.samples(); ++i)
      update[i] = (f.h[i] + f.gval[i] - lambda + drive) * f.jac[i];
    smooth_update(update);

    bool accepted = false;
    double decrease = 0.0;
    double tau_try = tau;
    for (int bt = 0; bt < 40 && !accepted; ++bt, tau_try *= cfg.backtrack) {
      std::vector<double> trial = shape.radii();
      for (int i = 0; i < shape.samples(); ++i) trial[i] -= tau_try * update[i];
      if (*std::min_element(trial.begin(), trial.end()) <= 1e-3) continue;
      RadialShape cand(shape.center(), std::move(trial));
      if (projected && !project_volume(cand)) continue;
      if (!admissible(cand)) continue;
      double cand_energy = energy_of(cand);
      if (cand_energy < energy - 1e-14) {
        decrease = energy - cand_energy;
        shape = std::move(cand);
        energy = cand_energy;
        accepted = true;
        tau = std::min(cfg.tau0, tau_try / cfg.backtrack);
      }
    }

    res.trace.push_back({iter, energy, shape.volume(), f.lambda, f.residual, accepted ? tau : 0.0});
    small_streak = (!accepted || decrease < cfg.tol) ? small_streak + 1 : 0;
    if (small_streak >= 10) {
      ++iter;
      res.converged = true;
      break;
    }

    // re-center the parametrization when the barycenter drifts; only adopted
    // when resampling does not push the energy back up
    if (accepted && iter % 10 == 9) {
      Vec2 c = shape.barycenter();
      if ((c - shape.center()).norm() > 1e-3) {
        RadialShape rec = shape.resampled_about(c);
        if (admissible(rec)) {
          if (projected) project_volume(rec);
          double rec_energy = energy_of(rec);
          if (rec_energy < energy) {
            shape = std::move(rec);
            energy = rec_energy;
          }
        }
      }
    }
  }

  res.iterations = iter;
  res.shape = shape;
  res.energy = projected ? total_energy(shape, gres, cfg.s)
                         : penalized_energy(shape, gres, cfg.s, cfg.mu, cfg.window_radius);
  FlowField f = flow_field(shape, gres, q);
  res.lambda_flow = f.lambda;
  res.el_residual = std::max(0.0, f.residual);
  return res;
}

inline RadialShape perturbed_ball(int k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-0.08, 0.08);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<double> rho(k, 1.0);
  for (int mode = 2; mode <= 4; ++mode) {
    double a = amp(rng), ph = phase(rng);
    for (int i = 0; i < k; ++i) rho[i] += a * std::cos(mode * (2.0 * kPi * i / k) + ph);
  }
  return RadialShape({0.0, 0.0}, std::move(rho));
}

}  // namespace detail

template <typename G>
double rescaled_identity_multiplier(const RadialShape& e, const G& g, double s) {
  // scaling identity at fixed volume v = |E|:  N v lambda =
  //   (N - s) P_s(E) + int_E grad g . x + N int_E g
  double v = e.volume();
  double p = fractional_perimeter_radial(e, s).value;
  double gdot = grad_dot_position_integral(e, g);
  double gint = potential_integral(e, g);
  return ((2.0 - s) * p + gdot + 2.0 * gint) / (2.0 * v);
}

inline SolveResult minimize(const SolveConfig& cfg) {
  cfg.validate();
  RescaleMap map = RescaleMap::for_volume(cfg.m, cfg.potential.argmin());
  RescaledPotential gres(cfg.potential, map, cfg.s);

  SolveResult best;
  bool have = false;
  std::string last_error;
  for (int start = 0; start < cfg.starts; ++start) {
    RadialShape init = start == 0 ? RadialShape::ball(1.0, cfg.k)
                                  : detail::perturbed_ball(cfg.k, 1000u + 17u * start);
    try {
      SolveResult res = detail::descend(cfg, gres, init);
      if (!have || res.energy.total < best.energy.total) {
        best = std::move(res);
        have = true;
      }
    } catch (const std::exception& ex) {
      last_error = ex.what();
    }
  }
  if (!have) throw std::runtime_error("all starts failed: " + last_error);

  best.map = map;
  best.lambda_identity = rescaled_identity_multiplier(best.shape, gres, cfg.s);
  best.lambda_m = std::pow(map.sigma, -cfg.s) * best.lambda_flow;
  std::vector<double> rho = best.shape.radii();
  for (double& r : rho) r *= map.sigma;
  best.descaled = RadialShape(map.x_m + best.shape.center() * map.sigma, std::move(rho));
  return best;
}

struct MultiplierReport {
  double lambda_flow = 0.0;
  double lambda_identity = 0.0;
  double gap = 0.0;  // relative to max(|lambda_identity|, 1)
};

// both estimators evaluated on the descaled minimizer E_m with the original g
inline MultiplierReport lagrange_multiplier(const SolveResult& res, const Potential& g, double s,
                                            double m) {
  if (!res.converged) throw std::invalid_argument("multiplier extraction needs a converged solve");
  if (!(m > 0.0)) throw std::invalid_argument("volume must be positive");
  MultiplierReport rep;
  rep.lambda_flow = res.lambda_m;
  rep.lambda_identity = ((2.0 - s) * fractional_perimeter_radial(res.descaled, s).value +
                         grad_dot_position_integral(res.descaled, g) +
                         2.0 * potential_integral(res.descaled, g)) /
                        (2.0 * m);
  rep.gap = std::abs(rep.lambda_flow - rep.lambda_identity) /
            std::max(std::abs(rep.lambda_identity), 1.0);
  return rep;
}

struct PenaltyConfig {
  double mu0 = 0.0;
  struct Step {
    double mu = 0.0;
    double volume_deviation = 0.0;
    double energy = 0.0;
  };
  std::vector<Step> history;
};

// doubles mu until two consecutive penalized solves agree: volume deviation
// below 1e-3 and energies within 1e-4 relative
inline PenaltyConfig calibrate_penalty(SolveConfig cfg) {
  cfg.validate();
  if (cfg.mode != SolveConfig::Mode::penalized)
    throw std::invalid_argument("penalty calibration needs penalized mode");
  PenaltyConfig out;
  bool prev_ok = false;
  double prev_energy = 0.0, prev_mu = 0.0;
  for (double mu = 1.0; mu <= 1048576.0; mu *= 2.0) {
    cfg.mu = mu;
    SolveResult res = minimize(cfg);
    double dev = std::abs(res.shape.volume() - kPi);
    double energy = res.energy.perimeter + res.energy.potential;
    out.history.push_back({mu, dev, energy});
    bool ok = dev < 1e-3;
    if (ok && prev_ok && std::abs(energy - prev_energy) <= 1e-4 * std::max(1.0, std::abs(energy))) {
      out.mu0 = prev_mu;
      return out;
    }
    prev_ok = ok;
    prev_energy = energy;
    prev_mu = mu;
  }
  throw std::runtime_error("penalty calibration did not stabilize by mu = 2^20");
}

}  // namespace fracshape
