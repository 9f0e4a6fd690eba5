#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fracshape/solver.hpp"

using namespace fracshape;

namespace {

RadialShape ellipse_shape(double a, double b, int k = 96) {
  std::vector<double> rho(k);
  for (int i = 0; i < k; ++i) {
    double th = 2.0 * kPi * i / k;
    rho[i] = a * b / std::sqrt(std::pow(b * std::cos(th), 2) + std::pow(a * std::sin(th), 2));
  }
  RadialShape e({0.0, 0.0}, std::move(rho));
  return e.scaled_radii(std::sqrt(kPi / e.volume()));  // normalize to |B_1|
}

SolveConfig quick_config() {
  SolveConfig cfg;
  cfg.s = 0.5;
  cfg.m = 0.01;
  cfg.k = 96;
  cfg.angular = 48;
  cfg.starts = 1;
  cfg.max_iter = 150;
  cfg.potential = Potential::power(2.0);
  return cfg;
}

}  // namespace

TEST_CASE("total energy splits into perimeter and potential parts") {
  auto ball = RadialShape::ball(1.0, 128);
  auto g = Potential::power(2.0);
  auto b = total_energy(ball, g, 0.5);
  CHECK(b.potential == doctest::Approx(kPi / 2.0).epsilon(1e-8));
  CHECK(b.total == doctest::Approx(b.perimeter + b.potential));
  // closed form for the unit ball: P_s(B_1) = 2 pi H_s(B_1) / (2 - s)
  double href = std::pow(2.0, 1.0 - 0.5) / 0.5 * std::sqrt(kPi) * std::tgamma(0.25) /
                std::tgamma(0.75);
  CHECK(b.perimeter == doctest::Approx(2.0 * kPi * href / 1.5).epsilon(5e-3));

  // affine in the potential scale at fixed shape
  auto q3 = Potential::quadratic_form({{{3.0, 0.0}, {0.0, 3.0}}}, {0.0, 0.0});
  auto b3 = total_energy(ball, q3, 0.5);
  CHECK(b3.potential == doctest::Approx(3.0 * b.potential).epsilon(1e-10));
  CHECK(b3.perimeter == doctest::Approx(b.perimeter));

  // equal-volume ellipse loses on both terms against the ball
  auto ell = ellipse_shape(1.3, 1.0 / 1.3, 128);
  auto be = total_energy(ell, g, 0.5);
  CHECK(be.perimeter > b.perimeter);
  CHECK(be.potential > b.potential);
  CHECK(be.total > b.total);
}

TEST_CASE("penalized energy charges volume deviation and guards the window") {
  auto g = Potential::power(2.0);
  auto ball = RadialShape::ball(1.0, 96);
  CHECK(penalized_energy(ball, g, 0.5, 8.0).penalty == doctest::Approx(0.0).epsilon(1e-12));

  auto small = RadialShape::ball(0.8, 96);
  double p1 = penalized_energy(small, g, 0.5, 8.0).penalty;
  double p2 = penalized_energy(small, g, 0.5, 16.0).penalty;
  CHECK(p1 == doctest::Approx(8.0 * std::abs(small.volume() - kPi)));
  CHECK(p2 == doctest::Approx(2.0 * p1));

  auto big = RadialShape::ball(3.5, 96);
  CHECK_THROWS_AS(penalized_energy(big, g, 0.5, 8.0), std::runtime_error);
  CHECK_THROWS_AS(penalized_energy(ball, g, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("small-volume minimizer with radial quadratic potential is the ball") {
  auto cfg = quick_config();
  cfg.starts = 4;
  auto res = minimize(cfg);
  CHECK(res.converged);

  // rescaled minimizer within Hausdorff 0.05 of the centered unit ball
  auto ball = RadialShape::ball(1.0, cfg.k);
  CHECK(boundary_hausdorff(res.shape, ball) < 0.05);
  CHECK(res.shape.volume() == doctest::Approx(kPi).epsilon(1e-4));
  CHECK(res.descaled.volume() == doctest::Approx(cfg.m).epsilon(1e-4));

  // energy strictly decreases at accepted steps, volume stays projected
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    if (res.trace[i].step > 0.0) CHECK(res.trace[i].energy < res.trace[i - 1].energy);
    CHECK(std::abs(res.trace[i].volume - kPi) <= 1e-3);
  }

  // quantified stationarity and multiplier consistency
  CHECK(res.el_residual <= 0.05 * std::abs(res.lambda_flow));
  CHECK(res.lambda_m ==
        doctest::Approx(std::pow(res.map.sigma, -cfg.s) * res.lambda_flow).epsilon(1e-6));
  auto rep = lagrange_multiplier(res, cfg.potential, cfg.s, cfg.m);
  CHECK(rep.gap < 0.05);

  // the minimizer beats the volume-matched ball competitor
  RescaledPotential gres(cfg.potential, res.map, cfg.s);
  CHECK(res.energy.total <= total_energy(ball, gres, cfg.s).total + 1e-9);
}

TEST_CASE("penalized and projected modes find the same small-volume shape") {
  auto cfg = quick_config();
  auto proj = minimize(cfg);
  cfg.mode = SolveConfig::Mode::penalized;
  cfg.mu = 64.0;
  auto pen = minimize(cfg);
  CHECK(proj.converged);
  CHECK(pen.converged);
  CHECK(std::abs(pen.shape.volume() - kPi) < 1e-3);
  double h = 2.0 * kPi / cfg.k;  // boundary sample spacing on the unit ball
  CHECK(boundary_hausdorff(proj.shape, pen.shape) <= 2.0 * h);
}

TEST_CASE("off-center potential: descaled minimizers track the potential minimum") {
  Vec2 target{0.3, 0.0};
  auto cfg = quick_config();
  cfg.potential = Potential::shifted_power(2.0, target);
  double prev = 1e300;
  for (double m : {0.2, 0.05, 0.01}) {
    cfg.m = m;
    auto res = minimize(cfg);
    CHECK(res.converged);
    double dist = (res.descaled.barycenter() - target).norm();
    CHECK(dist <= prev + 1e-9);
    // the whole descaled set lives within O(sigma) of the potential minimum
    CHECK(dist < 2.0 * res.map.sigma);
    prev = dist;
  }
}

TEST_CASE("multiplier grows as the volume shrinks; extraction needs convergence") {
  auto cfg = quick_config();
  double prev = -1e300;
  for (double m : {0.1, 0.0316, 0.01}) {
    cfg.m = m;
    auto res = minimize(cfg);
    CHECK(res.converged);
    CHECK(res.lambda_m > prev);
    prev = res.lambda_m;
  }
  SolveResult fake;
  fake.converged = false;
  CHECK_THROWS_AS(lagrange_multiplier(fake, cfg.potential, 0.5, 0.01), std::invalid_argument);
}

TEST_CASE("penalty calibration: threshold found by doubling, no weight drifts") {
  auto cfg = quick_config();
  cfg.k = 64;
  cfg.max_iter = 80;
  cfg.mode = SolveConfig::Mode::penalized;
  auto pc = calibrate_penalty(cfg);
  CHECK(pc.mu0 > 0.0);
  CHECK(pc.history.size() >= 2);
  // deviations do not get worse as the weight doubles (up to a tiny slack)
  for (std::size_t i = 1; i < pc.history.size(); ++i)
    CHECK(pc.history[i].volume_deviation <= pc.history[i - 1].volume_deviation + 1e-6);

  // weights past the threshold give the same minimizer
  cfg.mu = 2.0 * pc.mu0;
  auto a = minimize(cfg);
  cfg.mu = 4.0 * pc.mu0;
  auto b = minimize(cfg);
  CHECK(boundary_hausdorff(a.shape, b.shape) < 1e-2);

  // with no penalty the potential-only descent lets the volume collapse
  cfg.mu = 0.0;
  cfg.max_iter = 60;
  auto drift = minimize(cfg);
  CHECK(drift.shape.volume() < kPi - 0.5);

  cfg.mode = SolveConfig::Mode::projected;
  CHECK_THROWS_AS(calibrate_penalty(cfg), std::invalid_argument);
}

TEST_CASE("solver rejects invalid configurations") {
  auto cfg = quick_config();
  cfg.s = 1.2;
  CHECK_THROWS_AS(minimize(cfg), std::invalid_argument);
  cfg = quick_config();
  cfg.m = -1.0;
  CHECK_THROWS_AS(minimize(cfg), std::invalid_argument);
  cfg = quick_config();
  cfg.tau0 = 0.0;
  CHECK_THROWS_AS(minimize(cfg), std::invalid_argument);
  cfg = quick_config();
  cfg.starts = 0;
  CHECK_THROWS_AS(minimize(cfg), std::invalid_argument);
}
