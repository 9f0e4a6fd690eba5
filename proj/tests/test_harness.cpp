#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fracshape/harness.hpp"

using namespace fracshape;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<SweepRecord> synthetic_records() {
  std::vector<SweepRecord> recs;
  double m = 1.0;
  for (int i = 0; i < 5; ++i, m /= 3.0) {
    SweepRecord r;
    r.m = m;
    r.sigma = std::sqrt(m / kPi);
    r.r0 = 0.05 * std::pow(m, 0.1);
    r.asymmetry = 0.01 * m;
    r.delta_s = 0.002 * std::pow(m, 0.3);
    r.lambda_flow = 15.0 * std::pow(m, -0.25);
    r.lambda_identity = r.lambda_flow * 1.01;
    r.convexity_defect = 1e-8;
    r.dist_xm = 0.001;
    r.energy = 2.0 * std::pow(m, 0.75);
    r.converged = i != 3;  // one failed row retained
    recs.push_back(r);
  }
  return recs;
}

SolveConfig sweep_config() {
  SolveConfig cfg;
  cfg.k = 96;
  cfg.angular = 48;
  cfg.starts = 1;
  cfg.max_iter = 150;
  return cfg;
}

}  // namespace

TEST_CASE("power-law fit recovers exact exponents and rejects bad input") {
  std::vector<double> xs = {0.1, 0.3, 1.0, 3.0, 10.0};
  std::vector<double> half, quad;
  for (double x : xs) {
    half.push_back(std::sqrt(x));
    quad.push_back(3.0 * x * x);
  }
  auto f1 = fit_power_law(xs, half);
  CHECK(f1.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  auto f2 = fit_power_law(xs, quad);
  CHECK(f2.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f2.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  for (double r : f2.residuals) CHECK(std::abs(r) < 1e-12);

  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({1.0, -2.0, 3.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0, 3.0}, {1.0, 0.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("sweep validation rejects malformed volume grids") {
  auto g = Potential::power(2.0);
  CHECK_THROWS_AS(run_sweep(0.5, g, {1.0, 0.5, 0.1}, sweep_config()), std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(0.5, g, {1.0, 0.5, 0.6, 0.2, 0.05}, sweep_config()),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(0.5, g, {1.0, 0.8, 0.6, 0.4, 0.3}, sweep_config()),
                  std::invalid_argument);
}

TEST_CASE("radial quadratic sweep reproduces the small-volume asymptotics") {
  std::vector<double> ms;
  for (double f : {0.3, 0.1, 0.03, 0.01, 0.003}) ms.push_back(f * kPi);
  auto g = Potential::power(2.0);
  auto recs = run_sweep(0.5, g, ms, sweep_config());
  REQUIRE(recs.size() == ms.size());
  for (const auto& r : recs) {
    CHECK(r.converged);
    CHECK(r.sigma * r.sigma * kPi == doctest::Approx(r.m).epsilon(1e-12));
  }

  // sandwich radii do not grow as the volume shrinks (10% slack)
  for (std::size_t i = 1; i < recs.size(); ++i)
    CHECK(recs[i].r0 <= 1.1 * std::max(recs[i - 1].r0, 1e-6));
  // multiplier blows up monotonically as m -> 0
  for (std::size_t i = 1; i < recs.size(); ++i)
    CHECK(recs[i].lambda_flow > recs[i - 1].lambda_flow);
  // desk-scale convexity and ball closeness for every converged small volume
  for (const auto& r : recs) {
    CHECK(r.convexity_defect < 1e-6);
    CHECK(r.r0 < 0.1);
  }
  // a single constant C covers the deficit envelope delta_s <= C sigma^s sup g
  double c_env = 0.0;
  for (const auto& r : recs) {
    double sup = 0.0;
    for (int a = 0; a < 64; ++a)
      sup = std::max(sup, g(Vec2{r.sigma * std::cos(a * kPi / 32), r.sigma * std::sin(a * kPi / 32)}));
    if (sup > 0.0) c_env = std::max(c_env, r.delta_s / (std::pow(r.sigma, 0.5) * sup));
  }
  CHECK(std::isfinite(c_env));
  for (const auto& r : recs) {
    double sup = r.sigma * r.sigma;  // max of |x|^2 on the ball of radius sigma
    CHECK(r.delta_s <= c_env * std::pow(r.sigma, 0.5) * sup + 1e-12);
  }
}

TEST_CASE("off-center sweep drives the minimizer center to the potential minimum") {
  std::vector<double> ms;
  for (double f : {0.3, 0.1, 0.03, 0.01, 0.003}) ms.push_back(f * kPi);
  auto g = Potential::shifted_power(2.0, {0.3, 0.0});
  auto recs = run_sweep(0.5, g, ms, sweep_config());
  for (const auto& r : recs) CHECK(r.converged);
  for (std::size_t i = 1; i < recs.size(); ++i)
    CHECK(recs[i].dist_xm <= recs[i - 1].dist_xm + 1e-3);
  CHECK(recs.back().dist_xm < 0.1 * recs.front().dist_xm + 1e-6);
}

TEST_CASE("report emission: frozen schema, determinism, empty-fit fallback") {
  auto recs = synthetic_records();
  std::vector<double> ms, r0s;
  for (const auto& r : recs)
    if (r.converged) {
      ms.push_back(r.m);
      r0s.push_back(r.r0);
    }
  std::vector<std::pair<std::string, PowerLawFit>> fits;
  fits.emplace_back("r0", fit_power_law(ms, r0s));

  fs::path dir = fs::temp_directory_path() / "fracshape_report_test";
  fs::remove_all(dir);
  emit_report(recs, fits, dir.string());

  std::string csv = slurp((dir / "sweep.csv").string());
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "m,sigma,r0,A,delta_s,lambda_flow,lambda_identity,convexity_defect,dist_xm,energy,"
        "converged");
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 5);
  CHECK(csv.find(",0\n") != std::string::npos);  // the failed row is retained

  CHECK(fs::exists(dir / "r0_vs_m.svg"));
  CHECK(fs::exists(dir / "lambda_vs_m.svg"));
  CHECK(fs::exists(dir / "delta_vs_m.svg"));
  std::string svg = slurp((dir / "r0_vs_m.svg").string());

  // byte-identical rerun
  emit_report(recs, fits, dir.string());
  CHECK(slurp((dir / "sweep.csv").string()) == csv);
  CHECK(slurp((dir / "r0_vs_m.svg").string()) == svg);

  // empty fits: CSV only
  fs::path dir2 = fs::temp_directory_path() / "fracshape_report_test2";
  fs::remove_all(dir2);
  emit_report(recs, {}, dir2.string());
  CHECK(fs::exists(dir2 / "sweep.csv"));
  CHECK_FALSE(fs::exists(dir2 / "r0_vs_m.svg"));

  CHECK_THROWS_AS(emit_report({}, fits, dir.string()), std::invalid_argument);
  // a path through an existing regular file is not writable
  fs::path bad = dir / "sweep.csv" / "sub";
  CHECK_THROWS(emit_report(recs, fits, bad.string()));

  fs::remove_all(dir);
  fs::remove_all(dir2);
}
