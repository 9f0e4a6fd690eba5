#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fracshape/isoperimetry.hpp"

using namespace fracshape;

namespace {

RadialShape ellipse_shape(double a, double b, int k = 256) {
  std::vector<double> radii(k);
  for (int i = 0; i < k; ++i) {
    double th = 2.0 * kPi * i / k;
    double c = std::cos(th) / a, sn = std::sin(th) / b;
    radii[i] = 1.0 / std::sqrt(c * c + sn * sn);
  }
  return RadialShape({0.0, 0.0}, std::move(radii));
}

double disk_perimeter_exact(double s) {
  double hs = std::pow(2.0, 1.0 - s) / s * std::sqrt(kPi) * std::tgamma((1.0 - s) / 2.0) /
              std::tgamma(1.0 - s / 2.0);
  return 2.0 * kPi * hs / (2.0 - s);
}

}  // namespace

TEST_CASE("reference ball perimeter: 1D closed form and 2D extrapolated cache") {
  // interval of length v: P_s = 2 v^{1-s}/(s(1-s))
  auto r1 = reference_ball_perimeter(0.5, 2.0, 1);
  CHECK(r1.value == doctest::Approx(2.0 * std::pow(2.0, 0.5) / 0.25).epsilon(1e-14));
  CHECK(r1.error_estimate == 0.0);

  for (double s : {0.3, 0.5, 0.7}) {
    auto ref = reference_ball_perimeter(s, unit_ball_volume(2));
    double exact = disk_perimeter_exact(s);
    CHECK(std::abs(ref.value - exact) < std::max(ref.error_estimate, 2e-3 * exact));
  }

  // homogeneity: v = 4|B_1| scales by 4^{(2-s)/2}
  auto base = reference_ball_perimeter(0.5, unit_ball_volume(2));
  auto big = reference_ball_perimeter(0.5, 4.0 * unit_ball_volume(2));
  CHECK(big.value == doctest::Approx(base.value * std::pow(4.0, 0.75)).epsilon(1e-13));

  CHECK_THROWS_AS(reference_ball_perimeter(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(reference_ball_perimeter(0.5, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(reference_ball_perimeter(1.5, 1.0), std::invalid_argument);
}

TEST_CASE("reference agrees with an independent Monte Carlo estimate") {
  double s = 0.5;
  auto ref = reference_ball_perimeter(s, unit_ball_volume(2));
  QuadratureSpec q;
  q.s = s;
  q.mc_samples = 10'000'000;
  auto mc = fractional_perimeter_mc(RadialShape::ball(1.0, 256), q, 1234);
  CHECK(std::abs(ref.value - mc.value) < ref.error_estimate + mc.error_estimate);
}

TEST_CASE("Fraenkel asymmetry of balls is zero up to discretization") {
  auto rep = fraenkel_asymmetry(RadialShape::ball(1.0, 256, {0.4, -0.7}));
  CHECK(rep.asymmetry < rep.asymmetry_tolerance);
  CHECK(rep.center.x == doctest::Approx(0.4).epsilon(0.02));
  CHECK(rep.center.y == doctest::Approx(-0.7).epsilon(0.02));

  // grid disk
  GridSet disk = rasterize(RadialShape::ball(1.0, 256), {-1.3, -1.3}, 2.6 / 256, 256, 256);
  auto grep = fraenkel_asymmetry(disk);
  CHECK(grep.asymmetry < grep.asymmetry_tolerance);

  // single interval: exact measure, A = 0
  auto irep = fraenkel_asymmetry(IntervalUnion({{0.3, 1.7}}));
  CHECK(irep.asymmetry == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(irep.center.x == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("grid asymmetry depends only on the occupancy pattern") {
  auto e = ellipse_shape(1.25, 0.8, 256);
  GridSet a = rasterize(e, {-1.5, -1.5}, 3.0 / 300, 300, 300);
  // whole-cell translation: same occupancy, shifted origin
  GridSet b(2, {a.origin().x + 7 * a.spacing(), a.origin().y - 3 * a.spacing()}, a.spacing(),
            a.nx(), a.ny(), a.occupancy());
  auto ra = fraenkel_asymmetry(a);
  auto rb = fraenkel_asymmetry(b);
  CHECK(ra.asymmetry == rb.asymmetry);  // bit-for-bit
  CHECK(ra.asymmetry > ra.asymmetry_tolerance);
}

TEST_CASE("two far-apart components have asymmetry near one") {
  // exact for intervals: any length-2 window meets at most one unit component
  auto rep = fraenkel_asymmetry(IntervalUnion({{0.0, 1.0}, {10.0, 11.0}}));
  CHECK(rep.asymmetry == doctest::Approx(1.0).epsilon(1e-9));

  // grid version with two disjoint disks; brute-force center grid as oracle
  int n = 220;
  double h = 11.0 / n;
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(n) * n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double x = (i + 0.5) * h - 5.5, y = (j + 0.5) * h - 5.5;
      if ((x + 4) * (x + 4) + y * y < 1.0 || (x - 4) * (x - 4) + y * y < 1.0) occ[j * n + i] = 1;
    }
  GridSet two(2, {-5.5, -5.5}, h, n, n, std::move(occ));
  auto grep = fraenkel_asymmetry(two);
  CHECK(grep.asymmetry == doctest::Approx(1.0).epsilon(0.05));

  double brute = 1e300;
  double r2 = two.count() / kPi;
  for (double cx = 0.0; cx < n; cx += 2.0)
    for (double cy = 0.0; cy < n; cy += 2.0) {
      long long inside = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double dx = i + 0.5 - cx, dy = j + 0.5 - cy;
          if (((dx * dx + dy * dy) < r2) && two.occupied(i, j)) ++inside;
        }
      brute = std::min(brute, 2.0 * static_cast<double>(two.count() - inside) / two.count());
    }
  CHECK(grep.asymmetry <= brute + 1e-12);  // search at least as good as coarse brute force
}

TEST_CASE("Wulff deficit: balls sit at zero, ellipses strictly above") {
  for (double s : {0.3, 0.5}) {
    auto rep = wulff_deficit(RadialShape::ball(1.0, 256), s);
    CHECK(std::abs(rep.deficit) <= rep.deficit_error);
  }

  auto ell = wulff_deficit(ellipse_shape(1.2, 1.0 / 1.2, 256), 0.5);
  CHECK(ell.deficit > ell.deficit_error);

  // scale invariance of the deficit
  auto small = wulff_deficit(ellipse_shape(1.2, 1.0 / 1.2, 256).scaled_radii(0.35), 0.5);
  CHECK(small.deficit == doctest::Approx(ell.deficit).epsilon(1e-6));

  // interval union route: single interval is the 1D ball
  auto seg = wulff_deficit(IntervalUnion({{0.0, 3.0}}), 0.5);
  CHECK(std::abs(seg.deficit) < 1e-13);
  auto pair_rep = wulff_deficit(IntervalUnion({{0.0, 1.0}, {2.0, 3.0}}), 0.5);
  CHECK(pair_rep.deficit > 0.0);
}

TEST_CASE("quantitative inequality on a seeded Fourier corpus") {
  auto corpus = fourier_corpus(12, 99, 192);
  for (auto& e : corpus) CHECK(e.volume() == doctest::Approx(kPi).epsilon(1e-9));
  auto res = quantitative_check(corpus, 0.5);
  CHECK(res.pass);
  CHECK(res.c_fit > 0.0);
  CHECK(res.rows.size() == corpus.size());
  for (auto& r : res.rows) CHECK(r.deficit > -r.deficit_error);

  std::vector<RadialShape> balls = {RadialShape::ball(1.0, 64), RadialShape::ball(1.0, 64)};
  CHECK_THROWS_AS(quantitative_check(balls, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(quantitative_check(std::vector<RadialShape>{}, 0.5), std::invalid_argument);
}

TEST_CASE("ellipse family: deficit over squared asymmetry stays bounded below") {
  double prev_ratio = 0.0;
  for (double a : {1.1, 1.3, 1.5, 1.8}) {
    auto e = ellipse_shape(a, 1.0 / a, 256);
    auto rep = iso_report(e, 0.5);
    double ratio = rep.deficit / (rep.asymmetry * rep.asymmetry);
    CHECK(ratio > 0.02);
    (void)prev_ratio;
    prev_ratio = ratio;
  }
}

TEST_CASE("symmetric rearrangement lowers both energy terms") {
  auto g = Potential::power(2.0);
  double s = 0.5;

  // centered ball: equality within error
  auto eq = symmetric_rearrangement_check(RadialShape::ball(1.0, 128), g, s);
  CHECK(eq.pass());
  CHECK(std::abs(eq.perimeter_margin) < 1e-9);
  CHECK(std::abs(eq.potential_margin) < 1e-9);

  // perturbed ball: both margins strictly positive
  auto corpus = fourier_corpus(1, 7, 192);
  auto pert = symmetric_rearrangement_check(corpus[0], g, s);
  CHECK(pert.pass());
  CHECK(pert.perimeter_margin > 0.0);
  CHECK(pert.potential_margin > 0.0);

  // shifted ball: potential margin is exactly pi |c|^2 for g = |x|^2
  auto shifted = symmetric_rearrangement_check(RadialShape::ball(1.0, 128, {0.5, 0.0}), g, s);
  CHECK(shifted.pass());
  CHECK(shifted.potential_margin == doctest::Approx(kPi * 0.25).epsilon(1e-8));

  CHECK_THROWS_AS(
      symmetric_rearrangement_check(RadialShape::ball(1.0, 64),
                                    Potential::quadratic_form({{{2.0, 0.0}, {0.0, 1.0}}}), s),
      std::invalid_argument);
}
