#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "fracshape/common.hpp"
#include "fracshape/isoperimetry.hpp"
#include "fracshape/solver.hpp"

namespace fracshape {

// ---------------------------------------------------------------------------
// Volume-sweep orchestration: solve the constrained problem along a geometric
// grid of volumes, extract per-volume diagnostics (ball sandwich radius,
// asymmetry, isoperimetric deficit, multipliers, convexity defect, center
// drift), fit power laws, and emit a CSV plus hand-rolled SVG log-log plots.
// ---------------------------------------------------------------------------

struct SweepRecord {
  double m = 0.0;
  double sigma = 0.0;
  double r0 = 0.0;         // smallest sandwich half-width over centers
  double asymmetry = 0.0;  // Fraenkel asymmetry of the rescaled shape
  double delta_s = 0.0;    // isoperimetric deficit of the rescaled shape
  double lambda_flow = 0.0;
  double lambda_identity = 0.0;
  double convexity_defect = 0.0;
  double dist_xm = 0.0;  // distance of the minimizer center to the potential minimum
  double energy = 0.0;   // descaled total energy
  bool converged = false;
};

// sandwich half-width minimized over admissible centers
inline double optimal_sandwich_r0(const RadialShape& e) {
  auto objective = [&](Vec2 c) {
    if (!e.contains(c)) return 1e6;
    return ball_sandwich_radii(e, c).r0;
  };
  Vec2 best = detail::pattern_search_2d(objective, e.barycenter(), 0.1, 1e-4);
  return objective(best);
}

inline std::vector<SweepRecord> run_sweep(double s, const Potential& g,
                                          const std::vector<double>& m_list, SolveConfig base) {
  if (m_list.size() < 5) throw std::invalid_argument("sweep needs at least 5 volumes");
  for (std::size_t i = 0; i + 1 < m_list.size(); ++i)
    if (!(m_list[i] > m_list[i + 1])) throw std::invalid_argument("volumes must decrease");
  if (!(m_list.front() >= 10.0 * m_list.back()))
    throw std::invalid_argument("sweep must span at least one decade");
  base.s = s;
  base.potential = g;

  std::vector<SweepRecord> records(m_list.size());
  parallel_for(m_list.size(), [&](std::size_t i) {
    SweepRecord& rec = records[i];
    rec.m = m_list[i];
    rec.sigma = RescaleMap::for_volume(rec.m).sigma;
    try {
      SolveConfig cfg = base;
      cfg.m = rec.m;
      SolveResult res = minimize(cfg);
      if (!res.converged) return;  // recorded as a non-converged row
      rec.r0 = optimal_sandwich_r0(res.shape);
      rec.asymmetry = fraenkel_asymmetry(res.shape).asymmetry;
      rec.delta_s = wulff_deficit(res.shape, s).deficit;
      auto mult = lagrange_multiplier(res, g, s, rec.m);
      rec.lambda_flow = mult.lambda_flow;
      rec.lambda_identity = mult.lambda_identity;
      rec.convexity_defect = fracshape::convexity_defect(res.shape);
      rec.dist_xm = (res.descaled.barycenter() - g.argmin()).norm();
      rec.energy = total_energy(res.descaled, g, s).total;
      rec.converged = true;
    } catch (const std::exception&) {
      rec.converged = false;
    }
  });
  bool any = false;
  for (const auto& rec : records) any = any || rec.converged;
  if (!any) throw std::runtime_error("every solve in the sweep failed");
  return records;
}

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;  // in log space
  double r_squared = 0.0;
  std::vector<double> residuals;  // log-log, per point
};

inline PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("power-law fit: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("power-law fit needs at least 3 points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("power-law fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("power-law fit needs distinct abscissae");
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(n);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += fit.residuals[i] * fit.residuals[i];
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  return fit;
}

namespace detail {

inline std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// minimal log-log scatter + fit-line plot; fixed-format numbers keep the
// output byte-identical across runs
inline void write_loglog_svg(const std::string& path, const std::string& title,
                             const std::vector<double>& xs, const std::vector<double>& ys,
                             const PowerLawFit* line) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const double w = 480.0, h = 360.0, ml = 60.0, mr = 20.0, mt = 30.0, mb = 40.0;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) continue;
    xmin = std::min(xmin, std::log10(xs[i]));
    xmax = std::max(xmax, std::log10(xs[i]));
    ymin = std::min(ymin, std::log10(ys[i]));
    ymax = std::max(ymax, std::log10(ys[i]));
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double ly) { return h - mb - (ly - ymin) / (ymax - ymin) * (h - mt - mb); };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_g(w) << "\" height=\""
      << format_g(h) << "\">\n";
  out << "<text x=\"" << format_g(w / 2) << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";
  out << "<line x1=\"" << format_g(ml) << "\" y1=\"" << format_g(h - mb) << "\" x2=\""
      << format_g(w - mr) << "\" y2=\"" << format_g(h - mb) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << format_g(ml) << "\" y1=\"" << format_g(mt) << "\" x2=\"" << format_g(ml)
      << "\" y2=\"" << format_g(h - mb) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << format_g(ml) << "\" y=\"" << format_g(h - mb + 16)
      << "\">log10 x: " << format_g(xmin) << " .. " << format_g(xmax) << "</text>\n";
  out << "<text x=\"4\" y=\"" << format_g(mt) << "\">log10 y: " << format_g(ymin) << " .. "
      << format_g(ymax) << "</text>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) continue;
    out << "<circle cx=\"" << format_g(px(std::log10(xs[i]))) << "\" cy=\""
        << format_g(py(std::log10(ys[i]))) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  if (line) {
    // the fit lives in natural-log space; convert to log10 for drawing
    const double l10 = std::log(10.0);
    auto fit_ly = [&](double lx10) {
      return (line->intercept + line->slope * (lx10 * l10)) / l10;
    };
    out << "<line x1=\"" << format_g(px(xmin)) << "\" y1=\"" << format_g(py(fit_ly(xmin)))
        << "\" x2=\"" << format_g(px(xmax)) << "\" y2=\"" << format_g(py(fit_ly(xmax)))
        << "\" stroke=\"crimson\"/>\n";
    out << "<text x=\"" << format_g(w - mr) << "\" y=\"" << format_g(h - mb - 6)
        << "\" text-anchor=\"end\">slope " << format_g(line->slope) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace detail

// writes sweep.csv (frozen column order) and, when fits are provided, log-log
// SVG plots of r0, the multiplier, and the deficit against the volume
inline void emit_report(const std::vector<SweepRecord>& records,
                        const std::vector<std::pair<std::string, PowerLawFit>>& fits,
                        const std::string& outdir) {
  if (records.empty()) throw std::invalid_argument("nothing to report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (!fs::is_directory(outdir)) throw std::runtime_error("cannot create output directory");

  std::string csv_path = outdir + "/sweep.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  csv << "m,sigma,r0,A,delta_s,lambda_flow,lambda_identity,convexity_defect,dist_xm,energy,"
         "converged\n";
  for (const auto& r : records) {
    csv << detail::format_g(r.m) << ',' << detail::format_g(r.sigma) << ','
        << detail::format_g(r.r0) << ',' << detail::format_g(r.asymmetry) << ','
        << detail::format_g(r.delta_s) << ',' << detail::format_g(r.lambda_flow) << ','
        << detail::format_g(r.lambda_identity) << ',' << detail::format_g(r.convexity_defect)
        << ',' << detail::format_g(r.dist_xm) << ',' << detail::format_g(r.energy) << ','
        << (r.converged ? 1 : 0) << '\n';
  }
  if (!csv) throw std::runtime_error("write failed: " + csv_path);
  csv.close();

  if (fits.empty()) {
    std::fprintf(stderr, "emit_report: no fits given, CSV written without plots\n");
    return;
  }

  std::vector<double> ms, r0s, lams, dels;
  for (const auto& r : records) {
    if (!r.converged) continue;
    ms.push_back(r.m);
    r0s.push_back(r.r0);
    lams.push_back(r.lambda_flow);
    dels.push_back(r.delta_s);
  }
  auto fit_for = [&](const std::string& name) -> const PowerLawFit* {
    for (const auto& [n, f] : fits)
      if (n == name) return &f;
    return nullptr;
  };
  detail::write_loglog_svg(outdir + "/r0_vs_m.svg", "sandwich radius vs volume", ms, r0s,
                           fit_for("r0"));
  detail::write_loglog_svg(outdir + "/lambda_vs_m.svg", "multiplier vs volume", ms, lams,
                           fit_for("lambda"));
  detail::write_loglog_svg(outdir + "/delta_vs_m.svg", "deficit vs volume", ms, dels,
                           fit_for("delta_s"));
}

}  // namespace fracshape
