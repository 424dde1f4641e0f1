#ifndef BUBBLELAB_FIT_HPP
#define BUBBLELAB_FIT_HPP

// Least-squares fits in log-log coordinates: power-law exponents of radial
// functions near the endpoints, decay-rate fits of time series, and a
// noise-floor filter for series that sink below measurement precision.

#include <cmath>
#include <cstddef>
#include <vector>

#include "bubblelab/radial.hpp"

namespace bubblelab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  int n = 0;
  bool ok() const { return n >= 2; }
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  LineFit f;
  size_t n = std::min(x.size(), y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    ++m;
  }
  f.n = m;
  if (m < 2) return f;
  double det = m * sxx - sx * sx;
  if (det == 0) return f;
  f.slope = (m * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  return f;
}

// slope of log|y| against log x, dropping zero/non-finite samples
inline LineFit fit_loglog(const std::vector<double>& x,
                          const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] <= 0 || y[i] == 0 || !std::isfinite(y[i])) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return fit_line(lx, ly);
}

// Same, keeping only samples above floor(x): used for residual series whose
// true size can fall below discretization noise. Samples at or below ten
// times the floor are flagged, not fitted.
struct FilteredFit {
  LineFit fit;
  int used = 0;
  int flagged = 0;
};

template <class FloorFn>
inline FilteredFit fit_loglog_above_floor(const std::vector<double>& x,
                                          const std::vector<double>& y,
                                          FloorFn&& floor_at) {
  std::vector<double> fx, fy;
  int flagged = 0;
  for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] <= 0 || !std::isfinite(y[i])) continue;
    if (std::abs(y[i]) <= 10.0 * floor_at(x[i])) {
      ++flagged;
      continue;
    }
    fx.push_back(x[i]);
    fy.push_back(std::abs(y[i]));
  }
  FilteredFit out;
  out.fit = fit_loglog(fx, fy);
  out.used = out.fit.n;
  out.flagged = flagged;
  return out;
}

// Fitted power p in |f| ~ C r^p (log 1/r)^logs over the node window
// [r_lo, r_hi]. The log factor, when declared, is divided out first.
inline double fit_exponent(const RadialFn& f, double r_lo, double r_hi,
                           int logs = 0) {
  std::vector<double> lx, ly;
  for (int i = 0; i < f.size(); ++i) {
    double r = f.grid->r(i);
    if (r < r_lo || r > r_hi) continue;
    double a = std::abs(f.v[i]);
    if (a == 0 || !std::isfinite(a)) continue;
    double y = std::log(a);
    if (logs > 0) {
      double L = std::abs(std::log(r));
      if (L < 0.5) continue;  // log factor degenerate near r = 1
      y -= logs * std::log(L);
    }
    lx.push_back(std::log(r));
    ly.push_back(y);
  }
  LineFit lf = fit_line(lx, ly);
  return lf.ok() ? lf.slope : std::nan("");
}

// exponent near r -> 0 fitted over [a, b] decades above the grid floor
inline double fit_exponent_origin(const RadialFn& f, int logs = 0,
                                  double lo_decades = 1.0,
                                  double hi_decades = 2.5) {
  double rmin = f.grid->r_min();
  return fit_exponent(f, rmin * std::pow(10.0, lo_decades),
                      rmin * std::pow(10.0, hi_decades), logs);
}

// tail exponents carry no log factor in this artifact
inline double fit_exponent_tail(const RadialFn& f, double lo_decades = 2.0,
                                double hi_decades = 0.5) {
  double rmax = f.grid->r_max();
  return fit_exponent(f, rmax / std::pow(10.0, lo_decades),
                      rmax / std::pow(10.0, hi_decades), 0);
}

}  // namespace bubblelab

#endif  // BUBBLELAB_FIT_HPP
