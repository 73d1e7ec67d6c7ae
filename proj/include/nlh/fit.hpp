#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "nlh/errors.hpp"

namespace nlh {

// Least-squares power-law fit: exponent/amplitude of y ~ amplitude * r^exponent.
struct SlopeFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double goodness = 0.0;  // coefficient of determination in log-log space
};

inline SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) throw WindowTooNarrow("power-law fit needs at least 2 points");
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [r, v] : pts) {
    double x = std::log(r), y = std::log(v);
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
  }
  const double denom = n * sxx - sx * sx;
  SlopeFit fit;
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.amplitude = std::exp((sy - fit.exponent * sx) / n);
  fit.r_min = pts.front().first;
  fit.r_max = pts.back().first;
  double ss_res = 0, ss_tot = 0, ybar = sy / n;
  for (const auto& [r, v] : pts) {
    double x = std::log(r), y = std::log(v);
    double pred = std::log(fit.amplitude) + fit.exponent * x;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.goodness = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
  return fit;
}

}  // namespace nlh
