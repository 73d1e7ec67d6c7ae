#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nlh/dual.hpp"
#include "nlh/fft.hpp"
#include "nlh/fit.hpp"
#include "nlh/kernel.hpp"
#include "nlh/sphere.hpp"

namespace nlh {

struct FarFieldPattern {
  SphereMesh mesh;
  std::vector<Complex> g;  // one coefficient per mesh direction
};

// Far-field coefficient of the source f: g(xi) = -(i/4)(2pi)^{1-N} h^N sum f(x) e^{-i x.xi}.
// Direct nonuniform sum over grid nodes; exact for the sampled field.
inline FarFieldPattern farfield_from_source(const Field& f, const SphereMesh& mesh) {
  const GridSpec& g = f.grid;
  if (g.dim != 3) throw InvalidScenario("far-field patterns require dim == 3");
  const int n = g.points_per_axis;
  const double h = g.spacing();
  const Complex c = Complex(0.0, -0.25) * std::pow(2.0 * std::numbers::pi, 1.0 - g.dim) *
                    std::pow(h, g.dim);

  // nonzero samples once; per-direction separable phase tables
  std::vector<std::size_t> nz;
  double fmax = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) fmax = std::max(fmax, std::abs(f.values[i]));
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f.values[i]) > 1e-300 * (1.0 + fmax)) nz.push_back(i);

  FarFieldPattern pat;
  pat.mesh = mesh;
  pat.g.assign(mesh.directions.size(), Complex(0.0, 0.0));
  std::vector<Complex> ph0(n), ph1(n), ph2(n);
  std::vector<int> idx(3);
  for (std::size_t d = 0; d < mesh.directions.size(); ++d) {
    const Vec3& xi = mesh.directions[d];
    for (int j = 0; j < n; ++j) {
      double x = g.coord(j);
      ph0[j] = std::polar(1.0, -x * xi[0]);
      ph1[j] = std::polar(1.0, -x * xi[1]);
      ph2[j] = std::polar(1.0, -x * xi[2]);
    }
    Complex acc(0.0, 0.0);
    for (std::size_t i : nz) {
      unflatten(g, i, idx.data());
      acc += f.values[i] * ph0[idx[0]] * ph1[idx[1]] * ph2[idx[2]];
    }
    pat.g[d] = c * acc;
  }
  return pat;
}

inline FarFieldPattern compute_farfield(const DualProblem& prob, const Field& u,
                                        const SphereMesh& mesh) {
  require_real(u, "compute_farfield expects a real field");
  require_same_grid(u, prob.Q);
  Field f = Field::zeros(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double ui = u.values[i].real();
    f.values[i] = prob.Q.values[i].real() * std::pow(std::abs(ui), prob.p - 2.0) * ui;
  }
  f.realness_tag = true;
  return farfield_from_source(f, mesh);
}

// max |g(-xi) + conj g(xi)| / max |g| (0 for g == 0)
inline double pattern_reality_defect(const FarFieldPattern& pat) {
  double gmax = 0.0, defect = 0.0;
  for (const Complex& z : pat.g) gmax = std::max(gmax, std::abs(z));
  if (gmax == 0.0) return 0.0;
  for (std::size_t i = 0; i < pat.g.size(); ++i)
    defect = std::max(defect, std::abs(pat.g[pat.mesh.antipode[i]] + std::conj(pat.g[i])));
  return defect / gmax;
}

namespace detail {

// (radius, h^N * integrand) samples for prefix-sum ball averages; origin skipped
// (the oscillatory comparison term is singular there and carries no measure).
inline std::vector<double> ball_average_ladder(const GridSpec& g,
                                               const std::vector<std::pair<double, double>>& samples,
                                               const std::vector<double>& radii) {
  for (double R : radii)
    if (R > g.half_width / 2.0)
      throw RadiusExceedsBox("radius ladder must stay within L/2");
  std::vector<std::pair<double, double>> s = samples;
  std::sort(s.begin(), s.end());
  std::vector<double> out;
  for (double R : radii) {
    double acc = 0.0;
    for (const auto& [r, v] : s) {
      if (r > R) break;
      acc += v;
    }
    out.push_back(acc / R);
  }
  return out;
}

}  // namespace detail

// (1/R) int_{B_R} |u(x) + 2 (2pi/|x|)^{(N-1)/2} Re[e^{i(|x| - (N-1)pi/4)} g(xhat)]|^2
inline std::vector<double> farfield_relation_error(const Field& u, const FarFieldPattern& pat,
                                                   const std::vector<double>& radii) {
  require_real(u, "farfield_relation_error expects a real field");
  const GridSpec& g = u.grid;
  if (g.dim != 3) throw InvalidScenario("far-field relation requires dim == 3");
  const double hN = std::pow(g.spacing(), g.dim);
  const double phase0 = -(g.dim - 1) * std::numbers::pi / 4.0;
  double Rmax = *std::max_element(radii.begin(), radii.end());
  std::vector<std::pair<double, double>> samples;
  std::vector<int> idx(3);
  for (std::size_t i = 0; i < u.size(); ++i) {
    unflatten(g, i, idx.data());
    double r = node_radius(g, idx.data());
    if (r == 0.0 || r > Rmax) continue;
    Vec3 xhat;
    for (int a = 0; a < 3; ++a) {
      double x = g.coord(idx[a]);
      double hw = g.half_width;
      // min-image coordinate consistent with node_radius
      if (x > hw) x -= 2.0 * hw;
      if (x < -hw) x += 2.0 * hw;
      xhat[a] = x / r;
    }
    Complex gx = sphere_interpolate(pat.mesh, pat.g, xhat);
    double osc = 2.0 * std::pow(2.0 * std::numbers::pi / r, (g.dim - 1) / 2.0) *
                 (std::polar(1.0, r + phase0) * gx).real();
    double val = u.values[i].real() + osc;
    samples.emplace_back(r, hN * val * val);
  }
  return detail::ball_average_ladder(g, samples, radii);
}

// (1/R) int_{B_R} |grad u - i u xhat|^2 (spectral gradient)
inline std::vector<double> radiation_error(const Field& u_tilde, const std::vector<double>& radii) {
  const GridSpec& g = u_tilde.grid;
  const double hN = std::pow(g.spacing(), g.dim);
  std::vector<Field> grad;
  for (int a = 0; a < g.dim; ++a) grad.push_back(spectral_derivative(u_tilde, a));
  double Rmax = *std::max_element(radii.begin(), radii.end());
  std::vector<std::pair<double, double>> samples;
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < u_tilde.size(); ++i) {
    unflatten(g, i, idx.data());
    double r = node_radius(g, idx.data());
    if (r == 0.0 || r > Rmax) continue;
    double acc = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      double x = g.coord(idx[a]);
      if (x > g.half_width) x -= 2.0 * g.half_width;
      if (x < -g.half_width) x += 2.0 * g.half_width;
      acc += std::norm(grad[a].values[i] - Complex(0.0, 1.0) * u_tilde.values[i] * (x / r));
    }
    samples.emplace_back(r, hN * acc);
  }
  return detail::ball_average_ladder(g, samples, radii);
}

// Radial decay exponent of |u| on [r_min, r_max): log-log fit of the outer
// envelope M(r) = sup_{s >= r} |u(s)| sampled where the sup is attained, so
// oscillatory profiles are fitted on their peaks, monotone ones on the curve.
// Queries stop a guard length before r_max so every sup can still see a peak.
inline SlopeFit decay_exponent_fit(const Field& u, double r_min, double r_max) {
  const GridSpec& g = u.grid;
  if (r_min < 1.0 || r_max > g.half_width / 2.0 || r_min >= r_max)
    throw BadWindow("decay window must sit inside [1, L/2]");
  std::vector<std::pair<double, double>> samples;  // (radius, |u|)
  std::vector<int> idx(g.dim);
  const int shells = 12;
  const double ratio = std::pow(r_max / r_min, 1.0 / shells);
  std::vector<char> populated(shells, 0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    unflatten(g, i, idx.data());
    double r = node_radius(g, idx.data());
    if (r < r_min || r >= r_max) continue;
    samples.emplace_back(r, std::abs(u.values[i]));
    populated[std::min(shells - 1,
                       static_cast<int>(std::floor(std::log(r / r_min) / std::log(ratio))))] = 1;
  }
  int covered = 0;
  for (char c : populated) covered += c;
  if (covered < 5) throw WindowTooNarrow("decay fit needs at least 5 populated shells");
  std::sort(samples.begin(), samples.end());
  // suffix argmax: where the outer sup is attained for each starting sample
  std::vector<std::size_t> arg(samples.size());
  double best = -1.0;
  std::size_t bi = samples.size() - 1;
  for (std::size_t i = samples.size(); i-- > 0;) {
    if (samples[i].second >= best) {
      best = samples[i].second;
      bi = i;
    }
    arg[i] = bi;
  }
  const double half_period = detail::pi_v / 2.0;  // |u| oscillates with period pi (k = 1)
  const double q_max = std::max(1.2 * r_min, r_max - half_period);
  const int probes = 12;
  std::vector<char> used(samples.size(), 0);
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k < probes; ++k) {
    double q = r_min * std::pow(q_max / r_min, static_cast<double>(k) / (probes - 1));
    auto it = std::lower_bound(samples.begin(), samples.end(), std::make_pair(q, -1.0));
    if (it == samples.end()) continue;
    std::size_t j = arg[static_cast<std::size_t>(it - samples.begin())];
    if (used[j] || samples[j].second <= 0.0) continue;
    used[j] = 1;
    pts.push_back(samples[j]);
  }
  if (pts.size() < 2) throw WindowTooNarrow("decay fit found fewer than 2 envelope points");
  // Oscillatory profiles: fit only true envelope peaks (maximal within a half
  // period on each side). Monotone profiles yield at most one such point, and
  // then every record point lies on the envelope, so fit them all.
  std::vector<std::pair<double, double>> peaks;
  for (const auto& pt : pts) {
    auto lo = std::lower_bound(samples.begin(), samples.end(),
                               std::make_pair(pt.first - half_period, -1.0));
    bool is_peak = true;
    for (auto it = lo; it != samples.end() && it->first <= pt.first + half_period; ++it)
      if (it->second > pt.second * (1.0 + 1e-12)) is_peak = false;
    if (is_peak) peaks.push_back(pt);
  }
  return fit_loglog(peaks.size() >= 2 ? peaks : pts);
}

// R f minus its leading oscillatory term, sampled off-grid along mesh directions.
// u(x) = h^N sum_y Phi(x - y) f(y) is the aperiodic convolution evaluated exactly
// outside the box; the leading term is sqrt(pi/2) e^{i(|x| - (N-3)pi/4)} |x|^{-(N-1)/2} fhat(xhat).
inline std::vector<double> linear_farfield_remainders(const Field& f,
                                                      const std::vector<double>& radii) {
  const GridSpec& g = f.grid;
  if (g.dim != 3) throw InvalidScenario("linear far-field check requires dim == 3");
  const int n = g.points_per_axis;
  const double h = g.spacing();
  const double hN = h * h * h;
  if (radii.size() < 2) throw BadWindow("radius ladder needs at least 2 rungs");

  double fmax = 0.0;
  for (const Complex& z : f.values) fmax = std::max(fmax, std::abs(z));
  if (fmax == 0.0) return std::vector<double>(radii.size(), 0.0);
  std::vector<std::size_t> nz;
  std::vector<int> idx(3);
  double rsupp = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f.values[i]) > 1e-14 * fmax) {
      nz.push_back(i);
      unflatten(g, i, idx.data());
      rsupp = std::max(rsupp, node_radius(g, idx.data()));
    }
  for (double R : radii)
    if (R <= rsupp + h) throw BadWindow("radii must stay outside the source support");

  SphereMesh mesh = sphere_mesh(0);
  const double c23 = std::pow(2.0 * std::numbers::pi, -1.5);
  std::vector<Complex> fhat(mesh.directions.size());
  std::vector<double> y(3);
  for (std::size_t d = 0; d < mesh.directions.size(); ++d) {
    const Vec3& xi = mesh.directions[d];
    Complex acc(0.0, 0.0);
    for (std::size_t i : nz) {
      unflatten(g, i, idx.data());
      double ph = 0.0;
      for (int a = 0; a < 3; ++a) ph += g.coord(idx[a]) * xi[a];
      acc += f.values[i] * std::polar(1.0, -ph);
    }
    fhat[d] = c23 * hN * acc;
  }

  std::vector<double> out;
  std::vector<double> dx(3);
  for (double R : radii) {
    double worst = 0.0;
    for (std::size_t d = 0; d < mesh.directions.size(); ++d) {
      const Vec3& xi = mesh.directions[d];
      Complex u(0.0, 0.0);
      for (std::size_t i : nz) {
        unflatten(g, i, idx.data());
        for (int a = 0; a < 3; ++a) dx[a] = R * xi[a] - g.coord(idx[a]);
        u += phi_eval(dx, 3) * f.values[i];
      }
      u *= hN;
      Complex lead = std::sqrt(std::numbers::pi / 2.0) * std::polar(1.0, R) / R * fhat[d];
      worst = std::max(worst, std::abs(u - lead));
    }
    out.push_back(worst);
  }
  return out;
}

inline SlopeFit linear_farfield_check(const Field& f, const std::vector<double>& radii) {
  std::vector<double> rem = linear_farfield_remainders(f, radii);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < radii.size(); ++k) pts.emplace_back(radii[k], rem[k]);
  return fit_loglog(pts);
}

}  // namespace nlh
