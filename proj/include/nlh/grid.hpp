#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "nlh/errors.hpp"

namespace nlh {

using Complex = std::complex<double>;

// Uniform periodic grid on the torus [-L, L)^N, h = 2L/n, frequency spacing pi/L.
struct GridSpec {
  int dim = 3;
  double half_width = 0.0;
  int points_per_axis = 0;

  double spacing() const { return 2.0 * half_width / points_per_axis; }
  double freq_spacing() const { return std::numbers::pi / half_width; }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points_per_axis);
    return s;
  }

  // Node coordinate along one axis: x_j = -L + j h.
  double coord(int j) const { return -half_width + j * spacing(); }

  // Signed frequency: xi_k = k~ * pi/L with k~ in [-n/2, n/2).
  double freq(int k) const {
    int half = points_per_axis / 2;
    int kt = (k < half) ? k : k - points_per_axis;
    return kt * freq_spacing();
  }

  void validate() const {
    if (dim < 3) throw InvalidScenario("grid dim must be >= 3");
    if (half_width <= 0.0) throw InvalidScenario("grid half_width must be > 0");
    if (points_per_axis < 8 || points_per_axis % 2 != 0)
      throw InvalidScenario("points_per_axis must be an even integer >= 8");
  }

  bool operator==(const GridSpec&) const = default;
};

// Complex samples on a GridSpec, flat storage, last axis fastest.
struct Field {
  GridSpec grid;
  std::vector<Complex> values;
  bool realness_tag = false;

  static Field zeros(const GridSpec& g) {
    Field f;
    f.grid = g;
    f.values.assign(g.size(), Complex(0.0, 0.0));
    return f;
  }

  std::size_t size() const { return values.size(); }
  Complex& operator[](std::size_t i) { return values[i]; }
  const Complex& operator[](std::size_t i) const { return values[i]; }
};

// Decompose a flat index into per-axis indices (last axis fastest).
inline void unflatten(const GridSpec& g, std::size_t flat, int* idx) {
  const int n = g.points_per_axis;
  for (int a = g.dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n);
    flat /= n;
  }
}

inline std::size_t flatten(const GridSpec& g, const int* idx) {
  const int n = g.points_per_axis;
  std::size_t flat = 0;
  for (int a = 0; a < g.dim; ++a) flat = flat * n + static_cast<std::size_t>(idx[a]);
  return flat;
}

inline double max_abs_real(const Field& f) {
  double m = 0.0;
  for (const Complex& z : f.values) m = std::max(m, std::abs(z.real()));
  return m;
}

inline double max_abs_imag(const Field& f) {
  double m = 0.0;
  for (const Complex& z : f.values) m = std::max(m, std::abs(z.imag()));
  return m;
}

inline bool effectively_real(const Field& f) {
  return max_abs_imag(f) <= 1e-12 * (1.0 + max_abs_real(f));
}

inline void require_real(const Field& f, const char* what) {
  if (!effectively_real(f)) throw ExpectedRealField(what);
}

inline void require_same_grid(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw GridMismatch("fields live on different grids");
}

// Discrete L^s norm: (h^N sum |f|^s)^{1/s}, s in (1, inf).
inline double lp_norm(const Field& f, double s) {
  if (!(s > 1.0) || !std::isfinite(s)) throw InvalidExponent("lp_norm requires finite s > 1");
  const double hn = std::pow(f.grid.spacing(), f.grid.dim);
  double acc = 0.0;
  for (const Complex& z : f.values) acc += std::pow(std::abs(z), s);
  return std::pow(hn * acc, 1.0 / s);
}

// Real duality pairing h^N sum Re(f) Re(g).
inline double pairing(const Field& f, const Field& g) {
  require_same_grid(f, g);
  const double hn = std::pow(f.grid.spacing(), f.grid.dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f.values[i].real() * g.values[i].real();
  return hn * acc;
}

// Minimal-image displacement of a - b on the periodic axis of circumference 2L.
inline double min_image(double d, double half_width) {
  const double period = 2.0 * half_width;
  d = std::remainder(d, period);
  if (d >= half_width) d -= period;   // land in [-L, L)
  if (d < -half_width) d += period;
  return d;
}

// h^N sum over nodes with torus distance |x - center| <= rho of |f|^s.
// Plain node counting; O(h) accuracy by design.
inline double ball_integral(const Field& f, const std::vector<double>& center, double rho,
                            double s) {
  const GridSpec& g = f.grid;
  if (rho > g.half_width) throw RadiusExceedsBox("ball radius exceeds box half-width");
  if (static_cast<int>(center.size()) != g.dim) throw GridMismatch("center has wrong dimension");
  const double hn = std::pow(g.spacing(), g.dim);
  const double rho2 = rho * rho;
  std::vector<int> idx(g.dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    unflatten(g, i, idx.data());
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      double d = min_image(g.coord(idx[a]) - center[a], g.half_width);
      r2 += d * d;
    }
    if (r2 <= rho2) acc += std::pow(std::abs(f.values[i]), s);
  }
  return hn * acc;
}

// Torus radius |x| of a node (minimal image of the origin distance).
inline double node_radius(const GridSpec& g, const int* idx) {
  double r2 = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    double d = g.coord(idx[a]);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

}  // namespace nlh
