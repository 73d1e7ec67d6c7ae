#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nlh/grid.hpp"

namespace nlh {

enum class TransformDirection { forward, inverse };

namespace detail {

// Unnormalized in-place DFT (FFTW sign convention) on a cube of side n, dim axes.
inline void raw_dft(Complex* data, int dim, int n, int sign) {
  std::vector<int> dims(dim, n);
  fftw_plan plan = fftw_plan_dft(dim, dims.data(), reinterpret_cast<fftw_complex*>(data),
                                 reinterpret_cast<fftw_complex*>(data), sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

// Parity (-1)^{sum of axis indices} of a flat index; implements the
// e^{+-iL|xi|_1}-style phase that shifts the box origin to -L per axis.
inline double index_parity(std::size_t flat, int dim, int n) {
  int s = 0;
  for (int a = 0; a < dim; ++a) {
    s += static_cast<int>(flat % n);
    flat /= n;
  }
  return (s % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace detail

// Discrete realization of f_hat(xi) = (2 pi)^{-N/2} \int f(x) e^{-i x xi} dx on the
// torus [-L,L)^N with the lattice {m pi/L}. Inverse is the exact round-trip partner:
// (2 pi)^{-N} h^N dxi^N n^N = 1.
inline Field spectral_transform(const Field& f, TransformDirection dir) {
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  Field out = f;
  out.realness_tag = false;
  if (dir == TransformDirection::forward) {
    detail::raw_dft(out.values.data(), g.dim, n, FFTW_FORWARD);
    const double scale =
        std::pow(2.0 * std::numbers::pi, -0.5 * g.dim) * std::pow(g.spacing(), g.dim);
    for (std::size_t i = 0; i < out.size(); ++i)
      out.values[i] *= scale * detail::index_parity(i, g.dim, n);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i)
      out.values[i] *= detail::index_parity(i, g.dim, n);
    detail::raw_dft(out.values.data(), g.dim, n, FFTW_BACKWARD);
    const double scale =
        std::pow(2.0 * std::numbers::pi, -0.5 * g.dim) * std::pow(g.freq_spacing(), g.dim);
    for (Complex& z : out.values) z *= scale;
  }
  return out;
}

// |xi|^2 at the frequency node addressed by flat index i.
inline double freq_norm2(const GridSpec& g, std::size_t i) {
  const int n = g.points_per_axis;
  double acc = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    double xi = g.freq(static_cast<int>(i % n));
    acc += xi * xi;
    i /= n;
  }
  return acc;
}

// Spectral Laplacian: multiply f_hat by -|xi|^2.
inline Field spectral_laplacian(const Field& f) {
  Field fh = spectral_transform(f, TransformDirection::forward);
  for (std::size_t i = 0; i < fh.size(); ++i) fh.values[i] *= -freq_norm2(fh.grid, i);
  return spectral_transform(fh, TransformDirection::inverse);
}

// Spectral partial derivative along axis: multiply f_hat by i xi_a.
inline Field spectral_derivative(const Field& f, int axis) {
  Field fh = spectral_transform(f, TransformDirection::forward);
  const int n = fh.grid.points_per_axis;
  std::vector<int> idx(fh.grid.dim);
  for (std::size_t i = 0; i < fh.size(); ++i) {
    unflatten(fh.grid, i, idx.data());
    fh.values[i] *= Complex(0.0, fh.grid.freq(idx[axis]));
  }
  return spectral_transform(fh, TransformDirection::inverse);
}

}  // namespace nlh
