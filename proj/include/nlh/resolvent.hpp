#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "nlh/fft.hpp"
#include "nlh/grid.hpp"
#include "nlh/kernel.hpp"

namespace nlh {

// Geometric absorption schedule eps_j = eps0 2^{-j} with Richardson extrapolation.
struct AbsorptionSchedule {
  double eps0 = 0.6;
  int levels = 2;
  int ratio = 2;                // fixed: halving schedule
  int extrapolation_order = 1;  // Richardson order

  // Smallest eps on a lattice must stay above the near-shell mode gap.
  static double floor_eps(const GridSpec& g) {
    double dxi = g.freq_spacing();
    return dxi * dxi / 4.0;
  }

  double eps_at(int j) const { return eps0 * std::pow(2.0, -j); }

  void validate(const GridSpec& g) const {
    if (eps0 <= 0.0) throw InvalidAbsorption("eps0 must be > 0");
    if (levels < 1 || ratio != 2) throw InvalidAbsorption("schedule requires levels >= 1, ratio 2");
    if (extrapolation_order < 0 || extrapolation_order >= levels)
      throw InvalidAbsorption("extrapolation order must be in [0, levels)");
    if (eps_at(levels - 1) < floor_eps(g))
      throw ScheduleTooAggressive("smallest eps below the lattice resonance guard");
  }
};

enum class ResolventMethod { multiplier, kernel_convolution };

// R_eps f: divide f_hat pointwise by (|xi|^2 - 1 - i eps).
inline Field resolvent_eps_apply(const Field& f, double eps) {
  if (eps <= 0.0) throw InvalidAbsorption("resolvent_eps_apply requires eps > 0");
  Field fh = spectral_transform(f, TransformDirection::forward);
  for (std::size_t i = 0; i < fh.size(); ++i)
    fh.values[i] /= Complex(freq_norm2(fh.grid, i) - 1.0, -eps);
  return spectral_transform(fh, TransformDirection::inverse);
}

// Richardson-extrapolated limit of R_eps across the schedule (single inverse transform).
inline Field resolvent_apply(const Field& f, const AbsorptionSchedule& sched) {
  sched.validate(f.grid);
  Field fh = spectral_transform(f, TransformDirection::forward);
  Field out = fh;
  std::vector<Complex> tableau(sched.levels);
  for (std::size_t i = 0; i < fh.size(); ++i) {
    const double d = freq_norm2(fh.grid, i) - 1.0;
    for (int j = 0; j < sched.levels; ++j)
      tableau[j] = fh.values[i] / Complex(d, -sched.eps_at(j));
    for (int k = 1; k <= sched.extrapolation_order; ++k) {
      const double w = std::pow(2.0, k);
      for (int j = 0; j + k < sched.levels; ++j)
        tableau[j] = (w * tableau[j + 1] - tableau[j]) / (w - 1.0);
    }
    out.values[i] = tableau[0];
  }
  return spectral_transform(out, TransformDirection::inverse);
}

namespace detail {

// Circular convolution on the zero-padded (2n)^N torus; kernel given as a
// function of the signed displacement index vector (entries in [-n, n)).
// Returns h^N * (kernel * f) restricted to the original block.
inline Field padded_convolve(const Field& f,
                             const std::function<Complex(const std::vector<int>&)>& kernel) {
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  const int P = 2 * n;
  const int N = g.dim;
  std::size_t psize = 1;
  for (int a = 0; a < N; ++a) psize *= static_cast<std::size_t>(P);

  std::vector<Complex> fpad(psize, Complex(0, 0)), kpad(psize);
  std::vector<int> idx(N), sidx(N);
  // embed f in the corner block
  for (std::size_t i = 0; i < f.size(); ++i) {
    unflatten(g, i, idx.data());
    std::size_t flat = 0;
    for (int a = 0; a < N; ++a) flat = flat * P + static_cast<std::size_t>(idx[a]);
    fpad[flat] = f.values[i];
  }
  // sample the kernel at signed displacements (minimal image on the padded torus)
  for (std::size_t i = 0; i < psize; ++i) {
    std::size_t r = i;
    for (int a = N - 1; a >= 0; --a) {
      int m = static_cast<int>(r % P);
      r /= P;
      sidx[a] = (m < n) ? m : m - P;
    }
    kpad[i] = kernel(sidx);
  }
  raw_dft(fpad.data(), N, P, FFTW_FORWARD);
  raw_dft(kpad.data(), N, P, FFTW_FORWARD);
  const double scale = std::pow(g.spacing(), N) / static_cast<double>(psize);
  for (std::size_t i = 0; i < psize; ++i) fpad[i] *= kpad[i] * scale;
  raw_dft(fpad.data(), N, P, FFTW_BACKWARD);

  Field out = Field::zeros(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unflatten(g, i, idx.data());
    std::size_t flat = 0;
    for (int a = 0; a < N; ++a) flat = flat * P + static_cast<std::size_t>(idx[a]);
    out.values[i] = fpad[flat];
  }
  return out;
}

}  // namespace detail

// Aperiodic convolution with sampled Phi (zero padding to (2n)^N, Phi truncated at
// the padded box); the singular origin cell carries the analytic ball mean.
inline Field kernel_convolve(const Field& f) {
  const GridSpec& g = f.grid;
  if (g.dim != 3) throw InvalidScenario("kernel_convolve implemented for dim 3");
  const double h = g.spacing();
  const double origin = origin_cell_mean(g);
  return detail::padded_convolve(f, [&](const std::vector<int>& s) -> Complex {
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) r2 += static_cast<double>(s[a]) * s[a];
    double r = h * std::sqrt(r2);
    return r == 0.0 ? Complex(origin, 0.0) : phi_radial(r, 3);
  });
}

// Aperiodic convolution with a kernel given as grid samples indexed by position
// (node j at coordinate -L + j h), extended by zero beyond the box.
inline Field sampled_kernel_convolve(const Field& f, const Field& kernel) {
  require_same_grid(f, kernel);
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  return detail::padded_convolve(f, [&](const std::vector<int>& s) -> Complex {
    std::vector<int> idx(g.dim);
    for (int a = 0; a < g.dim; ++a) {
      if (s[a] < -n / 2 || s[a] >= n / 2) return Complex(0, 0);
      idx[a] = s[a] + n / 2;  // coordinate s[a] h maps to node index s[a] + n/2
    }
    return kernel.values[flatten(g, idx.data())];
  });
}

// Upper bound on the neglected |Phi| mass outside the padded box (reported, not hidden).
inline double kernel_truncation_bound(const GridSpec& g) {
  return kernel_bound_constant(g.dim) *
         std::pow(2.0 * g.half_width, 0.5 * (1.0 - g.dim));
}

// Re(R f) for real f, by either method; output carries the realness tag.
inline Field real_resolvent_apply(const Field& f, ResolventMethod method,
                                  const AbsorptionSchedule& sched) {
  require_real(f, "real_resolvent_apply expects a real field");
  Field out = (method == ResolventMethod::multiplier) ? resolvent_apply(f, sched)
                                                      : kernel_convolve(f);
  for (Complex& z : out.values) z = Complex(z.real(), 0.0);
  out.realness_tag = true;
  return out;
}

}  // namespace nlh
