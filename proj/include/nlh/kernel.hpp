#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nlh/fft.hpp"
#include "nlh/grid.hpp"

namespace nlh {

namespace detail {

inline constexpr double pi_v = std::numbers::pi;

// Ascending series for J1 and Y1 (long double accumulation to absorb the
// alternating-series cancellation), used for x < 25.
inline Complex hankel1_order1_series(double x) {
  const long double xl = x;
  const long double q = xl * xl / 4.0L;  // (x/2)^2
  // J1 = (x/2) sum (-1)^m q^m / (m! (m+1)!)
  long double term = 1.0L, j1 = 0.0L;
  // Y1 digamma series: psi(1) = -gamma, psi(m+1) = psi(m) + 1/m
  const long double gamma = 0.57721566490153286060651209008240243L;
  long double psi_a = -gamma;          // psi(m+1)
  long double psi_b = -gamma + 1.0L;   // psi(m+2)
  long double ysum = 0.0L;
  for (int m = 0; m < 64; ++m) {
    j1 += term;
    ysum += term * (psi_a + psi_b);
    term *= -q / (static_cast<long double>(m + 1) * static_cast<long double>(m + 2));
    psi_a += 1.0L / static_cast<long double>(m + 1);
    psi_b += 1.0L / static_cast<long double>(m + 2);
    if (std::abs((double)term) < 1e-40L * (1.0L + std::abs((double)j1))) break;
  }
  const long double half_x = xl / 2.0L;
  const long double J1 = half_x * j1;
  const long double Y1 = (2.0L / pi_v) * std::log((double)half_x) * J1 -
                         (2.0L / pi_v) / xl - (half_x / pi_v) * ysum;
  return Complex((double)J1, (double)Y1);
}

// Large-argument expansion (12 correction terms), used for x >= 25:
// H1_1(x) = sqrt(2/(pi x)) (P + iQ) e^{i(x - 3 pi/4)}.
inline Complex hankel1_order1_asymptotic(double x) {
  const double mu = 4.0;  // 4 nu^2, nu = 1
  double a = 1.0;         // a_k
  double P = 1.0, Q = 0.0;
  double xk = 1.0;
  for (int k = 1; k <= 12; ++k) {
    a *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k);
    xk *= x;
    double t = a / xk;
    switch (k % 4) {
      case 1: Q += t; break;
      case 2: P -= t; break;
      case 3: Q -= t; break;
      case 0: P += t; break;
    }
  }
  const double chi = x - 3.0 * pi_v / 4.0;
  return std::sqrt(2.0 / (pi_v * x)) * Complex(P, Q) *
         Complex(std::cos(chi), std::sin(chi));
}

}  // namespace detail

// H^{(1)}_nu(x) for the orders this library needs: nu = 1/2 (N=3), 1 (N=4), 3/2 (N=5).
inline Complex hankel1(double nu, double x) {
  if (!(x > 0.0)) throw SingularPoint("hankel1 requires x > 0");
  const double c = std::sqrt(2.0 / (detail::pi_v * x));
  const Complex eix(std::cos(x), std::sin(x));
  if (nu == 0.5) return Complex(0.0, -1.0) * c * eix;
  if (nu == 1.5) return -c * eix * Complex(1.0, 1.0 / x);
  if (nu == 1.0)
    return x < 17.0 ? detail::hankel1_order1_series(x)
                    : detail::hankel1_order1_asymptotic(x);
  throw InvalidScenario("hankel1: unsupported order");
}

// Outgoing fundamental solution of -Laplace - 1:
// Phi(x) = (i/4) (2 pi |x|)^{(2-N)/2} H^{(1)}_{(N-2)/2}(|x|).
inline Complex phi_radial(double r, int N) {
  if (!(r > 0.0)) throw SingularPoint("phi evaluated at the origin");
  if (N == 3) {
    // closed form e^{i r} / (4 pi r)
    return Complex(std::cos(r), std::sin(r)) / (4.0 * detail::pi_v * r);
  }
  const double nu = 0.5 * (N - 2);
  return Complex(0.0, 0.25) * std::pow(2.0 * detail::pi_v * r, 0.5 * (2 - N)) *
         hankel1(nu, r);
}

// Generic Hankel evaluation path (no N = 3 shortcut); used to cross-check phi_radial.
inline Complex phi_radial_generic(double r, int N) {
  if (!(r > 0.0)) throw SingularPoint("phi evaluated at the origin");
  const double nu = 0.5 * (N - 2);
  return Complex(0.0, 0.25) * std::pow(2.0 * detail::pi_v * r, 0.5 * (2 - N)) *
         hankel1(nu, r);
}

inline Complex phi_eval(const std::vector<double>& x, int N) {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  return phi_radial(std::sqrt(r2), N);
}

inline double psi_radial(double r, int N) { return phi_radial(r, N).real(); }

inline double psi_eval(const std::vector<double>& x, int N) { return phi_eval(x, N).real(); }

// Published constant for |Phi(x)| <= C0 max{|x|^{2-N}, |x|^{(1-N)/2}}:
// dense radial sample times a 1.05 safety factor.
inline double kernel_bound_constant(int N) {
  double c = 0.0;
  for (int i = 0; i <= 24000; ++i) {
    double r = std::pow(10.0, -3.0 + 6.0 * i / 24000.0);
    double env = std::max(std::pow(r, 2.0 - N), std::pow(r, 0.5 * (1.0 - N)));
    c = std::max(c, std::abs(phi_radial(r, N)) / env);
  }
  return 1.05 * c;
}

// Smooth radial frequency profile: 1 on ||xi|-1| <= 1/6, 0 on ||xi|-1| >= 1/4,
// C-infinity bump transition in between, range [0, 1].
inline double psi_hat_profile(double xi_norm) {
  const double t = std::abs(xi_norm - 1.0);
  const double t0 = 1.0 / 6.0, t1 = 0.25;
  if (t <= t0) return 1.0;
  if (t >= t1) return 0.0;
  const double s = (t - t0) / (t1 - t0);
  auto bump = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  return bump(1.0 - s) / (bump(1.0 - s) + bump(s));
}

// Multiplier form of the smooth far-from-shell symbol (1 - psi_hat)/(|xi|^2 - 1).
inline double kernel_split_symbol(double xi_norm) {
  const double w = 1.0 - psi_hat_profile(xi_norm);
  if (w == 0.0) return 0.0;
  return w / (xi_norm * xi_norm - 1.0);
}

// Equivalent-volume-ball mean of 1/(4 pi |x|) over the origin cell, N = 3.
inline double origin_cell_mean(const GridSpec& g) {
  const double h = g.spacing();
  const double a = std::cbrt(3.0 * h * h * h / (4.0 * detail::pi_v));
  return 3.0 / (8.0 * detail::pi_v * a);
}

// Phi sampled at the grid nodes; the singular origin cell carries the analytic
// ball mean (oscillatory factor evaluated at the cell center, i.e. 1).
inline Field sample_phi(const GridSpec& g) {
  if (g.dim != 3) throw InvalidScenario("sample_phi implemented for dim 3");
  Field out = Field::zeros(g);
  int idx[3];
  for (std::size_t i = 0; i < out.size(); ++i) {
    unflatten(g, i, idx);
    double r = node_radius(g, idx);
    out.values[i] = (r == 0.0) ? Complex(origin_cell_mean(g), 0.0) : phi_radial(r, 3);
  }
  return out;
}

struct KernelSplit {
  double cutoff_inner = 1.0 / 6.0;
  double cutoff_outer = 0.25;
  Field phi1;  // Phi - Phi2
  Field phi2;  // inverse transform of the smooth symbol
};

// Phi2-first construction: Phi2 from its nonsingular symbol, Phi1 by subtraction.
inline KernelSplit kernel_split(const GridSpec& g) {
  if (g.dim != 3) throw InvalidScenario("kernel_split implemented for dim 3");
  if (g.freq_spacing() > 1.0 / 12.0)
    throw ShellUnresolved("frequency spacing too coarse to resolve the unit shell");
  KernelSplit ks;
  Field symbol = Field::zeros(g);
  const double c = std::pow(2.0 * detail::pi_v, -1.5);
  for (std::size_t i = 0; i < symbol.size(); ++i)
    symbol.values[i] = c * kernel_split_symbol(std::sqrt(freq_norm2(g, i)));
  ks.phi2 = spectral_transform(symbol, TransformDirection::inverse);
  for (Complex& z : ks.phi2.values) z = Complex(z.real(), 0.0);
  ks.phi2.realness_tag = true;
  Field phi = sample_phi(g);
  ks.phi1 = phi;
  for (std::size_t i = 0; i < phi.size(); ++i)
    ks.phi1.values[i] = phi.values[i] - ks.phi2.values[i];
  return ks;
}

}  // namespace nlh
