#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlh/dual.hpp"
#include "nlh/fit.hpp"
#include "nlh/kernel.hpp"

namespace nlh {

struct PdeResidual {
  double rel_l2 = 0.0;
  double rel_max = 0.0;
};

// Residual of -Laplace u - u = Q |u|^{p-2} u, relative to the source term.
inline PdeResidual pde_residual(const DualProblem& prob, const Field& u) {
  require_real(u, "pde_residual expects a real field");
  Field lap = spectral_laplacian(u);
  double l2 = 0.0, mx = 0.0, src_l2 = 0.0, src_mx = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double ui = u.values[i].real();
    double f = prob.Q.values[i].real() * std::pow(std::abs(ui), prob.p - 2.0) * ui;
    double r = -lap.values[i].real() - ui - f;
    l2 += r * r;
    src_l2 += f * f;
    mx = std::max(mx, std::abs(r));
    src_mx = std::max(src_mx, std::abs(f));
  }
  if (src_l2 == 0.0) return {0.0, 0.0};
  return {std::sqrt(l2 / src_l2), mx / src_mx};
}

// sup over centers of the L^{p'} mass in a rho-ball (Eq-style concentration functional).
inline double concentration(const Field& v, double rho, double p_prime) {
  const GridSpec& g = v.grid;
  if (rho > g.half_width / 2.0) throw RadiusExceedsBox("concentration requires rho <= L/2");
  const int n = g.points_per_axis;
  const double h = g.spacing();
  const int reach = static_cast<int>(std::floor(rho / h));
  // lattice offsets within the ball, fixed once; direct sums keep translation
  // invariance exact
  std::vector<std::vector<int>> offsets;
  std::vector<int> o(g.dim, -reach);
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += static_cast<double>(o[a]) * o[a];
    if (std::sqrt(r2) * h <= rho) offsets.push_back(o);
    int a = g.dim - 1;
    while (a >= 0 && ++o[a] > reach) o[a--] = -reach;
    if (a < 0) break;
  }
  std::vector<double> mass(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    mass[i] = std::pow(std::abs(v.values[i]), p_prime);
  std::vector<int> idx(g.dim), jdx(g.dim);
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    unflatten(g, i, idx.data());
    double acc = 0.0;
    for (const std::vector<int>& off : offsets) {
      for (int a = 0; a < g.dim; ++a) {
        int j = idx[a] + off[a];
        jdx[a] = (j % n + n) % n;
      }
      acc += mass[flatten(g, jdx.data())];
    }
    best = std::max(best, acc);
  }
  return best * std::pow(h, g.dim);
}

struct ProbeMember {
  double pairing_abs = 0.0;            // |<v, Re R v>|
  std::vector<double> concentrations;  // at the rho ladder
};

struct ProbeReport {
  std::vector<double> rho_ladder;
  std::vector<ProbeMember> members;
  bool surrogate_holds = false;  // rank-correlation surrogate (see below)
};

// Nonvanishing surrogate: members whose |<v, Re R v>| reaches the family's 75th
// percentile must all concentrate (at rho = 2) above the family's 10th percentile.
inline ProbeReport nonvanishing_probe(const std::vector<Field>& family, double p_prime,
                                      const AbsorptionSchedule& sched,
                                      std::vector<double> rho_ladder = {1.0, 2.0, 4.0}) {
  if (family.empty()) throw ZeroInput("nonvanishing_probe requires a nonempty family");
  ProbeReport rep;
  rep.rho_ladder = rho_ladder;
  std::size_t rho2_pos = 0;
  for (std::size_t k = 0; k < rho_ladder.size(); ++k)
    if (rho_ladder[k] == 2.0) rho2_pos = k;
  for (const Field& v : family) {
    ProbeMember m;
    m.pairing_abs = std::abs(pairing(v, real_resolvent_apply(v, ResolventMethod::multiplier, sched)));
    for (double rho : rho_ladder) m.concentrations.push_back(concentration(v, rho, p_prime));
    rep.members.push_back(std::move(m));
  }
  auto percentile = [](std::vector<double> vals, double q) {
    std::sort(vals.begin(), vals.end());
    double pos = q * (vals.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, vals.size() - 1);
    return vals[lo] + (pos - lo) * (vals[hi] - vals[lo]);
  };
  std::vector<double> prs, concs;
  for (const ProbeMember& m : rep.members) {
    prs.push_back(m.pairing_abs);
    concs.push_back(m.concentrations[rho2_pos]);
  }
  double pr_hi = percentile(prs, 0.75), conc_lo = percentile(concs, 0.10);
  rep.surrogate_holds = true;
  for (const ProbeMember& m : rep.members)
    if (m.pairing_abs >= pr_hi && m.concentrations[rho2_pos] < conc_lo)
      rep.surrogate_holds = false;
  return rep;
}

// ||(1_{M_R} Phi1) * f||_p over a geometric R ladder, log-log slope fit.
// M_R is the complement of B_R; Phi1 comes from the kernel split, truncated at the box.
inline SlopeFit truncated_kernel_slope(double p, const std::vector<double>& R_ladder,
                                       const Field& f, const KernelSplit& split) {
  const GridSpec& g = f.grid;
  const int N = g.dim;
  const double p_min = 2.0 * (N + 1) / (N - 1);
  if (!(p > p_min)) throw InvalidExponent("truncated kernel decay needs p > 2(N+1)/(N-1)");
  if (R_ladder.size() < 2) throw BadWindow("R ladder needs at least 2 rungs");
  for (double R : R_ladder)
    if (R < 2.0 || R > g.half_width / 4.0 * 1.0001)
      throw BadWindow("R ladder must stay within [2, L/4]");

  // band-limitation check: spectral mass outside ||xi| - 1| <= 1/2
  Field fh = spectral_transform(f, TransformDirection::forward);
  double inband = 0.0, outband = 0.0;
  for (std::size_t i = 0; i < fh.size(); ++i) {
    double xi = std::sqrt(freq_norm2(g, i));
    (std::abs(xi - 1.0) <= 0.5 ? inband : outband) += std::norm(fh.values[i]);
  }
  if (outband > 1e-16 * (inband + outband))
    throw BadSpectrum("test field is not band-limited to the unit shell");

  std::vector<std::pair<double, double>> pts;
  std::vector<int> idx(N);
  for (double R : R_ladder) {
    Field kern = split.phi1;
    for (std::size_t i = 0; i < kern.size(); ++i) {
      unflatten(g, i, idx.data());
      if (node_radius(g, idx.data()) < R) kern.values[i] = 0.0;
    }
    Field out = sampled_kernel_convolve(f, kern);
    pts.emplace_back(R, lp_norm(out, p));
  }
  return fit_loglog(pts);
}

// ||R f||_p / ||f||_{p'} (scale invariant).
inline double resolvent_ratio(const Field& f, double p, const AbsorptionSchedule& sched) {
  const double pp = p / (p - 1.0);
  double nf = lp_norm(f, pp);
  if (nf == 0.0) throw ZeroInput("resolvent_ratio: zero input");
  return lp_norm(resolvent_apply(f, sched), p) / nf;
}

// max over the ladder of (1/R) \int_{B_R} |R f|^2 divided by ||f||_{p'}^2.
inline double bigR_ratio(const Field& f, const std::vector<double>& R_ladder, double p_prime,
                         const AbsorptionSchedule& sched) {
  double nf = lp_norm(f, p_prime);
  if (nf == 0.0) throw ZeroInput("bigR_ratio: zero input");
  for (double R : R_ladder)
    if (R < 1.0 || R > f.grid.half_width / 2.0)
      throw RadiusExceedsBox("bigR ladder must stay within [1, L/2]");
  Field Rf = resolvent_apply(f, sched);
  std::vector<double> center(f.grid.dim, 0.0);
  double best = 0.0;
  for (double R : R_ladder)
    best = std::max(best, ball_integral(Rf, center, R, 2.0) / R);
  return best / (nf * nf);
}

struct RatioReport {
  std::vector<double> ratios;
  double median = 0.0;
  double max = 0.0;
};

inline RatioReport make_ratio_report(std::vector<double> ratios) {
  RatioReport rep;
  rep.ratios = ratios;
  std::sort(ratios.begin(), ratios.end());
  rep.median = ratios[ratios.size() / 2];
  rep.max = ratios.back();
  return rep;
}

}  // namespace nlh
