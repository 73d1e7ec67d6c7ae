#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "nlh/diagnostics.hpp"
#include "nlh/dual.hpp"

namespace nlh {

struct SolverConfig {
  double tol_crit = 1e-6;
  int max_iter = 5000;
  int recenter_every = 25;       // periodic scenarios only
  int deflation_count = 1;       // m: number of solution pairs sought
  unsigned seed = 1;
  int restart_count = 3;
  double recenter_rho = 1.0;
  std::vector<int> period_steps;  // Q period in grid steps per axis (periodic only)

  void validate() const {
    if (tol_crit <= 0.0) throw InvalidScenario("tol_crit must be > 0");
    if (max_iter < 1) throw InvalidScenario("max_iter must be >= 1");
    if (deflation_count < 1) throw InvalidScenario("deflation_count must be >= 1");
  }
};

struct SolutionRecord {
  Field v_star;
  Field u_star;
  double J_value = 0.0;
  double crit_residual = 0.0;
  double pde_residual_l2 = 0.0;
  double pde_residual_max = 0.0;
  double rayleigh = 0.0;
  int iterations = 0;
  int nonmonotone_steps = 0;
  unsigned seed_used = 0;
  std::vector<int> lattice_shift;  // accumulated recentering shift (periodic case)
  bool converged = false;
};

// One inverted critical-point step: w -> normalize_{p'}(|K_p w|^{p-2} K_p w).
inline Field power_step(const DualProblem& prob, const Field& w) {
  const double pp = prob.p_prime();
  double nw = lp_norm(w, pp);
  if (nw == 0.0) throw DegenerateDirection("power_step on the zero field");
  Field z = kp_apply(prob, w);
  if (lp_norm(z, pp) <= 1e-14 * nw)
    throw DegenerateDirection("K_p annihilates the direction");
  Field y = z;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double zi = z.values[i].real();
    y.values[i] = Complex(std::pow(std::abs(zi), prob.p - 2.0) * zi, 0.0);
  }
  y.realness_tag = true;
  double ny = lp_norm(y, pp);
  for (Complex& v : y.values) v /= ny;
  return y;
}

// Translate w by the period-lattice vector maximizing the local p' mass;
// ties broken by the lexicographically smallest shift. Exact index permutation.
inline std::pair<Field, std::vector<int>> recenter(const Field& w, double rho,
                                                   const std::vector<int>& period_steps,
                                                   double p_prime) {
  const GridSpec& g = w.grid;
  const int n = g.points_per_axis;
  if (period_steps.empty()) throw RecenterUnavailable("recenter requires a periodic scenario");
  for (int s : period_steps)
    if (s <= 0 || n % s != 0)
      throw RecenterUnavailable("period lattice must divide the torus");

  // Candidate shifts s (in grid steps, components in {0, period, ...}) enumerated
  // in lexicographic order starting at 0, so strict improvement keeps the
  // lexicographically smallest shift among ties (a constant field shifts by 0).
  const int origin = n / 2;
  std::vector<int> best(g.dim, 0);
  double best_mass = -1.0;
  std::vector<double> center(g.dim);
  std::vector<int> counts(g.dim);
  for (int a = 0; a < g.dim; ++a) counts[a] = n / period_steps[a];
  std::vector<int> c(g.dim, 0);
  while (true) {
    // applying shift s moves the ball centered at index origin - s to the origin
    for (int a = 0; a < g.dim; ++a) {
      int s = c[a] * period_steps[a];
      center[a] = g.coord(((origin - s) % n + n) % n);
    }
    double mass = ball_integral(w, center, rho, p_prime);
    if (mass > best_mass + 1e-14 * (1.0 + best_mass)) {
      best_mass = mass;
      for (int a = 0; a < g.dim; ++a) best[a] = c[a] * period_steps[a];
    }
    int a = g.dim - 1;
    while (a >= 0 && ++c[a] >= counts[a]) c[a--] = 0;
    if (a < 0) break;
  }
  Field out = w;
  std::vector<int> idx(g.dim), jdx(g.dim), shift(g.dim);
  for (int a = 0; a < g.dim; ++a) {
    int s = best[a] % n;
    shift[a] = (s > n / 2) ? s - n : s;  // signed symmetric report
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    unflatten(g, i, idx.data());
    for (int a = 0; a < g.dim; ++a) jdx[a] = ((idx[a] + best[a]) % n + n) % n;
    out.values[flatten(g, jdx.data())] = w.values[i];
  }
  return {out, shift};
}

namespace detail {

inline Field gaussian_bump_seed(const GridSpec& g) {
  Field w = Field::zeros(g);
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < w.size(); ++i) {
    unflatten(g, i, idx.data());
    double r = node_radius(g, idx.data());
    w.values[i] = std::exp(-r * r);
  }
  w.realness_tag = true;
  return w;
}

inline Field random_seed_field(const GridSpec& g, const Field& Q, unsigned seed) {
  Field w = Field::zeros(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  double qmax = max_abs_real(Q);
  for (std::size_t i = 0; i < w.size(); ++i) {
    double mask = Q.values[i].real() > 1e-8 * qmax ? 1.0 : 0.0;
    w.values[i] = mask * dist(rng);
  }
  w.realness_tag = true;
  return w;
}

// Point reflection x -> -x as an exact index permutation on the torus.
inline Field reflect(const Field& f) {
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  Field out = f;
  std::vector<int> idx(g.dim), jdx(g.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    unflatten(g, i, idx.data());
    for (int a = 0; a < g.dim; ++a) jdx[a] = (n - idx[a]) % n;
    out.values[flatten(g, jdx.data())] = f.values[i];
  }
  return out;
}

// +1 for even, -1 for odd, 0 for no definite parity (relative defect 1e-12).
inline int parity_of(const Field& f) {
  Field r = reflect(f);
  double de = 0.0, d_odd = 0.0, nf = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    de += std::abs(f.values[i] - r.values[i]);
    d_odd += std::abs(f.values[i] + r.values[i]);
    nf += std::abs(f.values[i]);
  }
  if (nf == 0.0) return 0;
  if (de <= 1e-12 * nf) return 1;
  if (d_odd <= 1e-12 * nf) return -1;
  return 0;
}

struct RunResult {
  Field w;
  double crit = 0.0;
  double rayleigh = 0.0;
  int iterations = 0;
  int nonmonotone = 0;
  std::vector<int> shift;
  bool converged = false;
};

// Iterate the power map from one seed; optional K_p-orthogonal deflation
// against previously found critical points.
inline RunResult iterate_run(const DualProblem& prob, const SolverConfig& cfg, Field w,
                             const std::vector<Field>* deflate_against) {
  const double pp = prob.p_prime();
  RunResult res;
  res.shift.assign(prob.grid.dim, 0);
  double nw = lp_norm(w, pp);
  for (Complex& z : w.values) z /= nw;
  double last_q = -1e300;

  // For even Q the power map commutes with x -> -x, so a parity-pure seed stays
  // in its sector in exact arithmetic. Re-project each step to keep roundoff
  // from drifting into the other sector (whose growth rate can dominate).
  const int sector = (prob.scenario_class == ScenarioClass::decaying &&
                      parity_of(prob.Q) == 1)
                         ? parity_of(w)
                         : 0;

  std::vector<Field> defl_k;  // K_p images of the deflation directions
  if (deflate_against)
    for (const Field& v : *deflate_against) defl_k.push_back(kp_apply(prob, v));

  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (deflate_against) {
      for (std::size_t d = 0; d < deflate_against->size(); ++d) {
        const Field& v = (*deflate_against)[d];
        double coef = pairing(w, defl_k[d]) / pairing(v, defl_k[d]);
        for (std::size_t i = 0; i < w.size(); ++i)
          w.values[i] = Complex(w.values[i].real() - coef * v.values[i].real(), 0.0);
      }
      double nn = lp_norm(w, pp);
      if (nn == 0.0) throw DegenerateDirection("deflation removed the whole iterate");
      for (Complex& z : w.values) z /= nn;
    }

    Field z = kp_apply(prob, w);
    double q = pairing(w, z);  // Rayleigh numerator at unit p' norm
    if (q < last_q - 1e-12 * std::abs(last_q)) ++res.nonmonotone;
    last_q = q;

    Field next = w;
    for (std::size_t i = 0; i < next.size(); ++i) {
      double zi = z.values[i].real();
      next.values[i] = Complex(std::pow(std::abs(zi), prob.p - 2.0) * zi, 0.0);
    }
    double ny = lp_norm(next, pp);
    if (ny == 0.0) throw DegenerateDirection("power map annihilated the iterate");
    for (Complex& zz : next.values) zz /= ny;

    // critical residual of the Nehari-scaled candidate, by homogeneity:
    // v = t w, |K v|^{p-2} K v = t^{p-1} ny next with t = q^{-1/(2-p')} at ||w|| = 1
    res.iterations = it;
    if (q > 0.0) {
      double t = std::pow(1.0 / q, 1.0 / (2.0 - pp));
      double c = std::pow(t, prob.p - 1.0) * ny / t;  // residual vs c * next
      double diff = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        double r = w.values[i].real() - c * next.values[i].real();
        diff += std::pow(std::abs(r), pp);
      }
      res.crit = std::pow(std::pow(prob.grid.spacing(), prob.grid.dim) * diff, 1.0 / pp);
      res.rayleigh = q;
      if (res.crit <= cfg.tol_crit) {
        res.w = w;
        res.converged = true;
        return res;
      }
    }

    // stagnation guard: the iteration has stopped moving (up to sign) without
    // meeting the residual tolerance; report the best state honestly
    double dplus = 0.0, dminus = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double a = next.values[i].real(), b = w.values[i].real();
      dplus += std::pow(std::abs(a - b), pp);
      dminus += std::pow(std::abs(a + b), pp);
    }
    if (std::pow(std::min(dplus, dminus), 1.0 / pp) < 1e-13) {
      res.w = next;
      return res;
    }

    w = next;
    if (sector != 0) {
      Field r = reflect(w);
      for (std::size_t i = 0; i < w.size(); ++i)
        w.values[i] = 0.5 * (w.values[i] + static_cast<double>(sector) * r.values[i]);
      double np = lp_norm(w, pp);
      if (np == 0.0) throw DegenerateDirection("parity projection annihilated the iterate");
      for (Complex& z : w.values) z /= np;
    }
    if (prob.scenario_class == ScenarioClass::periodic && cfg.recenter_every > 0 &&
        it % cfg.recenter_every == 0 && !cfg.period_steps.empty()) {
      auto [shifted, s] = recenter(w, cfg.recenter_rho, cfg.period_steps, pp);
      w = shifted;
      for (int a = 0; a < prob.grid.dim; ++a) res.shift[a] += s[a];
    }
  }
  res.w = w;
  return res;
}

inline SolutionRecord finalize_record(const DualProblem& prob, const RunResult& run,
                                      unsigned seed) {
  SolutionRecord rec;
  const double pp = prob.p_prime();
  double t = nehari_scale(prob, run.w);
  rec.v_star = run.w;
  for (Complex& z : rec.v_star.values) z *= t;
  rec.v_star.realness_tag = true;
  rec.J_value = j_eval(prob, rec.v_star);
  rec.crit_residual = run.crit;
  rec.rayleigh = run.rayleigh;
  rec.iterations = run.iterations;
  rec.nonmonotone_steps = run.nonmonotone;
  rec.lattice_shift = run.shift;
  rec.seed_used = seed;
  rec.converged = run.converged;
  // primal recovery u = Re R (Q^{1/p} v)
  Field src = rec.v_star;
  for (std::size_t i = 0; i < src.size(); ++i)
    src.values[i] = Complex(prob.q_root.values[i].real() * rec.v_star.values[i].real(), 0.0);
  src.realness_tag = true;
  rec.u_star = real_resolvent_apply(src, prob.method, prob.schedule);
  PdeResidual pr = pde_residual(prob, rec.u_star);
  rec.pde_residual_l2 = pr.rel_l2;
  rec.pde_residual_max = pr.rel_max;
  return rec;
}

}  // namespace detail

// Power iteration to the mountain-pass candidate: restarts from fresh random
// directions, keeps the smallest converged positive level.
inline SolutionRecord solve_mountain_pass(const DualProblem& prob, const SolverConfig& cfg) {
  cfg.validate();
  std::optional<SolutionRecord> best;
  std::optional<SolutionRecord> fallback;
  for (int run = 0; run <= cfg.restart_count; ++run) {
    Field seed_field = (run == 0)
                           ? detail::gaussian_bump_seed(prob.grid)
                           : detail::random_seed_field(prob.grid, prob.Q, cfg.seed + run);
    detail::RunResult res;
    try {
      res = detail::iterate_run(prob, cfg, seed_field, nullptr);
    } catch (const DegenerateDirection&) {
      continue;
    }
    if (res.rayleigh <= 0.0) continue;
    SolutionRecord rec = detail::finalize_record(prob, res, cfg.seed + run);
    if (res.converged && rec.J_value > 0.0) {
      if (!best || rec.J_value < best->J_value) best = rec;
    } else if (!fallback || rec.crit_residual < fallback->crit_residual) {
      fallback = rec;
    }
  }
  if (best) return *best;
  if (fallback) return *fallback;  // converged = false: caller maps to NotConverged
  throw NotConverged("no run produced a usable direction");
}

// Continue the power iteration from a saved iterate (checkpoint resume). The
// iteration state is the direction alone, so resuming is equivalent to never
// having stopped.
inline SolutionRecord solve_continue(const DualProblem& prob, const SolverConfig& cfg,
                                     const Field& v0) {
  cfg.validate();
  detail::RunResult res = detail::iterate_run(prob, cfg, v0, nullptr);
  if (res.rayleigh <= 0.0) throw NotConverged("resumed direction has nonpositive form");
  return detail::finalize_record(prob, res, cfg.seed);
}

struct MultiplicityOutcome {
  std::vector<SolutionRecord> records;  // sorted by J ascending
  std::vector<double> bump_pairings;    // <z_i, K_p z_i> for the seed bumps
  bool complete = false;
};

namespace detail {

// Lemma-style bump geometry: m balls of diameter tau = delta/m^2 separated by
// delta/m along the x1 axis, inside the effective support of Q.
inline std::vector<Field> make_bumps(const DualProblem& prob, int m) {
  const GridSpec& g = prob.grid;
  double qmax = max_abs_real(prob.Q);
  // effective support radius of Q about the origin
  double rq = 0.0;
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < prob.Q.size(); ++i) {
    if (prob.Q.values[i].real() > 1e-6 * qmax) {
      unflatten(g, i, idx.data());
      rq = std::max(rq, node_radius(g, idx.data()));
    }
  }
  // largest delta such that the bump train spans at most the support diameter
  // span = m tau + (m-1) sep with tau = delta/m^2, sep = delta/m
  double span_per_delta = 1.0 / m + (m - 1.0) / m;
  double delta = 2.0 * rq / span_per_delta * 0.9;
  double tau = delta / (m * m), sep = delta / m;
  std::vector<Field> bumps;
  for (int b = 0; b < m; ++b) {
    double c1 = (b - 0.5 * (m - 1)) * (tau + sep);
    Field z = Field::zeros(g);
    for (std::size_t i = 0; i < z.size(); ++i) {
      unflatten(g, i, idx.data());
      double r2 = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        double d = g.coord(idx[a]) - (a == 0 ? c1 : 0.0);
        r2 += d * d;
      }
      double s = 2.0 * std::sqrt(r2) / tau;  // 1 at the ball boundary
      z.values[i] = s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    }
    z.realness_tag = true;
    double nz = lp_norm(z, prob.p_prime());
    if (nz == 0.0) throw DegenerateDirection("bump too narrow for the grid");
    for (Complex& zz : z.values) zz /= nz;
    bumps.push_back(std::move(z));
  }
  return bumps;
}

}  // namespace detail

// Multi-solution search seeded by disjoint bumps, with Gram-Schmidt deflation in
// the K_p bilinear form against previously found critical points.
inline MultiplicityOutcome solve_multiplicity(const DualProblem& prob, const SolverConfig& cfg) {
  cfg.validate();
  if (prob.scenario_class != ScenarioClass::decaying)
    throw InvalidScenario("multiplicity search requires a decaying-Q scenario");
  const int m = cfg.deflation_count;
  MultiplicityOutcome out;
  std::vector<Field> bumps = detail::make_bumps(prob, std::max(m, 1));
  for (const Field& z : bumps) out.bump_pairings.push_back(pairing(z, kp_apply(prob, z)));

  SolutionRecord ground = solve_mountain_pass(prob, cfg);
  out.records.push_back(ground);
  const double pp = prob.p_prime();

  std::vector<Field> found = {ground.v_star};
  for (int k = 1; k < m; ++k) {
    // alternating-sign bump combination as the next seed
    Field seed_field = Field::zeros(prob.grid);
    for (std::size_t b = 0; b < bumps.size(); ++b)
      for (std::size_t i = 0; i < seed_field.size(); ++i)
        seed_field.values[i] += ((b + k) % 2 == 0 ? 1.0 : -1.0) * bumps[b].values[i];
    seed_field.realness_tag = true;
    try {
      detail::RunResult res = detail::iterate_run(prob, cfg, seed_field, &found);
      if (res.rayleigh <= 0.0) continue;
      SolutionRecord rec = detail::finalize_record(prob, res, cfg.seed);
      // distinctness up to sign
      bool distinct = true;
      for (const SolutionRecord& prev : out.records) {
        double dplus = 0.0, dminus = 0.0;
        for (std::size_t i = 0; i < rec.v_star.size(); ++i) {
          double a = rec.v_star.values[i].real(), b = prev.v_star.values[i].real();
          dplus += std::pow(std::abs(a - b), pp);
          dminus += std::pow(std::abs(a + b), pp);
        }
        double hn = std::pow(prob.grid.spacing(), prob.grid.dim);
        double dist = std::pow(hn * std::min(dplus, dminus), 1.0 / pp) /
                      lp_norm(prev.v_star, pp);
        if (dist <= 10.0 * cfg.tol_crit) distinct = false;
      }
      if (distinct && rec.J_value > 0.0) {
        out.records.push_back(rec);
        found.push_back(rec.v_star);
      }
    } catch (const DegenerateDirection&) {
      continue;
    } catch (const NonpositiveQuadraticForm&) {
      continue;
    }
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const SolutionRecord& a, const SolutionRecord& b) { return a.J_value < b.J_value; });
  out.complete = static_cast<int>(out.records.size()) == m;
  return out;
}

}  // namespace nlh
