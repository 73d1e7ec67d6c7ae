#pragma once

#include <cmath>
#include <vector>

#include "nlh/grid.hpp"
#include "nlh/resolvent.hpp"

namespace nlh {

enum class ScenarioClass { decaying, periodic };

// Weight Q, exponent p, and the resolvent configuration that together define
// K_p v = Q^{1/p} Re R (Q^{1/p} v) and the dual functional J.
struct DualProblem {
  GridSpec grid;
  Field Q;
  double p = 5.0;
  ScenarioClass scenario_class = ScenarioClass::decaying;
  AbsorptionSchedule schedule;
  ResolventMethod method = ResolventMethod::multiplier;
  Field q_root;  // Q^{1/p}, precomputed

  double p_prime() const { return p / (p - 1.0); }

  static DualProblem make(const GridSpec& grid, const Field& Q, double p,
                          ScenarioClass cls, const AbsorptionSchedule& sched,
                          ResolventMethod method = ResolventMethod::multiplier) {
    grid.validate();
    if (!(Q.grid == grid)) throw GridMismatch("Q lives on a different grid");
    require_real(Q, "Q must be a real field");
    double qmax = 0.0;
    for (const Complex& z : Q.values) {
      if (z.real() < 0.0) throw InvalidScenario("Q must be nonnegative");
      qmax = std::max(qmax, z.real());
    }
    if (qmax == 0.0) throw InvalidScenario("Q must not vanish identically");
    const int N = grid.dim;
    const double p_lower = 2.0 * (N + 1) / (N - 1);
    const double p_upper = 2.0 * N / (N - 2);
    const bool ok = (cls == ScenarioClass::periodic) ? (p > p_lower && p < p_upper)
                                                     : (p >= p_lower && p < p_upper);
    if (!ok) throw InvalidScenario("p outside the admissible window for this scenario class");
    double pp = p / (p - 1.0);
    if (!(pp > 1.0 && pp < 2.0)) throw InvalidExponent("p' must lie in (1, 2)");
    sched.validate(grid);

    DualProblem prob;
    prob.grid = grid;
    prob.Q = Q;
    prob.p = p;
    prob.scenario_class = cls;
    prob.schedule = sched;
    prob.method = method;
    prob.q_root = Q;
    for (Complex& z : prob.q_root.values)
      z = Complex(std::pow(z.real(), 1.0 / p), 0.0);
    prob.q_root.realness_tag = true;
    return prob;
  }
};

// Birman-Schwinger operator K_p v = Q^{1/p} Re R (Q^{1/p} v); linear, symmetric.
inline Field kp_apply(const DualProblem& prob, const Field& v) {
  if (!(v.grid == prob.grid)) throw GridMismatch("kp_apply: grid mismatch");
  require_real(v, "kp_apply expects a real field");
  Field w = v;
  for (std::size_t i = 0; i < w.size(); ++i)
    w.values[i] = Complex(prob.q_root.values[i].real() * v.values[i].real(), 0.0);
  w.realness_tag = true;
  Field r = real_resolvent_apply(w, prob.method, prob.schedule);
  for (std::size_t i = 0; i < r.size(); ++i)
    r.values[i] = Complex(prob.q_root.values[i].real() * r.values[i].real(), 0.0);
  r.realness_tag = true;
  return r;
}

// J(v) = ||v||_{p'}^{p'} / p' - (1/2) <v, K_p v>.
inline double j_eval(const DualProblem& prob, const Field& v) {
  const double pp = prob.p_prime();
  double n = lp_norm(v, pp);
  return std::pow(n, pp) / pp - 0.5 * pairing(v, kp_apply(prob, v));
}

// J'(v) = |v|^{p'-2} v - K_p v (pointwise on real fields; 0 at v = 0).
inline Field j_grad(const DualProblem& prob, const Field& v) {
  const double pp = prob.p_prime();
  Field g = kp_apply(prob, v);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double vi = v.values[i].real();
    double mono = (vi == 0.0) ? 0.0 : std::pow(std::abs(vi), pp - 2.0) * vi;
    g.values[i] = Complex(mono - g.values[i].real(), 0.0);
  }
  g.realness_tag = true;
  return g;
}

// Maximizer of t -> J(t w) along a ray with positive quadratic form:
// t* = (||w||_{p'}^{p'} / <w, K_p w>)^{1/(2 - p')}.
inline double nehari_scale(const DualProblem& prob, const Field& w) {
  const double q = pairing(w, kp_apply(prob, w));
  if (q <= 0.0)
    throw NonpositiveQuadraticForm("nehari_scale requires <w, K_p w> > 0");
  const double pp = prob.p_prime();
  return std::pow(std::pow(lp_norm(w, pp), pp) / q, 1.0 / (2.0 - pp));
}

}  // namespace nlh
