#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlh/dual.hpp"
#include "nlh/io.hpp"
#include "nlh/solver.hpp"

namespace nlh {

struct QSpec {
  std::string type;  // gaussian | periodic_cosine | indicator_ball | file
  // gaussian
  double amplitude = 1.0;
  double sigma = 1.0;
  std::vector<double> center;
  // periodic_cosine: Q = base + sum_t amp_t * prod_a cos(2 pi m_a x_a / T)
  double base = 0.0;
  struct CosTerm {
    double amplitude = 0.0;
    std::vector<int> mode;
    double period = 0.0;
  };
  std::vector<CosTerm> terms;
  // indicator_ball
  double radius = 1.0;
  // file
  std::string path;
};

struct Scenario {
  std::string name;
  int dim = 3;
  double half_width = 12.0;
  int points_per_axis = 48;
  double p = 5.0;
  ScenarioClass scenario_class = ScenarioClass::decaying;
  QSpec q;
  AbsorptionSchedule schedule;
  SolverConfig solver;
  std::string mode = "mountain_pass";  // or "multiplicity"
  int farfield_mesh_order = 3;
  std::vector<double> farfield_radii;
  std::vector<double> decay_window;  // [r_min, r_max]
  std::uint64_t hash = 0;            // canonical-text hash, set by parse
  std::uint64_t problem_hash = 0;    // hash of the physics-defining subset only

  GridSpec grid() const { return GridSpec{dim, half_width, points_per_axis}; }
};

inline Field build_q(const Scenario& sc) {
  GridSpec g = sc.grid();
  g.validate();
  Field Q = Field::zeros(g);
  Q.realness_tag = true;
  std::vector<int> idx(g.dim);
  std::vector<double> x(g.dim);
  if (sc.q.type == "file") {
    Field f = load_field(sc.q.path);
    if (!(f.grid == g)) throw InvalidScenario("Q file grid does not match the scenario grid");
    require_real(f, "Q must be real");
    return f;
  }
  for (std::size_t i = 0; i < Q.size(); ++i) {
    unflatten(g, i, idx.data());
    for (int a = 0; a < g.dim; ++a) x[a] = g.coord(idx[a]);
    double v = 0.0;
    if (sc.q.type == "gaussian") {
      double r2 = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        double d = x[a] - (sc.q.center.empty() ? 0.0 : sc.q.center[a]);
        r2 += d * d;
      }
      v = sc.q.amplitude * std::exp(-r2 / (2.0 * sc.q.sigma * sc.q.sigma));
    } else if (sc.q.type == "periodic_cosine") {
      v = sc.q.base;
      for (const QSpec::CosTerm& t : sc.q.terms) {
        double prod = t.amplitude;
        for (int a = 0; a < g.dim; ++a)
          prod *= std::cos(2.0 * std::numbers::pi * t.mode[a] * x[a] / t.period);
        v += prod;
      }
    } else if (sc.q.type == "indicator_ball") {
      double r2 = 0.0;
      for (int a = 0; a < g.dim; ++a) r2 += x[a] * x[a];
      v = r2 <= sc.q.radius * sc.q.radius ? sc.q.amplitude : 0.0;
    } else {
      throw InvalidScenario("unknown Q type: " + sc.q.type);
    }
    Q.values[i] = v;
  }
  return Q;
}

inline Scenario parse_scenario_checked(const nlohmann::json& j) {
  if (j.contains("k"))
    throw InvalidScenario(
        "the wavenumber is fixed to 1; rescale lengths instead of setting \"k\"");
  Scenario sc;
  sc.name = j.value("name", "unnamed");
  sc.dim = j.value("dim", 3);
  const auto& grid = j.at("grid");
  sc.half_width = grid.at("half_width").get<double>();
  sc.points_per_axis = grid.at("points_per_axis").get<int>();
  sc.p = j.at("p").get<double>();
  std::string cls = j.value("scenario_class", "decaying");
  if (cls == "decaying")
    sc.scenario_class = ScenarioClass::decaying;
  else if (cls == "periodic")
    sc.scenario_class = ScenarioClass::periodic;
  else
    throw InvalidScenario("scenario_class must be decaying or periodic");

  const auto& q = j.at("Q");
  sc.q.type = q.at("type").get<std::string>();
  if (sc.q.type == "gaussian") {
    sc.q.amplitude = q.at("amplitude").get<double>();
    sc.q.sigma = q.at("sigma").get<double>();
    if (q.contains("center")) sc.q.center = q.at("center").get<std::vector<double>>();
    if (sc.q.amplitude < 0.0) throw InvalidScenario("Q must be nonnegative");
    if (sc.q.sigma <= 0.0) throw InvalidScenario("gaussian sigma must be > 0");
  } else if (sc.q.type == "periodic_cosine") {
    sc.q.base = q.at("base").get<double>();
    double amp_sum = 0.0;
    for (const auto& t : q.at("terms")) {
      QSpec::CosTerm term;
      term.amplitude = t.at("amplitude").get<double>();
      term.mode = t.at("mode").get<std::vector<int>>();
      term.period = t.at("period").get<double>();
      if (static_cast<int>(term.mode.size()) != sc.dim)
        throw InvalidScenario("cosine mode length must equal dim");
      if (term.period <= 0.0) throw InvalidScenario("cosine period must be > 0");
      // the torus must hold an integer number of periods
      double ratio = 2.0 * sc.half_width / term.period;
      if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw InvalidScenario("cosine period must divide the box");
      amp_sum += std::abs(term.amplitude);
      sc.q.terms.push_back(term);
    }
    if (sc.q.base < amp_sum)
      throw InvalidScenario("Q must be nonnegative: base must dominate the amplitude sum");
  } else if (sc.q.type == "indicator_ball") {
    sc.q.amplitude = q.at("amplitude").get<double>();
    sc.q.radius = q.at("radius").get<double>();
    if (sc.q.amplitude < 0.0) throw InvalidScenario("Q must be nonnegative");
    if (sc.q.radius <= 0.0) throw InvalidScenario("ball radius must be > 0");
  } else if (sc.q.type == "file") {
    sc.q.path = q.at("path").get<std::string>();
  } else {
    throw InvalidScenario("unknown Q type: " + sc.q.type);
  }

  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    sc.schedule.eps0 = s.value("eps0", sc.schedule.eps0);
    sc.schedule.levels = s.value("levels", sc.schedule.levels);
    sc.schedule.ratio = s.value("ratio", sc.schedule.ratio);
    sc.schedule.extrapolation_order = s.value("order", sc.schedule.extrapolation_order);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    sc.solver.tol_crit = s.value("tol_crit", sc.solver.tol_crit);
    sc.solver.max_iter = s.value("max_iter", sc.solver.max_iter);
    sc.solver.recenter_every = s.value("recenter_every", sc.solver.recenter_every);
    sc.solver.deflation_count = s.value("deflation_count", sc.solver.deflation_count);
    sc.solver.restart_count = s.value("restart_count", sc.solver.restart_count);
    sc.solver.recenter_rho = s.value("recenter_rho", sc.solver.recenter_rho);
    sc.solver.seed = s.value("seed", sc.solver.seed);
  }
  sc.solver.seed = j.value("seed", sc.solver.seed);
  sc.mode = j.value("mode", "mountain_pass");
  if (sc.mode != "mountain_pass" && sc.mode != "multiplicity")
    throw InvalidScenario("mode must be mountain_pass or multiplicity");
  sc.farfield_mesh_order = j.value("farfield_mesh_order", 3);
  if (j.contains("farfield_radii"))
    sc.farfield_radii = j.at("farfield_radii").get<std::vector<double>>();
  if (j.contains("decay_window"))
    sc.decay_window = j.at("decay_window").get<std::vector<double>>();
  if (!sc.decay_window.empty() && sc.decay_window.size() != 2)
    throw InvalidScenario("decay_window must be [r_min, r_max]");

  // periodic scenarios recenter on the Q period lattice
  if (sc.scenario_class == ScenarioClass::periodic) {
    if (sc.q.type != "periodic_cosine" && sc.q.type != "file")
      throw InvalidScenario("periodic scenarios need a periodic Q");
    if (sc.q.type == "periodic_cosine") {
      GridSpec g = sc.grid();
      double period = sc.q.terms.empty() ? 2.0 * sc.half_width : sc.q.terms[0].period;
      double steps = period / g.spacing();
      if (std::abs(steps - std::round(steps)) > 1e-9)
        throw InvalidScenario("Q period must be an integer number of grid steps");
      sc.solver.period_steps.assign(sc.dim, static_cast<int>(std::round(steps)));
    }
  }

  sc.grid().validate();
  sc.solver.validate();
  sc.hash = detail::fnv1a(j.dump());
  // the problem hash ignores stopping parameters so an interrupted run can be
  // resumed with a larger iteration budget but never with different physics
  nlohmann::json canon{{"dim", sc.dim},
                       {"half_width", sc.half_width},
                       {"points_per_axis", sc.points_per_axis},
                       {"p", sc.p},
                       {"scenario_class", cls},
                       {"Q", j.at("Q")},
                       {"mode", sc.mode},
                       {"eps0", sc.schedule.eps0},
                       {"levels", sc.schedule.levels},
                       {"ratio", sc.schedule.ratio},
                       {"order", sc.schedule.extrapolation_order},
                       {"seed", sc.solver.seed}};
  sc.problem_hash = detail::fnv1a(canon.dump());
  return sc;
}

inline Scenario parse_scenario(const nlohmann::json& j) {
  try {
    return parse_scenario_checked(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScenario(std::string("scenario field error: ") + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScenario(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScenario(std::string("scenario field error: ") + e.what());
  }
}

inline DualProblem make_problem(const Scenario& sc) {
  return DualProblem::make(sc.grid(), build_q(sc), sc.p, sc.scenario_class, sc.schedule);
}

}  // namespace nlh
