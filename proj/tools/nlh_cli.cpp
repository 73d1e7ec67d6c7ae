// Command-line driver: scenario-configured solves, linear checks, kernel
// splitting, diagnostics, and far-field reports with CSV/JSON exports.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlh/diagnostics.hpp"
#include "nlh/farfield.hpp"
#include "nlh/io.hpp"
#include "nlh/scenario.hpp"
#include "nlh/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nlh;

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = "out";
  int threads = 1;
  std::string resume_path;
  bool do_assert = true;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool scenario_required = true) {
  auto* s = cmd->add_option("--scenario", o.scenario_path, "scenario JSON file");
  if (scenario_required) s->required();
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--threads", o.threads, "worker thread count (results are thread-invariant)");
  cmd->add_option("--resume", o.resume_path, "checkpoint to resume from");
  cmd->add_flag("--assert,!--no-assert", o.do_assert, "evaluate configured assertions");
}

int fail_invalid(const std::vector<std::string>& errors) {
  json out{{"errors", errors}};
  std::printf("%s\n", out.dump(2).c_str());
  return 2;
}

std::string hex_hash(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::string text = j.dump(2);
  detail::atomic_write(path, text.data(), text.size());
}

json record_json(const SolutionRecord& rec) {
  return json{{"J_value", rec.J_value},
              {"crit_residual", rec.crit_residual},
              {"pde_residual_l2", rec.pde_residual_l2},
              {"pde_residual_max", rec.pde_residual_max},
              {"rayleigh", rec.rayleigh},
              {"iterations", rec.iterations},
              {"nonmonotone_steps", rec.nonmonotone_steps},
              {"seed_used", rec.seed_used},
              {"lattice_shift", rec.lattice_shift},
              {"converged", rec.converged}};
}

void export_pattern(const fs::path& path, const FarFieldPattern& pat) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < pat.g.size(); ++i) {
    const Vec3& d = pat.mesh.directions[i];
    rows.push_back({d[0], d[1], d[2], pat.g[i].real(), pat.g[i].imag(), pat.mesh.weights[i]});
  }
  save_csv(path, "xi1,xi2,xi3,re_g,im_g,weight", rows);
}

void export_ladder(const fs::path& path, const std::vector<double>& radii,
                   const std::vector<double>& vals) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < radii.size(); ++i) rows.push_back({radii[i], vals[i]});
  save_csv(path, "R,error", rows);
}

// the radiating part u~ = R(Q |u|^{p-2} u)
Field outgoing_wave(const DualProblem& prob, const Field& u) {
  Field f = Field::zeros(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double ui = u.values[i].real();
    f.values[i] = prob.Q.values[i].real() * std::pow(std::abs(ui), prob.p - 2.0) * ui;
  }
  f.realness_tag = true;
  return resolvent_apply(f, prob.schedule);
}

struct AssertLog {
  std::vector<std::string> failures;
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

bool decreasing_with_slack(const std::vector<double>& v, double slack) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > (1.0 + slack) * v[k - 1]) return false;
  return true;
}

// solve + verify + export; shared by `solve` and `resume`
int run_solve(const CommonOpts& opts, bool resuming) {
  Scenario sc = load_scenario(opts.scenario_path);
  fs::create_directories(opts.out_dir);
  fs::path out(opts.out_dir);
  auto t0 = std::chrono::steady_clock::now();
  DualProblem prob = make_problem(sc);

  json report{{"scenario", sc.name},
              {"scenario_hash", hex_hash(sc.hash)},
              {"mode", sc.mode},
              {"version", kVersion},
              {"threads", opts.threads}};

  std::vector<SolutionRecord> records;
  MultiplicityOutcome multi;
  if (resuming) {
    Checkpoint ck = load_checkpoint(opts.resume_path);
    if (ck.config_hash != sc.problem_hash)
      return fail_invalid({"checkpoint was written for a different scenario configuration"});
    records.push_back(solve_continue(prob, sc.solver, ck.v));
  } else if (sc.mode == "multiplicity") {
    multi = solve_multiplicity(prob, sc.solver);
    records = multi.records;
    report["bump_pairings"] = multi.bump_pairings;
    report["complete"] = multi.complete;
    if (records.empty()) throw NotConverged("multiplicity search found no critical points");
  } else {
    records.push_back(solve_mountain_pass(prob, sc.solver));
  }

  json recs = json::array();
  for (const SolutionRecord& r : records) recs.push_back(record_json(r));
  report["records"] = recs;

  const SolutionRecord& rec = records.front();
  save_field(rec.v_star, out / "v_star.json");
  save_field(rec.u_star, out / "u_star.json");
  for (std::size_t k = 1; k < records.size(); ++k) {
    save_field(records[k].v_star, out / ("v_star_" + std::to_string(k) + ".json"));
    save_field(records[k].u_star, out / ("u_star_" + std::to_string(k) + ".json"));
  }
  Checkpoint ck;
  ck.iteration = rec.iterations;
  ck.J_value = rec.J_value;
  ck.crit_residual = rec.crit_residual;
  ck.seed = rec.seed_used;
  ck.config_hash = sc.problem_hash;
  ck.v = rec.v_star;
  save_checkpoint(ck, out / "checkpoint.json");

  double reality_defect = -1.0;
  if (sc.dim == 3 && sc.scenario_class == ScenarioClass::decaying && rec.converged) {
    SphereMesh mesh = sphere_mesh(sc.farfield_mesh_order);
    FarFieldPattern pat = compute_farfield(prob, rec.u_star, mesh);
    reality_defect = pattern_reality_defect(pat);
    export_pattern(out / "farfield.csv", pat);
    report["reality_defect"] = reality_defect;
    if (!sc.farfield_radii.empty()) {
      std::vector<double> rel = farfield_relation_error(rec.u_star, pat, sc.farfield_radii);
      std::vector<double> rad = radiation_error(outgoing_wave(prob, rec.u_star), sc.farfield_radii);
      export_ladder(out / "relation.csv", sc.farfield_radii, rel);
      export_ladder(out / "radiation.csv", sc.farfield_radii, rad);
      report["relation_errors"] = rel;
      report["radiation_errors"] = rad;
    }
    if (sc.decay_window.size() == 2) {
      SlopeFit fit = decay_exponent_fit(rec.u_star, sc.decay_window[0], sc.decay_window[1]);
      report["decay_exponent"] = fit.exponent;
      report["decay_goodness"] = fit.goodness;
    }
  }

  auto t1 = std::chrono::steady_clock::now();
  report["elapsed_seconds"] = std::chrono::duration<double>(t1 - t0).count();
  write_json(out / "report.json", report);

  if (!rec.converged) {
    std::printf("not converged: best crit_residual = %.3e (state dumped to %s)\n",
                rec.crit_residual, opts.out_dir.c_str());
    return 3;
  }

  if (opts.do_assert) {
    AssertLog log;
    json asserts = json::object();
    {
      std::ifstream in(opts.scenario_path);
      json raw;
      in >> raw;
      if (raw.contains("assertions")) asserts = raw["assertions"];
    }
    if (asserts.value("converged", false)) log.check(rec.converged, "converged");
    if (asserts.contains("crit_residual_max"))
      log.check(rec.crit_residual <= asserts["crit_residual_max"].get<double>(),
                "crit_residual_max");
    if (asserts.value("j_positive", false)) log.check(rec.J_value > 0.0, "j_positive");
    if (asserts.contains("j_identity_rtol")) {
      double pp = prob.p_prime();
      double id = (1.0 / pp - 0.5) * std::pow(lp_norm(rec.v_star, pp), pp);
      log.check(std::abs(rec.J_value - id) <=
                    asserts["j_identity_rtol"].get<double>() * std::abs(rec.J_value),
                "j_identity_rtol");
    }
    if (asserts.contains("pde_rel_l2_max"))
      log.check(rec.pde_residual_l2 <= asserts["pde_rel_l2_max"].get<double>(),
                "pde_rel_l2_max");
    if (asserts.contains("decay_exponent_min"))
      log.check(report.contains("decay_exponent") &&
                    report["decay_exponent"].get<double>() >=
                        asserts["decay_exponent_min"].get<double>(),
                "decay_exponent_min");
    if (asserts.contains("decay_exponent_max"))
      log.check(report.contains("decay_exponent") &&
                    report["decay_exponent"].get<double>() <=
                        asserts["decay_exponent_max"].get<double>(),
                "decay_exponent_max");
    if (asserts.contains("relation_decreasing_slack"))
      log.check(report.contains("relation_errors") &&
                    decreasing_with_slack(report["relation_errors"].get<std::vector<double>>(),
                                          asserts["relation_decreasing_slack"].get<double>()),
                "relation_decreasing_slack");
    if (asserts.contains("radiation_decreasing_slack"))
      log.check(report.contains("radiation_errors") &&
                    decreasing_with_slack(report["radiation_errors"].get<std::vector<double>>(),
                                          asserts["radiation_decreasing_slack"].get<double>()),
                "radiation_decreasing_slack");
    if (asserts.contains("reality_defect_max"))
      log.check(reality_defect >= 0.0 &&
                    reality_defect <= asserts["reality_defect_max"].get<double>(),
                "reality_defect_max");
    if (asserts.contains("levels"))
      log.check(static_cast<int>(records.size()) >= asserts["levels"].get<int>(), "levels");
    if (!log.failures.empty()) {
      json out_fail{{"assertion_failures", log.failures}};
      std::printf("%s\n", out_fail.dump(2).c_str());
      return 4;
    }
  }
  std::printf("ok: J = %.12g, crit_residual = %.3e\n", rec.J_value, rec.crit_residual);
  return 0;
}

int run_linear_check(const CommonOpts& opts) {
  Scenario sc = load_scenario(opts.scenario_path);
  fs::create_directories(opts.out_dir);
  fs::path out(opts.out_dir);
  GridSpec g = sc.grid();
  Field f = build_q(sc);  // the scenario's Q doubles as the test source

  // cross-validation of the two resolvent representations
  Field via_mult = resolvent_apply(f, sc.schedule);
  Field via_kern = kernel_convolve(f);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += std::norm(via_mult.values[i] - via_kern.values[i]);
    den += std::norm(via_kern.values[i]);
  }
  double cross = std::sqrt(num / den);

  json report{{"scenario", sc.name},
              {"scenario_hash", hex_hash(sc.hash)},
              {"version", kVersion},
              {"cross_rel_l2", cross}};

  std::vector<double> radii = sc.farfield_radii;
  if (radii.empty()) radii = {5.0, 7.0, 10.0, 14.0, 20.0};
  bool slope_ok = true;
  try {
    SlopeFit fit = linear_farfield_check(f, radii);
    std::vector<double> rem = linear_farfield_remainders(f, radii);
    export_ladder(out / "remainder.csv", radii, rem);
    report["remainder_exponent"] = fit.exponent;
    report["remainder_goodness"] = fit.goodness;
  } catch (const Error& e) {
    report["remainder_error"] = e.what();
    slope_ok = false;
  }
  write_json(out / "linear_check.json", report);

  if (opts.do_assert) {
    std::ifstream in(opts.scenario_path);
    json raw;
    in >> raw;
    if (raw.contains("assertions")) {
      const json& a = raw["assertions"];
      std::vector<std::string> fails;
      if (a.contains("cross_rel_l2_max") && !(cross <= a["cross_rel_l2_max"].get<double>()))
        fails.push_back("cross_rel_l2_max");
      if (a.contains("remainder_exponent_min") &&
          !(slope_ok && report["remainder_exponent"].get<double>() >=
                            a["remainder_exponent_min"].get<double>()))
        fails.push_back("remainder_exponent_min");
      if (a.contains("remainder_exponent_max") &&
          !(slope_ok && report["remainder_exponent"].get<double>() <=
                            a["remainder_exponent_max"].get<double>()))
        fails.push_back("remainder_exponent_max");
      if (!fails.empty()) {
        json out_fail{{"assertion_failures", fails}};
        std::printf("%s\n", out_fail.dump(2).c_str());
        return 4;
      }
    }
  }
  std::printf("ok: cross_rel_l2 = %.3e\n", cross);
  return 0;
}

int run_kernel_split(const CommonOpts& opts) {
  Scenario sc = load_scenario(opts.scenario_path);
  fs::create_directories(opts.out_dir);
  fs::path out(opts.out_dir);
  GridSpec g = sc.grid();
  KernelSplit split = kernel_split(g);
  save_field(split.phi1, out / "phi1.json");
  save_field(split.phi2, out / "phi2.json");
  json report{{"scenario", sc.name},
              {"scenario_hash", hex_hash(sc.hash)},
              {"version", kVersion},
              {"inner_cutoff", split.cutoff_inner},
              {"outer_cutoff", split.cutoff_outer},
              {"bound_constant", kernel_bound_constant(g.dim)}};
  write_json(out / "kernel_split.json", report);
  std::printf("ok: kernel split written to %s\n", opts.out_dir.c_str());
  return 0;
}

int run_diagnostics(const CommonOpts& opts) {
  Scenario sc = load_scenario(opts.scenario_path);
  fs::create_directories(opts.out_dir);
  fs::path out(opts.out_dir);
  GridSpec g = sc.grid();
  const double pp = sc.p / (sc.p - 1.0);

  // resolvent-bound family statistics on seeded noise
  std::mt19937_64 rng(sc.solver.seed);
  std::normal_distribution<double> dist;
  std::vector<double> ratios, big_ratios;
  std::vector<double> ladder{1.0, std::min(2.0, g.half_width / 2.0), g.half_width / 2.0};
  for (int m = 0; m < 20; ++m) {
    Field f = Field::zeros(g);
    for (Complex& z : f.values) z = dist(rng);
    f.realness_tag = true;
    ratios.push_back(resolvent_ratio(f, sc.p, sc.schedule));
    big_ratios.push_back(bigR_ratio(f, ladder, pp, sc.schedule));
  }
  RatioReport rr = make_ratio_report(ratios);
  RatioReport br = make_ratio_report(big_ratios);

  json report{{"scenario", sc.name},
              {"scenario_hash", hex_hash(sc.hash)},
              {"version", kVersion},
              {"resolvent_ratio_median", rr.median},
              {"resolvent_ratio_max", rr.max},
              {"bigR_ratio_median", br.median},
              {"bigR_ratio_max", br.max}};

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < ratios.size(); ++i)
    rows.push_back({static_cast<double>(i), ratios[i], big_ratios[i]});
  save_csv(out / "ratios.csv", "member,resolvent_ratio,bigR_ratio", rows);

  // truncated-kernel decay when the grid resolves the shell split
  try {
    KernelSplit split = kernel_split(g);
    Field fh = Field::zeros(g);
    for (std::size_t i = 0; i < fh.size(); ++i)
      fh.values[i] = psi_hat_profile(std::sqrt(freq_norm2(g, i)));
    Field f = spectral_transform(fh, TransformDirection::inverse);
    for (Complex& z : f.values) z = z.real();
    f.realness_tag = true;
    double n = lp_norm(f, pp);
    for (Complex& z : f.values) z /= n;
    std::vector<double> R_ladder;
    for (double R : {2.0, 4.0, 8.0, 16.0})
      if (R <= g.half_width / 4.0) R_ladder.push_back(R);
    SlopeFit fit = truncated_kernel_slope(sc.p, R_ladder, f, split);
    report["truncated_kernel_exponent"] = fit.exponent;
  } catch (const Error& e) {
    report["truncated_kernel_error"] = e.what();
  }
  write_json(out / "diagnostics.json", report);
  std::printf("ok: diagnostics written to %s\n", opts.out_dir.c_str());
  return 0;
}

int run_farfield(const CommonOpts& opts) {
  Scenario sc = load_scenario(opts.scenario_path);
  if (opts.resume_path.empty())
    return fail_invalid({"farfield requires --resume pointing at a solve checkpoint"});
  fs::create_directories(opts.out_dir);
  fs::path out(opts.out_dir);
  DualProblem prob = make_problem(sc);
  Checkpoint ckpt = load_checkpoint(opts.resume_path);
  if (ckpt.config_hash != sc.problem_hash)
    return fail_invalid({"checkpoint was written for a different scenario configuration"});
  Field src = ckpt.v;
  for (std::size_t i = 0; i < src.size(); ++i)
    src.values[i] =
        Complex(prob.q_root.values[i].real() * ckpt.v.values[i].real(), 0.0);
  src.realness_tag = true;
  Field u = real_resolvent_apply(src, prob.method, prob.schedule);

  SphereMesh mesh = sphere_mesh(sc.farfield_mesh_order);
  FarFieldPattern pat = compute_farfield(prob, u, mesh);
  export_pattern(out / "farfield.csv", pat);
  json report{{"scenario", sc.name},
              {"scenario_hash", hex_hash(sc.hash)},
              {"version", kVersion},
              {"reality_defect", pattern_reality_defect(pat)}};
  if (!sc.farfield_radii.empty()) {
    std::vector<double> rel = farfield_relation_error(u, pat, sc.farfield_radii);
    export_ladder(out / "relation.csv", sc.farfield_radii, rel);
    report["relation_errors"] = rel;
  }
  write_json(out / "farfield.json", report);
  std::printf("ok: farfield written to %s\n", opts.out_dir.c_str());
  return 0;
}

int dispatch(int (*fn)(const CommonOpts&), const CommonOpts& opts) {
  try {
    return fn(opts);
  } catch (const NotConverged& e) {
    std::printf("not converged: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    return fail_invalid({e.what()});
  } catch (const std::exception& e) {
    return fail_invalid({e.what()});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlinear Helmholtz standing-wave solver"};
  app.require_subcommand(1);

  CommonOpts solve_o, linear_o, split_o, diag_o, far_o, resume_o;
  CLI::App* solve = app.add_subcommand("solve", "run a scenario end to end");
  add_common(solve, solve_o);
  CLI::App* linear = app.add_subcommand("linear-check", "linear asymptotics and cross-validation");
  add_common(linear, linear_o);
  CLI::App* split = app.add_subcommand("kernel-split", "compute and export the kernel split");
  add_common(split, split_o);
  CLI::App* diag = app.add_subcommand("diagnostics", "bound ratios and truncated-kernel decay");
  add_common(diag, diag_o);
  CLI::App* far = app.add_subcommand("farfield", "far-field pattern from a checkpoint");
  add_common(far, far_o);
  CLI::App* resume = app.add_subcommand("resume", "continue a solve from a checkpoint");
  add_common(resume, resume_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (solve->parsed()) {
    if (!solve_o.resume_path.empty())
      return dispatch([](const CommonOpts& o) { return run_solve(o, true); }, solve_o);
    return dispatch([](const CommonOpts& o) { return run_solve(o, false); }, solve_o);
  }
  if (linear->parsed()) return dispatch(run_linear_check, linear_o);
  if (split->parsed()) return dispatch(run_kernel_split, split_o);
  if (diag->parsed()) return dispatch(run_diagnostics, diag_o);
  if (far->parsed()) return dispatch(run_farfield, far_o);
  if (resume->parsed()) {
    if (resume_o.resume_path.empty())
      return fail_invalid({"resume requires --resume pointing at a checkpoint"});
    return dispatch([](const CommonOpts& o) { return run_solve(o, true); }, resume_o);
  }
  return 2;
}
