#pragma once

// Command layer shared by the CLI and the test suites: each run_* function
// realizes its inputs from a RunConfig, executes, writes the artifacts into
// the output directory and returns the in-memory results.

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bladeopt/config.hpp"
#include "bladeopt/io.hpp"

namespace bladeopt {

struct CommandOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int threads = 1;
};

namespace cmd_detail {
inline RunConfig apply_overrides(RunConfig c, const CommandOverrides& o) {
  if (o.seed) c.ga.rng_seed = *o.seed;
  if (o.out_dir) c.output_dir = *o.out_dir;
  return c;
}

inline std::filesystem::path prepare_output(const RunConfig& c) {
  std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / "effective_config.json", std::ios::binary);
  if (!os) throw ValidationError("cannot write effective config into " + c.output_dir);
  os << config_to_json(c).dump(2) << "\n";
  return dir;
}
}  // namespace cmd_detail

struct SolveReport {
  double max_w = 0.0;  // m
  std::filesystem::path vtk_path;
  std::filesystem::path csv_path;
};

/// One static solve of the configured mesh + layup under the configured
/// uniform pressure (or per-element pressure map).
inline SolveReport run_solve(const RunConfig& config, const CommandOverrides& o = {}) {
  const RunConfig c = cmd_detail::apply_overrides(config, o);
  const Mesh mesh = make_mesh(c);
  const Layup layup = explicit_layup(c);
  SolverContext ctx(mesh, c.fem);
  ctx.set_laminate(build_stiffness(layup));
  Eigen::VectorXd f;
  if (!c.pressure_map_csv.empty()) {
    std::ifstream is(c.pressure_map_csv);
    if (!is) throw ValidationError("load.pressure_map_csv: cannot open " + c.pressure_map_csv);
    f = pressure_load(mesh, parse_pressure_map_csv(is, mesh.elements.size()));
  } else {
    f = pressure_load(mesh, c.load_pressure);
  }
  const DisplacementField d = ctx.solve(f);

  const auto dir = cmd_detail::prepare_output(c);
  SolveReport rep;
  rep.max_w = max_transverse_deflection(d);
  rep.vtk_path = dir / "solution.vtk";
  rep.csv_path = dir / "displacement.csv";
  write_vtk(rep.vtk_path.string(), mesh, d);
  std::ostringstream csv;
  write_displacement_csv(csv, mesh, d);
  write_text_file(rep.csv_path.string(), csv.str());
  return rep;
}

struct ConvergeReport {
  std::vector<ConvergenceRow> rows;
  std::vector<std::string> warnings;
  std::filesystem::path csv_path;
};

/// Sweep the configured node arrays on the rectangular plate and flag any
/// non-monotone refinement behavior.
inline ConvergeReport run_converge(const RunConfig& config, const CommandOverrides& o = {}) {
  const RunConfig c = cmd_detail::apply_overrides(config, o);
  if (c.mesh_source.kind != MeshSource::Kind::rect)
    throw ValidationError("converge: mesh.rect is required");
  std::vector<std::array<int, 2>> sweeps = c.converge_nodes;
  if (sweeps.empty()) sweeps.push_back({c.mesh_source.nx, c.mesh_source.ny});
  const Layup layup = explicit_layup(c);
  const LaminateStiffness lam = build_stiffness(layup);

  ConvergeReport rep;
  for (const auto& [nx, ny] : sweeps) {
    const Mesh mesh = gen_rect_mesh(c.mesh_source.length, c.mesh_source.width, nx, ny);
    SolverContext ctx(mesh, c.fem);
    ctx.set_laminate(lam);
    const DisplacementField d = ctx.solve(pressure_load(mesh, c.load_pressure));
    rep.rows.push_back({nx, ny, max_transverse_deflection(d)});
  }
  for (size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].max_w < rep.rows[i - 1].max_w)
      rep.warnings.push_back("non-monotone refinement between sweep " + std::to_string(i - 1) +
                             " and " + std::to_string(i));

  const auto dir = cmd_detail::prepare_output(c);
  rep.csv_path = dir / "convergence.csv";
  std::ostringstream csv;
  write_convergence_csv(csv, rep.rows);
  write_text_file(rep.csv_path.string(), csv.str());
  return rep;
}

struct OptimizeReport {
  OracleResult oracle;
  OptimizationResult ga;
  std::vector<ThicknessStudyRow> study;  // non-empty when a study was configured
  std::filesystem::path history_path;
  std::filesystem::path layup_path;
};

/// Oracle lower bound first, then the GA (or the configured thickness
/// study). Writes the per-generation history and the best layup in the
/// config layup syntax.
inline OptimizeReport run_optimize(const RunConfig& config, const CommandOverrides& o = {}) {
  const RunConfig c = cmd_detail::apply_overrides(config, o);
  const Mesh mesh = make_mesh(c);
  OptimizationProblem problem = ga_problem(c, mesh);

  OptimizeReport rep;
  rep.oracle = oracle_optimum(problem.schedule);
  const auto dir = cmd_detail::prepare_output(c);

  if (!c.thickness_rows.empty()) {
    rep.study = thickness_study(problem, c.thickness_rows, c.ga, o.threads);
    std::ostringstream csv;
    csv << "layers,layer_thickness_um,total_thickness_mm,best_rad\n";
    for (const auto& r : rep.study)
      csv << r.layers << "," << fmt_num(r.layer_thickness * 1e6) << ","
          << fmt_num(r.total_thickness * 1e3) << "," << fmt_num(r.best_objective) << "\n";
    rep.history_path = dir / "thickness_study.csv";
    write_text_file(rep.history_path.string(), csv.str());
    return rep;
  }

  rep.ga = run_ga(problem, c.ga, o.threads);
  rep.history_path = dir / "history.csv";
  std::ostringstream hist;
  write_history_csv(hist, rep.ga);
  write_text_file(rep.history_path.string(), hist.str());

  Json layup = Json::object();
  Json angles = Json::array();
  for (const Ply& p : rep.ga.best_layup.plies) angles.push_back(rad2deg(p.angle));
  layup["angles_deg"] = angles;
  layup["symmetric"] = true;
  layup["ply_thickness_um"] = problem.ply_thickness * 1e6;
  rep.layup_path = dir / "best_layup.json";
  write_text_file(rep.layup_path.string(), layup.dump(2) + "\n");
  return rep;
}

struct UnloadedReport {
  UnloadedResult result;
  std::filesystem::path trace_path;
};

/// Unloaded-shape iteration for the configured explicit layup under the
/// cruise pressure. A divergence still writes the partial trace before the
/// error propagates.
inline UnloadedReport run_unloaded(const RunConfig& config, const CommandOverrides& o = {}) {
  const RunConfig c = cmd_detail::apply_overrides(config, o);
  const Mesh mesh = make_mesh(c);
  const Layup layup = explicit_layup(c);
  const auto dir = cmd_detail::prepare_output(c);

  UnloadedReport rep;
  rep.trace_path = dir / "unloaded_trace.csv";
  LoadCase cruise{c.unloaded.cruise_pressure, 1.0, "cruise"};
  try {
    rep.result = iterate_unloaded_shape(mesh, layup, cruise, c.unloaded.target_tip_pitch,
                                        c.unloaded.model, c.unloaded.tol,
                                        c.unloaded.max_iterations, c.unloaded.init, c.fem);
  } catch (const DivergenceError& e) {
    std::ostringstream csv;
    write_trace_csv(csv, e.trace);
    write_text_file(rep.trace_path.string(), csv.str());
    throw;
  }
  std::ostringstream csv;
  write_trace_csv(csv, rep.result.trace);
  write_text_file(rep.trace_path.string(), csv.str());
  return rep;
}

struct ResponseReport {
  PitchResponse response;
  std::filesystem::path csv_path;
};

/// Pitch-response curve of the configured explicit layup over the schedule.
inline ResponseReport run_response(const RunConfig& config, const CommandOverrides& o = {}) {
  const RunConfig c = cmd_detail::apply_overrides(config, o);
  if (!c.schedule) throw ValidationError("schedule: missing schedule block");
  const Mesh mesh = make_mesh(c);
  const Layup layup = explicit_layup(c);
  ResponseReport rep;
  rep.response = response_curve(mesh, layup, *c.schedule, c.fem);
  const auto dir = cmd_detail::prepare_output(c);
  rep.csv_path = dir / "response.csv";
  std::ostringstream csv;
  write_response_csv(csv, rep.response);
  write_text_file(rep.csv_path.string(), csv.str());
  return rep;
}

}  // namespace bladeopt
