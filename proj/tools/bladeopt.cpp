// Command-line front end: solve / converge / optimize / unloaded / response
// over a JSON run configuration.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

#include "bladeopt/commands.hpp"

namespace {

using namespace bladeopt;

int dispatch(const std::string& command, const RunConfig& config, const CommandOverrides& o) {
  if (command == "solve") {
    const SolveReport rep = run_solve(config, o);
    std::printf("max |w| = %.6g mm\n", rep.max_w * 1e3);
    std::printf("wrote %s, %s\n", rep.vtk_path.string().c_str(), rep.csv_path.string().c_str());
  } else if (command == "converge") {
    const ConvergeReport rep = run_converge(config, o);
    std::printf("nx x ny    max |w| (mm)\n");
    for (const auto& r : rep.rows) std::printf("%3d x %-3d  %.6g\n", r.nx, r.ny, r.max_w * 1e3);
    for (const auto& w : rep.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("wrote %s\n", rep.csv_path.string().c_str());
  } else if (command == "optimize") {
    const OptimizeReport rep = run_optimize(config, o);
    std::printf("oracle lower bound: f* = %.6g deg (%.6g rad), slope %.6g deg/kPa\n",
                rad2deg(rep.oracle.objective), rep.oracle.objective,
                rad2deg(rep.oracle.slope) * 1e3);
    if (!rep.study.empty()) {
      std::printf("layers  thk(um)  total(mm)  best f (rad)\n");
      for (const auto& r : rep.study)
        std::printf("%5d  %7.4g  %8.4g  %.6g\n", r.layers, r.layer_thickness * 1e6,
                    r.total_thickness * 1e3, r.best_objective);
    } else {
      std::printf("GA best: f = %.6g deg (%.6g rad) after %d generations, %ld evaluations\n",
                  rad2deg(rep.ga.best_objective), rep.ga.best_objective, rep.ga.generations_run,
                  rep.ga.evaluations);
    }
    std::printf("wrote %s\n", rep.history_path.string().c_str());
  } else if (command == "unloaded") {
    const UnloadedReport rep = run_unloaded(config, o);
    std::printf("converged in %zu iteration(s): unloaded tip pitch %.4g deg\n",
                rep.result.trace.rows.size(), rad2deg(rep.result.unloaded_tip_pitch));
    std::printf("wrote %s\n", rep.trace_path.string().c_str());
  } else if (command == "response") {
    const ResponseReport rep = run_response(config, o);
    std::printf("deltaP (kPa)  dphi (deg)  rake (mm)\n");
    for (const auto& p : rep.response.points)
      std::printf("%10.4g  %10.6g  %9.6g\n", p.delta_pressure / 1e3, rad2deg(p.delta_phi),
                  p.rake * 1e3);
    std::printf("wrote %s\n", rep.csv_path.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bladeopt: bend-twist tailoring of laminated composite propeller blades"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out_dir;

  for (const char* name : {"solve", "converge", "optimize", "unloaded", "response"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "override ga.seed")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--threads", threads, "worker threads for fitness evaluation");
    sub->add_option("--out", out_dir, "override the output directory");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const bladeopt::RunConfig config = bladeopt::parse_config_file(config_path);
    bladeopt::CommandOverrides o;
    if (seed_given) o.seed = seed;
    if (!out_dir.empty()) o.out_dir = out_dir;
    o.threads = std::max(1, threads);
    return dispatch(app.get_subcommands().front()->get_name(), config, o);
  } catch (const bladeopt::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const bladeopt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
