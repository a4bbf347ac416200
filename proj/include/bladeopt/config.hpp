#pragma once

// JSON run configuration: one file describes material, layup (explicit
// stack or GA search family), mesh source, load schedule, GA settings and
// the unloaded-shape problem. All angles in config files are degrees, all
// pressures kPa unless suffixed _pa; everything is converted to SI +
// radians on parse.

#include <json.hpp>

#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bladeopt/blade_response.hpp"
#include "bladeopt/common.hpp"
#include "bladeopt/fem.hpp"
#include "bladeopt/ga.hpp"
#include "bladeopt/laminate.hpp"
#include "bladeopt/mesh.hpp"
#include "bladeopt/unloaded.hpp"

namespace bladeopt {

using Json = nlohmann::json;

struct MeshSource {
  enum class Kind { none, rect, blade, file };
  Kind kind = Kind::none;
  double length = 0.0, width = 0.0;
  int nx = 0, ny = 0;
  PlanformSpec blade;
  std::string path;
};

struct UnloadedParams {
  double target_tip_pitch = deg2rad(16.0);
  double tol = deg2rad(0.05);
  ResponseModelKind model = ResponseModelKind::pressure_projection;
  int max_iterations = 20;
  UnloadedInit init = UnloadedInit::reverse_load;
  double cruise_pressure = 250e3;  // Pa
};

struct RunConfig {
  Material material;
  bool has_material = false;

  std::vector<double> layup_angles;  // radians; explicit stack when non-empty
  bool layup_symmetric = false;
  double ply_thickness = 0.0;  // m; material value unless overridden
  std::optional<AngleDomain> domain;
  int half_plies = 20;

  MeshSource mesh_source;
  std::optional<PitchSchedule> schedule;
  GaConfig ga;
  UnloadedParams unloaded;

  double load_pressure = 0.0;  // Pa
  std::string pressure_map_csv;

  std::vector<std::array<int, 2>> converge_nodes;
  std::vector<std::pair<int, double>> thickness_rows;  // (layers, thickness m)

  FemOptions fem;
  std::string output_dir = "out";
};

namespace cfg_detail {

inline double num(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  return j.get<double>();
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return j.get<int>();
}

inline bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError(path + ": expected a boolean");
  return j.get<bool>();
}

inline std::string str(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path + ": expected a string");
  return j.get<std::string>();
}

inline const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(path + "." + key + ": missing required field");
  return j.at(key);
}

inline Material parse_material(const Json& j, const std::string& path) {
  Material m;
  m.e1 = num(require(j, "e1_gpa", path), path + ".e1_gpa") * 1e9;
  m.e2 = num(require(j, "e2_gpa", path), path + ".e2_gpa") * 1e9;
  m.g12 = num(require(j, "g12_gpa", path), path + ".g12_gpa") * 1e9;
  if (j.contains("g23_gpa")) m.g23 = num(j.at("g23_gpa"), path + ".g23_gpa") * 1e9;
  m.nu12 = num(require(j, "nu12", path), path + ".nu12");
  m.nu23 = num(require(j, "nu23", path), path + ".nu23");
  m.ply_thickness = num(require(j, "ply_thickness_um", path), path + ".ply_thickness_um") * 1e-6;
  try {
    validate_material(m);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return m;
}

inline AngleDomain parse_domain(const Json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "continuous") return AngleDomain::continuous();
    if (s == "integer_degrees") return AngleDomain::integer_degrees();
    throw ValidationError(path + ": unknown domain '" + s + "'");
  }
  if (j.is_object()) {
    if (j.contains("multiples_of_deg"))
      return AngleDomain::multiples_of(num(j.at("multiples_of_deg"), path + ".multiples_of_deg"));
    if (j.contains("finite_set_deg")) {
      const Json& arr = j.at("finite_set_deg");
      if (!arr.is_array() || arr.empty())
        throw ValidationError(path + ".finite_set_deg: expected a non-empty array");
      std::vector<double> degs;
      for (size_t i = 0; i < arr.size(); ++i)
        degs.push_back(num(arr[i], path + ".finite_set_deg[" + std::to_string(i) + "]"));
      return AngleDomain::finite_set(degs);
    }
  }
  throw ValidationError(path + ": expected 'continuous', 'integer_degrees', "
                               "{multiples_of_deg} or {finite_set_deg}");
}

inline PitchSchedule parse_schedule(const Json& j, const std::string& path) {
  const Json& rows = require(j, "rows", path);
  if (!rows.is_array() || rows.empty())
    throw ValidationError(path + ".rows: expected a non-empty array");
  std::vector<ScheduleEntry> entries;
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string rp = path + ".rows[" + std::to_string(i) + "]";
    const Json& r = rows[i];
    ScheduleEntry e;
    e.pressure = num(require(r, "p_kpa", rp), rp + ".p_kpa") * 1e3;
    e.delta_pressure = num(require(r, "dp_kpa", rp), rp + ".dp_kpa") * 1e3;
    if (r.contains("pd")) e.pd_ratio = num(r.at("pd"), rp + ".pd");
    e.phi_required = deg2rad(num(require(r, "phi_deg", rp), rp + ".phi_deg"));
    if (r.contains("weight")) e.weight = num(r.at("weight"), rp + ".weight");
    entries.push_back(e);
  }
  try {
    return make_schedule(entries);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace cfg_detail

inline RunConfig parse_config(const Json& j) {
  using namespace cfg_detail;
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  RunConfig c;

  if (j.contains("material")) {
    c.material = parse_material(j.at("material"), "material");
    c.has_material = true;
    c.ply_thickness = c.material.ply_thickness;
  }

  if (j.contains("layup")) {
    const Json& l = j.at("layup");
    if (l.contains("angles_deg")) {
      const Json& arr = l.at("angles_deg");
      if (!arr.is_array() || arr.empty())
        throw ValidationError("layup.angles_deg: expected a non-empty array");
      for (size_t i = 0; i < arr.size(); ++i)
        c.layup_angles.push_back(
            wrap_angle(deg2rad(num(arr[i], "layup.angles_deg[" + std::to_string(i) + "]"))));
    }
    if (l.contains("symmetric")) c.layup_symmetric = boolean(l.at("symmetric"), "layup.symmetric");
    if (l.contains("ply_thickness_um"))
      c.ply_thickness = num(l.at("ply_thickness_um"), "layup.ply_thickness_um") * 1e-6;
    if (l.contains("domain")) c.domain = parse_domain(l.at("domain"), "layup.domain");
    if (l.contains("half_plies")) {
      c.half_plies = integer(l.at("half_plies"), "layup.half_plies");
      if (c.half_plies < 1) throw ValidationError("layup.half_plies: must be >= 1");
    }
    if (c.layup_angles.empty() && !c.domain)
      throw ValidationError("layup: need either angles_deg or domain");
  }

  if (j.contains("mesh")) {
    const Json& m = j.at("mesh");
    int sources = 0;
    if (m.contains("rect")) ++sources;
    if (m.contains("blade")) ++sources;
    if (m.contains("file")) ++sources;
    if (sources != 1)
      throw ValidationError("mesh: exactly one of rect/blade/file must be given");
    if (m.contains("rect")) {
      const Json& r = m.at("rect");
      c.mesh_source.kind = MeshSource::Kind::rect;
      c.mesh_source.length = num(require(r, "length_m", "mesh.rect"), "mesh.rect.length_m");
      c.mesh_source.width = num(require(r, "width_m", "mesh.rect"), "mesh.rect.width_m");
      c.mesh_source.nx = integer(require(r, "nx", "mesh.rect"), "mesh.rect.nx");
      c.mesh_source.ny = integer(require(r, "ny", "mesh.rect"), "mesh.rect.ny");
    } else if (m.contains("blade")) {
      const Json& b = m.at("blade");
      c.mesh_source.kind = MeshSource::Kind::blade;
      PlanformSpec& s = c.mesh_source.blade;
      s.diameter = num(require(b, "diameter_m", "mesh.blade"), "mesh.blade.diameter_m");
      s.hub_diameter =
          num(require(b, "hub_diameter_m", "mesh.blade"), "mesh.blade.hub_diameter_m");
      s.expanded_area_ratio = num(require(b, "expanded_area_ratio", "mesh.blade"),
                                  "mesh.blade.expanded_area_ratio");
      s.blade_count = integer(require(b, "blades", "mesh.blade"), "mesh.blade.blades");
      if (b.contains("target_elements"))
        s.target_element_count = integer(b.at("target_elements"), "mesh.blade.target_elements");
      try {
        validate_planform(s);
      } catch (const ValidationError& e) {
        throw ValidationError(std::string("mesh.blade: ") + e.what());
      }
    } else {
      c.mesh_source.kind = MeshSource::Kind::file;
      c.mesh_source.path = str(m.at("file"), "mesh.file");
    }
  }

  if (j.contains("load")) {
    const Json& l = j.at("load");
    if (l.contains("pressure_pa"))
      c.load_pressure = num(l.at("pressure_pa"), "load.pressure_pa");
    else if (l.contains("pressure_kpa"))
      c.load_pressure = num(l.at("pressure_kpa"), "load.pressure_kpa") * 1e3;
    if (l.contains("pressure_map_csv"))
      c.pressure_map_csv = str(l.at("pressure_map_csv"), "load.pressure_map_csv");
  }

  if (j.contains("schedule")) c.schedule = parse_schedule(j.at("schedule"), "schedule");

  if (j.contains("ga")) {
    const Json& g = j.at("ga");
    if (g.contains("population")) c.ga.population_size = integer(g.at("population"), "ga.population");
    if (g.contains("generations")) c.ga.generations = integer(g.at("generations"), "ga.generations");
    if (g.contains("crossover_rate"))
      c.ga.crossover_rate = num(g.at("crossover_rate"), "ga.crossover_rate");
    if (g.contains("mutation_rate"))
      c.ga.mutation_rate = num(g.at("mutation_rate"), "ga.mutation_rate");
    if (g.contains("mutation_sigma_deg"))
      c.ga.mutation_sigma = deg2rad(num(g.at("mutation_sigma_deg"), "ga.mutation_sigma_deg"));
    if (g.contains("elitism")) c.ga.elitism_count = integer(g.at("elitism"), "ga.elitism");
    if (g.contains("tournament")) c.ga.tournament_size = integer(g.at("tournament"), "ga.tournament");
    if (g.contains("stall")) c.ga.stall_generations = integer(g.at("stall"), "ga.stall");
    if (g.contains("seed")) {
      if (!g.at("seed").is_number_unsigned() && !g.at("seed").is_number_integer())
        throw ValidationError("ga.seed: expected an integer");
      c.ga.rng_seed = g.at("seed").get<std::uint64_t>();
    }
    try {
      validate_ga_config(c.ga);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("ga: ") + e.what());
    }
  }

  if (j.contains("unloaded")) {
    const Json& u = j.at("unloaded");
    UnloadedParams& p = c.unloaded;
    if (u.contains("target_tip_pitch_deg"))
      p.target_tip_pitch = deg2rad(num(u.at("target_tip_pitch_deg"), "unloaded.target_tip_pitch_deg"));
    if (u.contains("tol_deg")) p.tol = deg2rad(num(u.at("tol_deg"), "unloaded.tol_deg"));
    if (u.contains("max_iterations"))
      p.max_iterations = integer(u.at("max_iterations"), "unloaded.max_iterations");
    if (u.contains("cruise_pressure_kpa"))
      p.cruise_pressure = num(u.at("cruise_pressure_kpa"), "unloaded.cruise_pressure_kpa") * 1e3;
    if (u.contains("model")) {
      const std::string s = str(u.at("model"), "unloaded.model");
      if (s == "linear") p.model = ResponseModelKind::linear;
      else if (s == "pressure_projection") p.model = ResponseModelKind::pressure_projection;
      else throw ValidationError("unloaded.model: expected 'linear' or 'pressure_projection'");
    }
    if (u.contains("init")) {
      const std::string s = str(u.at("init"), "unloaded.init");
      if (s == "reverse_load") p.init = UnloadedInit::reverse_load;
      else if (s == "reverse_strain") p.init = UnloadedInit::reverse_strain;
      else throw ValidationError("unloaded.init: expected 'reverse_load' or 'reverse_strain'");
    }
    if (!(p.tol > 0.0)) throw ValidationError("unloaded.tol_deg: must be positive");
  }

  if (j.contains("converge")) {
    const Json& arr = cfg_detail::require(j.at("converge"), "node_arrays", "converge");
    if (!arr.is_array() || arr.empty())
      throw ValidationError("converge.node_arrays: expected a non-empty array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string p = "converge.node_arrays[" + std::to_string(i) + "]";
      if (!arr[i].is_array() || arr[i].size() != 2)
        throw ValidationError(p + ": expected [nx, ny]");
      c.converge_nodes.push_back({cfg_detail::integer(arr[i][0], p + "[0]"),
                                  cfg_detail::integer(arr[i][1], p + "[1]")});
    }
  }

  if (j.contains("thickness_study")) {
    const Json& arr = cfg_detail::require(j.at("thickness_study"), "rows", "thickness_study");
    if (!arr.is_array() || arr.empty())
      throw ValidationError("thickness_study.rows: expected a non-empty array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string p = "thickness_study.rows[" + std::to_string(i) + "]";
      const int layers = cfg_detail::integer(require(arr[i], "layers", p), p + ".layers");
      const double thk =
          cfg_detail::num(require(arr[i], "thickness_um", p), p + ".thickness_um") * 1e-6;
      if (layers < 2 || layers % 2 != 0)
        throw ValidationError(p + ".layers: must be even and >= 2");
      if (!(thk > 0.0)) throw ValidationError(p + ".thickness_um: must be positive");
      c.thickness_rows.emplace_back(layers, thk);
    }
  }

  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    if (s.contains("shear_stabilization"))
      c.fem.shear_stabilization = boolean(s.at("shear_stabilization"), "solver.shear_stabilization");
    if (s.contains("stabilization_alpha"))
      c.fem.stabilization_alpha = num(s.at("stabilization_alpha"), "solver.stabilization_alpha");
  }

  if (j.contains("output")) c.output_dir = str(j.at("output"), "output");
  return c;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config file: " + path);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

/// Normalized echo of a parsed config; parse_config(config_to_json(c))
/// reproduces an equivalent RunConfig.
inline Json config_to_json(const RunConfig& c) {
  Json j = Json::object();
  if (c.has_material) {
    j["material"] = {{"e1_gpa", c.material.e1 / 1e9},
                     {"e2_gpa", c.material.e2 / 1e9},
                     {"g12_gpa", c.material.g12 / 1e9},
                     {"nu12", c.material.nu12},
                     {"nu23", c.material.nu23},
                     {"ply_thickness_um", c.material.ply_thickness * 1e6}};
    if (c.material.g23 > 0.0) j["material"]["g23_gpa"] = c.material.g23 / 1e9;
  }
  if (!c.layup_angles.empty() || c.domain) {
    Json l = Json::object();
    if (!c.layup_angles.empty()) {
      Json arr = Json::array();
      for (double a : c.layup_angles) arr.push_back(rad2deg(a));
      l["angles_deg"] = arr;
    }
    l["symmetric"] = c.layup_symmetric;
    if (c.ply_thickness > 0.0) l["ply_thickness_um"] = c.ply_thickness * 1e6;
    if (c.domain) {
      switch (c.domain->kind) {
        case AngleDomain::Kind::continuous: l["domain"] = "continuous"; break;
        case AngleDomain::Kind::integer_degrees: l["domain"] = "integer_degrees"; break;
        case AngleDomain::Kind::multiples_of:
          l["domain"] = {{"multiples_of_deg", c.domain->step_deg}};
          break;
        case AngleDomain::Kind::finite_set: {
          Json arr = Json::array();
          for (double v : c.domain->values) arr.push_back(rad2deg(v));
          l["domain"] = {{"finite_set_deg", arr}};
          break;
        }
      }
      l["half_plies"] = c.half_plies;
    }
    j["layup"] = l;
  }
  switch (c.mesh_source.kind) {
    case MeshSource::Kind::none: break;
    case MeshSource::Kind::rect:
      j["mesh"] = {{"rect",
                    {{"length_m", c.mesh_source.length},
                     {"width_m", c.mesh_source.width},
                     {"nx", c.mesh_source.nx},
                     {"ny", c.mesh_source.ny}}}};
      break;
    case MeshSource::Kind::blade:
      j["mesh"] = {{"blade",
                    {{"diameter_m", c.mesh_source.blade.diameter},
                     {"hub_diameter_m", c.mesh_source.blade.hub_diameter},
                     {"expanded_area_ratio", c.mesh_source.blade.expanded_area_ratio},
                     {"blades", c.mesh_source.blade.blade_count},
                     {"target_elements", c.mesh_source.blade.target_element_count}}}};
      break;
    case MeshSource::Kind::file:
      j["mesh"] = {{"file", c.mesh_source.path}};
      break;
  }
  if (c.load_pressure != 0.0 || !c.pressure_map_csv.empty()) {
    j["load"] = Json::object();
    j["load"]["pressure_pa"] = c.load_pressure;
    if (!c.pressure_map_csv.empty()) j["load"]["pressure_map_csv"] = c.pressure_map_csv;
  }
  if (c.schedule) {
    Json rows = Json::array();
    for (const auto& e : c.schedule->entries)
      rows.push_back({{"p_kpa", e.pressure / 1e3},
                      {"dp_kpa", e.delta_pressure / 1e3},
                      {"pd", e.pd_ratio},
                      {"phi_deg", rad2deg(e.phi_required)},
                      {"weight", e.weight}});
    j["schedule"] = {{"rows", rows}};
  }
  j["ga"] = {{"population", c.ga.population_size},
             {"generations", c.ga.generations},
             {"crossover_rate", c.ga.crossover_rate},
             {"mutation_rate", c.ga.mutation_rate},
             {"mutation_sigma_deg", rad2deg(c.ga.mutation_sigma)},
             {"elitism", c.ga.elitism_count},
             {"tournament", c.ga.tournament_size},
             {"stall", c.ga.stall_generations},
             {"seed", c.ga.rng_seed}};
  j["unloaded"] = {
      {"target_tip_pitch_deg", rad2deg(c.unloaded.target_tip_pitch)},
      {"tol_deg", rad2deg(c.unloaded.tol)},
      {"max_iterations", c.unloaded.max_iterations},
      {"cruise_pressure_kpa", c.unloaded.cruise_pressure / 1e3},
      {"model", c.unloaded.model == ResponseModelKind::linear ? "linear" : "pressure_projection"},
      {"init", c.unloaded.init == UnloadedInit::reverse_load ? "reverse_load" : "reverse_strain"}};
  if (!c.converge_nodes.empty()) {
    Json arr = Json::array();
    for (const auto& nn : c.converge_nodes) arr.push_back({nn[0], nn[1]});
    j["converge"] = {{"node_arrays", arr}};
  }
  if (!c.thickness_rows.empty()) {
    Json rows = Json::array();
    for (const auto& [layers, thk] : c.thickness_rows)
      rows.push_back({{"layers", layers}, {"thickness_um", thk * 1e6}});
    j["thickness_study"] = {{"rows", rows}};
  }
  j["solver"] = {{"shear_stabilization", c.fem.shear_stabilization},
                 {"stabilization_alpha", c.fem.stabilization_alpha}};
  j["output"] = c.output_dir;
  return j;
}

/// Realize the configured mesh source.
inline Mesh make_mesh(const RunConfig& c) {
  switch (c.mesh_source.kind) {
    case MeshSource::Kind::rect:
      return gen_rect_mesh(c.mesh_source.length, c.mesh_source.width, c.mesh_source.nx,
                           c.mesh_source.ny);
    case MeshSource::Kind::blade:
      return gen_blade_mesh(c.mesh_source.blade);
    case MeshSource::Kind::file:
      return load_mesh(c.mesh_source.path);
    case MeshSource::Kind::none:
      break;
  }
  throw ValidationError("mesh: missing mesh block");
}

/// Realize the explicit layup block; errors when only a GA domain is given.
inline Layup explicit_layup(const RunConfig& c) {
  if (!c.has_material) throw ValidationError("material: missing material block");
  if (c.layup_angles.empty())
    throw ValidationError("layup.angles_deg: an explicit stack is required for this command");
  return make_layup(c.material, c.layup_angles, c.ply_thickness, c.layup_symmetric);
}

/// Realize the GA optimization problem over the given mesh.
inline OptimizationProblem ga_problem(const RunConfig& c, const Mesh& mesh) {
  if (!c.has_material) throw ValidationError("material: missing material block");
  if (!c.domain) throw ValidationError("layup.domain: a GA domain is required for this command");
  if (!c.schedule) throw ValidationError("schedule: missing schedule block");
  OptimizationProblem p;
  p.mesh = &mesh;
  p.material = c.material;
  p.half_ply_count = c.half_plies;
  p.ply_thickness = c.ply_thickness;
  p.schedule = *c.schedule;
  p.domain = *c.domain;
  p.fem_options = c.fem;
  return p;
}

}  // namespace bladeopt
