#pragma once

// CSV emitters for the artifacts every command writes. Formatting goes
// through one printf-style path so reruns are byte-identical.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bladeopt/blade_response.hpp"
#include "bladeopt/common.hpp"
#include "bladeopt/ga.hpp"
#include "bladeopt/unloaded.hpp"

namespace bladeopt {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// `deltaP_kPa,dphi_deg,rake_mm` per schedule entry.
inline void write_response_csv(std::ostream& os, const PitchResponse& r) {
  os << "deltaP_kPa,dphi_deg,rake_mm\n";
  for (const auto& p : r.points)
    os << fmt_num(p.delta_pressure / 1e3) << "," << fmt_num(rad2deg(p.delta_phi)) << ","
       << fmt_num(p.rake * 1e3) << "\n";
}

/// `generation,best_rad,mean_rad` per generation.
inline void write_history_csv(std::ostream& os, const OptimizationResult& r) {
  os << "generation,best_rad,mean_rad\n";
  for (size_t g = 0; g < r.history.size(); ++g)
    os << g << "," << fmt_num(r.history[g].best) << "," << fmt_num(r.history[g].mean) << "\n";
}

/// `nx,ny,max_w_mm` per mesh of a convergence sweep.
struct ConvergenceRow {
  int nx = 0, ny = 0;
  double max_w = 0.0;  // m
};

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "nx,ny,max_w_mm\n";
  for (const auto& r : rows) os << r.nx << "," << r.ny << "," << fmt_num(r.max_w * 1e3) << "\n";
}

/// `iter,initial_tip_deg,loaded_tip_deg,pct_error,adjustment_deg`
inline void write_trace_csv(std::ostream& os, const IterationTrace& t) {
  os << "iter,initial_tip_deg,loaded_tip_deg,pct_error,adjustment_deg\n";
  for (const auto& r : t.rows)
    os << r.iteration << "," << fmt_num(r.initial_tip_deg) << "," << fmt_num(r.loaded_tip_deg)
       << "," << fmt_num(r.percent_error) << "," << fmt_num(r.adjustment_deg) << "\n";
}

/// Parse a trace CSV back (fixture round-trips and downstream tooling).
inline IterationTrace parse_trace_csv(std::istream& is) {
  IterationTrace t;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("trace csv: missing header", 1);
  if (line != "iter,initial_tip_deg,loaded_tip_deg,pct_error,adjustment_deg")
    throw ParseError("trace csv: unexpected header '" + line + "'", 1);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    IterationTrace::Row r;
    std::istringstream ss(line);
    char comma;
    if (!(ss >> r.iteration >> comma >> r.initial_tip_deg >> comma >> r.loaded_tip_deg >> comma >>
          r.percent_error >> comma >> r.adjustment_deg))
      throw ParseError("trace csv: malformed row '" + line + "'", line_no);
    t.rows.push_back(r);
  }
  return t;
}

/// `node,x,y,u,v,w,thetax,thetay` nodal solution table.
inline void write_displacement_csv(std::ostream& os, const Mesh& mesh,
                                   const DisplacementField& d) {
  os << "node,x,y,u,v,w,thetax,thetay\n";
  for (size_t n = 0; n < mesh.nodes.size(); ++n) {
    const int i = static_cast<int>(n);
    os << n << "," << fmt_num(mesh.nodes[n][0]) << "," << fmt_num(mesh.nodes[n][1]) << ","
       << fmt_num(d.u(i)) << "," << fmt_num(d.v(i)) << "," << fmt_num(d.w(i)) << ","
       << fmt_num(d.theta_x(i)) << "," << fmt_num(d.theta_y(i)) << "\n";
  }
}

/// Per-element pressure map: `element,pressure_pa`.
inline std::vector<double> parse_pressure_map_csv(std::istream& is, size_t element_count) {
  std::vector<double> p(element_count, 0.0);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("pressure map: missing header", 1);
  if (line != "element,pressure_pa")
    throw ParseError("pressure map: expected header 'element,pressure_pa'", 1);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long e;
    char comma;
    double v;
    if (!(ss >> e >> comma >> v))
      throw ParseError("pressure map: malformed row '" + line + "'", line_no);
    if (e < 0 || e >= static_cast<long long>(element_count))
      throw ValidationError("pressure map: element index " + std::to_string(e) + " out of range");
    p[e] = v;
  }
  return p;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open for writing: " + path);
  os << content;
}

}  // namespace bladeopt
