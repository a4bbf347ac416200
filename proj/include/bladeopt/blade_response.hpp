#pragma once

// Post-processing of displacement fields into blade-level pitch quantities
// and the pitch-response curve over a load schedule.

#include <algorithm>
#include <cmath>
#include <vector>

#include "bladeopt/common.hpp"
#include "bladeopt/fem.hpp"
#include "bladeopt/laminate.hpp"
#include "bladeopt/mesh.hpp"

namespace bladeopt {

/// One operating point. Pressures in Pa, angles in radians internally.
struct ScheduleEntry {
  double pressure = 0.0;
  double delta_pressure = 0.0;
  double pd_ratio = 0.0;           // metadata only
  double phi_required = 0.0;       // rad
  double delta_phi_required = 0.0; // rad, relative to cruise
  double weight = 1.0;
};

struct PitchSchedule {
  std::vector<ScheduleEntry> entries;
  int cruise_index = -1;

  const ScheduleEntry& cruise() const { return entries[cruise_index]; }
};

inline void validate_schedule(const PitchSchedule& s) {
  if (s.entries.empty()) throw ValidationError("schedule: no entries");
  if (s.cruise_index < 0 || s.cruise_index >= static_cast<int>(s.entries.size()))
    throw ValidationError("schedule: cruise_index out of range");
  const ScheduleEntry& c = s.entries[s.cruise_index];
  if (c.delta_pressure != 0.0 || c.delta_phi_required != 0.0)
    throw ValidationError("schedule: cruise entry must have deltaP = 0 and delta_phi = 0");
  double wsum = 0.0;
  for (const auto& e : s.entries) {
    if (e.weight < 0.0) throw ValidationError("schedule: weights must be >= 0");
    wsum += e.weight;
  }
  if (!(wsum > 0.0)) throw ValidationError("schedule: weight sum must be positive");
}

/// Build a schedule from (P, phi) rows; cruise = the row with deltaP == 0.
inline PitchSchedule make_schedule(const std::vector<ScheduleEntry>& rows) {
  PitchSchedule s;
  s.entries = rows;
  for (size_t i = 0; i < rows.size(); ++i)
    if (rows[i].delta_pressure == 0.0) {
      if (s.cruise_index >= 0) throw ValidationError("schedule: multiple cruise rows (deltaP = 0)");
      s.cruise_index = static_cast<int>(i);
    }
  if (s.cruise_index < 0) throw ValidationError("schedule: no cruise row (deltaP = 0)");
  for (auto& e : s.entries) e.delta_phi_required = e.phi_required - s.cruise().phi_required;
  validate_schedule(s);
  return s;
}

enum class PitchExtraction { chord, rotation };

/// Tip pitch change from the transverse deflections at the tip markers:
/// atan2(w_LE - w_TE, tip_chord). Positive increases pitch. The rotation
/// variant averages the chordwise rotation dofs instead.
inline double tip_pitch_change(const Mesh& mesh, const DisplacementField& d,
                               PitchExtraction how = PitchExtraction::chord) {
  if (!mesh.has_tip_markers())
    throw ValidationError("tip_pitch_change: mesh declares no tip markers");
  if (how == PitchExtraction::rotation)
    return -0.5 * (d.theta_y(mesh.tip_leading) + d.theta_y(mesh.tip_trailing));
  return std::atan2(d.w(mesh.tip_leading) - d.w(mesh.tip_trailing), mesh.tip_chord);
}

/// Mean transverse deflection at the tip markers.
inline double rake_deflection(const Mesh& mesh, const DisplacementField& d) {
  if (!mesh.has_tip_markers())
    throw ValidationError("rake_deflection: mesh declares no tip markers");
  return 0.5 * (d.w(mesh.tip_leading) + d.w(mesh.tip_trailing));
}

struct PitchResponse {
  struct Point {
    double delta_pressure = 0.0;  // Pa
    double delta_phi = 0.0;       // rad
    double rake = 0.0;            // m
  };
  std::vector<Point> points;  // sorted by delta_pressure
  double slope = 0.0;         // rad/Pa, least-squares through the origin
};

/// Pitch-response curve across all schedule entries, reusing an
/// already-factorized context. The solver is linear, so one reference solve
/// is scaled to every entry; each entry's pitch is extracted from its own
/// scaled field.
inline PitchResponse response_curve(const SolverContext& ctx, const PitchSchedule& schedule) {
  const Mesh& mesh = ctx.mesh();
  double ref_dp = 0.0;
  for (const auto& e : schedule.entries)
    if (std::abs(e.delta_pressure) > std::abs(ref_dp)) ref_dp = e.delta_pressure;
  if (ref_dp == 0.0) throw ValidationError("response_curve: all schedule deltaP are zero");
  const DisplacementField ref = ctx.solve(pressure_load(mesh, ref_dp));
  const double dw_ref = ref.w(mesh.tip_leading) - ref.w(mesh.tip_trailing);
  const double rake_ref = rake_deflection(mesh, ref);

  PitchResponse r;
  r.points.reserve(schedule.entries.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& e : schedule.entries) {
    const double alpha = e.delta_pressure / ref_dp;
    PitchResponse::Point p;
    p.delta_pressure = e.delta_pressure;
    p.delta_phi = std::atan2(alpha * dw_ref, mesh.tip_chord);
    p.rake = alpha * rake_ref;
    r.points.push_back(p);
    sxy += p.delta_phi * p.delta_pressure;
    sxx += p.delta_pressure * p.delta_pressure;
  }
  std::sort(r.points.begin(), r.points.end(),
            [](const auto& a, const auto& b) { return a.delta_pressure < b.delta_pressure; });
  r.slope = sxy / sxx;
  return r;
}

inline PitchResponse response_curve(const Mesh& mesh, const Layup& layup,
                                    const PitchSchedule& schedule, const FemOptions& opt = {}) {
  validate_schedule(schedule);
  SolverContext ctx(mesh, opt);
  ctx.set_laminate(build_stiffness(layup));
  return response_curve(ctx, schedule);
}

}  // namespace bladeopt
