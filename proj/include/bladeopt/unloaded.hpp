#pragma once

// Iterative computation of the as-manufactured (unloaded) tip pre-twist so
// that the blade reaches its design pitch under cruise load. The root pitch
// is fixed at the design value; the pre-twist is distributed linearly from
// root to tip.
//
// How the loaded response varies with pre-twist is a modeling choice: the
// shipped pressure-projection model scales the normal pressure on each
// element by the cosine of the local pre-twist angle. This is a documented
// stand-in, not a re-meshed twisted geometry, so intermediate iterates are
// model-specific; only the converged loaded pitch is contractual.

#include <cmath>
#include <vector>

#include "bladeopt/blade_response.hpp"
#include "bladeopt/common.hpp"
#include "bladeopt/fem.hpp"
#include "bladeopt/laminate.hpp"
#include "bladeopt/mesh.hpp"

namespace bladeopt {

enum class ResponseModelKind {
  linear,               // twist response independent of pre-twist
  pressure_projection,  // normal load scaled by cos of local pre-twist
};

/// Both initializations converge to the same unloaded shape; the paths
/// differ. reverse_load starts from the negative-load estimate; reverse_strain
/// starts from the undeformed design shape and lets the loop apply the full
/// correction.
enum class UnloadedInit { reverse_load, reverse_strain };

struct IterationTrace {
  struct Row {
    int iteration = 0;
    double initial_tip_deg = 0.0;
    double loaded_tip_deg = 0.0;
    double percent_error = 0.0;   // (target - loaded) / target * 100
    double adjustment_deg = 0.0;  // target - loaded
  };
  std::vector<Row> rows;
};

struct UnloadedResult {
  double unloaded_tip_pitch = 0.0;  // rad, absolute pitch at the tip
  IterationTrace trace;
  bool converged = false;
};

struct DivergenceError : NumericalError {
  DivergenceError(const std::string& msg, IterationTrace t)
      : NumericalError(msg), trace(std::move(t)) {}
  IterationTrace trace;
};

namespace detail {
struct SpanAxis {
  double root = 0.0;
  double tip = 0.0;
  double fraction(double x) const { return (x - root) / (tip - root); }
};

inline SpanAxis span_axis(const Mesh& mesh) {
  if (!mesh.has_tip_markers())
    throw ValidationError("unloaded shape: mesh declares no tip markers");
  SpanAxis ax;
  double s = 0.0;
  for (int n : mesh.clamped_nodes) s += mesh.nodes[n][0];
  ax.root = s / mesh.clamped_nodes.size();
  ax.tip = 0.5 * (mesh.nodes[mesh.tip_leading][0] + mesh.nodes[mesh.tip_trailing][0]);
  if (!(std::abs(ax.tip - ax.root) > 0.0))
    throw ValidationError("unloaded shape: degenerate span axis");
  return ax;
}
}  // namespace detail

/// Fixed-point loop: each iteration applies the cruise load to the
/// pre-twisted shape, measures the loaded tip pitch and corrects the
/// pre-twist by the remaining difference.
inline UnloadedResult iterate_unloaded_shape(const Mesh& mesh, const Layup& layup,
                                             const LoadCase& cruise_load,
                                             double target_tip_pitch,  // rad, absolute
                                             ResponseModelKind model, double tol,  // rad
                                             int max_iterations = 20,
                                             UnloadedInit init = UnloadedInit::reverse_load,
                                             const FemOptions& fem_options = {}) {
  if (!(tol > 0.0)) throw ValidationError("unloaded shape: tol must be positive");
  const detail::SpanAxis axis = detail::span_axis(mesh);
  SolverContext ctx(mesh, fem_options);
  ctx.set_laminate(build_stiffness(layup));

  // cruise twist of a blade pre-twisted linearly to tau at the tip
  auto cruise_twist = [&](double tau) -> double {
    if (model == ResponseModelKind::linear || tau == 0.0)
      return tip_pitch_change(mesh, ctx.solve(pressure_load(mesh, cruise_load.pressure)));
    std::vector<double> pe(mesh.elements.size());
    for (size_t e = 0; e < pe.size(); ++e) {
      const ElementGeometry g = element_geometry(mesh, static_cast<int>(e));
      pe[e] = cruise_load.pressure * std::cos(tau * axis.fraction(g.centroid_x));
    }
    return tip_pitch_change(mesh, ctx.solve(pressure_load(mesh, pe)));
  };

  double tau = 0.0;  // tip pre-twist relative to the design shape
  if (init == UnloadedInit::reverse_load) tau = -cruise_twist(0.0);

  UnloadedResult res;
  for (int it = 1; it <= max_iterations; ++it) {
    const double loaded = target_tip_pitch + tau + cruise_twist(tau);
    const double adjustment = target_tip_pitch - loaded;
    IterationTrace::Row row;
    row.iteration = it;
    row.initial_tip_deg = rad2deg(target_tip_pitch + tau);
    row.loaded_tip_deg = rad2deg(loaded);
    row.percent_error = (target_tip_pitch - loaded) / target_tip_pitch * 100.0;
    row.adjustment_deg = rad2deg(adjustment);
    res.trace.rows.push_back(row);
    tau += adjustment;
    if (std::abs(adjustment) < tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged)
    throw DivergenceError("unloaded shape iteration did not converge within " +
                              std::to_string(max_iterations) + " iterations",
                          res.trace);
  res.unloaded_tip_pitch = target_tip_pitch + tau;
  return res;
}

}  // namespace bladeopt
