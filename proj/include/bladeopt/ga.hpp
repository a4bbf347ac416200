#pragma once

// Genetic algorithm over symmetric ply-angle stacking sequences, minimizing
// the weighted pitch-tracking objective, plus an independent analytic
// oracle for the best objective value attainable by any linear pitch
// response.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bladeopt/blade_response.hpp"
#include "bladeopt/common.hpp"
#include "bladeopt/fem.hpp"
#include "bladeopt/laminate.hpp"
#include "bladeopt/mesh.hpp"

namespace bladeopt {

/// Ply-angle search domain. Angles are canonical [0, pi) radians.
struct AngleDomain {
  enum class Kind { continuous, integer_degrees, multiples_of, finite_set };
  Kind kind = Kind::continuous;
  std::vector<double> values;  // radians; populated for the discrete kinds
  double step_deg = 0.0;       // multiples_of only

  static AngleDomain continuous() { return {}; }

  static AngleDomain integer_degrees() {
    AngleDomain d;
    d.kind = Kind::integer_degrees;
    for (int a = 0; a < 180; ++a) d.values.push_back(deg2rad(a));
    return d;
  }

  static AngleDomain multiples_of(double step_deg) {
    if (!(step_deg > 0.0) || std::fmod(180.0, step_deg) != 0.0)
      throw ValidationError("angle domain: step must divide 180 evenly");
    AngleDomain d;
    d.kind = Kind::multiples_of;
    d.step_deg = step_deg;
    for (double a = 0.0; a < 180.0; a += step_deg) d.values.push_back(deg2rad(a));
    return d;
  }

  static AngleDomain finite_set(const std::vector<double>& degrees) {
    if (degrees.empty()) throw ValidationError("angle domain: finite set must be non-empty");
    AngleDomain d;
    d.kind = Kind::finite_set;
    for (double a : degrees) d.values.push_back(wrap_angle(deg2rad(a)));
    return d;
  }

  bool discrete() const { return kind != Kind::continuous; }

  bool contains(double angle) const {
    if (!discrete()) return angle >= 0.0 && angle < kPi;
    for (double v : values)
      if (std::abs(v - angle) < 1e-12) return true;
    return false;
  }
};

struct GaConfig {
  int population_size = 60;
  int generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.05;              // per gene
  double mutation_sigma = deg2rad(10.0);    // continuous domain
  int elitism_count = 2;
  int tournament_size = 3;
  std::uint64_t rng_seed = 1;
  int stall_generations = 40;
};

inline void validate_ga_config(const GaConfig& c) {
  if (c.population_size < 2) throw ValidationError("ga: population_size must be >= 2");
  if (c.generations < 1) throw ValidationError("ga: generations must be >= 1");
  if (c.crossover_rate < 0.0 || c.crossover_rate > 1.0)
    throw ValidationError("ga: crossover_rate must lie in [0, 1]");
  if (c.mutation_rate < 0.0 || c.mutation_rate > 1.0)
    throw ValidationError("ga: mutation_rate must lie in [0, 1]");
  if (c.elitism_count < 0 || c.elitism_count >= c.population_size)
    throw ValidationError("ga: elitism_count must lie in [0, population_size)");
  if (c.tournament_size < 1) throw ValidationError("ga: tournament_size must be >= 1");
  if (c.stall_generations < 1) throw ValidationError("ga: stall_generations must be >= 1");
}

/// Half-stack angles (outer surface -> mid-plane); the evaluated blade is
/// the mirrored symmetric layup.
using Chromosome = std::vector<double>;

struct OptimizationProblem {
  const Mesh* mesh = nullptr;
  Material material;
  int half_ply_count = 20;
  double ply_thickness = 125e-6;
  PitchSchedule schedule;
  AngleDomain domain;
  FemOptions fem_options;
  std::function<double(const Layup&)> penalty;  // optional, added to the objective
};

inline void validate_problem(const OptimizationProblem& p) {
  if (!p.mesh) throw ValidationError("ga problem: missing mesh");
  if (p.half_ply_count < 1) throw ValidationError("ga problem: half_ply_count must be >= 1");
  if (!(p.ply_thickness > 0.0)) throw ValidationError("ga problem: ply thickness must be positive");
  validate_schedule(p.schedule);
  int off_design = 0;
  for (size_t i = 0; i < p.schedule.entries.size(); ++i)
    if (static_cast<int>(i) != p.schedule.cruise_index) ++off_design;
  if (off_design < 1) throw ValidationError("ga problem: schedule needs at least one off-design entry");
}

inline Layup chromosome_layup(const Chromosome& genes, const OptimizationProblem& p) {
  return make_layup(p.material, genes, p.ply_thickness, /*symmetric=*/true);
}

namespace detail {
/// Weighted tracking error of a pure linear response delta_phi = s*deltaP,
/// averaged over the off-design points only.
inline double schedule_objective_for_slope(const PitchSchedule& s, double slope_rad_per_pa) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < s.entries.size(); ++i) {
    if (static_cast<int>(i) == s.cruise_index) continue;
    const ScheduleEntry& e = s.entries[i];
    num += e.weight * std::abs(e.delta_phi_required - slope_rad_per_pa * e.delta_pressure);
    den += e.weight;
  }
  return num / den;
}

inline double reference_delta_pressure(const PitchSchedule& s) {
  double ref = 0.0;
  for (const auto& e : s.entries)
    if (std::abs(e.delta_pressure) > std::abs(ref)) ref = e.delta_pressure;
  if (ref == 0.0) throw ValidationError("schedule: all deltaP are zero, slope undefined");
  return ref;
}
}  // namespace detail

/// Achieved pitch slope of one layup: a single factorization plus one solve
/// at the largest-|deltaP| schedule entry; the response is linear so every
/// other entry follows by scaling.
inline double pitch_slope(const Chromosome& genes, const OptimizationProblem& p,
                          SolverContext& ctx) {
  const Layup layup = chromosome_layup(genes, p);
  ctx.set_laminate(build_stiffness(layup));
  const double ref_dp = detail::reference_delta_pressure(p.schedule);
  const DisplacementField d = ctx.solve(pressure_load(*p.mesh, ref_dp));
  return tip_pitch_change(*p.mesh, d) / ref_dp;
}

/// Eq.-style tracking objective (radians) of one chromosome.
inline double objective(const Chromosome& genes, const OptimizationProblem& p,
                        SolverContext& ctx) {
  if (static_cast<int>(genes.size()) != p.half_ply_count)
    throw ValidationError("objective: chromosome length does not match half_ply_count");
  for (double g : genes)
    if (!p.domain.contains(g))
      throw ValidationError("objective: chromosome gene outside the angle domain");
  double f = detail::schedule_objective_for_slope(p.schedule, pitch_slope(genes, p, ctx));
  if (p.penalty) f += p.penalty(chromosome_layup(genes, p));
  return f;
}

struct OracleResult {
  double slope = 0.0;      // rad/Pa
  double objective = 0.0;  // rad
};

/// Exact lower bound of the objective over all linear responses
/// delta_phi = s*deltaP: a weighted L1 line fit through the origin. The
/// minimizer is one of the candidate slopes delta_phi_i / deltaP_i, so the
/// candidates are enumerated and the best kept.
inline OracleResult oracle_optimum(const PitchSchedule& s) {
  validate_schedule(s);
  OracleResult best;
  bool have = false;
  for (size_t i = 0; i < s.entries.size(); ++i) {
    if (static_cast<int>(i) == s.cruise_index) continue;
    const ScheduleEntry& e = s.entries[i];
    if (e.delta_pressure == 0.0) continue;
    const double cand = e.delta_phi_required / e.delta_pressure;
    const double f = detail::schedule_objective_for_slope(s, cand);
    if (!have || f < best.objective) {
      best.slope = cand;
      best.objective = f;
      have = true;
    }
  }
  if (!have) throw ValidationError("oracle_optimum: all off-design deltaP are zero, slope undefined");
  return best;
}

struct OptimizationResult {
  Layup best_layup;
  Chromosome best_genes;
  double best_objective = 0.0;
  struct GenStat {
    double best = 0.0;
    double mean = 0.0;
  };
  std::vector<GenStat> history;
  long evaluations = 0;  // solver evaluations (cache misses)
  int generations_run = 0;
};

namespace detail {

class GaRng {
 public:
  explicit GaRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double gauss(double sigma) { return std::normal_distribution<double>(0.0, sigma)(eng_); }
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(eng_); }

 private:
  std::mt19937_64 eng_;
};

inline double sample_gene(const AngleDomain& d, GaRng& rng) {
  if (d.discrete()) return d.values[rng.index(static_cast<int>(d.values.size()))];
  return rng.uniform() * kPi;
}

inline double mutate_gene(const AngleDomain& d, double gene, double sigma, GaRng& rng) {
  if (d.discrete()) return d.values[rng.index(static_cast<int>(d.values.size()))];
  return wrap_angle(gene + rng.gauss(sigma));
}

/// Evaluates a generation. Cache lookups and insertions stay on the calling
/// thread; only cache misses hit the solver, optionally split over worker
/// threads (results land by index, so the outcome is thread-count
/// independent).
class FitnessEvaluator {
 public:
  FitnessEvaluator(const OptimizationProblem& p, int threads)
      : problem_(p), threads_(std::max(1, threads)) {
    for (int t = 0; t < threads_; ++t) ctxs_.push_back(std::make_unique<SolverContext>(*p.mesh, p.fem_options));
  }

  void evaluate(const std::vector<Chromosome>& pop, std::vector<double>& fitness) {
    fitness.assign(pop.size(), 0.0);
    std::vector<int> misses;
    for (size_t i = 0; i < pop.size(); ++i) {
      auto it = cache_.find(pop[i]);
      if (it != cache_.end())
        fitness[i] = it->second;
      else
        misses.push_back(static_cast<int>(i));
    }
    if (!misses.empty()) {
      evaluations_ += static_cast<long>(misses.size());
      if (threads_ == 1 || misses.size() == 1) {
        for (int i : misses) fitness[i] = objective(pop[i], problem_, *ctxs_[0]);
      } else {
        std::vector<std::thread> workers;
        const int nt = std::min<int>(threads_, static_cast<int>(misses.size()));
        for (int t = 0; t < nt; ++t)
          workers.emplace_back([&, t]() {
            for (size_t k = t; k < misses.size(); k += nt)
              fitness[misses[k]] = objective(pop[misses[k]], problem_, *ctxs_[t]);
          });
        for (auto& w : workers) w.join();
      }
      for (int i : misses) cache_.emplace(pop[i], fitness[i]);
    }
  }

  long evaluations() const { return evaluations_; }

 private:
  const OptimizationProblem& problem_;
  int threads_;
  std::vector<std::unique_ptr<SolverContext>> ctxs_;
  std::map<Chromosome, double> cache_;
  long evaluations_ = 0;
};

}  // namespace detail

/// Tournament selection, uniform crossover, per-gene mutation (Gaussian for
/// the continuous domain, resample for discrete domains), elitism.
/// Deterministic for a fixed rng_seed; stops at `generations` or after
/// `stall_generations` without improvement.
inline OptimizationResult run_ga(const OptimizationProblem& problem, const GaConfig& config,
                                 int threads = 1) {
  validate_problem(problem);
  validate_ga_config(config);
  detail::GaRng rng(config.rng_seed);
  detail::FitnessEvaluator evaluator(problem, threads);

  const int n = config.population_size;
  const int m = problem.half_ply_count;
  std::vector<Chromosome> pop(n, Chromosome(m));
  for (auto& ch : pop)
    for (double& g : ch) g = detail::sample_gene(problem.domain, rng);

  std::vector<double> fitness;
  OptimizationResult result;
  double best = std::numeric_limits<double>::infinity();
  Chromosome best_genes;
  int stall = 0;

  for (int gen = 0; gen < config.generations; ++gen) {
    evaluator.evaluate(pop, fitness);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fitness[a] < fitness[b]; });

    const double gen_best = fitness[order[0]];
    double mean = 0.0;
    for (double f : fitness) mean += f;
    mean /= n;
    if (gen_best < best - 1e-15) {
      best = gen_best;
      best_genes = pop[order[0]];
      stall = 0;
    } else {
      ++stall;
    }
    result.history.push_back({best, mean});
    result.generations_run = gen + 1;
    if (stall >= config.stall_generations) break;
    if (gen + 1 == config.generations) break;

    // next generation
    std::vector<Chromosome> next;
    next.reserve(n);
    for (int e = 0; e < config.elitism_count; ++e) next.push_back(pop[order[e]]);
    auto tournament = [&]() -> const Chromosome& {
      int winner = rng.index(n);
      for (int t = 1; t < config.tournament_size; ++t) {
        const int cand = rng.index(n);
        if (fitness[cand] < fitness[winner]) winner = cand;
      }
      return pop[winner];
    };
    while (static_cast<int>(next.size()) < n) {
      Chromosome a = tournament();
      Chromosome b = tournament();
      if (rng.uniform() < config.crossover_rate)
        for (int g = 0; g < m; ++g)
          if (rng.uniform() < 0.5) std::swap(a[g], b[g]);
      for (Chromosome* ch : {&a, &b})
        for (double& g : *ch)
          if (rng.uniform() < config.mutation_rate)
            g = detail::mutate_gene(problem.domain, g, config.mutation_sigma, rng);
      next.push_back(std::move(a));
      if (static_cast<int>(next.size()) < n) next.push_back(std::move(b));
    }
    pop = std::move(next);
  }

  result.best_genes = best_genes;
  result.best_layup = chromosome_layup(best_genes, problem);
  result.best_objective = best;
  result.evaluations = evaluator.evaluations();
  return result;
}

struct ThicknessStudyRow {
  int layers = 0;
  double layer_thickness = 0.0;   // m
  double total_thickness = 0.0;   // m
  double best_objective = 0.0;    // rad
  Layup best_layup;
};

/// One GA run per (layer count, layer thickness) row.
inline std::vector<ThicknessStudyRow> thickness_study(
    const OptimizationProblem& base, const std::vector<std::pair<int, double>>& rows,
    const GaConfig& config, int threads = 1) {
  std::vector<ThicknessStudyRow> out;
  for (const auto& [layers, thickness] : rows) {
    if (layers < 2 || layers % 2 != 0)
      throw ValidationError("thickness_study: layer counts must be even and >= 2");
    OptimizationProblem p = base;
    p.half_ply_count = layers / 2;
    p.ply_thickness = thickness;
    const OptimizationResult r = run_ga(p, config, threads);
    out.push_back({layers, thickness, layers * thickness, r.best_objective, r.best_layup});
  }
  return out;
}

}  // namespace bladeopt
