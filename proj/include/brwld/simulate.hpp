#pragma once

// Seeded Monte Carlo engines for the branching random walk maximum M_n and
// for the maximum of Z_n independent walks. Every replica draws from its own
// counter-based stream keyed by (seed, replica index), so results do not
// depend on how replicas are spread over threads.

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "brwld/gw_core.hpp"
#include "brwld/rng.hpp"
#include "brwld/step_law.hpp"

namespace brwld {

using StepModel = std::variant<StepLaw, LatticeStepLaw>;

/// Step draw for either step model.
double sample_step(const StepModel& step, CounterRng& rng);

/// Total offspring of `parents` individuals. Exact in law: per-particle draws
/// for small populations, sequential binomial splitting otherwise.
std::int64_t sample_offspring_total(const OffspringLaw& law, std::int64_t parents, CounterRng& rng);

/// Offspring count of one individual.
int sample_offspring(const OffspringLaw& law, CounterRng& rng);

struct SimConfig {
  OffspringLaw offspring;
  StepModel step;
  int horizon_n = 1;
  std::int64_t population_cap = 1'000'000;
  std::uint64_t seed = 0;
  bool condition_on_survival = true;
};

void validate(const SimConfig& cfg);

struct BrwRunResult {
  bool survived_to_n = false;
  // Empty exactly when the population is extinct at generation n (M_n = -inf).
  std::optional<double> max_position;
  // Z_0..Z_n; shorter when the run was truncated.
  std::vector<std::int64_t> population_path;
  // The population exceeded population_cap; such runs carry no estimate.
  bool truncated = false;
};

enum class Process { Brw, Independent };

BrwRunResult simulate_brw(const SimConfig& cfg, std::uint64_t replica_index);
BrwRunResult simulate_ind_max(const SimConfig& cfg, std::uint64_t replica_index);
BrwRunResult simulate(const SimConfig& cfg, Process process, std::uint64_t replica_index);

/// Population path Z_0..Z_n only, drawn from the Population stream.
BrwRunResult simulate_population(const SimConfig& cfg, std::uint64_t replica_index);

struct RunOptions {
  unsigned workers = 1;
  // Attempts after which an acceptance rate below min_acceptance aborts.
  std::uint64_t probe_attempts = 1u << 20;
  double min_acceptance = 1e-6;
};

struct ConditionedRuns {
  std::vector<BrwRunResult> runs;  // surviving, untruncated runs in replica order
  std::uint64_t attempts = 0;
  std::uint64_t extinct = 0;
  std::uint64_t truncated = 0;
  /// Fraction of attempts that survived to the horizon (estimates P(Z_n > 0)).
  double acceptance_rate = 0.0;
};

/// Rejection sampling of runs that survive to the horizon. Replica indices
/// 0, 1, 2, ... are consumed in order; the first `replicas` survivors are kept.
ConditionedRuns run_conditioned(const SimConfig& cfg, Process process, std::size_t replicas,
                                const RunOptions& options = {});

/// Unconditioned runs for replica indices [0, replicas).
std::vector<BrwRunResult> run_replicas(const SimConfig& cfg, Process process, std::size_t replicas,
                                       unsigned workers = 1);

struct WnSamples {
  std::vector<double> values;  // Z_n / m^n for each untruncated replica
  std::uint64_t truncated = 0;
};

WnSamples wn_samples(const SimConfig& cfg, std::size_t replicas, unsigned workers = 1);

struct ExtinctionCount {
  std::uint64_t extinct = 0;
  std::uint64_t trials = 0;
  std::uint64_t truncated = 0;
};

/// Number of populations (out of `replicas`) that are empty at generation cfg.horizon_n.
ExtinctionCount extinction_by_horizon(const SimConfig& cfg, std::size_t replicas, unsigned workers = 1);

struct DominationPoint {
  double x = 0.0;
  double cdf_brw = 0.0;
  double cdf_ind = 0.0;
  double radius_brw = 0.0;  // half-width of the per-point Clopper-Pearson interval
  double radius_ind = 0.0;
  bool violated = false;    // brw interval lies entirely below the ind interval
};

struct DominationExperiment {
  std::vector<DominationPoint> points;
  std::size_t samples_brw = 0;
  std::size_t samples_ind = 0;
  std::uint64_t truncated = 0;
  bool any_violation = false;
};

/// Empirical CDFs of M_n and of the independent-walks maximum on x_grid,
/// estimated from disjoint random streams. Honors cfg.condition_on_survival.
DominationExperiment domination_experiment(const SimConfig& cfg, std::size_t replicas,
                                           std::span<const double> x_grid, const RunOptions& options = {},
                                           double level = 0.99);

}  // namespace brwld
