#include "brwld/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "brwld/errors.hpp"
#include "brwld/parallel.hpp"
#include "brwld/stats.hpp"

namespace brwld {

namespace {

// Populations up to this size draw offspring one individual at a time.
constexpr std::int64_t kPerParticleThreshold = 64;

BrwRunResult extinct_tail(BrwRunResult result, int horizon) {
  while (static_cast<int>(result.population_path.size()) <= horizon) result.population_path.push_back(0);
  result.survived_to_n = false;
  result.max_position.reset();
  return result;
}

}  // namespace

double sample_step(const StepModel& step, CounterRng& rng) {
  return std::visit([&rng](const auto& law) { return sample(law, rng); }, step);
}

int sample_offspring(const OffspringLaw& law, CounterRng& rng) {
  const double u = rng.uniform_open();
  const auto pmf = law.pmf();
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    if (u < acc) return static_cast<int>(k);
  }
  return law.max_offspring();
}

std::int64_t sample_offspring_total(const OffspringLaw& law, std::int64_t parents, CounterRng& rng) {
  if (parents <= kPerParticleThreshold) {
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < parents; ++i) total += sample_offspring(law, rng);
    return total;
  }
  // Multinomial counts over the offspring support via conditional binomials.
  const auto pmf = law.pmf();
  std::size_t lowest = 0;
  while (pmf[lowest] == 0.0) ++lowest;
  std::int64_t remaining = parents;
  double remaining_mass = 1.0;
  std::int64_t total = 0;
  for (std::size_t k = pmf.size(); k-- > lowest && remaining > 0;) {
    if (pmf[k] == 0.0) continue;
    std::int64_t count = remaining;
    if (k > lowest) {
      const double p = std::clamp(pmf[k] / remaining_mass, 0.0, 1.0);
      std::binomial_distribution<std::int64_t> binomial(remaining, p);
      count = binomial(rng);
    }
    total += static_cast<std::int64_t>(k) * count;
    remaining -= count;
    remaining_mass -= pmf[k];
  }
  return total;
}

void validate(const SimConfig& cfg) {
  if (cfg.horizon_n < 0) throw ValidationError("horizon must be non-negative");
  if (cfg.population_cap < 1) throw ValidationError("population_cap must be at least 1");
}

BrwRunResult simulate_brw(const SimConfig& cfg, std::uint64_t replica_index) {
  validate(cfg);
  CounterRng rng(cfg.seed, replica_index, StreamPurpose::BranchingWalk);
  BrwRunResult result;
  result.population_path.reserve(static_cast<std::size_t>(cfg.horizon_n) + 1);
  result.population_path.push_back(1);
  std::vector<double> front{0.0};
  std::vector<double> next;
  for (int gen = 1; gen <= cfg.horizon_n; ++gen) {
    next.clear();
    for (const double position : front) {
      const int children = sample_offspring(cfg.offspring, rng);
      if (static_cast<std::int64_t>(next.size()) + children > cfg.population_cap) {
        result.truncated = true;
        return result;
      }
      for (int c = 0; c < children; ++c) next.push_back(position + sample_step(cfg.step, rng));
    }
    front.swap(next);
    result.population_path.push_back(static_cast<std::int64_t>(front.size()));
    if (front.empty()) return extinct_tail(std::move(result), cfg.horizon_n);
  }
  result.survived_to_n = true;
  result.max_position = *std::max_element(front.begin(), front.end());
  return result;
}

BrwRunResult simulate_ind_max(const SimConfig& cfg, std::uint64_t replica_index) {
  validate(cfg);
  CounterRng rng(cfg.seed, replica_index, StreamPurpose::IndependentWalks);
  BrwRunResult result;
  result.population_path.reserve(static_cast<std::size_t>(cfg.horizon_n) + 1);
  result.population_path.push_back(1);
  std::int64_t population = 1;
  for (int gen = 1; gen <= cfg.horizon_n; ++gen) {
    population = sample_offspring_total(cfg.offspring, population, rng);
    if (population > cfg.population_cap) {
      result.truncated = true;
      return result;
    }
    result.population_path.push_back(population);
    if (population == 0) return extinct_tail(std::move(result), cfg.horizon_n);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = 0; j < population; ++j) {
    double position = 0.0;
    for (int step = 0; step < cfg.horizon_n; ++step) position += sample_step(cfg.step, rng);
    best = std::max(best, position);
  }
  result.survived_to_n = true;
  result.max_position = best;
  return result;
}

BrwRunResult simulate(const SimConfig& cfg, Process process, std::uint64_t replica_index) {
  return process == Process::Brw ? simulate_brw(cfg, replica_index)
                                 : simulate_ind_max(cfg, replica_index);
}

BrwRunResult simulate_population(const SimConfig& cfg, std::uint64_t replica_index) {
  validate(cfg);
  CounterRng rng(cfg.seed, replica_index, StreamPurpose::Population);
  BrwRunResult result;
  result.population_path.push_back(1);
  std::int64_t population = 1;
  for (int gen = 1; gen <= cfg.horizon_n; ++gen) {
    population = sample_offspring_total(cfg.offspring, population, rng);
    if (population > cfg.population_cap) {
      result.truncated = true;
      return result;
    }
    result.population_path.push_back(population);
    if (population == 0) return extinct_tail(std::move(result), cfg.horizon_n);
  }
  result.survived_to_n = true;
  return result;
}

std::vector<BrwRunResult> run_replicas(const SimConfig& cfg, Process process, std::size_t replicas,
                                       unsigned workers) {
  validate(cfg);
  std::vector<BrwRunResult> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t i) { out[i] = simulate(cfg, process, i); });
  return out;
}

ConditionedRuns run_conditioned(const SimConfig& cfg, Process process, std::size_t replicas,
                                const RunOptions& options) {
  validate(cfg);
  if (!cfg.condition_on_survival) {
    throw ValidationError("run_conditioned needs condition_on_survival = true");
  }
  ConditionedRuns out;
  out.runs.reserve(replicas);
  std::uint64_t next_index = 0;
  std::uint64_t block = std::max<std::uint64_t>(64, replicas);
  std::vector<BrwRunResult> batch;
  while (out.runs.size() < replicas) {
    batch.assign(block, BrwRunResult{});
    const std::uint64_t base = next_index;
    parallel_for(block, options.workers,
                 [&](std::size_t i) { batch[i] = simulate(cfg, process, base + i); });
    next_index += block;
    // Sequential scan keeps the accepted set independent of the worker count.
    for (auto& run : batch) {
      if (out.runs.size() == replicas) break;
      ++out.attempts;
      if (run.truncated) {
        ++out.truncated;
      } else if (run.survived_to_n) {
        out.runs.push_back(std::move(run));
      } else {
        ++out.extinct;
      }
    }
    const auto accepted = static_cast<double>(out.runs.size());
    const auto tried = static_cast<double>(out.attempts);
    if (out.attempts >= options.probe_attempts && accepted / tried < options.min_acceptance) {
      std::ostringstream msg;
      msg << "conditioning on survival aborted: " << out.runs.size() << " survivors in " << out.attempts
          << " attempts (acceptance below " << options.min_acceptance << ")";
      throw SimulationAbort(msg.str());
    }
    if (out.runs.size() < replicas) {
      if (out.runs.empty()) {
        block *= 2;
      } else {
        const double per_success = tried / accepted;
        const double needed = static_cast<double>(replicas - out.runs.size()) * per_success * 1.1;
        block = static_cast<std::uint64_t>(std::ceil(needed)) + 16;
      }
      block = std::min<std::uint64_t>(block, 1u << 22);
    }
  }
  const auto decided = out.attempts - out.truncated;
  out.acceptance_rate = decided == 0 ? 0.0 : static_cast<double>(out.runs.size()) / static_cast<double>(decided);
  return out;
}

WnSamples wn_samples(const SimConfig& cfg, std::size_t replicas, unsigned workers) {
  validate(cfg);
  const double m = cfg.offspring.mean();
  if (!(m > 0.0)) throw ValidationError("wn_samples needs an offspring mean > 0");
  std::vector<BrwRunResult> runs(replicas);
  parallel_for(replicas, workers, [&](std::size_t i) { runs[i] = simulate_population(cfg, i); });
  WnSamples out;
  out.values.reserve(replicas);
  const double norm = std::pow(m, cfg.horizon_n);
  for (const auto& run : runs) {
    if (run.truncated) {
      ++out.truncated;
      continue;
    }
    out.values.push_back(static_cast<double>(run.population_path.back()) / norm);
  }
  return out;
}

ExtinctionCount extinction_by_horizon(const SimConfig& cfg, std::size_t replicas, unsigned workers) {
  validate(cfg);
  std::vector<signed char> state(replicas, 0);  // 1 extinct, 0 alive, -1 truncated
  parallel_for(replicas, workers, [&](std::size_t i) {
    const BrwRunResult run = simulate_population(cfg, i);
    state[i] = run.truncated ? -1 : (run.survived_to_n ? 0 : 1);
  });
  ExtinctionCount out;
  for (const signed char s : state) {
    if (s < 0) {
      ++out.truncated;
      continue;
    }
    ++out.trials;
    if (s == 1) ++out.extinct;
  }
  return out;
}

DominationExperiment domination_experiment(const SimConfig& cfg, std::size_t replicas,
                                           std::span<const double> x_grid, const RunOptions& options,
                                           double level) {
  validate(cfg);
  std::vector<BrwRunResult> brw;
  std::vector<BrwRunResult> ind;
  DominationExperiment out;
  if (cfg.condition_on_survival) {
    auto a = run_conditioned(cfg, Process::Brw, replicas, options);
    auto b = run_conditioned(cfg, Process::Independent, replicas, options);
    out.truncated = a.truncated + b.truncated;
    brw = std::move(a.runs);
    ind = std::move(b.runs);
  } else {
    for (auto& run : run_replicas(cfg, Process::Brw, replicas, options.workers)) {
      if (run.truncated) ++out.truncated; else brw.push_back(std::move(run));
    }
    for (auto& run : run_replicas(cfg, Process::Independent, replicas, options.workers)) {
      if (run.truncated) ++out.truncated; else ind.push_back(std::move(run));
    }
  }
  out.samples_brw = brw.size();
  out.samples_ind = ind.size();
  if (brw.empty() || ind.empty()) throw SimulationAbort("domination_experiment produced no usable runs");

  const auto count_at_or_below = [](const std::vector<BrwRunResult>& runs, double x) {
    std::uint64_t count = 0;
    for (const auto& run : runs) {
      if (!run.max_position || *run.max_position <= x) ++count;
    }
    return count;
  };
  for (const double x : x_grid) {
    DominationPoint point;
    point.x = x;
    const auto kb = count_at_or_below(brw, x);
    const auto ki = count_at_or_below(ind, x);
    point.cdf_brw = static_cast<double>(kb) / static_cast<double>(brw.size());
    point.cdf_ind = static_cast<double>(ki) / static_cast<double>(ind.size());
    const Interval cb = clopper_pearson(kb, brw.size(), level);
    const Interval ci = clopper_pearson(ki, ind.size(), level);
    point.radius_brw = std::max(point.cdf_brw - cb.low, cb.high - point.cdf_brw);
    point.radius_ind = std::max(point.cdf_ind - ci.low, ci.high - point.cdf_ind);
    point.violated = cb.high < ci.low;
    out.any_violation = out.any_violation || point.violated;
    out.points.push_back(point);
  }
  return out;
}

}  // namespace brwld
