#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "thermalnet/ising.hpp"
#include "thermalnet/sample_set.hpp"

namespace thermalnet {

enum class UpdateRule { metropolis, heat_bath };

UpdateRule parse_update_rule(const std::string& name);

struct McmcConfig {
  std::size_t burn_in = 1000;  ///< sweeps discarded per chain
  std::size_t thinning = 10;   ///< sweeps between recorded samples
  std::size_t chain_count = 8;
  UpdateRule update_rule = UpdateRule::heat_bath;

  void validate() const;
};

/// p(s_site = +1 | rest) = 1 / (1 + e^{-2 f / T}), f the local field.
double heat_bath_up_probability(const IsingModel& model, Temperature T,
                                std::span<const Spin> spins, std::size_t site);

/// min(1, e^{-dE/T}) for flipping `site`.
double metropolis_acceptance(const IsingModel& model, Temperature T,
                             std::span<const Spin> spins, std::size_t site);

/// Independent draws from the enumerated Gibbs distribution.
SampleSet exact_sample(const IsingModel& model, Temperature T, std::uint64_t shots,
                       std::uint64_t seed);

/// Single-site MCMC with sequential sweeps. Chains start from uniform random
/// configurations, discard `burn_in` sweeps, then contribute one record every
/// `thinning` sweeps in round-robin order until `shots` records exist.
SampleSet mcmc_sample(const IsingModel& model, Temperature T, const McmcConfig& config,
                      std::uint64_t shots, std::uint64_t seed);

/// `stages` temperatures decreasing geometrically from start_factor*T to T.
std::vector<Temperature> geometric_schedule(Temperature target, std::size_t stages = 20,
                                            double start_factor = 10.0);

inline constexpr std::size_t kDefaultSweepsPerStage = 50;

/// Simulated annealing: each shot is an independent chain walked through the
/// schedule (`sweeps_per_stage` heat-bath sweeps per stage); its final
/// configuration is recorded. The schedule must end at `target`.
SampleSet anneal_sample(const IsingModel& model, Temperature target,
                        const std::vector<Temperature>& schedule, std::size_t sweeps_per_stage,
                        std::uint64_t shots, std::uint64_t seed);

struct TemperatureEstimate {
  /// 1/slope, or +infinity when the fit carries no temperature signal.
  double temperature = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t levels_used = 0;
  bool low_signal = false;
};

inline constexpr std::uint64_t kMinLevelCount = 5;
inline constexpr double kLowSignalSlope = 1e-4;

/// Fits ln(f(E)/g(E)) = c - E/T_eff over energy levels observed at least
/// kMinLevelCount times. Fewer than two usable levels is an estimation error.
TemperatureEstimate estimate_effective_temperature(const SampleSet& samples,
                                                   const IsingModel& model);

}  // namespace thermalnet
