#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "thermalnet/distribution.hpp"
#include "thermalnet/ising.hpp"
#include "thermalnet/sample_set.hpp"
#include "thermalnet/samplers.hpp"

namespace thermalnet {

/// count/shots for every configuration, unobserved ones as explicit zeros.
DistributionTable empirical_distribution(const SampleSet& samples);

/// KL(p || q) in nats over the support of p. If q has exact zeros it is
/// smoothed to (q + epsilon) / (1 + K epsilon) first.
double kl_divergence(const DistributionTable& p, const DistributionTable& q,
                     double epsilon = 1e-12);

double total_variation(const DistributionTable& p, const DistributionTable& q);

struct EnergyRow {
  double energy = 0.0;
  double empirical = 0.0;
  double exact = 0.0;
};

struct ComparisonReport {
  /// KL(empirical || exact) and total variation over configurations.
  double kl_divergence = 0.0;
  double total_variation = 0.0;
  /// Ascending by energy.
  std::vector<EnergyRow> per_energy;
  std::uint64_t shots = 0;
  double temperature = 0.0;
};

ComparisonReport energy_histogram(const SampleSet& samples, const IsingModel& model,
                                  Temperature T);

struct BackendOptions {
  McmcConfig mcmc;
  std::size_t anneal_stages = 20;
  std::size_t sweeps_per_stage = kDefaultSweepsPerStage;
  std::size_t qaoa_layers = 2;
  std::size_t optimizer_budget = 500;
};

/// Draws `shots` samples of `model` at T with the chosen backend.
SampleSet sample_backend(const IsingModel& model, Temperature T, Backend backend,
                         std::uint64_t shots, std::uint64_t seed,
                         const BackendOptions& options = {});

struct SweepPoint {
  double temperature = 0.0;
  double kl = 0.0;
};

/// KL(empirical || exact) per temperature, in input order. Point k uses the
/// seed derived from (seed, k).
std::vector<SweepPoint> temperature_sweep(const IsingModel& model,
                                          const std::vector<Temperature>& temps, Backend backend,
                                          std::uint64_t shots, std::uint64_t seed,
                                          const BackendOptions& options = {});

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

void write_csv(std::ostream& out, const std::vector<SweepPoint>& sweep);
/// `energy,empirical,exact` rows.
void write_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace thermalnet
