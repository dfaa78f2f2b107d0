#include "thermalnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "thermalnet/error.hpp"
#include "thermalnet/exact.hpp"
#include "thermalnet/quantum.hpp"
#include "thermalnet/rng.hpp"

namespace thermalnet {

namespace {

void require_same_variables(const DistributionTable& p, const DistributionTable& q) {
  if (p.variables() != q.variables()) {
    throw Error(ErrorKind::query, "distributions are over different variables");
  }
}

}  // namespace

DistributionTable empirical_distribution(const SampleSet& samples) {
  if (samples.shots() == 0) throw Error(ErrorKind::config, "sample set is empty");
  const std::size_t n = samples.node_count();
  std::vector<double> probs(std::size_t{1} << n, 0.0);
  for (const auto& [index, count] : samples.counts()) {
    probs[index] = double(count) / double(samples.shots());
  }
  std::vector<std::size_t> vars(n);
  std::iota(vars.begin(), vars.end(), std::size_t{0});
  return DistributionTable(std::move(vars), std::move(probs));
}

double kl_divergence(const DistributionTable& p, const DistributionTable& q, double epsilon) {
  require_same_variables(p, q);
  const auto& qs = q.probabilities();
  const bool smooth = std::any_of(qs.begin(), qs.end(), [](double x) { return x == 0.0; });
  const double scale = 1.0 + epsilon * double(qs.size());
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = p.probability(k);
    if (pk == 0.0) continue;
    const double qk = smooth ? (qs[k] + epsilon) / scale : qs[k];
    kl += pk * std::log(pk / qk);
  }
  return std::max(kl, 0.0);
}

double total_variation(const DistributionTable& p, const DistributionTable& q) {
  require_same_variables(p, q);
  double tv = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p.probability(k) - q.probability(k));
  return 0.5 * tv;
}

ComparisonReport energy_histogram(const SampleSet& samples, const IsingModel& model,
                                  Temperature T) {
  if (samples.node_count() != model.node_count()) {
    throw Error(ErrorKind::dimension, "samples and model disagree on node count");
  }
  const auto spectrum = energy_distribution(model, T);
  const auto exact = joint_distribution(model, T);
  const auto empirical = empirical_distribution(samples);

  ComparisonReport report;
  report.shots = samples.shots();
  report.temperature = T.value();
  report.kl_divergence = kl_divergence(empirical, exact);
  report.total_variation = total_variation(empirical, exact);
  for (const auto& level : spectrum.levels()) {
    report.per_energy.push_back({level.energy, 0.0, level.probability});
  }
  const std::size_t n = model.node_count();
  for (const auto& [index, count] : samples.counts()) {
    const auto config = SpinConfiguration::from_index(index, n);
    report.per_energy[spectrum.level_of(energy(model, config))].empirical +=
        double(count) / double(samples.shots());
  }
  return report;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream)(); }

SampleSet sample_backend(const IsingModel& model, Temperature T, Backend backend,
                         std::uint64_t shots, std::uint64_t seed, const BackendOptions& options) {
  switch (backend) {
    case Backend::exact:
      return exact_sample(model, T, shots, seed);
    case Backend::mcmc:
      return mcmc_sample(model, T, options.mcmc, shots, seed);
    case Backend::annealer:
      return anneal_sample(model, T, geometric_schedule(T, options.anneal_stages), options.sweeps_per_stage,
                           shots, seed);
    case Backend::qat: {
      const auto result = optimize_thermal(model, T, options.qaoa_layers, options.optimizer_budget, seed);
      std::vector<std::size_t> system(model.node_count());
      std::iota(system.begin(), system.end(), std::size_t{0});
      return measure_system(result.state, system, shots, seed, T, model.content_hash());
    }
  }
  throw Error(ErrorKind::config, "unknown backend");
}

std::vector<SweepPoint> temperature_sweep(const IsingModel& model,
                                          const std::vector<Temperature>& temps, Backend backend,
                                          std::uint64_t shots, std::uint64_t seed,
                                          const BackendOptions& options) {
  if (temps.empty()) throw Error(ErrorKind::config, "temperature sweep needs at least one point");
  std::vector<SweepPoint> out;
  out.reserve(temps.size());
  for (std::size_t k = 0; k < temps.size(); ++k) {
    const auto samples = sample_backend(model, temps[k], backend, shots, derive_seed(seed, k), options);
    out.push_back({temps[k].value(), kl_divergence(empirical_distribution(samples),
                                                   joint_distribution(model, temps[k]))});
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  out << "temperature,kl\n" << std::setprecision(17);
  for (const auto& point : sweep) out << point.temperature << ',' << point.kl << '\n';
}

void write_csv(std::ostream& out, const ComparisonReport& report) {
  out << "energy,empirical,exact\n" << std::setprecision(17);
  for (const auto& row : report.per_energy) {
    out << row.energy << ',' << row.empirical << ',' << row.exact << '\n';
  }
}

}  // namespace thermalnet
