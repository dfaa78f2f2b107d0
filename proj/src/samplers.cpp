#include "thermalnet/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermalnet/error.hpp"
#include "thermalnet/exact.hpp"
#include "thermalnet/rng.hpp"

namespace thermalnet {

namespace {

/// Site-update kernel for one temperature. Transition probabilities are
/// tabulated per neighbour spin pattern so a sweep costs no exp() calls.
class SweepKernel {
 public:
  static constexpr std::size_t kMaxTabulatedDegree = 12;
  /// Models up to this size also get a table indexed by the whole state.
  static constexpr std::size_t kMaxDenseNodes = 10;

  SweepKernel(const IsingModel& model, double T, UpdateRule rule) : rule_(rule), T_(T) {
    sites_.reserve(model.node_count());
    for (std::size_t i = 0; i < model.node_count(); ++i) {
      Site site;
      site.field = model.field(i);
      for (const auto& nb : model.neighbors(i)) {
        site.neighbors.push_back(nb.node);
        site.couplings.push_back(nb.J);
      }
      site.tabulated = site.neighbors.size() <= kMaxTabulatedDegree;
      if (site.tabulated) {
        const std::size_t patterns = std::size_t{1} << site.neighbors.size();
        site.table.resize(2 * patterns);
        for (std::size_t pattern = 0; pattern < patterns; ++pattern) {
          double f = site.field;
          for (std::size_t k = 0; k < site.neighbors.size(); ++k) {
            f += site.couplings[k] * ((pattern >> k & 1u) ? -1.0 : 1.0);
          }
          site.table[2 * pattern] = probability(f, 1);
          site.table[2 * pattern + 1] = probability(f, -1);
        }
      }
      sites_.push_back(std::move(site));
    }
    const std::size_t n = sites_.size();
    if (n <= kMaxDenseNodes) {
      dense_.resize(n << n);
      for (std::uint64_t state = 0; state < (std::uint64_t{1} << n); ++state) {
        for (std::size_t i = 0; i < n; ++i) {
          const Site& site = sites_[i];
          double f = site.field;
          for (std::size_t k = 0; k < site.neighbors.size(); ++k) {
            f += site.couplings[k] * ((state >> site.neighbors[k] & 1u) ? -1.0 : 1.0);
          }
          dense_[state * n + i] = probability(f, (state >> i & 1u) ? Spin{-1} : Spin{1});
        }
      }
    }
  }

  bool dense() const noexcept { return !dense_.empty(); }

  template <std::size_t B>
  void sweep_batch(std::uint64_t* states, Rng* rngs) const {
    const std::size_t n = sites_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      for (std::size_t b = 0; b < B; ++b) {
        const double p = dense_[states[b] * n + i];
        const double u = rngs[b].uniform();
        if (rule_ == UpdateRule::heat_bath) {
          states[b] = u < p ? states[b] & ~bit : states[b] | bit;
        } else if (u < 0.5 * p) {
          states[b] ^= bit;
        }
      }
    }
  }

  /// Same update as sweep() on a bit-packed state (bit i set = spin i is -1).
  void sweep(std::uint64_t& state, Rng& rng) const {
    const std::size_t n = sites_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double p = dense_[state * n + i];
      const double u = rng.uniform();
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (rule_ == UpdateRule::heat_bath) {
        state = u < p ? state & ~bit : state | bit;
      } else if (u < 0.5 * p) {
        state ^= bit;
      }
    }
  }

  void sweep(std::vector<Spin>& spins, Rng& rng) const {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const Site& site = sites_[i];
      double p;
      if (site.tabulated) {
        std::size_t pattern = 0;
        for (std::size_t k = 0; k < site.neighbors.size(); ++k) {
          pattern |= std::size_t(spins[site.neighbors[k]] < 0) << k;
        }
        p = site.table[2 * pattern + (spins[i] < 0)];
      } else {
        double f = site.field;
        for (std::size_t k = 0; k < site.neighbors.size(); ++k) {
          f += site.couplings[k] * spins[site.neighbors[k]];
        }
        p = probability(f, spins[i]);
      }
      const double u = rng.uniform();
      if (rule_ == UpdateRule::heat_bath) {
        spins[i] = u < p ? Spin{1} : Spin{-1};
      } else if (u < 0.5 * p) {
        // proposal redraws the spin uniformly, so a flip is proposed half the
        // time; a sweep of always-accepted flips would be periodic
        spins[i] = static_cast<Spin>(-spins[i]);
      }
    }
  }

 private:
  struct Site {
    double field = 0.0;
    std::vector<std::size_t> neighbors;
    std::vector<double> couplings;
    bool tabulated = false;
    std::vector<double> table;
  };

  /// Heat bath: p(+1). Metropolis: probability of flipping away from `current`.
  double probability(double f, Spin current) const {
    if (rule_ == UpdateRule::heat_bath) return 1.0 / (1.0 + std::exp(-2.0 * f / T_));
    const double delta = 2.0 * current * f;
    return delta <= 0.0 ? 1.0 : std::exp(-delta / T_);
  }

  UpdateRule rule_;
  double T_;
  std::vector<Site> sites_;
  std::vector<double> dense_;
};

std::uint64_t pack(const std::vector<Spin>& spins) {
  std::uint64_t state = 0;
  for (std::size_t i = 0; i < spins.size(); ++i) state |= std::uint64_t(spins[i] < 0) << i;
  return state;
}

/// Lexicographic configuration index (node 0 most significant) of a packed state.
std::uint64_t packed_index(std::uint64_t state, std::size_t n) {
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < n; ++i) index = (index << 1) | (state >> i & 1u);
  return index;
}

/// One chain, stored packed when the kernel has a dense table.
struct Chain {
  std::vector<Spin> spins;
  std::uint64_t packed = 0;

  void sweep(const SweepKernel& kernel, Rng& rng) {
    if (kernel.dense()) kernel.sweep(packed, rng);
    else kernel.sweep(spins, rng);
  }
  std::uint64_t index(const SweepKernel& kernel) const {
    return kernel.dense() ? packed_index(packed, spins.size()) : config_index(spins);
  }
};

std::vector<Spin> random_configuration(std::size_t n, Rng& rng) {
  std::vector<Spin> spins(n);
  for (auto& s : spins) s = (rng() >> 63) ? Spin{-1} : Spin{1};
  return spins;
}

void check_site(const IsingModel& model, std::span<const Spin> spins, std::size_t site) {
  if (spins.size() != model.node_count()) {
    throw Error(ErrorKind::dimension, "configuration length does not match model");
  }
  if (site >= model.node_count()) throw Error(ErrorKind::index, "site out of range");
}

void check_shots(std::uint64_t shots) {
  if (shots == 0) throw Error(ErrorKind::config, "shots must be at least 1");
}

}  // namespace

UpdateRule parse_update_rule(const std::string& name) {
  if (name == "metropolis") return UpdateRule::metropolis;
  if (name == "heat_bath" || name == "heat-bath") return UpdateRule::heat_bath;
  throw Error(ErrorKind::config, "unknown update rule '" + name + "'");
}

void McmcConfig::validate() const {
  if (thinning < 1) throw Error(ErrorKind::config, "thinning must be at least 1");
  if (chain_count < 1) throw Error(ErrorKind::config, "chain count must be at least 1");
}

double heat_bath_up_probability(const IsingModel& model, Temperature T,
                                std::span<const Spin> spins, std::size_t site) {
  check_site(model, spins, site);
  return 1.0 / (1.0 + std::exp(-2.0 * local_field(model, spins, site) / T.value()));
}

double metropolis_acceptance(const IsingModel& model, Temperature T,
                             std::span<const Spin> spins, std::size_t site) {
  check_site(model, spins, site);
  const double delta = 2.0 * spins[site] * local_field(model, spins, site);
  return delta <= 0.0 ? 1.0 : std::exp(-delta / T.value());
}

SampleSet exact_sample(const IsingModel& model, Temperature T, std::uint64_t shots,
                       std::uint64_t seed) {
  check_shots(shots);
  const auto joint = joint_distribution(model, T);
  std::vector<double> cdf(joint.size());
  double running = 0.0;
  for (std::size_t k = 0; k < cdf.size(); ++k) cdf[k] = running += joint.probability(k);

  std::vector<std::uint64_t> counts(joint.size(), 0);
  Rng rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * running;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  SampleSet samples(model.content_hash(), model.node_count(), T, Backend::exact, seed);
  for (std::size_t k = 0; k < counts.size(); ++k) samples.add(k, counts[k]);
  return samples;
}

SampleSet mcmc_sample(const IsingModel& model, Temperature T, const McmcConfig& config,
                      std::uint64_t shots, std::uint64_t seed) {
  config.validate();
  check_shots(shots);
  const std::size_t n = model.node_count();
  const SweepKernel kernel(model, T.value(), config.update_rule);

  std::vector<Rng> streams;
  std::vector<Chain> chains;
  for (std::size_t c = 0; c < config.chain_count; ++c) {
    streams.emplace_back(seed, c);
    Chain chain{random_configuration(n, streams.back())};
    chain.packed = pack(chain.spins);
    for (std::size_t s = 0; s < config.burn_in; ++s) chain.sweep(kernel, streams.back());
    chains.push_back(std::move(chain));
  }

  SampleSet samples(model.content_hash(), n, T, Backend::mcmc, seed);
  std::uint64_t recorded = 0;
  while (recorded < shots) {
    for (std::size_t c = 0; c < config.chain_count && recorded < shots; ++c) {
      for (std::size_t s = 0; s < config.thinning; ++s) chains[c].sweep(kernel, streams[c]);
      samples.add(chains[c].index(kernel));
      ++recorded;
    }
  }
  return samples;
}

std::vector<Temperature> geometric_schedule(Temperature target, std::size_t stages,
                                            double start_factor) {
  if (stages == 0) throw Error(ErrorKind::config, "schedule needs at least one stage");
  if (!(start_factor >= 1.0)) throw Error(ErrorKind::config, "start factor must be >= 1");
  std::vector<Temperature> schedule;
  schedule.reserve(stages);
  for (std::size_t k = 0; k < stages; ++k) {
    const double remaining = stages == 1 ? 0.0 : double(stages - 1 - k) / double(stages - 1);
    schedule.emplace_back(target.value() * std::pow(start_factor, remaining));
  }
  schedule.back() = target;
  return schedule;
}

SampleSet anneal_sample(const IsingModel& model, Temperature target,
                        const std::vector<Temperature>& schedule, std::size_t sweeps_per_stage,
                        std::uint64_t shots, std::uint64_t seed) {
  if (schedule.empty()) throw Error(ErrorKind::config, "annealing schedule is empty");
  if (schedule.back().value() != target.value()) {
    throw Error(ErrorKind::config, "annealing schedule must end at the target temperature");
  }
  check_shots(shots);
  std::vector<SweepKernel> kernels;
  kernels.reserve(schedule.size());
  for (const auto& t : schedule) kernels.emplace_back(model, t.value(), UpdateRule::heat_bath);

  SampleSet samples(model.content_hash(), model.node_count(), target, Backend::annealer, seed);
  const std::size_t n = model.node_count();
  std::uint64_t shot = 0;
  if (kernels.front().dense()) {
    // independent shots advanced in lockstep; per-shot streams keep the
    // result identical to running them one at a time
    constexpr std::size_t kBatch = 8;
    for (; shot + kBatch <= shots; shot += kBatch) {
      std::vector<Rng> rngs;
      std::uint64_t states[kBatch];
      for (std::size_t b = 0; b < kBatch; ++b) {
        rngs.emplace_back(seed, shot + b);
        states[b] = pack(random_configuration(n, rngs[b]));
      }
      for (const auto& kernel : kernels) {
        for (std::size_t s = 0; s < sweeps_per_stage; ++s) kernel.sweep_batch<kBatch>(states, rngs.data());
      }
      for (std::size_t b = 0; b < kBatch; ++b) samples.add(packed_index(states[b], n));
    }
  }
  for (; shot < shots; ++shot) {
    Rng rng(seed, shot);
    Chain chain{random_configuration(n, rng)};
    chain.packed = pack(chain.spins);
    for (const auto& kernel : kernels) {
      for (std::size_t s = 0; s < sweeps_per_stage; ++s) chain.sweep(kernel, rng);
    }
    samples.add(chain.index(kernels.front()));
  }
  return samples;
}

TemperatureEstimate estimate_effective_temperature(const SampleSet& samples,
                                                   const IsingModel& model) {
  if (samples.node_count() != model.node_count()) {
    throw Error(ErrorKind::dimension, "samples and model disagree on node count");
  }
  const auto spectrum = energy_spectrum(model);
  std::vector<std::uint64_t> level_counts(spectrum.size(), 0);
  const std::size_t n = model.node_count();
  for (const auto& [index, count] : samples.counts()) {
    const auto config = SpinConfiguration::from_index(index, n);
    level_counts[spectrum.level_of(energy(model, config))] += count;
  }

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    if (level_counts[k] < kMinLevelCount) continue;
    const auto& level = spectrum.levels()[k];
    const double f = double(level_counts[k]) / double(samples.shots());
    xs.push_back(-level.energy);
    ys.push_back(std::log(f / double(level.degeneracy)));
  }
  if (xs.size() < 2) {
    throw Error(ErrorKind::estimation,
                "need at least two energy levels observed " + std::to_string(kMinLevelCount) +
                    " or more times");
  }

  const double m = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k] / m;
    my += ys[k] / m;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  TemperatureEstimate estimate;
  estimate.levels_used = xs.size();
  estimate.slope = sxy / sxx;
  estimate.intercept = my - estimate.slope * mx;
  estimate.low_signal = !(estimate.slope >= kLowSignalSlope);
  estimate.temperature = estimate.low_signal ? std::numeric_limits<double>::infinity()
                                             : 1.0 / estimate.slope;
  return estimate;
}

}  // namespace thermalnet
