#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "thermalnet/ising.hpp"

namespace thermalnet {

enum class Backend { exact, mcmc, annealer, qat };

std::string to_string(Backend backend);
/// Accepts "exact", "mcmc", "anneal"/"annealer" and "qat".
Backend parse_backend(const std::string& name);

/// Multiset of configurations drawn by one backend run, keyed by
/// lexicographic configuration index.
class SampleSet {
 public:
  SampleSet(std::string model_id, std::size_t node_count, Temperature temperature,
            Backend backend, std::uint64_t seed);

  void add(std::uint64_t index, std::uint64_t count = 1);

  const std::string& model_id() const noexcept { return model_id_; }
  std::size_t node_count() const noexcept { return node_count_; }
  Temperature temperature() const noexcept { return temperature_; }
  Backend backend() const noexcept { return backend_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t shots() const noexcept { return shots_; }
  const std::map<std::uint64_t, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t count(std::uint64_t index) const;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  std::string model_id_;
  std::size_t node_count_;
  Temperature temperature_;
  Backend backend_;
  std::uint64_t seed_;
  std::uint64_t shots_ = 0;
  std::map<std::uint64_t, std::uint64_t> counts_;
};

/// Two comment lines (field names, then values) followed by
/// `spin_0,...,spin_{n-1},count` rows for observed configurations.
void write_csv(std::ostream& out, const SampleSet& samples);
SampleSet read_sample_set(std::istream& in);

}  // namespace thermalnet
