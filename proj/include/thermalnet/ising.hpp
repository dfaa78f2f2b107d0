#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace thermalnet {

using Spin = std::int8_t;

/// Bath temperature with k_B absorbed; weights are e^{-E/T}.
class Temperature {
 public:
  explicit Temperature(double value);

  double value() const noexcept { return value_; }
  double beta() const noexcept { return 1.0 / value_; }

  friend bool operator==(Temperature, Temperature) = default;

 private:
  double value_;
};

/// Ordered assignment of +1/-1 to every node.
///
/// Configurations are also addressed by a lexicographic index: node 0 is the
/// most significant bit and a set bit means -1, so index 0 is (+1,...,+1).
class SpinConfiguration {
 public:
  SpinConfiguration() = default;
  explicit SpinConfiguration(std::vector<Spin> spins);

  static SpinConfiguration from_index(std::uint64_t index, std::size_t size);

  std::size_t size() const noexcept { return spins_.size(); }
  Spin operator[](std::size_t i) const { return spins_[i]; }
  std::span<const Spin> spins() const noexcept { return spins_; }
  std::uint64_t index() const;

  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

 private:
  std::vector<Spin> spins_;
};

std::uint64_t config_index(std::span<const Spin> spins);
Spin spin_at(std::uint64_t index, std::size_t size, std::size_t position);
std::string format_spins(std::span<const Spin> spins);

struct Coupling {
  std::size_t u = 0;
  std::size_t v = 0;
  double J = 0.0;
};

/// Pairwise Ising Markov network. Couplings are stored with u < v, sorted.
class IsingModel {
 public:
  struct Neighbor {
    std::size_t node;
    double J;
  };

  IsingModel(std::size_t node_count, std::vector<Coupling> couplings,
             std::vector<double> fields = {});

  std::size_t node_count() const noexcept { return node_count_; }
  const std::vector<Coupling>& couplings() const noexcept { return couplings_; }
  const std::vector<double>& fields() const noexcept { return fields_; }
  double field(std::size_t i) const { return fields_.at(i); }
  double coupling(std::size_t i, std::size_t j) const;
  bool has_edge(std::size_t i, std::size_t j) const;
  const std::vector<Neighbor>& neighbors(std::size_t i) const { return adjacency_.at(i); }

  bool has_zero_fields() const;
  bool is_zero() const;

  /// Copy with every J and h multiplied by `factor`.
  IsingModel scaled(double factor) const;

  /// Hex FNV-1a digest of the canonical JSON form.
  std::string content_hash() const;

 private:
  std::size_t node_count_;
  std::vector<Coupling> couplings_;
  std::vector<double> fields_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

double energy(const IsingModel& model, std::span<const Spin> spins);
double energy(const IsingModel& model, const SpinConfiguration& config);

/// h_i + sum_j J_ij s_j, the effective field felt by site i.
double local_field(const IsingModel& model, std::span<const Spin> spins, std::size_t site);

SpinConfiguration spin_flip(const SpinConfiguration& config);

using Assignment = std::map<std::size_t, Spin>;

struct ClampResult {
  IsingModel model;
  /// energy(full) == energy(reduced) + offset for every free configuration.
  double offset = 0.0;
  /// free_nodes[k] is the original index of reduced node k.
  std::vector<std::size_t> free_nodes;
};

/// Folds the clamped spins into the fields of their neighbours.
ClampResult clamp(const IsingModel& model, const Assignment& assignments);

/// Parses "i=s,j=s" with s in {+1,1,-1}; repeated nodes are rejected.
Assignment parse_assignment(const std::string& text);

IsingModel parse_model(const std::string& json_text);
IsingModel load_model(const std::filesystem::path& path);
std::string dump_model(const IsingModel& model);

}  // namespace thermalnet
