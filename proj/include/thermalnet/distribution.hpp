#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "thermalnet/ising.hpp"

namespace thermalnet {

/// Probability table over every configuration of an ordered variable list.
///
/// Entry k holds the probability of the configuration whose lexicographic
/// index (first variable most significant, +1 before -1) is k. Zero entries
/// are stored explicitly.
class DistributionTable {
 public:
  static constexpr double kNormalizationTolerance = 1e-9;

  DistributionTable(std::vector<std::size_t> variables, std::vector<double> probabilities);

  /// Normalizes non-negative weights into a table.
  static DistributionTable from_weights(std::vector<std::size_t> variables,
                                        std::vector<double> weights);
  static DistributionTable uniform(std::vector<std::size_t> variables);

  const std::vector<std::size_t>& variables() const noexcept { return variables_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  std::size_t variable_count() const noexcept { return variables_.size(); }
  std::size_t size() const noexcept { return probabilities_.size(); }

  double probability(std::uint64_t index) const { return probabilities_.at(index); }
  double probability(std::span<const Spin> spins) const;

  bool contains(std::size_t variable) const;
  /// Position of `variable` in the ordered list; throws a query error if absent.
  std::size_t position_of(std::size_t variable) const;

 private:
  std::vector<std::size_t> variables_;
  std::vector<double> probabilities_;
};

/// Writes `spin_<var>,...,probability` rows in lexicographic order.
void write_csv(std::ostream& out, const DistributionTable& table);

}  // namespace thermalnet
