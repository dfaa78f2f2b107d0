#include "thermalnet/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "thermalnet/error.hpp"

namespace thermalnet {

namespace {

void check_shape(const std::vector<std::size_t>& variables, std::size_t entries) {
  if (variables.size() >= 63) throw Error(ErrorKind::capacity, "too many variables for a table");
  if (entries != (std::size_t{1} << variables.size())) {
    throw Error(ErrorKind::dimension, "table needs 2^k entries for k variables");
  }
  auto sorted = variables;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::query, "table variables must be distinct");
  }
}

}  // namespace

DistributionTable::DistributionTable(std::vector<std::size_t> variables,
                                     std::vector<double> probabilities)
    : variables_(std::move(variables)), probabilities_(std::move(probabilities)) {
  check_shape(variables_, probabilities_.size());
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::model, "probabilities must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorKind::model, "probabilities sum to " + std::to_string(total));
  }
}

DistributionTable DistributionTable::from_weights(std::vector<std::size_t> variables,
                                                  std::vector<double> weights) {
  check_shape(variables, weights.size());
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorKind::conditioning, "weights have no positive finite mass");
  }
  for (auto& w : weights) w /= total;
  return DistributionTable(std::move(variables), std::move(weights));
}

DistributionTable DistributionTable::uniform(std::vector<std::size_t> variables) {
  const std::size_t n = std::size_t{1} << variables.size();
  return DistributionTable(std::move(variables), std::vector<double>(n, 1.0 / double(n)));
}

double DistributionTable::probability(std::span<const Spin> spins) const {
  if (spins.size() != variables_.size()) {
    throw Error(ErrorKind::dimension, "configuration length does not match table");
  }
  return probabilities_[config_index(spins)];
}

bool DistributionTable::contains(std::size_t variable) const {
  return std::find(variables_.begin(), variables_.end(), variable) != variables_.end();
}

std::size_t DistributionTable::position_of(std::size_t variable) const {
  auto it = std::find(variables_.begin(), variables_.end(), variable);
  if (it == variables_.end()) {
    throw Error(ErrorKind::query, "variable " + std::to_string(variable) + " is not in the table");
  }
  return static_cast<std::size_t>(it - variables_.begin());
}

void write_csv(std::ostream& out, const DistributionTable& table) {
  for (std::size_t v : table.variables()) out << "spin_" << v << ',';
  out << "probability\n";
  const std::size_t k = table.variable_count();
  out << std::setprecision(17);
  for (std::uint64_t index = 0; index < table.size(); ++index) {
    for (std::size_t i = 0; i < k; ++i) out << int(spin_at(index, k, i)) << ',';
    out << table.probability(index) << '\n';
  }
}

}  // namespace thermalnet
