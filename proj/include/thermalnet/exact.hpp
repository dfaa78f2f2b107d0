#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "thermalnet/distribution.hpp"
#include "thermalnet/ising.hpp"

namespace thermalnet {

/// Largest model the enumeration oracle accepts (2^20 configurations).
inline constexpr std::size_t kEnumerationCap = 20;
/// Largest model accepted by the Markov-property audit.
inline constexpr std::size_t kAuditCap = 10;
/// Energies closer than this belong to the same spectrum level.
inline constexpr double kEnergyLevelTolerance = 1e-12;

void require_enumerable(const IsingModel& model, std::size_t cap = kEnumerationCap);

/// ln Z, evaluated with log-sum-exp so that small T does not overflow.
double log_partition_function(const IsingModel& model, Temperature T);
double partition_function(const IsingModel& model, Temperature T);

/// Exact Gibbs distribution e^{-E/T}/Z over all nodes.
DistributionTable joint_distribution(const IsingModel& model, Temperature T);

/// Normalized product of per-edge factors e^{J s_i s_j/T} and per-node
/// factors e^{h s_i/T}. Agrees with joint_distribution for pairwise models;
/// kept as a separate route so the two can be checked against each other.
DistributionTable clique_factor_product(const IsingModel& model, Temperature T);

struct EnergyLevel {
  double energy = 0.0;
  std::uint64_t degeneracy = 0;
  double probability = 0.0;
};

/// Distinct energy levels in ascending order.
class EnergySpectrum {
 public:
  explicit EnergySpectrum(std::vector<EnergyLevel> levels);

  const std::vector<EnergyLevel>& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  /// Index of the level matching `energy`; throws a query error if none does.
  std::size_t level_of(double energy) const;

 private:
  std::vector<EnergyLevel> levels_;
};

/// Levels and degeneracies only (probabilities left at zero).
EnergySpectrum energy_spectrum(const IsingModel& model);
/// p(E) = g(E) e^{-E/T} / Z per level.
EnergySpectrum energy_distribution(const IsingModel& model, Temperature T);

/// Writes `energy,degeneracy,probability` rows.
void write_csv(std::ostream& out, const EnergySpectrum& spectrum);

using Evidence = Assignment;

DistributionTable marginalize(const DistributionTable& table, const std::vector<std::size_t>& keep);

/// p(remaining | evidence) over the non-evidence variables, in table order.
DistributionTable condition(const DistributionTable& table, const Evidence& evidence);

struct QueryAnswer {
  std::vector<std::size_t> variables;
  SpinConfiguration spins;
  /// Conditional probability of the returned assignment.
  double probability = 0.0;
};

/// Most probable joint assignment of every non-evidence variable. Ties go to
/// the lexicographically first configuration (+1 before -1).
QueryAnswer mpe(const DistributionTable& table, const Evidence& evidence);

/// argmax over `targets` of sum_W p(targets, W | evidence).
QueryAnswer map_query(const DistributionTable& table, const std::vector<std::size_t>& targets,
                      const Evidence& evidence);

/// True iff p(x,y|w) = p(x|w) p(y|w) within `tol` wherever p(w) > 0.
bool check_conditional_independence(const DistributionTable& table, std::size_t x,
                                    std::size_t y, const std::vector<std::size_t>& given,
                                    double tol = 1e-10);

/// Set-valued form: A and B independent given W. Returns the largest deviation.
double conditional_independence_gap(const DistributionTable& table,
                                    const std::vector<std::size_t>& a,
                                    const std::vector<std::size_t>& b,
                                    const std::vector<std::size_t>& given);

enum class MarkovProperty { pairwise, local, global };

struct MarkovViolation {
  MarkovProperty property;
  std::string description;
  double deviation = 0.0;
};

struct MarkovAuditOptions {
  double tolerance = 1e-10;
  /// Largest separating set tried for the global property.
  std::size_t max_separator_size = kAuditCap;
};

struct MarkovAuditReport {
  std::size_t checks = 0;
  std::vector<MarkovViolation> violations;

  bool clean() const { return violations.empty(); }
};

/// Checks the pairwise, local and global Markov properties of `table`
/// against the graph of `model`.
MarkovAuditReport markov_property_audit(const IsingModel& model, const DistributionTable& table,
                                        const MarkovAuditOptions& options = {});
MarkovAuditReport markov_property_audit(const IsingModel& model, Temperature T,
                                        const MarkovAuditOptions& options = {});

struct CouplingFit {
  /// Model with one coupling per node pair and a field per node.
  IsingModel model;
  double log_partition = 0.0;
  double rms_residual = 0.0;
  double max_abs_residual = 0.0;
};

/// Least-squares fit of ln p(s) = -E(s)/T - ln Z over every configuration of
/// a full joint table. Recovers J and h for tables produced by a pairwise
/// model at temperature T.
CouplingFit fit_ising_parameters(const DistributionTable& joint, Temperature T);

}  // namespace thermalnet
