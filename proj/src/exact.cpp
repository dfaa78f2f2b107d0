#include "thermalnet/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "thermalnet/error.hpp"

namespace thermalnet {

namespace {

std::vector<std::size_t> all_nodes(std::size_t n) {
  std::vector<std::size_t> nodes(n);
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  return nodes;
}

std::vector<double> enumerate_energies(const IsingModel& model) {
  const std::size_t n = model.node_count();
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<double> energies(count);
  std::vector<Spin> spins(n);
  for (std::uint64_t index = 0; index < count; ++index) {
    for (std::size_t i = 0; i < n; ++i) spins[i] = spin_at(index, n, i);
    energies[index] = energy(model, spins);
  }
  return energies;
}

/// Gathers the bits of `index` (over `size` variables) at `positions` into a
/// new lexicographic index.
std::uint64_t project(std::uint64_t index, std::size_t size,
                      const std::vector<std::size_t>& positions) {
  std::uint64_t out = 0;
  for (std::size_t p : positions) out = (out << 1) | ((index >> (size - 1 - p)) & 1u);
  return out;
}

std::string join(const std::vector<std::size_t>& nodes) {
  std::string out = "{";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(nodes[i]);
  }
  return out + "}";
}

std::size_t argmax_first(const std::vector<double>& values) {
  const double best = *std::max_element(values.begin(), values.end());
  const double slack = 1e-12 * best;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= best - slack) return i;
  }
  return 0;
}

}  // namespace

void require_enumerable(const IsingModel& model, std::size_t cap) {
  if (model.node_count() > cap) {
    throw Error(ErrorKind::capacity, "model has " + std::to_string(model.node_count()) +
                                         " nodes; enumeration is limited to " +
                                         std::to_string(cap));
  }
}

double log_partition_function(const IsingModel& model, Temperature T) {
  require_enumerable(model);
  const auto energies = enumerate_energies(model);
  const double e_min = *std::min_element(energies.begin(), energies.end());
  double sum = 0.0;
  for (double e : energies) sum += std::exp(-(e - e_min) / T.value());
  return -e_min / T.value() + std::log(sum);
}

double partition_function(const IsingModel& model, Temperature T) {
  return std::exp(log_partition_function(model, T));
}

DistributionTable joint_distribution(const IsingModel& model, Temperature T) {
  require_enumerable(model);
  auto weights = enumerate_energies(model);
  const double e_min = *std::min_element(weights.begin(), weights.end());
  for (auto& w : weights) w = std::exp(-(w - e_min) / T.value());
  return DistributionTable::from_weights(all_nodes(model.node_count()), std::move(weights));
}

DistributionTable clique_factor_product(const IsingModel& model, Temperature T) {
  require_enumerable(model);
  const std::size_t n = model.node_count();
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<double> weights(count);
  for (std::uint64_t index = 0; index < count; ++index) {
    double w = 1.0;
    for (const auto& c : model.couplings()) {
      w *= std::exp(c.J * spin_at(index, n, c.u) * spin_at(index, n, c.v) / T.value());
    }
    for (std::size_t i = 0; i < n; ++i) {
      w *= std::exp(model.field(i) * spin_at(index, n, i) / T.value());
    }
    weights[index] = w;
  }
  return DistributionTable::from_weights(all_nodes(n), std::move(weights));
}

EnergySpectrum::EnergySpectrum(std::vector<EnergyLevel> levels) : levels_(std::move(levels)) {
  std::sort(levels_.begin(), levels_.end(),
            [](const EnergyLevel& a, const EnergyLevel& b) { return a.energy < b.energy; });
}

std::size_t EnergySpectrum::level_of(double energy) const {
  auto it = std::lower_bound(
      levels_.begin(), levels_.end(), energy - kEnergyLevelTolerance,
      [](const EnergyLevel& level, double e) { return level.energy < e; });
  if (it == levels_.end() || std::abs(it->energy - energy) > kEnergyLevelTolerance) {
    throw Error(ErrorKind::query, "energy " + std::to_string(energy) + " is not a level");
  }
  return static_cast<std::size_t>(it - levels_.begin());
}

EnergySpectrum energy_spectrum(const IsingModel& model) {
  require_enumerable(model);
  auto energies = enumerate_energies(model);
  std::sort(energies.begin(), energies.end());
  std::vector<EnergyLevel> levels;
  for (double e : energies) {
    if (levels.empty() || e - levels.back().energy > kEnergyLevelTolerance) {
      levels.push_back({e, 1, 0.0});
    } else {
      ++levels.back().degeneracy;
    }
  }
  return EnergySpectrum(std::move(levels));
}

EnergySpectrum energy_distribution(const IsingModel& model, Temperature T) {
  auto levels = energy_spectrum(model).levels();
  const double e_min = levels.front().energy;
  double total = 0.0;
  for (auto& level : levels) {
    level.probability = double(level.degeneracy) * std::exp(-(level.energy - e_min) / T.value());
    total += level.probability;
  }
  for (auto& level : levels) level.probability /= total;
  return EnergySpectrum(std::move(levels));
}

void write_csv(std::ostream& out, const EnergySpectrum& spectrum) {
  out << "energy,degeneracy,probability\n" << std::setprecision(17);
  for (const auto& level : spectrum.levels()) {
    out << level.energy << ',' << level.degeneracy << ',' << level.probability << '\n';
  }
}

DistributionTable marginalize(const DistributionTable& table,
                              const std::vector<std::size_t>& keep) {
  if (keep.empty()) throw Error(ErrorKind::query, "marginalize needs at least one variable");
  std::vector<std::size_t> positions;
  positions.reserve(keep.size());
  for (std::size_t v : keep) positions.push_back(table.position_of(v));
  const std::size_t k = table.variable_count();
  std::vector<double> out(std::size_t{1} << keep.size(), 0.0);
  for (std::uint64_t index = 0; index < table.size(); ++index) {
    out[project(index, k, positions)] += table.probability(index);
  }
  return DistributionTable::from_weights(keep, std::move(out));
}

DistributionTable condition(const DistributionTable& table, const Evidence& evidence) {
  const std::size_t k = table.variable_count();
  std::vector<Spin> required(k, 0);
  for (const auto& [variable, spin] : evidence) {
    if (spin != 1 && spin != -1) throw Error(ErrorKind::query, "evidence spins must be +1/-1");
    required[table.position_of(variable)] = spin;
  }
  std::vector<std::size_t> remaining;
  std::vector<std::size_t> positions;
  for (std::size_t p = 0; p < k; ++p) {
    if (required[p] == 0) {
      remaining.push_back(table.variables()[p]);
      positions.push_back(p);
    }
  }
  std::vector<double> out(std::size_t{1} << remaining.size(), 0.0);
  for (std::uint64_t index = 0; index < table.size(); ++index) {
    bool consistent = true;
    for (std::size_t p = 0; p < k && consistent; ++p) {
      consistent = required[p] == 0 || spin_at(index, k, p) == required[p];
    }
    if (consistent) out[project(index, k, positions)] += table.probability(index);
  }
  const double mass = std::accumulate(out.begin(), out.end(), 0.0);
  if (!(mass > 0.0)) throw Error(ErrorKind::conditioning, "evidence has zero probability");
  return DistributionTable::from_weights(std::move(remaining), std::move(out));
}

QueryAnswer mpe(const DistributionTable& table, const Evidence& evidence) {
  const auto conditioned = condition(table, evidence);
  const std::size_t best = argmax_first(conditioned.probabilities());
  return {conditioned.variables(),
          SpinConfiguration::from_index(best, conditioned.variable_count()),
          conditioned.probability(best)};
}

QueryAnswer map_query(const DistributionTable& table, const std::vector<std::size_t>& targets,
                      const Evidence& evidence) {
  if (targets.empty()) throw Error(ErrorKind::query, "MAP query needs at least one target");
  for (std::size_t t : targets) {
    if (evidence.contains(t)) {
      throw Error(ErrorKind::query, "variable " + std::to_string(t) + " is both target and evidence");
    }
    table.position_of(t);
  }
  const auto marginal = marginalize(condition(table, evidence), targets);
  const std::size_t best = argmax_first(marginal.probabilities());
  return {marginal.variables(), SpinConfiguration::from_index(best, targets.size()),
          marginal.probability(best)};
}

double conditional_independence_gap(const DistributionTable& table,
                                    const std::vector<std::size_t>& a,
                                    const std::vector<std::size_t>& b,
                                    const std::vector<std::size_t>& given) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::query, "independence sets must be non-empty");
  std::vector<std::size_t> joint_vars;
  joint_vars.insert(joint_vars.end(), a.begin(), a.end());
  joint_vars.insert(joint_vars.end(), b.begin(), b.end());
  joint_vars.insert(joint_vars.end(), given.begin(), given.end());
  // marginalize rejects unknown variables; from_weights rejects overlaps
  const auto joint = marginalize(table, joint_vars);

  const std::size_t na = std::size_t{1} << a.size();
  const std::size_t nb = std::size_t{1} << b.size();
  const std::size_t nw = std::size_t{1} << given.size();
  // joint index layout: [a bits][b bits][w bits]
  double worst = 0.0;
  for (std::size_t w = 0; w < nw; ++w) {
    double pw = 0.0;
    std::vector<double> pa(na, 0.0), pb(nb, 0.0);
    for (std::size_t x = 0; x < na; ++x) {
      for (std::size_t y = 0; y < nb; ++y) {
        const double p = joint.probability((x * nb + y) * nw + w);
        pw += p;
        pa[x] += p;
        pb[y] += p;
      }
    }
    if (!(pw > 0.0)) continue;
    for (std::size_t x = 0; x < na; ++x) {
      for (std::size_t y = 0; y < nb; ++y) {
        const double pxy = joint.probability((x * nb + y) * nw + w) / pw;
        worst = std::max(worst, std::abs(pxy - (pa[x] / pw) * (pb[y] / pw)));
      }
    }
  }
  return worst;
}

bool check_conditional_independence(const DistributionTable& table, std::size_t x,
                                    std::size_t y, const std::vector<std::size_t>& given,
                                    double tol) {
  return conditional_independence_gap(table, {x}, {y}, given) <= tol;
}

MarkovAuditReport markov_property_audit(const IsingModel& model, const DistributionTable& table,
                                        const MarkovAuditOptions& options) {
  require_enumerable(model, kAuditCap);
  const std::size_t n = model.node_count();
  if (table.variables() != all_nodes(n)) {
    throw Error(ErrorKind::dimension, "audit needs the full joint over nodes 0..n-1");
  }
  MarkovAuditReport report;
  auto record = [&](MarkovProperty property, double gap, std::string description) {
    ++report.checks;
    if (gap > options.tolerance) {
      report.violations.push_back({property, std::move(description), gap});
    }
  };

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (model.has_edge(a, b)) continue;
      std::vector<std::size_t> rest;
      for (std::size_t v = 0; v < n; ++v) {
        if (v != a && v != b) rest.push_back(v);
      }
      record(MarkovProperty::pairwise, conditional_independence_gap(table, {a}, {b}, rest),
             "pairwise " + std::to_string(a) + " _|_ " + std::to_string(b) + " | " + join(rest));
    }
  }

  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::size_t> neighborhood, rest;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == a) continue;
      (model.has_edge(a, v) ? neighborhood : rest).push_back(v);
    }
    if (rest.empty()) continue;
    record(MarkovProperty::local, conditional_independence_gap(table, {a}, rest, neighborhood),
           "local " + std::to_string(a) + " _|_ " + join(rest) + " | " + join(neighborhood));
  }

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size > options.max_separator_size || size + 2 > n) continue;
    std::vector<std::size_t> separator;
    std::vector<int> component(n, -1);
    for (std::size_t v = 0; v < n; ++v) {
      if (mask >> v & 1u) separator.push_back(v);
    }
    int components = 0;
    for (std::size_t start = 0; start < n; ++start) {
      if ((mask >> start & 1u) || component[start] >= 0) continue;
      std::vector<std::size_t> stack{start};
      component[start] = components;
      while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (const auto& nb : model.neighbors(v)) {
          if ((mask >> nb.node & 1u) || component[nb.node] >= 0) continue;
          component[nb.node] = components;
          stack.push_back(nb.node);
        }
      }
      ++components;
    }
    for (int c = 0; c + 1 < components; ++c) {
      std::vector<std::size_t> inside, outside;
      for (std::size_t v = 0; v < n; ++v) {
        if (mask >> v & 1u) continue;
        (component[v] == c ? inside : outside).push_back(v);
      }
      record(MarkovProperty::global,
             conditional_independence_gap(table, inside, outside, separator),
             "global " + join(inside) + " _|_ " + join(outside) + " | " + join(separator));
    }
  }
  return report;
}

MarkovAuditReport markov_property_audit(const IsingModel& model, Temperature T,
                                        const MarkovAuditOptions& options) {
  require_enumerable(model, kAuditCap);
  return markov_property_audit(model, joint_distribution(model, T), options);
}

CouplingFit fit_ising_parameters(const DistributionTable& joint, Temperature T) {
  const std::size_t n = joint.variable_count();
  if (n == 0) throw Error(ErrorKind::estimation, "cannot fit an empty table");
  const std::size_t pairs = n * (n - 1) / 2;
  const std::size_t columns = pairs + n + 1;
  const std::size_t rows = joint.size();

  Eigen::MatrixXd design(rows, columns);
  Eigen::VectorXd target(rows);
  for (std::uint64_t index = 0; index < rows; ++index) {
    const double p = joint.probability(index);
    if (!(p > 0.0)) throw Error(ErrorKind::estimation, "log-linear fit needs a strictly positive table");
    target(index) = std::log(p);
    std::size_t col = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        design(index, col++) = spin_at(index, n, i) * spin_at(index, n, j) / T.value();
      }
    }
    for (std::size_t i = 0; i < n; ++i) design(index, col++) = spin_at(index, n, i) / T.value();
    design(index, col) = -1.0;
  }
  const Eigen::VectorXd solution = design.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd residual = design * solution - target;

  std::vector<Coupling> couplings;
  std::size_t col = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) couplings.push_back({i, j, solution(col++)});
  }
  std::vector<double> fields(n);
  for (std::size_t i = 0; i < n; ++i) fields[i] = solution(col++);

  return {IsingModel(n, std::move(couplings), std::move(fields)), solution(col),
          std::sqrt(residual.squaredNorm() / double(rows)), residual.cwiseAbs().maxCoeff()};
}

}  // namespace thermalnet
