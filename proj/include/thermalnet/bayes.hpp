#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "thermalnet/distribution.hpp"

namespace thermalnet {

/// Directed network of named binary variables.
///
/// A CPT row holds p(var = true | parents); rows are indexed by the parent
/// assignment with the first parent most significant and `true` encoded as
/// bit 0, matching DistributionTable where true plays the role of spin +1.
class BayesNet {
 public:
  struct Variable {
    std::string name;
    std::vector<std::size_t> parents;
    std::vector<double> p_true;
  };

  explicit BayesNet(std::vector<Variable> variables);

  std::size_t size() const noexcept { return variables_.size(); }
  const Variable& variable(std::size_t i) const { return variables_.at(i); }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  std::size_t index_of(const std::string& name) const;
  const std::vector<std::size_t>& topological_order() const noexcept { return order_; }

 private:
  std::vector<Variable> variables_;
  std::vector<std::size_t> order_;
};

using BoolEvidence = std::map<std::string, bool>;

/// JSON: {"variables": [...], "parents": {var: [...]}, "cpts": {var: {bits: p_true}}}
/// where `bits` spells the parent assignment in parent order with '1'/'0'.
BayesNet parse_bayes_net(const std::string& json_text);
BayesNet load_bayes_net(const std::filesystem::path& path);

/// Parses "R=false,S=1" style evidence against the net's variable names.
BoolEvidence parse_bool_evidence(const BayesNet& net, const std::string& text);

/// prod_i p(x_i | parents(x_i)) over all variables, in net order.
DistributionTable joint_from_bn(const BayesNet& net);

/// Elimination order used by `eliminate`: min-degree on the interaction
/// graph of the evidence-reduced factors, ties broken by variable name.
std::vector<std::string> min_degree_order(const BayesNet& net, const std::string& target,
                                          const BoolEvidence& evidence);

/// p(target | evidence) by variable elimination. The result is a
/// one-variable table whose entry 0 is p(target = true | evidence).
DistributionTable eliminate(const BayesNet& net, const std::string& target,
                            const BoolEvidence& evidence);
DistributionTable eliminate(const BayesNet& net, const std::string& target,
                            const BoolEvidence& evidence, const std::vector<std::string>& order);

}  // namespace thermalnet
