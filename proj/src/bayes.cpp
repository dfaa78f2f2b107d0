#include "thermalnet/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thermalnet/error.hpp"

namespace thermalnet {

using json = nlohmann::json;

namespace {

/// Table over `vars`; entry layout as DistributionTable (first var MSB, bit 0 = true).
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<double> values;

  bool involves(std::size_t v) const {
    return std::find(vars.begin(), vars.end(), v) != vars.end();
  }
};

bool bit_of(std::uint64_t index, std::size_t size, std::size_t position) {
  return (index >> (size - 1 - position)) & 1u;
}

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  out.vars = a.vars;
  for (std::size_t v : b.vars) {
    if (!a.involves(v)) out.vars.push_back(v);
  }
  const std::size_t k = out.vars.size();
  auto positions = [&](const Factor& f) {
    std::vector<std::size_t> pos;
    for (std::size_t v : f.vars) {
      pos.push_back(static_cast<std::size_t>(std::find(out.vars.begin(), out.vars.end(), v) -
                                             out.vars.begin()));
    }
    return pos;
  };
  const auto pa = positions(a);
  const auto pb = positions(b);
  out.values.resize(std::size_t{1} << k);
  for (std::uint64_t index = 0; index < out.values.size(); ++index) {
    std::uint64_t ia = 0, ib = 0;
    for (std::size_t p : pa) ia = (ia << 1) | bit_of(index, k, p);
    for (std::size_t p : pb) ib = (ib << 1) | bit_of(index, k, p);
    out.values[index] = a.values[ia] * b.values[ib];
  }
  return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
  const auto it = std::find(f.vars.begin(), f.vars.end(), var);
  const auto pos = static_cast<std::size_t>(it - f.vars.begin());
  const std::size_t k = f.vars.size();
  Factor out;
  out.vars = f.vars;
  out.vars.erase(out.vars.begin() + static_cast<long>(pos));
  out.values.assign(std::size_t{1} << out.vars.size(), 0.0);
  for (std::uint64_t index = 0; index < f.values.size(); ++index) {
    const std::uint64_t high = index >> (k - pos);
    const std::uint64_t low = index & ((std::uint64_t{1} << (k - 1 - pos)) - 1);
    out.values[(high << (k - 1 - pos)) | low] += f.values[index];
  }
  return out;
}

Factor restrict_to(const Factor& f, std::size_t var, bool value) {
  const auto it = std::find(f.vars.begin(), f.vars.end(), var);
  if (it == f.vars.end()) return f;
  const auto pos = static_cast<std::size_t>(it - f.vars.begin());
  const std::size_t k = f.vars.size();
  Factor out;
  out.vars = f.vars;
  out.vars.erase(out.vars.begin() + static_cast<long>(pos));
  out.values.assign(std::size_t{1} << out.vars.size(), 0.0);
  const bool wanted_bit = !value;
  for (std::uint64_t index = 0; index < f.values.size(); ++index) {
    if (bit_of(index, k, pos) != wanted_bit) continue;
    const std::uint64_t high = index >> (k - pos);
    const std::uint64_t low = index & ((std::uint64_t{1} << (k - 1 - pos)) - 1);
    out.values[(high << (k - 1 - pos)) | low] = f.values[index];
  }
  return out;
}

Factor cpt_factor(const BayesNet& net, std::size_t v) {
  const auto& var = net.variable(v);
  Factor f;
  f.vars.push_back(v);
  f.vars.insert(f.vars.end(), var.parents.begin(), var.parents.end());
  const std::size_t rows = var.p_true.size();
  f.values.resize(2 * rows);
  for (std::size_t row = 0; row < rows; ++row) {
    f.values[row] = var.p_true[row];
    f.values[rows + row] = 1.0 - var.p_true[row];
  }
  return f;
}

struct Reduced {
  std::size_t target;
  std::vector<Factor> factors;
  std::set<std::size_t> hidden;
};

Reduced reduce(const BayesNet& net, const std::string& target, const BoolEvidence& evidence) {
  Reduced r;
  r.target = net.index_of(target);
  std::map<std::size_t, bool> observed;
  for (const auto& [name, value] : evidence) observed[net.index_of(name)] = value;
  if (observed.contains(r.target)) {
    throw Error(ErrorKind::query, "target '" + target + "' is also evidence");
  }
  for (std::size_t v = 0; v < net.size(); ++v) {
    Factor f = cpt_factor(net, v);
    for (const auto& [var, value] : observed) f = restrict_to(f, var, value);
    r.factors.push_back(std::move(f));
    if (v != r.target && !observed.contains(v)) r.hidden.insert(v);
  }
  return r;
}

}  // namespace

BayesNet::BayesNet(std::vector<Variable> variables) : variables_(std::move(variables)) {
  const std::size_t n = variables_.size();
  if (n == 0) throw Error(ErrorKind::model, "network has no variables");
  if (n > 20) throw Error(ErrorKind::capacity, "network exceeds 20 variables");
  std::set<std::string> names;
  for (const auto& v : variables_) {
    if (v.name.empty() || !names.insert(v.name).second) {
      throw Error(ErrorKind::model, "variable names must be non-empty and unique");
    }
    std::set<std::size_t> parents(v.parents.begin(), v.parents.end());
    if (parents.size() != v.parents.size()) {
      throw Error(ErrorKind::model, "'" + v.name + "' lists a parent twice");
    }
    for (std::size_t p : v.parents) {
      if (p >= n) throw Error(ErrorKind::index, "'" + v.name + "' has an unknown parent");
    }
    if (v.p_true.size() != (std::size_t{1} << v.parents.size())) {
      throw Error(ErrorKind::model, "CPT of '" + v.name + "' must cover every parent assignment");
    }
    for (double p : v.p_true) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorKind::model, "CPT of '" + v.name + "' has an entry outside [0,1]");
      }
    }
  }
  // Kahn's algorithm; ready nodes taken in index order.
  std::vector<std::size_t> pending(n);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v) {
    pending[v] = variables_[v].parents.size();
    for (std::size_t p : variables_[v].parents) children[p].push_back(v);
  }
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (pending[v] == 0) ready.insert(v);
  }
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order_.push_back(v);
    for (std::size_t c : children[v]) {
      if (--pending[c] == 0) ready.insert(c);
    }
  }
  if (order_.size() != n) throw Error(ErrorKind::model, "parent graph contains a cycle");
}

std::size_t BayesNet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  throw Error(ErrorKind::query, "unknown variable '" + name + "'");
}

BayesNet parse_bayes_net(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::parse, "network document must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "variables" && key != "parents" && key != "cpts") {
      throw Error(ErrorKind::parse, "unknown key '" + key + "' in network");
    }
  }
  if (!doc.contains("variables") || !doc["variables"].is_array()) {
    throw Error(ErrorKind::parse, "network needs a 'variables' array");
  }
  std::vector<BayesNet::Variable> vars;
  std::map<std::string, std::size_t> index;
  for (const auto& name : doc["variables"]) {
    if (!name.is_string()) throw Error(ErrorKind::parse, "variable names must be strings");
    index[name.get<std::string>()] = vars.size();
    vars.push_back({name.get<std::string>(), {}, {}});
  }
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw Error(ErrorKind::model, "unknown variable '" + name + "'");
    return it->second;
  };

  const json parents = doc.value("parents", json::object());
  if (!parents.is_object()) throw Error(ErrorKind::parse, "'parents' must be an object");
  for (const auto& [name, list] : parents.items()) {
    auto& var = vars[lookup(name)];
    if (!list.is_array()) throw Error(ErrorKind::parse, "parents of '" + name + "' must be an array");
    for (const auto& p : list) {
      if (!p.is_string()) throw Error(ErrorKind::parse, "parent names must be strings");
      var.parents.push_back(lookup(p.get<std::string>()));
    }
  }

  if (!doc.contains("cpts") || !doc["cpts"].is_object()) {
    throw Error(ErrorKind::parse, "network needs a 'cpts' object");
  }
  for (auto& var : vars) {
    if (!doc["cpts"].contains(var.name)) {
      throw Error(ErrorKind::model, "missing CPT for '" + var.name + "'");
    }
    const auto& table = doc["cpts"][var.name];
    if (!table.is_object()) throw Error(ErrorKind::parse, "CPT of '" + var.name + "' must be an object");
    const std::size_t k = var.parents.size();
    var.p_true.assign(std::size_t{1} << k, -1.0);
    for (const auto& [bits, value] : table.items()) {
      if (bits.size() != k) {
        throw Error(ErrorKind::model, "CPT key '" + bits + "' of '" + var.name + "' needs " +
                                          std::to_string(k) + " parent values");
      }
      std::uint64_t row = 0;
      for (char c : bits) {
        if (c == '1' || c == 'T') row = row << 1;
        else if (c == '0' || c == 'F') row = (row << 1) | 1u;
        else throw Error(ErrorKind::parse, "CPT key '" + bits + "' must use 1/0");
      }
      if (!value.is_number()) throw Error(ErrorKind::parse, "CPT entries must be numbers");
      var.p_true[row] = value.get<double>();
    }
    if (std::any_of(var.p_true.begin(), var.p_true.end(), [](double p) { return p < 0.0; })) {
      throw Error(ErrorKind::model, "CPT of '" + var.name + "' must cover every parent assignment");
    }
  }
  for (const auto& [name, value] : doc["cpts"].items()) lookup(name);
  return BayesNet(std::move(vars));
}

BayesNet load_bayes_net(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open network file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_bayes_net(buffer.str());
}

BoolEvidence parse_bool_evidence(const BayesNet& net, const std::string& text) {
  BoolEvidence out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, "expected name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    net.index_of(name);
    bool flag;
    if (value == "true" || value == "1" || value == "T") flag = true;
    else if (value == "false" || value == "0" || value == "F") flag = false;
    else throw Error(ErrorKind::config, "evidence value '" + value + "' must be true/false");
    if (!out.emplace(name, flag).second) {
      throw Error(ErrorKind::config, "evidence names '" + name + "' twice");
    }
  }
  return out;
}

DistributionTable joint_from_bn(const BayesNet& net) {
  const std::size_t n = net.size();
  std::vector<double> probs(std::size_t{1} << n);
  for (std::uint64_t index = 0; index < probs.size(); ++index) {
    double p = 1.0;
    for (std::size_t v = 0; v < n; ++v) {
      const auto& var = net.variable(v);
      std::uint64_t row = 0;
      for (std::size_t parent : var.parents) row = (row << 1) | bit_of(index, n, parent);
      p *= bit_of(index, n, v) ? 1.0 - var.p_true[row] : var.p_true[row];
    }
    probs[index] = p;
  }
  std::vector<std::size_t> vars(n);
  std::iota(vars.begin(), vars.end(), std::size_t{0});
  return DistributionTable::from_weights(std::move(vars), std::move(probs));
}

std::vector<std::string> min_degree_order(const BayesNet& net, const std::string& target,
                                          const BoolEvidence& evidence) {
  auto reduced = reduce(net, target, evidence);
  std::map<std::size_t, std::set<std::size_t>> graph;
  for (const auto& f : reduced.factors) {
    for (std::size_t a : f.vars) {
      graph[a];
      for (std::size_t b : f.vars) {
        if (a != b) graph[a].insert(b);
      }
    }
  }
  std::vector<std::string> order;
  auto remaining = reduced.hidden;
  while (!remaining.empty()) {
    std::size_t best = *remaining.begin();
    for (std::size_t v : remaining) {
      const auto dv = graph[v].size();
      const auto db = graph[best].size();
      if (dv < db || (dv == db && net.variable(v).name < net.variable(best).name)) best = v;
    }
    const auto neighbors = graph[best];
    for (std::size_t a : neighbors) {
      graph[a].erase(best);
      for (std::size_t b : neighbors) {
        if (a != b) graph[a].insert(b);
      }
    }
    graph.erase(best);
    remaining.erase(best);
    order.push_back(net.variable(best).name);
  }
  return order;
}

DistributionTable eliminate(const BayesNet& net, const std::string& target,
                            const BoolEvidence& evidence) {
  return eliminate(net, target, evidence, min_degree_order(net, target, evidence));
}

DistributionTable eliminate(const BayesNet& net, const std::string& target,
                            const BoolEvidence& evidence, const std::vector<std::string>& order) {
  auto reduced = reduce(net, target, evidence);
  std::set<std::size_t> ordered;
  for (const auto& name : order) ordered.insert(net.index_of(name));
  if (ordered != reduced.hidden || ordered.size() != order.size()) {
    throw Error(ErrorKind::query, "elimination order must list every hidden variable once");
  }

  auto factors = std::move(reduced.factors);
  for (const auto& name : order) {
    const std::size_t v = net.index_of(name);
    Factor product{{}, {1.0}};
    std::vector<Factor> untouched;
    for (auto& f : factors) {
      if (f.involves(v)) product = multiply(product, f);
      else untouched.push_back(std::move(f));
    }
    untouched.push_back(sum_out(product, v));
    factors = std::move(untouched);
  }

  Factor result{{reduced.target}, {1.0, 1.0}};
  for (const auto& f : factors) result = multiply(result, f);
  const double mass = result.values[0] + result.values[1];
  if (!(mass > 0.0)) throw Error(ErrorKind::conditioning, "evidence has zero probability");
  return DistributionTable::from_weights({reduced.target}, result.values);
}

}  // namespace thermalnet
