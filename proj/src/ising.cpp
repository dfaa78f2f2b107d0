#include "thermalnet/ising.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermalnet/error.hpp"

namespace thermalnet {

using json = nlohmann::json;

Temperature::Temperature(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorKind::config, "temperature must be positive and finite, got " +
                                       std::to_string(value));
  }
}

SpinConfiguration::SpinConfiguration(std::vector<Spin> spins) : spins_(std::move(spins)) {
  for (Spin s : spins_) {
    if (s != 1 && s != -1) {
      throw Error(ErrorKind::config, "spin values must be +1 or -1");
    }
  }
}

SpinConfiguration SpinConfiguration::from_index(std::uint64_t index, std::size_t size) {
  std::vector<Spin> spins(size);
  for (std::size_t i = 0; i < size; ++i) spins[i] = spin_at(index, size, i);
  return SpinConfiguration(std::move(spins));
}

std::uint64_t SpinConfiguration::index() const { return config_index(spins_); }

std::uint64_t config_index(std::span<const Spin> spins) {
  std::uint64_t index = 0;
  for (Spin s : spins) index = (index << 1) | (s < 0 ? 1u : 0u);
  return index;
}

Spin spin_at(std::uint64_t index, std::size_t size, std::size_t position) {
  return ((index >> (size - 1 - position)) & 1u) ? Spin{-1} : Spin{1};
}

std::string format_spins(std::span<const Spin> spins) {
  std::string out;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (i) out += ',';
    out += spins[i] > 0 ? "1" : "-1";
  }
  return out;
}

IsingModel::IsingModel(std::size_t node_count, std::vector<Coupling> couplings,
                       std::vector<double> fields)
    : node_count_(node_count), couplings_(std::move(couplings)), fields_(std::move(fields)) {
  if (node_count_ == 0) throw Error(ErrorKind::model, "model needs at least one node");
  if (fields_.empty()) fields_.assign(node_count_, 0.0);
  if (fields_.size() != node_count_) {
    throw Error(ErrorKind::dimension, "field vector length does not match node count");
  }
  for (auto& c : couplings_) {
    if (c.u >= node_count_ || c.v >= node_count_) {
      throw Error(ErrorKind::index, "coupling (" + std::to_string(c.u) + "," +
                                        std::to_string(c.v) + ") references a missing node");
    }
    if (c.u == c.v) {
      throw Error(ErrorKind::model, "self-coupling on node " + std::to_string(c.u));
    }
    if (c.u > c.v) std::swap(c.u, c.v);
    if (!std::isfinite(c.J)) throw Error(ErrorKind::model, "coupling must be finite");
  }
  for (double h : fields_) {
    if (!std::isfinite(h)) throw Error(ErrorKind::model, "field must be finite");
  }
  std::sort(couplings_.begin(), couplings_.end(), [](const Coupling& a, const Coupling& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });
  for (std::size_t k = 1; k < couplings_.size(); ++k) {
    if (couplings_[k].u == couplings_[k - 1].u && couplings_[k].v == couplings_[k - 1].v) {
      throw Error(ErrorKind::model, "duplicate edge (" + std::to_string(couplings_[k].u) + "," +
                                        std::to_string(couplings_[k].v) + ")");
    }
  }
  adjacency_.resize(node_count_);
  for (const auto& c : couplings_) {
    adjacency_[c.u].push_back({c.v, c.J});
    adjacency_[c.v].push_back({c.u, c.J});
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
}

double IsingModel::coupling(std::size_t i, std::size_t j) const {
  for (const auto& n : adjacency_.at(i)) {
    if (n.node == j) return n.J;
  }
  return 0.0;
}

bool IsingModel::has_edge(std::size_t i, std::size_t j) const {
  const auto& list = adjacency_.at(i);
  return std::any_of(list.begin(), list.end(), [j](const Neighbor& n) { return n.node == j; });
}

bool IsingModel::has_zero_fields() const {
  return std::all_of(fields_.begin(), fields_.end(), [](double h) { return h == 0.0; });
}

bool IsingModel::is_zero() const {
  return has_zero_fields() && std::all_of(couplings_.begin(), couplings_.end(),
                                          [](const Coupling& c) { return c.J == 0.0; });
}

IsingModel IsingModel::scaled(double factor) const {
  auto couplings = couplings_;
  auto fields = fields_;
  for (auto& c : couplings) c.J *= factor;
  for (auto& h : fields) h *= factor;
  return IsingModel(node_count_, std::move(couplings), std::move(fields));
}

std::string IsingModel::content_hash() const {
  const std::string text = dump_model(*this);
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << hash;
  return out.str();
}

double energy(const IsingModel& model, std::span<const Spin> spins) {
  if (spins.size() != model.node_count()) {
    throw Error(ErrorKind::dimension, "configuration has " + std::to_string(spins.size()) +
                                          " spins, model has " +
                                          std::to_string(model.node_count()) + " nodes");
  }
  double e = 0.0;
  for (const auto& c : model.couplings()) e -= c.J * spins[c.u] * spins[c.v];
  for (std::size_t i = 0; i < spins.size(); ++i) e -= model.field(i) * spins[i];
  return e;
}

double energy(const IsingModel& model, const SpinConfiguration& config) {
  return energy(model, config.spins());
}

double local_field(const IsingModel& model, std::span<const Spin> spins, std::size_t site) {
  double f = model.field(site);
  for (const auto& n : model.neighbors(site)) f += n.J * spins[n.node];
  return f;
}

SpinConfiguration spin_flip(const SpinConfiguration& config) {
  std::vector<Spin> flipped(config.spins().begin(), config.spins().end());
  for (auto& s : flipped) s = static_cast<Spin>(-s);
  return SpinConfiguration(std::move(flipped));
}

ClampResult clamp(const IsingModel& model, const Assignment& assignments) {
  const std::size_t n = model.node_count();
  for (const auto& [node, spin] : assignments) {
    if (node >= n) throw Error(ErrorKind::index, "cannot clamp unknown node " + std::to_string(node));
    if (spin != 1 && spin != -1) throw Error(ErrorKind::config, "clamp value must be +1 or -1");
  }
  if (assignments.size() >= n) {
    throw Error(ErrorKind::degenerate_model, "clamping every node leaves no free variables");
  }

  std::vector<long> remap(n, -1);
  std::vector<std::size_t> free_nodes;
  for (std::size_t i = 0; i < n; ++i) {
    if (!assignments.contains(i)) {
      remap[i] = static_cast<long>(free_nodes.size());
      free_nodes.push_back(i);
    }
  }

  double offset = 0.0;
  std::vector<double> fields(free_nodes.size());
  for (std::size_t k = 0; k < free_nodes.size(); ++k) fields[k] = model.field(free_nodes[k]);
  for (const auto& [node, spin] : assignments) offset -= model.field(node) * spin;

  std::vector<Coupling> couplings;
  for (const auto& c : model.couplings()) {
    const bool u_free = remap[c.u] >= 0;
    const bool v_free = remap[c.v] >= 0;
    if (u_free && v_free) {
      couplings.push_back({static_cast<std::size_t>(remap[c.u]),
                           static_cast<std::size_t>(remap[c.v]), c.J});
    } else if (u_free) {
      fields[remap[c.u]] += c.J * assignments.at(c.v);
    } else if (v_free) {
      fields[remap[c.v]] += c.J * assignments.at(c.u);
    } else {
      offset -= c.J * assignments.at(c.u) * assignments.at(c.v);
    }
  }
  return {IsingModel(free_nodes.size(), std::move(couplings), std::move(fields)), offset,
          std::move(free_nodes)};
}

Assignment parse_assignment(const std::string& text) {
  Assignment out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "expected node=spin, got '" + item + "'");
    }
    std::size_t node = 0;
    int spin = 0;
    try {
      std::size_t used = 0;
      node = std::stoul(item.substr(0, eq), &used);
      if (used != eq) throw std::invalid_argument("node");
      const std::string value = item.substr(eq + 1);
      spin = std::stoi(value, &used);
      if (used != value.size()) throw std::invalid_argument("spin");
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::config, "malformed assignment '" + item + "'");
    }
    if (spin != 1 && spin != -1) {
      throw Error(ErrorKind::config, "spin in '" + item + "' must be +1 or -1");
    }
    if (!out.emplace(node, static_cast<Spin>(spin)).second) {
      throw Error(ErrorKind::config, "node " + std::to_string(node) + " assigned twice");
    }
  }
  return out;
}

namespace {

void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end()) {
      throw Error(ErrorKind::parse, "unknown key '" + key + "' in " + where);
    }
  }
}

std::size_t as_index(const json& value, const std::string& what) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw Error(ErrorKind::parse, what + " must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

}  // namespace

IsingModel parse_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::parse, "model document must be a JSON object");
  reject_unknown_keys(doc, {"nodes", "edges", "fields"}, "model");
  if (!doc.contains("nodes")) throw Error(ErrorKind::parse, "model is missing 'nodes'");
  const std::size_t n = as_index(doc["nodes"], "'nodes'");

  std::vector<Coupling> couplings;
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) throw Error(ErrorKind::parse, "'edges' must be an array");
    for (const auto& edge : doc["edges"]) {
      if (!edge.is_object()) throw Error(ErrorKind::parse, "edge must be an object");
      reject_unknown_keys(edge, {"u", "v", "J"}, "edge");
      if (!edge.contains("u") || !edge.contains("v") || !edge.contains("J")) {
        throw Error(ErrorKind::parse, "edge needs 'u', 'v' and 'J'");
      }
      if (!edge["J"].is_number()) throw Error(ErrorKind::parse, "edge 'J' must be a number");
      couplings.push_back({as_index(edge["u"], "edge 'u'"), as_index(edge["v"], "edge 'v'"),
                           edge["J"].get<double>()});
    }
  }

  std::vector<double> fields(n, 0.0);
  if (doc.contains("fields")) {
    if (!doc["fields"].is_object()) throw Error(ErrorKind::parse, "'fields' must be an object");
    for (const auto& [key, value] : doc["fields"].items()) {
      std::size_t node = 0;
      try {
        std::size_t used = 0;
        node = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::parse, "field key '" + key + "' is not a node index");
      }
      if (node >= n) throw Error(ErrorKind::index, "field on missing node " + key);
      if (!value.is_number()) throw Error(ErrorKind::parse, "field value must be a number");
      fields[node] = value.get<double>();
    }
  }
  return IsingModel(n, std::move(couplings), std::move(fields));
}

IsingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_model(buffer.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string dump_model(const IsingModel& model) {
  json doc;
  doc["nodes"] = model.node_count();
  doc["edges"] = json::array();
  for (const auto& c : model.couplings()) {
    doc["edges"].push_back({{"u", c.u}, {"v", c.v}, {"J", c.J}});
  }
  doc["fields"] = json::object();
  for (std::size_t i = 0; i < model.node_count(); ++i) {
    if (model.field(i) != 0.0) doc["fields"][std::to_string(i)] = model.field(i);
  }
  return doc.dump();
}

}  // namespace thermalnet
