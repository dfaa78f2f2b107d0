#include "thermalnet/sample_set.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "thermalnet/error.hpp"

namespace thermalnet {

std::string to_string(Backend backend) {
  switch (backend) {
    case Backend::exact: return "exact";
    case Backend::mcmc: return "mcmc";
    case Backend::annealer: return "annealer";
    case Backend::qat: return "qat";
  }
  return "unknown";
}

Backend parse_backend(const std::string& name) {
  if (name == "exact") return Backend::exact;
  if (name == "mcmc") return Backend::mcmc;
  if (name == "anneal" || name == "annealer") return Backend::annealer;
  if (name == "qat") return Backend::qat;
  throw Error(ErrorKind::config, "unknown backend '" + name + "'");
}

SampleSet::SampleSet(std::string model_id, std::size_t node_count, Temperature temperature,
                     Backend backend, std::uint64_t seed)
    : model_id_(std::move(model_id)),
      node_count_(node_count),
      temperature_(temperature),
      backend_(backend),
      seed_(seed) {
  if (node_count_ == 0 || node_count_ > 62) {
    throw Error(ErrorKind::dimension, "sample sets need between 1 and 62 nodes");
  }
}

void SampleSet::add(std::uint64_t index, std::uint64_t count) {
  if (index >> node_count_) throw Error(ErrorKind::dimension, "configuration index out of range");
  if (count == 0) return;
  counts_[index] += count;
  shots_ += count;
}

std::uint64_t SampleSet::count(std::uint64_t index) const {
  auto it = counts_.find(index);
  return it == counts_.end() ? 0 : it->second;
}

void write_csv(std::ostream& out, const SampleSet& samples) {
  out << "# backend,temperature,seed,shots\n";
  out << "# " << to_string(samples.backend()) << ',' << std::setprecision(17)
      << samples.temperature().value() << ',' << samples.seed() << ',' << samples.shots() << '\n';
  const std::size_t n = samples.node_count();
  for (std::size_t i = 0; i < n; ++i) out << "spin_" << i << ',';
  out << "count\n";
  for (const auto& [index, count] : samples.counts()) {
    for (std::size_t i = 0; i < n; ++i) out << int(spin_at(index, n, i)) << ',';
    out << count << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::stringstream stream(line);
  std::string item;
  while (std::getline(stream, item, ',')) parts.push_back(item);
  return parts;
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::parse, "sample file line " + std::to_string(line) + ": " + what);
}

}  // namespace

SampleSet read_sample_set(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# backend,temperature,seed,shots") {
    bad(1, "expected '# backend,temperature,seed,shots'");
  }
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) bad(2, "missing metadata row");
  const auto meta = split(line.substr(2));
  if (meta.size() != 4) bad(2, "metadata row needs four fields");
  Backend backend;
  double temperature = 0.0;
  std::uint64_t seed = 0, shots = 0;
  try {
    backend = parse_backend(meta[0]);
    temperature = std::stod(meta[1]);
    seed = std::stoull(meta[2]);
    shots = std::stoull(meta[3]);
  } catch (const std::logic_error&) {
    bad(2, "malformed metadata");
  }
  if (!std::getline(in, line)) bad(3, "missing column header");
  const auto header = split(line);
  if (header.size() < 2 || header.back() != "count") bad(3, "last column must be 'count'");
  const std::size_t n = header.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (header[i] != "spin_" + std::to_string(i)) bad(3, "unexpected column '" + header[i] + "'");
  }

  SampleSet samples("", n, Temperature(temperature), backend, seed);
  std::size_t line_no = 3;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != n + 1) bad(line_no, "wrong number of columns");
    std::vector<Spin> spins(n);
    std::uint64_t count = 0;
    try {
      for (std::size_t i = 0; i < n; ++i) {
        const int s = std::stoi(cells[i]);
        if (s != 1 && s != -1) bad(line_no, "spin must be 1 or -1");
        spins[i] = static_cast<Spin>(s);
      }
      count = std::stoull(cells[n]);
    } catch (const std::logic_error&) {
      bad(line_no, "malformed number");
    }
    samples.add(config_index(spins), count);
  }
  if (samples.shots() != shots) bad(line_no, "counts do not sum to the declared shots");
  return samples;
}

}  // namespace thermalnet
