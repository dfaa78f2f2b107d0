// thermalnet command-line driver: exact tables, sampling, inference queries,
// temperature sweeps and Bayesian-network elimination.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermalnet/analysis.hpp"
#include "thermalnet/bayes.hpp"
#include "thermalnet/error.hpp"
#include "thermalnet/exact.hpp"
#include "thermalnet/quantum.hpp"
#include "thermalnet/samplers.hpp"

using namespace thermalnet;

namespace {

enum Exit { ok = 0, usage = 1, data = 2, capacity = 3 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::query:
      return usage;
    case ErrorKind::capacity:
      return capacity;
    default:
      return data;
  }
}

/// Collects output files and writes the manifest next to them.
class Run {
 public:
  Run(std::string base, std::string command_line) : base_(std::move(base)) {
    manifest_["command"] = std::move(command_line);
    manifest_["version"] = THERMALNET_VERSION;
  }

  nlohmann::ordered_json& manifest() { return manifest_; }

  void write(const std::string& suffix, const std::function<void(std::ostream&)>& body) {
    const std::string path = base_ + "." + suffix;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::config, "cannot write " + path);
    body(out);
    if (!out) throw Error(ErrorKind::config, "failed writing " + path);
    outputs_.push_back(path);
  }

  void finish() {
    manifest_["outputs"] = outputs_;
    const std::string path = base_ + ".manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::config, "cannot write " + path);
    out << manifest_.dump(2) << '\n';
  }

 private:
  std::string base_;
  nlohmann::ordered_json manifest_;
  std::vector<std::string> outputs_;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("THERMALNET_SEED")) {
    try {
      std::size_t used = 0;
      const std::string text(env);
      const auto value = std::stoull(text, &used);
      if (used == text.size()) return value;
    } catch (const std::logic_error&) {
    }
    throw Error(ErrorKind::config, "THERMALNET_SEED must be an unsigned integer");
  }
  return 0;
}

void write_answer(std::ostream& out, const QueryAnswer& answer) {
  for (std::size_t v : answer.variables) out << "spin_" << v << ',';
  out << "probability\n";
  for (std::size_t k = 0; k < answer.spins.size(); ++k) out << int(answer.spins[k]) << ',';
  out.precision(17);
  out << answer.probability << '\n';
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t v : values) out += (out.empty() ? "" : ",") + std::to_string(v);
  return out;
}

struct Common {
  std::string output;
  double temperature = 1.0;
  std::optional<std::uint64_t> seed;
  std::uint64_t shots = 10000;
};

struct SamplerFlags {
  std::string backend = "mcmc";
  std::size_t burn_in = 1000;
  std::size_t thin = 10;
  std::size_t chains = 8;
  std::string rule = "heat_bath";
  std::size_t stages = 20;
  std::size_t sweeps = kDefaultSweepsPerStage;
  std::size_t layers = 2;
  std::size_t budget = kDefaultOptimizerBudget;

  BackendOptions options() const {
    BackendOptions o;
    o.mcmc.burn_in = burn_in;
    o.mcmc.thinning = thin;
    o.mcmc.chain_count = chains;
    o.mcmc.update_rule = parse_update_rule(rule);
    o.mcmc.validate();
    o.anneal_stages = stages;
    o.sweeps_per_stage = sweeps;
    o.qaoa_layers = layers;
    o.optimizer_budget = budget;
    return o;
  }
};

void add_sampler_flags(CLI::App* cmd, SamplerFlags& f) {
  cmd->add_option("--backend", f.backend, "mcmc, anneal or qat")->capture_default_str();
  cmd->add_option("--burn-in", f.burn_in, "mcmc burn-in sweeps")->capture_default_str();
  cmd->add_option("--thin", f.thin, "mcmc sweeps between records")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--chains", f.chains, "mcmc chain count")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--rule", f.rule, "heat_bath or metropolis")->capture_default_str();
  cmd->add_option("--stages", f.stages, "annealing stages")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--sweeps", f.sweeps, "sweeps per annealing stage")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--layers", f.layers, "QAOA layers")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--budget", f.budget, "optimizer evaluations")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_common(CLI::App* cmd, Common& c, bool sampling) {
  cmd->add_option("-o,--output", c.output, "output file prefix")->required();
  cmd->add_option("-T,--temperature", c.temperature, "temperature")->check(CLI::PositiveNumber)->capture_default_str();
  if (sampling) {
    cmd->add_option("--seed", c.seed, "RNG seed (default: $THERMALNET_SEED or 0)");
    cmd->add_option("--shots", c.shots, "number of samples")->check(CLI::PositiveNumber)->capture_default_str();
  }
}

Backend sampling_backend(const std::string& name) {
  const Backend b = parse_backend(name);
  if (b == Backend::exact) throw Error(ErrorKind::config, "sample needs mcmc, anneal or qat");
  return b;
}

void record_sampler(nlohmann::ordered_json& m, Backend backend, const SamplerFlags& f) {
  m["backend"] = to_string(backend);
  switch (backend) {
    case Backend::mcmc:
      m["burn_in"] = f.burn_in;
      m["thinning"] = f.thin;
      m["chains"] = f.chains;
      m["update_rule"] = f.rule;
      break;
    case Backend::annealer:
      m["stages"] = f.stages;
      m["sweeps_per_stage"] = f.sweeps;
      break;
    case Backend::qat:
      m["layers"] = f.layers;
      m["budget"] = f.budget;
      break;
    case Backend::exact:
      break;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal sampling and inference on small Ising networks"};
  app.set_version_flag("--version", THERMALNET_VERSION);
  app.require_subcommand(1);

  std::string command_line;
  for (int i = 1; i < argc; ++i) command_line += (i > 1 ? " " : "") + std::string(argv[i]);

  Common common;
  SamplerFlags sampler;
  std::string model_path;

  auto* exact = app.add_subcommand("exact", "exact joint table and energy spectrum");
  exact->add_option("model", model_path, "model JSON")->required();
  add_common(exact, common, false);

  auto* sample = app.add_subcommand("sample", "draw samples with an approximate backend");
  sample->add_option("model", model_path, "model JSON")->required();
  add_common(sample, common, true);
  add_sampler_flags(sample, sampler);

  std::string query, clamp_text, samples_path, mode = "exact";
  std::vector<std::size_t> keep, targets;
  auto* infer = app.add_subcommand("infer", "marginal, MPE, MAP or conditional queries");
  infer->add_option("model", model_path, "model JSON")->required();
  infer->add_option("--query", query, "marginal, mpe, map or cpd")
      ->required()
      ->check(CLI::IsMember({"marginal", "mpe", "map", "cpd"}));
  infer->add_option("--keep", keep, "variables kept by a marginal query")->delimiter(',');
  infer->add_option("--targets", targets, "target variables for map and cpd")->delimiter(',');
  infer->add_option("--clamp", clamp_text, "evidence as node=spin,...");
  infer->add_option("--mode", mode, "exact or sample")->check(CLI::IsMember({"exact", "sample"}))->capture_default_str();
  infer->add_option("--samples", samples_path, "answer from a saved sample file");
  add_common(infer, common, true);
  add_sampler_flags(infer, sampler);

  std::vector<double> temps;
  auto* sweep = app.add_subcommand("sweep", "KL divergence against temperature");
  sweep->add_option("model", model_path, "model JSON")->required();
  sweep->add_option("--temps", temps, "temperatures")->required()->delimiter(',')->check(CLI::PositiveNumber);
  add_common(sweep, common, true);
  add_sampler_flags(sweep, sampler);

  std::string net_path, target, evidence_text;
  auto* bayes = app.add_subcommand("bayes", "variable elimination on a Bayesian network");
  bayes->add_option("net", net_path, "network JSON")->required();
  bayes->add_option("--target", target, "query variable")->required();
  bayes->add_option("--evidence", evidence_text, "evidence as name=true|false,...");
  bayes->add_option("-o,--output", common.output, "output file prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    Run run(common.output, command_line);
    auto& m = run.manifest();

    if (*exact) {
      const auto model = load_model(model_path);
      const Temperature T(common.temperature);
      const auto joint = joint_distribution(model, T);
      const auto spectrum = energy_distribution(model, T);
      m["model_hash"] = model.content_hash();
      m["backend"] = to_string(Backend::exact);
      m["temperature"] = T.value();
      run.write("joint.csv", [&](std::ostream& out) { write_csv(out, joint); });
      run.write("spectrum.csv", [&](std::ostream& out) { write_csv(out, spectrum); });
      run.finish();
      std::cout << "ln Z = " << log_partition_function(model, T) << ", " << spectrum.size()
                << " energy levels\n";

    } else if (*sample) {
      const auto model = load_model(model_path);
      const Temperature T(common.temperature);
      const Backend backend = sampling_backend(sampler.backend);
      const auto options = sampler.options();
      const std::uint64_t seed = resolve_seed(common.seed);
      m["model_hash"] = model.content_hash();
      record_sampler(m, backend, sampler);
      m["temperature"] = T.value();
      m["seed"] = seed;
      m["shots"] = common.shots;

      std::optional<SampleSet> samples;
      if (backend == Backend::qat) {
        const auto fit = optimize_thermal(model, T, options.qaoa_layers, options.optimizer_budget, seed);
        std::vector<std::size_t> system(model.node_count());
        for (std::size_t i = 0; i < system.size(); ++i) system[i] = i;
        samples = measure_system(fit.state, system, common.shots, seed, T, model.content_hash());
        run.write("trace.csv", [&](std::ostream& out) { write_trace_csv(out, fit.trace); });
        std::cout << "optimized <H_C> = " << fit.objective << " after " << fit.trace.size()
                  << " evaluations\n";
      } else {
        samples = sample_backend(model, T, backend, common.shots, seed, options);
      }
      run.write("samples.csv", [&](std::ostream& out) { write_csv(out, *samples); });
      const auto report = energy_histogram(*samples, model, T);
      run.write("energy.csv", [&](std::ostream& out) { write_csv(out, report); });
      run.finish();
      std::cout << samples->counts().size() << " distinct configurations, KL vs exact = "
                << report.kl_divergence << '\n';

    } else if (*infer) {
      const auto model = load_model(model_path);
      const Temperature T(common.temperature);
      const Evidence evidence = parse_assignment(clamp_text);
      for (const auto& [node, spin] : evidence) {
        if (node >= model.node_count()) throw Error(ErrorKind::query, "clamped node out of range");
      }
      m["model_hash"] = model.content_hash();
      m["query"] = query;
      m["temperature"] = T.value();
      m["clamp"] = clamp_text;

      // conditional table over the unclamped variables
      std::optional<DistributionTable> table;
      if (!samples_path.empty()) {
        std::ifstream in(samples_path);
        if (!in) throw Error(ErrorKind::parse, "cannot open sample file " + samples_path);
        const auto samples = read_sample_set(in);
        if (samples.node_count() != model.node_count()) {
          throw Error(ErrorKind::dimension, "sample file does not match the model");
        }
        m["mode"] = "samples";
        m["samples"] = samples_path;
        table = condition(empirical_distribution(samples), evidence);
      } else if (mode == "sample") {
        const Backend backend = parse_backend(sampler.backend);
        const std::uint64_t seed = resolve_seed(common.seed);
        const auto reduced = clamp(model, evidence);
        m["mode"] = "sample";
        record_sampler(m, backend, sampler);
        m["seed"] = seed;
        m["shots"] = common.shots;
        const auto samples = sample_backend(reduced.model, T, backend, common.shots, seed, sampler.options());
        table = DistributionTable(reduced.free_nodes, empirical_distribution(samples).probabilities());
      } else {
        m["mode"] = "exact";
        table = condition(joint_distribution(model, T), evidence);
      }

      if (query == "marginal" || query == "cpd") {
        std::vector<std::size_t> vars = query == "marginal" ? keep : targets;
        if (query == "marginal" && vars.empty()) vars = table->variables();
        if (vars.empty()) throw Error(ErrorKind::query, "cpd needs --targets");
        const auto result = marginalize(*table, vars);
        m["variables"] = join(vars);
        run.write("result.csv", [&](std::ostream& out) { write_csv(out, result); });
      } else {
        if (query == "map" && targets.empty()) throw Error(ErrorKind::query, "map needs --targets");
        const auto answer = query == "mpe" ? mpe(*table, {}) : map_query(*table, targets, {});
        m["variables"] = join(answer.variables);
        run.write("result.csv", [&](std::ostream& out) { write_answer(out, answer); });
        std::cout << query << ": " << format_spins(answer.spins.spins()) << " (p = " << answer.probability << ")\n";
      }
      run.finish();

    } else if (*sweep) {
      const auto model = load_model(model_path);
      const Backend backend = parse_backend(sampler.backend);
      const std::uint64_t seed = resolve_seed(common.seed);
      std::vector<Temperature> ts;
      for (double t : temps) ts.emplace_back(t);
      m["model_hash"] = model.content_hash();
      record_sampler(m, backend, sampler);
      m["temperatures"] = temps;
      m["seed"] = seed;
      m["shots"] = common.shots;
      const auto points = temperature_sweep(model, ts, backend, common.shots, seed, sampler.options());
      run.write("sweep.csv", [&](std::ostream& out) { write_csv(out, points); });
      run.finish();
      double worst = 0.0;
      for (const auto& p : points) worst = std::max(worst, p.kl);
      std::cout << points.size() << " temperatures, max KL = " << worst << '\n';

    } else if (*bayes) {
      const auto net = load_bayes_net(net_path);
      const auto evidence = parse_bool_evidence(net, evidence_text);
      const auto result = eliminate(net, target, evidence);
      m["net"] = net_path;
      m["target"] = target;
      m["evidence"] = evidence_text;
      run.write("bayes.csv", [&](std::ostream& out) {
        out.precision(17);
        out << target << ",probability\ntrue," << result.probability(0) << "\nfalse," << result.probability(1)
            << '\n';
      });
      run.finish();
      std::cout << "p(" << target << " = true | evidence) = " << result.probability(0) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "thermalnet: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "thermalnet: " << e.what() << '\n';
    return data;
  }
  return ok;
}
