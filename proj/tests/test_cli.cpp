#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "test_support.hpp"
#include "thermalnet/analysis.hpp"
#include "thermalnet/exact.hpp"
#include "thermalnet/sample_set.hpp"

using namespace thermalnet;
using namespace thermalnet::testing;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("thermalnet_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(THERMALNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<double>> rows(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::vector<std::vector<double>> out;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) row.push_back(std::stod(cell));
    out.push_back(row);
  }
  return out;
}

}  // namespace

TEST_CASE("exact command") {
  Scratch tmp;
  std::ofstream(tmp("zero.json")) << R"({"nodes": 3, "edges": []})";
  REQUIRE(run("exact " + tmp("zero.json") + " -T 3 -o " + tmp("zero")) == 0);
  const auto table = rows(tmp("zero.joint.csv"));
  REQUIRE(table.size() == 8);
  for (const auto& r : table) CHECK(r.back() == doctest::Approx(0.125));
  CHECK(fs::exists(tmp("zero.spectrum.csv")));
  CHECK(fs::exists(tmp("zero.manifest.json")));

  REQUIRE(run("exact " + data_path("three_node.json") + " -T 1000 -o " + tmp("hot")) == 0);
  for (const auto& r : rows(tmp("hot.joint.csv"))) CHECK(std::abs(r.back() - 0.125) <= 0.0008);

  std::ofstream(tmp("bad.json")) << "{\"nodes\": 3,";
  CHECK(run("exact " + tmp("bad.json") + " -o " + tmp("bad")) == 2);
  std::ofstream(tmp("big.json")) << R"({"nodes": 21, "edges": []})";
  CHECK(run("exact " + tmp("big.json") + " -o " + tmp("big")) == 3);
  CHECK(run("exact " + tmp("missing.json") + " -o " + tmp("x")) == 2);
  CHECK(run("exact") == 1);
}

TEST_CASE("sample command") {
  Scratch tmp;
  const auto model = data_path("four_node.json");
  CHECK(run("sample " + model + " --shots 0 -o " + tmp("s")) == 1);
  CHECK(run("sample " + model + " --backend wolff -o " + tmp("s")) == 1);
  CHECK(run("sample " + model + " --backend exact -o " + tmp("s")) == 1);

  REQUIRE(run("sample " + model + " -T 3 --shots 100000 --seed 5 -o " + tmp("a")) == 0);
  REQUIRE(run("sample " + model + " -T 3 --shots 100000 --seed 5 -o " + tmp("b")) == 0);
  CHECK(slurp(tmp("a.samples.csv")) == slurp(tmp("b.samples.csv")));
  CHECK(slurp(tmp("a.energy.csv")) == slurp(tmp("b.energy.csv")));

  std::ifstream in(tmp("a.samples.csv"));
  const auto samples = read_sample_set(in);
  CHECK(samples.shots() == 100000);
  CHECK(kl_divergence(empirical_distribution(samples), joint_distribution(four_node_graph(), Temperature(3))) < 0.01);

  // seed from the environment matches the flag
  REQUIRE(run("sample " + model + " -T 3 --shots 500 --seed 17 -o " + tmp("flag")) == 0);
  ::setenv("THERMALNET_SEED", "17", 1);
  REQUIRE(run("sample " + model + " -T 3 --shots 500 -o " + tmp("env")) == 0);
  ::unsetenv("THERMALNET_SEED");
  CHECK(slurp(tmp("flag.samples.csv")) == slurp(tmp("env.samples.csv")));

  REQUIRE(run("sample " + model + " --backend anneal --stages 5 --sweeps 10 -T 3 --shots 1000 -o " + tmp("an")) == 0);
  REQUIRE(run("sample " + model + " --backend qat --layers 1 --budget 20 -T 3 --shots 1000 -o " + tmp("q")) == 0);
  CHECK(fs::exists(tmp("q.trace.csv")));

  std::ofstream big(tmp("big.json"));
  big << R"({"nodes": 13, "edges": []})";
  big.close();
  CHECK(run("sample " + tmp("big.json") + " --backend qat --budget 2 --shots 10 -o " + tmp("big")) == 3);
}

TEST_CASE("infer command") {
  Scratch tmp;
  const auto model = data_path("four_node.json");
  REQUIRE(run("infer " + model + " --query marginal --keep 0,1,2,3 -T 3 -o " + tmp("all")) == 0);
  REQUIRE(run("exact " + model + " -T 3 -o " + tmp("joint")) == 0);
  CHECK(slurp(tmp("all.result.csv")) == slurp(tmp("joint.joint.csv")));

  const auto joint = joint_distribution(four_node_graph(), Temperature(3));
  for (std::uint64_t k = 0; k < 8; ++k) {
    const auto prefix = SpinConfiguration::from_index(k, 3);
    const std::string clamp = "0=" + std::to_string(prefix[0]) + ",1=" + std::to_string(prefix[1]) + ",2=" +
                              std::to_string(prefix[2]);
    REQUIRE(run("infer " + model + " --query map --targets 3 --clamp " + clamp + " -T 3 -o " + tmp("map")) == 0);
    const auto answer = map_query(joint, {3}, {{0, prefix[0]}, {1, prefix[1]}, {2, prefix[2]}});
    CHECK(rows(tmp("map.result.csv"))[0][0] == answer.spins[0]);
  }

  REQUIRE(run("infer " + model + " --query cpd --targets 1,2,3 --clamp 0=-1 --mode sample --shots 100000 --seed 3 -T 3 -o " +
              tmp("clamped")) == 0);
  const auto conditional = condition(joint, {{0, Spin{-1}}});
  const auto table = rows(tmp("clamped.result.csv"));
  REQUIRE(table.size() == 8);
  double tv = 0.0;
  for (std::size_t k = 0; k < 8; ++k) tv += 0.5 * std::abs(table[k].back() - conditional.probability(k));
  CHECK(tv < 0.02);

  REQUIRE(run("sample " + model + " -T 3 --shots 20000 --seed 1 -o " + tmp("s")) == 0);
  CHECK(run("infer " + model + " --query mpe --samples " + tmp("s.samples.csv") + " -o " + tmp("m")) == 0);

  CHECK(run("infer " + model + " --query map --clamp 0=1,0=-1 --targets 3 -o " + tmp("x")) == 1);
  CHECK(run("infer " + model + " --query map -o " + tmp("x")) == 1);
  CHECK(run("infer " + model + " --query median -o " + tmp("x")) == 1);
  CHECK(run("infer " + model + " --query map --targets 0 --clamp 0=1 -o " + tmp("x")) == 1);
  CHECK(run("infer " + model + " --query mpe --clamp 9=1 -o " + tmp("x")) == 1);
}

TEST_CASE("infer reports zero-probability evidence") {
  Scratch tmp;
  std::ofstream(tmp("s.csv")) << "# backend,temperature,seed,shots\n# mcmc,3,1,4\nspin_0,spin_1,count\n1,1,4\n";
  std::ofstream(tmp("two.json")) << R"({"nodes": 2, "edges": [{"u": 0, "v": 1, "J": 1}]})";
  CHECK(run("infer " + tmp("two.json") + " --query mpe --samples " + tmp("s.csv") + " --clamp 0=-1 -o " + tmp("z")) == 2);
}

TEST_CASE("sweep command") {
  Scratch tmp;
  const auto model = data_path("three_node.json");
  REQUIRE(run("sweep " + model + " --temps 2 --shots 1000 -o " + tmp("one")) == 0);
  CHECK(rows(tmp("one.sweep.csv")).size() == 1);
  REQUIRE(run("sweep " + model + " --temps 5,2,5 --shots 1000 -o " + tmp("dup")) == 0);
  const auto dup = rows(tmp("dup.sweep.csv"));
  REQUIRE(dup.size() == 3);
  CHECK(dup[0][0] == 5.0);
  CHECK(dup[1][0] == 2.0);
  CHECK(dup[2][0] == 5.0);

  REQUIRE(run("sweep " + model + " --temps 1,3,10,100,1000 --shots 100000 --seed 2 -o " + tmp("full")) == 0);
  for (const auto& r : rows(tmp("full.sweep.csv"))) CHECK(r[1] < 0.05);
  CHECK(run("sweep " + model + " --temps 0 -o " + tmp("x")) == 1);
}

TEST_CASE("bayes command") {
  Scratch tmp;
  const auto net = data_path("sprinkler.json");
  REQUIRE(run("bayes " + net + " --target R -o " + tmp("prior")) == 0);
  CHECK(slurp(tmp("prior.bayes.csv")).find("true,0.2") != std::string::npos);
  REQUIRE(run("bayes " + net + " --target G --evidence R=false -o " + tmp("g")) == 0);
  const auto body = slurp(tmp("g.bayes.csv"));
  const auto pos = body.find("true,");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(body.substr(pos + 5)) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(run("bayes " + net + " --target G --evidence Q=false -o " + tmp("x")) == 1);
}

TEST_CASE("reruns are byte-identical") {
  Scratch tmp;
  const auto model = data_path("three_node.json");
  const std::vector<std::string> commands = {
      "exact " + model + " -T 3",
      "sample " + model + " -T 3 --shots 2000 --seed 8",
      "sample " + model + " --backend anneal -T 3 --shots 500 --seed 8",
      "sample " + model + " --backend qat --budget 40 -T 3 --shots 500 --seed 8",
      "infer " + model + " --query mpe --mode sample --clamp 0=1 --shots 2000 --seed 8",
      "sweep " + model + " --temps 1,10 --shots 1000 --seed 8",
      "bayes " + data_path("sprinkler.json") + " --target G",
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const std::string base = tmp("run" + std::to_string(i));
    REQUIRE(run(commands[i] + " -o " + base) == 0);
    std::map<std::string, std::string> first;
    for (const auto& entry : fs::directory_iterator(tmp.dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("run" + std::to_string(i) + ".", 0) == 0) first[name] = slurp(entry.path().string());
    }
    REQUIRE(run(commands[i] + " -o " + base) == 0);
    CHECK(first.size() >= 2);
    for (const auto& [name, content] : first) CHECK(slurp(tmp(name)) == content);
  }
}
