#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "vnfpr/experiments.hpp"

using namespace vnfpr;

namespace {

ExperimentConfig toy_config(const std::string& method) {
  ExperimentConfig c;
  c.topology_path = std::string(VNFPR_DATA_DIR) + "/triangle.txt";
  c.instance_seed = 3;
  c.categories = 5;
  c.request_count = 2;
  c.min_chain = 1;
  c.max_chain = 2;
  c.method = method;
  c.batch_agents = 2;
  c.seeds = {1, 2};
  c.hyper.epochs = 15;
  c.hyper.max_placement_episodes = 10;
  c.hyper.max_routing_episodes = 15;
  c.hyper.batch_size = 16;
  c.hyper.replay_capacity = 64;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config json round-trips and validates") {
  const ExperimentConfig c = toy_config("greedy-bestfit");
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(back.topology_path == c.topology_path);
  CHECK(back.method == c.method);
  CHECK(back.seeds == c.seeds);
  CHECK(back.request_count == c.request_count);
  CHECK(back.hyper.epochs == c.hyper.epochs);
  CHECK(back.dist.compute_cap.lo == c.dist.compute_cap.lo);
}

TEST_CASE("invalid config fields are named in diagnostics") {
  ExperimentConfig c = toy_config("greedy-bestfit");
  c.method = "annealing";
  CHECK_THROWS_WITH_AS(c.check(), doctest::Contains("method"), std::invalid_argument);
  c = toy_config("exact");
  c.seeds.clear();
  CHECK_THROWS_WITH_AS(c.check(), doctest::Contains("seeds"), std::invalid_argument);
  c = toy_config("exact");
  c.mean_delay_factor = 1.5;
  CHECK_THROWS_WITH_AS(c.check(), doctest::Contains("mean_delay_factor"), std::invalid_argument);
}

TEST_CASE("exact experiments reproduce the oracle objective") {
  const ExperimentConfig c = toy_config("exact");
  const auto records = run_experiment(c);
  REQUIRE(records.size() == 2);

  // same instance and per-seed requests: run the oracle by hand and compare
  const SubstrateNetwork structure = load_topology_file(c.topology_path);
  DistributionSpec dist = c.dist;
  dist.vnf_categories = c.categories;
  const SubstrateNetwork net = generate_instance(structure, c.instance_seed, dist);
  const VnfCatalog cat = sample_catalog(c.categories, c.catalog_seed);
  RequestGenParams params;
  params.rate = c.rate;
  params.min_chain = c.min_chain;
  params.max_chain = c.max_chain;
  for (const auto& rec : records) {
    const auto requests =
        generate_requests(net, cat, c.request_count, c.mean_delay_factor, rec.seed, params);
    const auto oracle_result = exact_solve(requests, net, cat);
    REQUIRE(oracle_result.feasible);
    CHECK(rec.objective == doctest::Approx(oracle_result.objective).epsilon(1e-9));
    CHECK(rec.acceptance_ratio == 1.0);
    CHECK(rec.throughput == doctest::Approx(2 * 5.4));
  }
}

TEST_CASE("two seeds produce independent records") {
  const auto records = run_experiment(toy_config("greedy-bestfit"));
  REQUIRE(records.size() == 2);
  CHECK(records[0].seed == 1);
  CHECK(records[1].seed == 2);
  CHECK(records[0].per_request.size() == 2);
}

TEST_CASE("metrics are recomputable from the per-request records") {
  const auto records = run_experiment(toy_config("greedy-nearest"));
  for (const auto& rec : records) {
    double throughput = 0.0, objective = 0.0;
    int accepted = 0;
    for (const auto& pr : rec.per_request) {
      if (!pr.accepted) continue;
      ++accepted;
      throughput += 5.4;
      objective += pr.weighted;
    }
    CHECK(rec.throughput == doctest::Approx(throughput).epsilon(1e-12));
    CHECK(rec.objective == doctest::Approx(objective).epsilon(1e-12));
    CHECK(rec.acceptance_ratio ==
          doctest::Approx(static_cast<double>(accepted) / rec.per_request.size()));
  }
}

TEST_CASE("metrics files are written and rerunning them is bitwise identical") {
  namespace fs = std::filesystem;
  ExperimentConfig c = toy_config("greedy-bestfit");
  const fs::path dir = fs::temp_directory_path() / "vnfpr_metrics_test";
  fs::remove_all(dir);
  c.output_dir = dir.string();

  run_experiment(c);
  const std::string summary_a = slurp(dir / "summary.csv");
  const std::string req_a = slurp(dir / "requests_seed1.csv");
  REQUIRE_FALSE(summary_a.empty());

  run_experiment(c);
  CHECK(slurp(dir / "summary.csv") == summary_a);
  CHECK(slurp(dir / "requests_seed1.csv") == req_a);
  CHECK(slurp(dir / "manifest.json").find("config_hash") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cdf of constant values is one step") {
  const auto cdf = emit_cdf({4.2, 4.2, 4.2}, 5);
  for (const auto& [x, f] : cdf) {
    CHECK(x == 4.2);
    CHECK(f == 1.0);
  }
}

TEST_CASE("empirical cdf evaluates midpoints per definition") {
  const std::vector<double> values{1.0, 2.0, 3.0, 4.0};
  CHECK(ecdf_at(values, 2.5) == 0.5);
  CHECK(ecdf_at(values, 0.5) == 0.0);
  CHECK(ecdf_at(values, 4.0) == 1.0);
}

TEST_CASE("cdf output is nondecreasing with F(max)=1") {
  Rng rng(5);
  std::vector<double> values;
  for (int i = 0; i < 57; ++i) values.push_back(rng.uniform(-3.0, 9.0));
  const auto cdf = emit_cdf(values, 20);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    CHECK(cdf[i].first >= cdf[i - 1].first);
    CHECK(cdf[i].second >= cdf[i - 1].second);
  }
  CHECK(cdf.back().second == 1.0);
  CHECK_THROWS_AS(emit_cdf({}, 5), std::invalid_argument);
}

TEST_CASE("throughput sweep over nested prefixes is monotone for greedy methods") {
  ExperimentConfig c = toy_config("greedy-bestfit");
  c.topology_path = std::string(VNFPR_DATA_DIR) + "/ring8.txt";
  c.request_count = 12;
  const auto sweep = throughput_sweep(c, 3, {2, 4, 8, 12});
  REQUIRE(sweep.size() == 4);
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i].throughput >= sweep[i - 1].throughput - 1e-9);
    CHECK(sweep[i].acceptance_ratio <= sweep[i - 1].acceptance_ratio + 1e-9);
  }
}
