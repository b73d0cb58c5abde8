#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "vnfpr/catalog.hpp"

using namespace vnfpr;

namespace {

SubstrateNetwork toy_net() {
  return parse_topology("nodes 5\nlink 1 2\nlink 2 3\nlink 3 4\nlink 4 5\nlink 1 5\n");
}

}  // namespace

TEST_CASE("sampled catalog honors the category ranges") {
  const VnfCatalog cat = sample_catalog(10, 4);
  CHECK(cat.category_count() == 10);
  for (double eta : cat.compute_per_rate) {
    CHECK(eta >= 0.2);
    CHECK(eta <= 1.0);
  }
  for (double m : cat.memory_req) {
    CHECK(m >= 1.0);
    CHECK(m <= 5.0);
  }
  for (double d : cat.dyn_delay_per_rate) {
    CHECK(d >= 0.5);
    CHECK(d <= 3.0);
  }
  CHECK(cat.compute_req(0, 5.4) == doctest::Approx(cat.compute_per_rate[0] * 5.4));
}

TEST_CASE("generated requests satisfy the per-request invariants") {
  const SubstrateNetwork net = toy_net();
  const VnfCatalog cat = sample_catalog(10, 4);
  const auto requests = generate_requests(net, cat, 50, 0.5, 11);
  REQUIRE(requests.size() == 50);
  for (const auto& r : requests) {
    CHECK(r.source != r.destination);
    CHECK(r.chain_length() >= 2);
    CHECK(r.chain_length() <= 4);
    CHECK(r.cost_factor + r.delay_factor == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.delay_factor >= 0.0);
    CHECK(r.delay_factor <= 1.0);
    std::set<int> unique(r.chain.begin(), r.chain.end());
    CHECK(unique.size() == r.chain.size());  // no repeated category in a chain
    CHECK(r.rate == 5.4);
  }
}

TEST_CASE("empirical mean of delay factors hits the target within 1/M") {
  const SubstrateNetwork net = toy_net();
  const VnfCatalog cat = sample_catalog(10, 4);
  for (const double target : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const int m = 400;
    const auto requests = generate_requests(net, cat, m, target, 17);
    double sum = 0.0;
    for (const auto& r : requests) sum += r.delay_factor;
    CHECK(std::fabs(sum / m - target) <= 1.0 / m);
  }
}

TEST_CASE("single request with mean 1 pins both factors") {
  const SubstrateNetwork net = toy_net();
  const VnfCatalog cat = sample_catalog(10, 4);
  const auto requests = generate_requests(net, cat, 1, 1.0, 5);
  CHECK(requests[0].delay_factor == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(requests[0].cost_factor == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("generation is deterministic under a fixed seed") {
  const SubstrateNetwork net = toy_net();
  const VnfCatalog cat = sample_catalog(10, 4);
  const auto a = generate_requests(net, cat, 20, 0.5, 42);
  const auto b = generate_requests(net, cat, 20, 0.5, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].source == b[i].source);
    CHECK(a[i].destination == b[i].destination);
    CHECK(a[i].chain == b[i].chain);
    CHECK(a[i].delay_factor == b[i].delay_factor);
  }
}

TEST_CASE("a catalog smaller than the longest chain is rejected") {
  const SubstrateNetwork net = toy_net();
  const VnfCatalog cat = sample_catalog(3, 4);
  CHECK_THROWS_AS(generate_requests(net, cat, 5, 0.5, 1), std::invalid_argument);
}

TEST_CASE("pad_to_batches pads the tail batch with zero-demand entries") {
  const SubstrateNetwork net = toy_net();
  const VnfCatalog cat = sample_catalog(10, 4);

  SUBCASE("45 into 20 gives 3 batches with 15 padding entries") {
    const auto requests = generate_requests(net, cat, 45, 0.5, 9);
    const auto batches = pad_to_batches(requests, 20);
    REQUIRE(batches.size() == 3);
    for (const auto& b : batches) CHECK(b.size() == 20);
    int padding = 0;
    for (const auto& r : batches.back())
      if (r.is_padding()) ++padding;
    CHECK(padding == 15);
  }
  SUBCASE("exact division adds no padding") {
    const auto requests = generate_requests(net, cat, 40, 0.5, 9);
    const auto batches = pad_to_batches(requests, 20);
    REQUIRE(batches.size() == 2);
    for (const auto& b : batches)
      for (const auto& r : b) CHECK_FALSE(r.is_padding());
  }
  SUBCASE("single request gets 19 padding peers") {
    const auto requests = generate_requests(net, cat, 1, 0.5, 9);
    const auto batches = pad_to_batches(requests, 20);
    REQUIRE(batches.size() == 1);
    int padding = 0;
    for (const auto& r : batches[0])
      if (r.is_padding()) ++padding;
    CHECK(padding == 19);
  }
}

TEST_CASE("padding never contributes to objectives") {
  const SubstrateNetwork net = generate_instance(toy_net(), 3);
  const VnfCatalog cat = sample_catalog(10, 4);
  const auto requests = generate_requests(net, cat, 3, 0.5, 9);
  const auto batches = pad_to_batches(requests, 5);

  // deploy the real requests along trivial adjacent paths, leave padding empty
  std::vector<Deployment> deps;
  for (const auto& r : batches[0]) {
    if (r.is_padding()) {
      deps.push_back(oracle::path_deployment({}, {}, r, net.node_count));
    } else {
      std::vector<int> hosts(r.chain.size(), r.source);
      deps.push_back(oracle::path_deployment({r.source, r.destination}, hosts, r, net.node_count));
    }
  }
  const auto with_padding = evaluate_objective(deps, batches[0], net, cat);
  const std::vector<Deployment> real_deps(deps.begin(), deps.begin() + 3);
  const auto without =
      evaluate_objective(real_deps, requests, net, cat);
  CHECK(with_padding.objective == doctest::Approx(without.objective).epsilon(1e-12));
}

TEST_CASE("request jsonl round-trips") {
  const SubstrateNetwork net = toy_net();
  const VnfCatalog cat = sample_catalog(10, 4);
  const auto requests = generate_requests(net, cat, 7, 0.3, 21);
  const auto back = requests_from_jsonl(requests_to_jsonl(requests));
  REQUIRE(back.size() == requests.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == requests[i].id);
    CHECK(back[i].source == requests[i].source);
    CHECK(back[i].destination == requests[i].destination);
    CHECK(back[i].chain == requests[i].chain);
    CHECK(back[i].rate == requests[i].rate);
    CHECK(back[i].delay_factor == requests[i].delay_factor);
  }
}
