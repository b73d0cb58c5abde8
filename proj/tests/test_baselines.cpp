#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vnfpr/baselines.hpp"
#include "vnfpr/rng.hpp"

using namespace vnfpr;

TEST_CASE("shortest path handles the trivial and unique cases") {
  const SubstrateNetwork line = oracle::make_net(3, {{0, 1}, {1, 2}});
  const auto self_path = shortest_path(line, 1, 1, PathWeight::Hops);
  REQUIRE(self_path);
  CHECK(*self_path == std::vector<int>{1});

  const auto path = shortest_path(line, 0, 2, PathWeight::Hops);
  REQUIRE(path);
  CHECK(*path == std::vector<int>{0, 1, 2});

  const SubstrateNetwork split = oracle::make_net(4, {{0, 1}, {2, 3}});
  CHECK_FALSE(shortest_path(split, 0, 3, PathWeight::Hops));
}

TEST_CASE("dijkstra matches brute-force enumeration on all small graphs") {
  Rng rng(3);
  for (int n = 2; n <= 6; ++n) {
    const auto graphs = oracle::connected_graphs(std::min(n, 5));
    for (std::size_t g = 0; g < graphs.size(); g += 7) {  // sample every 7th graph
      SubstrateNetwork net = oracle::make_net(std::min(n, 5), graphs[g]);
      for (const auto& [u, v] : net.links) {
        const double d = rng.uniform(0.5, 3.0);
        net.link_delay(u, v) = net.link_delay(v, u) = d;
      }
      const int dst = net.node_count - 1;
      const auto path = shortest_path(net, 0, dst, PathWeight::LinkDelay);
      const auto best = oracle::brute_force_path_weight(
          net, 0, dst, [&](int u, int v) { return net.link_delay(u, v); });
      REQUIRE(path);
      REQUIRE(best);
      double got = 0.0;
      for (std::size_t p = 0; p + 1 < path->size(); ++p)
        got += net.link_delay((*path)[p], (*path)[p + 1]);
      CHECK(got == doctest::Approx(*best).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact solver picks the cheaper of the two triangle routes") {
  // uniform costs: the 1-hop route wins iff its weighted objective is lower,
  // verified here by listing both candidate paths by hand
  SubstrateNetwork net = oracle::make_net(3, {{0, 1}, {1, 2}, {0, 2}});
  const VnfCatalog cat = oracle::make_catalog(4);
  const ServiceRequest req = oracle::make_request(0, 0, 2, {1}, 5.4, 0.5);

  const auto result = exact_solve({req}, net, cat);
  REQUIRE(result.feasible);

  // hand enumeration: direct path 0-2 or detour 0-1-2, VNF anywhere in order
  double best = 1e300;
  for (const auto& path : {std::vector<int>{0, 2}, std::vector<int>{0, 1, 2}}) {
    for (int host : path) {
      const Deployment dep = oracle::path_deployment(path, {host}, req, 3);
      if (!validate({dep}, {req}, net, cat).feasible()) continue;
      const double theta = req.cost_factor * evaluate_cost(dep, req, net, cat) +
                           req.delay_factor * evaluate_delay(dep, req, net, cat);
      best = std::min(best, theta);
    }
  }
  CHECK(result.objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("no path between endpoints means infeasible") {
  const SubstrateNetwork net = oracle::make_net(4, {{0, 1}, {2, 3}});
  const VnfCatalog cat = oracle::make_catalog(4);
  const ServiceRequest req = oracle::make_request(0, 0, 3, {1});
  const auto result = exact_solve({req}, net, cat);
  CHECK_FALSE(result.feasible);
}

TEST_CASE("cost- and delay-minimizing deployments differ when they should") {
  // two routes: a cheap slow one and an expensive fast one
  SubstrateNetwork net = oracle::make_net(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
  net.bandwidth_cost(0, 1) = net.bandwidth_cost(1, 0) = 1.0;
  net.bandwidth_cost(1, 3) = net.bandwidth_cost(3, 1) = 1.0;
  net.link_delay(0, 1) = net.link_delay(1, 0) = 10.0;
  net.link_delay(1, 3) = net.link_delay(3, 1) = 10.0;
  net.bandwidth_cost(0, 2) = net.bandwidth_cost(2, 0) = 20.0;
  net.bandwidth_cost(2, 3) = net.bandwidth_cost(3, 2) = 20.0;
  net.link_delay(0, 2) = net.link_delay(2, 0) = 0.1;
  net.link_delay(2, 3) = net.link_delay(3, 2) = 0.1;
  const VnfCatalog cat = oracle::make_catalog(4);

  ServiceRequest cost_first = oracle::make_request(0, 0, 3, {1}, 5.4, 0.0);
  ServiceRequest delay_first = oracle::make_request(0, 0, 3, {1}, 5.4, 1.0);
  const auto via_cost = exact_solve({cost_first}, net, cat);
  const auto via_delay = exact_solve({delay_first}, net, cat);
  REQUIRE(via_cost.feasible);
  REQUIRE(via_delay.feasible);
  CHECK(via_cost.deployments[0].routing(0, 1) == 1.0);   // cheap route over node 1
  CHECK(via_delay.deployments[0].routing(0, 2) == 1.0);  // fast route over node 2
}

TEST_CASE("exact solver enforces the search budget") {
  const SubstrateNetwork big = oracle::make_net(
      7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}});
  const VnfCatalog cat = oracle::make_catalog(4);
  const ServiceRequest req = oracle::make_request(0, 0, 6, {1});
  CHECK_THROWS_AS(exact_solve({req}, big, cat), std::invalid_argument);

  const SubstrateNetwork ok_net = oracle::make_net(3, {{0, 1}, {1, 2}});
  const ServiceRequest long_chain = oracle::make_request(0, 0, 2, {0, 1, 2});
  CHECK_THROWS_AS(exact_solve({long_chain}, ok_net, cat), std::invalid_argument);
}

TEST_CASE("best-fit places the first VNF on the strictly largest node") {
  SubstrateNetwork net = oracle::make_net(3, {{0, 1}, {1, 2}});
  net.compute_cap = {10.0, 50.0, 10.0};
  const VnfCatalog cat = oracle::make_catalog(4);
  const ServiceRequest req = oracle::make_request(0, 0, 2, {1});
  const auto result = greedy_bestfit({req}, net, cat);
  REQUIRE(result.accepted[0]);
  CHECK(result.deployments[0].placement(0, 1) == 1.0);
}

TEST_CASE("greedy outputs always validate or are rejected") {
  Rng rng(77);
  const auto graphs = oracle::connected_graphs(5);
  int accepted_total = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto& edges = graphs[rng.below(graphs.size())];
    SubstrateNetwork net = generate_instance(oracle::make_net(5, edges), rng.next_u64());
    const VnfCatalog cat = sample_catalog(6, rng.next_u64());
    RequestGenParams params;
    params.min_chain = 1;
    params.max_chain = 3;
    const auto requests =
        generate_requests(net, cat, 2, 0.5, rng.next_u64(), params);

    const auto result = trial % 2 == 0 ? greedy_bestfit(requests, net, cat)
                                       : greedy_nearest(requests, net, cat);
    std::vector<Deployment> accepted_deps;
    std::vector<ServiceRequest> accepted_reqs;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (result.accepted[i]) {
        accepted_deps.push_back(result.deployments[i]);
        accepted_reqs.push_back(requests[i]);
        ++accepted_total;
      }
    }
    if (!accepted_deps.empty())
      CHECK(validate(accepted_deps, accepted_reqs, net, cat).feasible());
  }
  CHECK(accepted_total > 300);  // the heuristics accept most easy instances
}

TEST_CASE("empty request list gives empty output") {
  const SubstrateNetwork net = oracle::make_net(3, {{0, 1}, {1, 2}});
  const VnfCatalog cat = oracle::make_catalog(4);
  CHECK(greedy_bestfit({}, net, cat).deployments.empty());
  CHECK(greedy_nearest({}, net, cat).deployments.empty());
}

TEST_CASE("nearest-feasible placement lands on the only feasible neighbor") {
  SubstrateNetwork net = oracle::make_net(4, {{0, 1}, {1, 2}, {2, 3}});
  net.compute_cap = {0.0, 50.0, 0.0, 0.0};
  net.memory_cap = {0.0, 50.0, 50.0, 50.0};
  const VnfCatalog cat = oracle::make_catalog(4);
  const ServiceRequest req = oracle::make_request(0, 0, 3, {1});
  const auto result = greedy_nearest({req}, net, cat);
  REQUIRE(result.accepted[0]);
  CHECK(result.deployments[0].placement(0, 1) == 1.0);
}

TEST_CASE("disconnected destination is rejected by the nearest heuristic") {
  const SubstrateNetwork net = oracle::make_net(4, {{0, 1}, {2, 3}});
  const VnfCatalog cat = oracle::make_catalog(4);
  const ServiceRequest req = oracle::make_request(0, 0, 3, {1});
  const auto result = greedy_nearest({req}, net, cat);
  CHECK_FALSE(result.accepted[0]);
}

TEST_CASE("heuristics never beat the exact oracle") {
  Rng rng(123);
  const auto graphs = oracle::connected_graphs(5);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& edges = graphs[rng.below(graphs.size())];
    SubstrateNetwork net = generate_instance(oracle::make_net(5, edges), rng.next_u64());
    const VnfCatalog cat = sample_catalog(5, rng.next_u64());
    RequestGenParams params;
    params.min_chain = 1;
    params.max_chain = 2;
    const auto requests = generate_requests(net, cat, 1, 0.5, rng.next_u64(), params);

    const auto exact = exact_solve(requests, net, cat);
    if (!exact.feasible) continue;
    for (const auto& result :
         {greedy_bestfit(requests, net, cat), greedy_nearest(requests, net, cat)}) {
      if (!result.accepted[0]) continue;
      const auto breakdown = evaluate_objective(result.deployments, requests, net, cat);
      CHECK(breakdown.objective >= exact.objective - 1e-9);
      ++compared;
    }
  }
  CHECK(compared > 100);
}
