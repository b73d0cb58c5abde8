#include "vnfpr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace vnfpr {

namespace {

double link_weight(const SubstrateNetwork& net, int u, int v, PathWeight weight) {
  switch (weight) {
    case PathWeight::Hops: return 1.0;
    case PathWeight::LinkDelay: return net.link_delay(u, v);
    case PathWeight::BandwidthCost: return net.bandwidth_cost(u, v);
  }
  return 1.0;
}

bool usable(const SubstrateNetwork& net, int u, int v, const ResourceLedger* ledger,
            double min_bandwidth) {
  if (net.adjacency(u, v) == 0.0) return false;
  if (ledger && ledger->remaining_bandwidth(u, v) + kFeasibilityTol < min_bandwidth) return false;
  return true;
}

}  // namespace

std::optional<std::vector<int>> shortest_path(const SubstrateNetwork& net, int src, int dst,
                                              PathWeight weight, const std::vector<bool>* blocked,
                                              const ResourceLedger* ledger, double min_bandwidth) {
  const int n = net.node_count;
  if (src < 0 || src >= n || dst < 0 || dst >= n)
    throw std::invalid_argument("shortest_path: endpoint out of range");
  if (blocked && (*blocked)[static_cast<std::size_t>(dst)] && dst != src) return std::nullopt;
  if (src == dst) return std::vector<int>{src};

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(n), inf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<bool> settled(static_cast<std::size_t>(n), false);
  dist[static_cast<std::size_t>(src)] = 0.0;

  for (int iter = 0; iter < n; ++iter) {
    int best = -1;
    for (int v = 0; v < n; ++v)
      if (!settled[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < inf &&
          (best < 0 || dist[static_cast<std::size_t>(v)] < dist[static_cast<std::size_t>(best)]))
        best = v;
    if (best < 0) break;
    settled[static_cast<std::size_t>(best)] = true;
    if (best == dst) break;
    for (int v = 0; v < n; ++v) {
      if (settled[static_cast<std::size_t>(v)]) continue;
      if (blocked && (*blocked)[static_cast<std::size_t>(v)] && v != dst) continue;
      if (!usable(net, best, v, ledger, min_bandwidth)) continue;
      const double cand = dist[static_cast<std::size_t>(best)] + link_weight(net, best, v, weight);
      if (cand < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = cand;
        parent[static_cast<std::size_t>(v)] = best;
      }
    }
  }

  if (dist[static_cast<std::size_t>(dst)] == inf) return std::nullopt;
  std::vector<int> path;
  for (int v = dst; v != -1; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::vector<int>> enumerate_simple_paths(const SubstrateNetwork& net, int src, int dst,
                                                     int max_hops) {
  std::vector<std::vector<int>> out;
  std::vector<int> path{src};
  std::vector<bool> visited(static_cast<std::size_t>(net.node_count), false);
  visited[static_cast<std::size_t>(src)] = true;

  const std::function<void(int)> dfs = [&](int cur) {
    if (cur == dst) {
      out.push_back(path);
      return;
    }
    if (static_cast<int>(path.size()) - 1 >= max_hops) return;
    for (int v = 0; v < net.node_count; ++v) {
      if (net.adjacency(cur, v) == 0.0 || visited[static_cast<std::size_t>(v)]) continue;
      visited[static_cast<std::size_t>(v)] = true;
      path.push_back(v);
      dfs(v);
      path.pop_back();
      visited[static_cast<std::size_t>(v)] = false;
    }
  };
  dfs(src);
  return out;
}

namespace {

Deployment deployment_from_path(const std::vector<int>& path, const std::vector<int>& hosts,
                                const ServiceRequest& req, int nodes) {
  Mat placement(static_cast<int>(hosts.size()), nodes);
  for (std::size_t j = 0; j < hosts.size(); ++j)
    placement(static_cast<int>(j), hosts[j]) = 1.0;
  Mat routing(nodes, nodes), hops(nodes, nodes);
  for (std::size_t p = 0; p + 1 < path.size(); ++p) {
    routing(path[p], path[p + 1]) = 1.0;
    hops(path[p], path[p + 1]) = static_cast<double>(p + 1);
  }
  return make_deployment(std::move(placement), std::move(routing), std::move(hops), req.rate);
}

struct Candidate {
  Deployment deployment;
  double theta = 0.0;
  std::vector<double> compute_use;  // per node
  std::vector<double> memory_use;
  Mat bandwidth_use;
};

std::vector<Candidate> enumerate_candidates(const ServiceRequest& req, const SubstrateNetwork& net,
                                            const VnfCatalog& catalog, double psi_cost,
                                            double psi_delay, int max_hops) {
  std::vector<Candidate> out;
  const int n = net.node_count;
  const int chain = req.chain_length();
  for (const auto& path : enumerate_simple_paths(net, req.source, req.destination, max_hops)) {
    // order-respecting assignments: nondecreasing path positions per VNF
    std::vector<int> pos(static_cast<std::size_t>(chain), 0);
    const int last = static_cast<int>(path.size()) - 1;
    while (true) {
      std::vector<int> hosts;
      for (int p : pos) hosts.push_back(path[static_cast<std::size_t>(p)]);
      Candidate cand;
      cand.deployment = deployment_from_path(path, hosts, req, n);

      const std::vector<Deployment> deps{cand.deployment};
      const std::vector<ServiceRequest> reqs{req};
      if (validate(deps, reqs, net, catalog).feasible()) {
        const double cost = evaluate_cost(cand.deployment, req, net, catalog);
        const double delay = evaluate_delay(cand.deployment, req, net, catalog);
        cand.theta = req.cost_factor * psi_cost * cost + req.delay_factor * psi_delay * delay;
        cand.compute_use.assign(static_cast<std::size_t>(n), 0.0);
        cand.memory_use.assign(static_cast<std::size_t>(n), 0.0);
        cand.bandwidth_use = cand.deployment.flow;
        for (int j = 0; j < chain; ++j) {
          cand.compute_use[static_cast<std::size_t>(hosts[static_cast<std::size_t>(j)])] +=
              catalog.compute_req(req.chain[static_cast<std::size_t>(j)], req.rate);
          cand.memory_use[static_cast<std::size_t>(hosts[static_cast<std::size_t>(j)])] +=
              catalog.memory_req[static_cast<std::size_t>(req.chain[static_cast<std::size_t>(j)])];
        }
        out.push_back(std::move(cand));
      }

      // advance the nondecreasing position vector
      int j = chain - 1;
      while (j >= 0 && pos[static_cast<std::size_t>(j)] == last) --j;
      if (j < 0) break;
      const int bumped = ++pos[static_cast<std::size_t>(j)];
      for (int jj = j + 1; jj < chain; ++jj) pos[static_cast<std::size_t>(jj)] = bumped;
    }
  }
  return out;
}

bool pair_feasible(const Candidate& a, const Candidate& b, const SubstrateNetwork& net) {
  const int n = net.node_count;
  for (int v = 0; v < n; ++v) {
    if (a.compute_use[static_cast<std::size_t>(v)] + b.compute_use[static_cast<std::size_t>(v)] >
        net.compute_cap[static_cast<std::size_t>(v)] + kFeasibilityTol)
      return false;
    if (a.memory_use[static_cast<std::size_t>(v)] + b.memory_use[static_cast<std::size_t>(v)] >
        net.memory_cap[static_cast<std::size_t>(v)] + kFeasibilityTol)
      return false;
  }
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (a.bandwidth_use(u, v) + b.bandwidth_use(u, v) > net.bandwidth_cap(u, v) + kFeasibilityTol)
        return false;
  return true;
}

}  // namespace

ExactResult exact_solve(const std::vector<ServiceRequest>& requests, const SubstrateNetwork& net,
                        const VnfCatalog& catalog, double psi_cost, double psi_delay,
                        const SolveLimits& limits) {
  std::vector<ServiceRequest> active;
  for (const auto& r : requests)
    if (!r.is_padding()) active.push_back(r);

  if (net.node_count > limits.max_nodes)
    throw std::invalid_argument("exact_solve: node count exceeds the search budget");
  if (static_cast<int>(active.size()) > limits.max_requests)
    throw std::invalid_argument("exact_solve: request count exceeds the search budget");
  for (const auto& r : active)
    if (r.chain_length() > limits.max_chain)
      throw std::invalid_argument("exact_solve: chain length exceeds the search budget");
  const int max_hops = std::min(limits.max_hops, net.node_count - 1);

  ExactResult result;
  if (active.empty()) {
    result.feasible = true;
    return result;
  }

  std::vector<std::vector<Candidate>> candidates;
  for (const auto& r : active)
    candidates.push_back(enumerate_candidates(r, net, catalog, psi_cost, psi_delay, max_hops));
  for (const auto& c : candidates)
    if (c.empty()) return result;  // some request has no feasible deployment at all

  double best = std::numeric_limits<double>::infinity();
  if (active.size() == 1) {
    for (const auto& cand : candidates[0]) {
      if (cand.theta < best) {
        best = cand.theta;
        result.deployments = {cand.deployment};
      }
    }
  } else {
    for (const auto& a : candidates[0]) {
      for (const auto& b : candidates[1]) {
        if (a.theta + b.theta >= best) continue;
        if (!pair_feasible(a, b, net)) continue;
        best = a.theta + b.theta;
        result.deployments = {a.deployment, b.deployment};
      }
    }
  }
  if (!std::isfinite(best)) return result;

  result.feasible = true;
  result.objective = best;

  // padding requests keep an empty deployment slot in the aligned output
  if (active.size() != requests.size()) {
    std::vector<Deployment> aligned;
    std::size_t next = 0;
    for (const auto& r : requests) {
      if (r.is_padding()) {
        Deployment empty;
        empty.placement = Mat(0, net.node_count);
        empty.routing = Mat(net.node_count, net.node_count);
        empty.hops = Mat(net.node_count, net.node_count);
        empty.flow = Mat(net.node_count, net.node_count);
        aligned.push_back(std::move(empty));
      } else {
        aligned.push_back(result.deployments[next++]);
      }
    }
    result.deployments = std::move(aligned);
  }
  return result;
}

// ---------------------------------------------------------------------------
// greedy heuristics
// ---------------------------------------------------------------------------

namespace {

Deployment empty_deployment(int nodes) {
  Deployment dep;
  dep.placement = Mat(0, nodes);
  dep.routing = Mat(nodes, nodes);
  dep.hops = Mat(nodes, nodes);
  dep.flow = Mat(nodes, nodes);
  return dep;
}

void debit_path(ResourceLedger& ledger, const std::vector<int>& path, double rate) {
  for (std::size_t p = 0; p + 1 < path.size(); ++p)
    ledger.remaining_bandwidth(path[p], path[p + 1]) -= rate;
}

// extends route (a node sequence ending at cur) with segment, skipping the
// shared first node
void extend_route(std::vector<int>& route, const std::vector<int>& segment) {
  route.insert(route.end(), segment.begin() + 1, segment.end());
}

bool commit_if_valid(const ServiceRequest& req, const std::vector<int>& route,
                     const std::vector<int>& hosts, const SubstrateNetwork& net,
                     const VnfCatalog& catalog, const ResourceLedger& before,
                     ResourceLedger& ledger, Deployment& out) {
  Deployment dep = deployment_from_path(route, hosts, req, net.node_count);
  SubstrateNetwork remaining = net;
  remaining.compute_cap = before.remaining_compute;
  remaining.memory_cap = before.remaining_memory;
  remaining.bandwidth_cap = before.remaining_bandwidth;
  const std::vector<Deployment> deps{dep};
  const std::vector<ServiceRequest> reqs{req};
  if (!validate(deps, reqs, remaining, catalog).feasible()) return false;
  out = std::move(dep);
  // node debits happened during placement; bandwidth during routing; ledger
  // already reflects this request, nothing further to apply
  (void)ledger;
  return true;
}

}  // namespace

BaselineResult greedy_bestfit(const std::vector<ServiceRequest>& requests,
                              const SubstrateNetwork& net, const VnfCatalog& catalog) {
  BaselineResult result;
  ResourceLedger ledger = ResourceLedger::full_of(net);
  const int n = net.node_count;

  for (const auto& req : requests) {
    if (req.is_padding()) {
      result.deployments.push_back(empty_deployment(n));
      result.accepted.push_back(false);
      continue;
    }
    const ResourceLedger before = ledger;
    bool ok = true;

    // best-fit decreasing: biggest compute demand first, onto the node with
    // the most remaining compute that also fits the memory demand
    std::vector<int> order(static_cast<std::size_t>(req.chain_length()));
    for (int j = 0; j < req.chain_length(); ++j) order[static_cast<std::size_t>(j)] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return catalog.compute_req(req.chain[static_cast<std::size_t>(a)], req.rate) >
             catalog.compute_req(req.chain[static_cast<std::size_t>(b)], req.rate);
    });

    std::vector<int> hosts(static_cast<std::size_t>(req.chain_length()), -1);
    for (int j : order) {
      const int k = req.chain[static_cast<std::size_t>(j)];
      const double need_c = catalog.compute_req(k, req.rate);
      const double need_m = catalog.memory_req[static_cast<std::size_t>(k)];
      const bool last_vnf = j + 1 == req.chain_length();
      int pick = -1;
      for (int v = 0; v < n; ++v) {
        if (v == req.destination && !last_vnf) continue;  // t stays terminal
        if (ledger.remaining_compute[static_cast<std::size_t>(v)] + kFeasibilityTol < need_c)
          continue;
        if (ledger.remaining_memory[static_cast<std::size_t>(v)] + kFeasibilityTol < need_m)
          continue;
        if (pick < 0 || ledger.remaining_compute[static_cast<std::size_t>(v)] >
                            ledger.remaining_compute[static_cast<std::size_t>(pick)])
          pick = v;
      }
      if (pick < 0) {
        ok = false;
        break;
      }
      hosts[static_cast<std::size_t>(j)] = pick;
      ledger.remaining_compute[static_cast<std::size_t>(pick)] -= need_c;
      ledger.remaining_memory[static_cast<std::size_t>(pick)] -= need_m;
    }

    // thread a delay-weighted shortest path through the hosts in chain order
    std::vector<int> route{req.source};
    if (ok) {
      std::vector<bool> blocked(static_cast<std::size_t>(n), false);
      int cur = req.source;
      std::vector<int> waypoints = hosts;
      waypoints.push_back(req.destination);
      for (int w : waypoints) {
        if (w == cur) continue;
        blocked[static_cast<std::size_t>(cur)] = true;
        const auto segment =
            shortest_path(net, cur, w, PathWeight::LinkDelay, &blocked, &ledger, req.rate);
        if (!segment) {
          ok = false;
          break;
        }
        for (std::size_t p = 0; p + 1 < segment->size(); ++p)
          blocked[static_cast<std::size_t>((*segment)[p])] = true;
        debit_path(ledger, *segment, req.rate);
        extend_route(route, *segment);
        cur = w;
      }
    }

    Deployment dep = empty_deployment(n);
    ok = ok && commit_if_valid(req, route, hosts, net, catalog, before, ledger, dep);
    if (!ok) ledger = before;
    result.deployments.push_back(std::move(dep));
    result.accepted.push_back(ok);
  }
  return result;
}

BaselineResult greedy_nearest(const std::vector<ServiceRequest>& requests,
                              const SubstrateNetwork& net, const VnfCatalog& catalog) {
  BaselineResult result;
  ResourceLedger ledger = ResourceLedger::full_of(net);
  const int n = net.node_count;

  for (const auto& req : requests) {
    if (req.is_padding()) {
      result.deployments.push_back(empty_deployment(n));
      result.accepted.push_back(false);
      continue;
    }
    const ResourceLedger before = ledger;
    bool ok = true;

    std::vector<int> hosts;
    std::vector<int> route{req.source};
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    int cur = req.source;

    for (int j = 0; j < req.chain_length() && ok; ++j) {
      const int k = req.chain[static_cast<std::size_t>(j)];
      const double need_c = catalog.compute_req(k, req.rate);
      const double need_m = catalog.memory_req[static_cast<std::size_t>(k)];
      const bool last_vnf = j + 1 == req.chain_length();

      // nearest feasible node by hop count over the unvisited subgraph;
      // the destination only becomes a host candidate for the final VNF
      int pick = -1;
      std::vector<int> pick_path;
      for (int v = 0; v < n; ++v) {
        if (v != cur && visited[static_cast<std::size_t>(v)]) continue;
        if (v == req.destination && !last_vnf) continue;
        if (ledger.remaining_compute[static_cast<std::size_t>(v)] + kFeasibilityTol < need_c)
          continue;
        if (ledger.remaining_memory[static_cast<std::size_t>(v)] + kFeasibilityTol < need_m)
          continue;
        std::vector<bool> blocked = visited;
        blocked[static_cast<std::size_t>(cur)] = false;
        blocked[static_cast<std::size_t>(req.destination)] = v != req.destination;
        const auto path = shortest_path(net, cur, v, PathWeight::Hops, &blocked, &ledger, req.rate);
        if (!path) continue;
        if (pick < 0 || path->size() < pick_path.size()) {
          pick = v;
          pick_path = *path;
        }
      }
      if (pick < 0) {
        ok = false;
        break;
      }
      for (std::size_t p = 0; p + 1 < pick_path.size(); ++p)
        visited[static_cast<std::size_t>(pick_path[p])] = true;
      debit_path(ledger, pick_path, req.rate);
      extend_route(route, pick_path);
      cur = pick;
      hosts.push_back(pick);
      ledger.remaining_compute[static_cast<std::size_t>(pick)] -= need_c;
      ledger.remaining_memory[static_cast<std::size_t>(pick)] -= need_m;
    }

    if (ok && cur != req.destination) {
      std::vector<bool> blocked = visited;
      blocked[static_cast<std::size_t>(cur)] = false;
      const auto path =
          shortest_path(net, cur, req.destination, PathWeight::Hops, &blocked, &ledger, req.rate);
      if (!path) {
        ok = false;
      } else {
        debit_path(ledger, *path, req.rate);
        extend_route(route, *path);
      }
    }

    Deployment dep = empty_deployment(n);
    ok = ok && commit_if_valid(req, route, hosts, net, catalog, before, ledger, dep);
    if (!ok) ledger = before;
    result.deployments.push_back(std::move(dep));
    result.accepted.push_back(ok);
  }
  return result;
}

}  // namespace vnfpr
