#pragma once

// Independent checkers used by the test suites. Everything here recomputes
// results from first principles (walk reconstruction, path-list accumulation,
// finite differences) without touching the implementation paths under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "vnfpr/agent.hpp"
#include "vnfpr/catalog.hpp"
#include "vnfpr/solution.hpp"
#include "vnfpr/topology.hpp"

namespace oracle {

// Reconstructs the walk encoded by the hop matrix and accepts iff it is one
// simple source -> destination path with consecutive hops 1..h.
inline bool walk_is_simple_path(const vnfpr::Mat& routing, const vnfpr::Mat& hops, int source,
                                int destination) {
  const int n = routing.rows;
  std::map<int, std::pair<int, int>> by_hop;
  int link_count = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      const bool has_r = routing(u, v) != 0.0;
      const bool has_q = hops(u, v) != 0.0;
      if (has_r != has_q) return false;
      if (!has_r) continue;
      ++link_count;
      const double hop = hops(u, v);
      if (hop != std::floor(hop) || hop < 1.0) return false;
      if (!by_hop.emplace(static_cast<int>(hop), std::make_pair(u, v)).second) return false;
    }
  }
  if (link_count == 0) return false;
  if (static_cast<int>(by_hop.size()) != link_count) return false;
  if (by_hop.begin()->first != 1 || by_hop.rbegin()->first != link_count) return false;

  std::vector<int> visited{source};
  int cur = source;
  for (int m = 1; m <= link_count; ++m) {
    const auto it = by_hop.find(m);
    if (it == by_hop.end()) return false;
    const auto [u, v] = it->second;
    if (u != cur) return false;
    if (std::find(visited.begin(), visited.end(), v) != visited.end()) return false;
    visited.push_back(v);
    cur = v;
  }
  return cur == destination;
}

// Path-list cost accumulation, term by term, independent of the matrix sums.
inline double path_cost(const std::vector<int>& path, const std::vector<int>& hosts,
                        const vnfpr::ServiceRequest& req, const vnfpr::SubstrateNetwork& net,
                        const vnfpr::VnfCatalog& catalog) {
  double total = 0.0;
  for (std::size_t j = 0; j < hosts.size(); ++j) {
    const int k = req.chain[j];
    const int host = hosts[j];
    total += net.deploy_cost(k, host);
    total += catalog.compute_per_rate[k] * req.rate * net.compute_cost[host];
    total += catalog.memory_req[k] * net.memory_cost[host];
  }
  for (std::size_t p = 0; p + 1 < path.size(); ++p)
    total += req.rate * net.bandwidth_cost(path[p], path[p + 1]);
  return total;
}

inline double path_delay(const std::vector<int>& path, const std::vector<int>& hosts,
                         const vnfpr::ServiceRequest& req, const vnfpr::SubstrateNetwork& net,
                         const vnfpr::VnfCatalog& catalog) {
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < path.size(); ++p)
    total += req.rate * net.link_delay(path[p], path[p + 1]);
  total += net.node_fixed_delay * static_cast<double>(path.size());
  for (std::size_t j = 0; j < hosts.size(); ++j)
    total += catalog.dyn_delay_per_rate[req.chain[j]] * req.rate;
  return total;
}

// brute-force minimal path weight by exhaustive simple-path enumeration
inline std::optional<double> brute_force_path_weight(const vnfpr::SubstrateNetwork& net, int src,
                                                     int dst,
                                                     const std::function<double(int, int)>& w) {
  std::optional<double> best;
  std::vector<bool> visited(static_cast<std::size_t>(net.node_count), false);
  std::function<void(int, double)> dfs = [&](int cur, double acc) {
    if (cur == dst) {
      if (!best || acc < *best) best = acc;
      return;
    }
    for (int v = 0; v < net.node_count; ++v) {
      if (net.adjacency(cur, v) == 0.0 || visited[static_cast<std::size_t>(v)]) continue;
      visited[static_cast<std::size_t>(v)] = true;
      dfs(v, acc + w(cur, v));
      visited[static_cast<std::size_t>(v)] = false;
    }
  };
  visited[static_cast<std::size_t>(src)] = true;
  dfs(src, 0.0);
  return best;
}

// central finite differences over every parameter of a two-part agent net
struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
};

inline GradCheckResult finite_difference_audit(vnfpr::AgentNet& net, const std::vector<double>& base,
                                               const std::vector<double>& other,
                                               const std::vector<double>& upstream,
                                               double eps = 1e-5) {
  using namespace vnfpr;
  auto loss = [&]() {
    const auto out = agentnet_forward(net, base, other);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += upstream[i] * out[i];
    return acc;
  };

  AgentNetCache cache;
  agentnet_forward(net, base, other, cache);
  const AgentNetGrads grads = agentnet_backward(net, cache, upstream);

  GradCheckResult result;
  auto check_param = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + eps;
    const double hi = loss();
    param = saved - eps;
    const double lo = loss();
    param = saved;
    const double numeric = (hi - lo) / (2.0 * eps);
    const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
    result.max_rel_error = std::max(result.max_rel_error, std::fabs(analytic - numeric) / denom);
    ++result.checked;
  };

  for (std::size_t l = 0; l < net.trunk.layers.size(); ++l) {
    auto& layer = net.trunk.layers[l];
    for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
      check_param(layer.weights.data[i], grads.trunk.weights[l].data[i]);
    for (std::size_t i = 0; i < layer.bias.size(); ++i)
      check_param(layer.bias[i], grads.trunk.bias[l][i]);
  }
  for (std::size_t l = 0; l < net.other_enc.layers.size(); ++l) {
    auto& layer = net.other_enc.layers[l];
    for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
      check_param(layer.weights.data[i], grads.enc.weights[l].data[i]);
    for (std::size_t i = 0; i < layer.bias.size(); ++i)
      check_param(layer.bias[i], grads.enc.bias[l][i]);
  }
  return result;
}

// all connected labeled graphs on n nodes, as adjacency edge lists
inline std::vector<std::vector<std::pair<int, int>>> connected_graphs(int n) {
  std::vector<std::pair<int, int>> all_edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) all_edges.emplace_back(u, v);
  const int m = static_cast<int>(all_edges.size());

  std::vector<std::vector<std::pair<int, int>>> out;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<std::pair<int, int>> edges;
    for (int e = 0; e < m; ++e)
      if (mask & (1 << e)) edges.push_back(all_edges[static_cast<std::size_t>(e)]);
    // connectivity check
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::function<void(int, int)> mark = [&](int u, int c) {
      comp[static_cast<std::size_t>(u)] = c;
      for (const auto& [a, b] : edges) {
        if (a == u && comp[static_cast<std::size_t>(b)] < 0) mark(b, c);
        if (b == u && comp[static_cast<std::size_t>(a)] < 0) mark(a, c);
      }
    };
    mark(0, 0);
    bool connected = true;
    for (int u = 0; u < n; ++u)
      if (comp[static_cast<std::size_t>(u)] < 0) connected = false;
    if (connected) out.push_back(std::move(edges));
  }
  return out;
}

// builds a substrate with all attributes set to simple constants
inline vnfpr::SubstrateNetwork make_net(int n, const std::vector<std::pair<int, int>>& edges,
                                        int categories = 4, double capacity = 100.0,
                                        double bandwidth = 100.0) {
  std::string text = "nodes " + std::to_string(n) + "\n";
  for (const auto& [u, v] : edges)
    text += "link " + std::to_string(u + 1) + " " + std::to_string(v + 1) + "\n";
  vnfpr::SubstrateNetwork net = vnfpr::parse_topology(text);
  net.compute_cap.assign(static_cast<std::size_t>(n), capacity);
  net.memory_cap.assign(static_cast<std::size_t>(n), capacity);
  net.compute_cost.assign(static_cast<std::size_t>(n), 1.0);
  net.memory_cost.assign(static_cast<std::size_t>(n), 1.0);
  for (const auto& [u, v] : net.links) {
    net.bandwidth_cap(u, v) = net.bandwidth_cap(v, u) = bandwidth;
    net.bandwidth_cost(u, v) = net.bandwidth_cost(v, u) = 1.0;
    net.link_delay(u, v) = net.link_delay(v, u) = 1.0;
  }
  net.deploy_cost = vnfpr::Mat(categories, n, 1.0);
  net.node_fixed_delay = 1.0;
  return net;
}

inline vnfpr::VnfCatalog make_catalog(int categories, double eta = 0.5, double mem = 2.0,
                                      double dyn = 1.0) {
  vnfpr::VnfCatalog cat;
  cat.compute_per_rate.assign(static_cast<std::size_t>(categories), eta);
  cat.memory_req.assign(static_cast<std::size_t>(categories), mem);
  cat.dyn_delay_per_rate.assign(static_cast<std::size_t>(categories), dyn);
  return cat;
}

inline vnfpr::ServiceRequest make_request(int id, int source, int destination,
                                          std::vector<int> chain, double rate = 5.4,
                                          double delay_factor = 0.5) {
  vnfpr::ServiceRequest req;
  req.id = id;
  req.source = source;
  req.destination = destination;
  req.chain = std::move(chain);
  req.rate = rate;
  req.delay_factor = delay_factor;
  req.cost_factor = 1.0 - delay_factor;
  return req;
}

// deployment along an explicit node path with explicit hosts
inline vnfpr::Deployment path_deployment(const std::vector<int>& path,
                                         const std::vector<int>& hosts,
                                         const vnfpr::ServiceRequest& req, int nodes) {
  vnfpr::Mat placement(static_cast<int>(hosts.size()), nodes);
  for (std::size_t j = 0; j < hosts.size(); ++j)
    placement(static_cast<int>(j), hosts[j]) = 1.0;
  vnfpr::Mat routing(nodes, nodes), hops(nodes, nodes);
  for (std::size_t p = 0; p + 1 < path.size(); ++p) {
    routing(path[p], path[p + 1]) = 1.0;
    hops(path[p], path[p + 1]) = static_cast<double>(p + 1);
  }
  return vnfpr::make_deployment(std::move(placement), std::move(routing), std::move(hops), req.rate);
}

}  // namespace oracle
