#include "vnfpr/solution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vnfpr {

Deployment make_deployment(Mat placement, Mat routing, Mat hops, double rate) {
  Deployment dep;
  dep.flow = routing.scaled(rate);
  dep.hop_count = static_cast<int>(hops.max_value());
  dep.placement = std::move(placement);
  dep.routing = std::move(routing);
  dep.hops = std::move(hops);
  return dep;
}

bool ConstraintReport::routing_path_ok() const {
  for (int c = 1; c <= 10; ++c)
    if (!ok(c)) return false;
  return support_ok;
}

namespace {

void check_dims(const Deployment& dep, const ServiceRequest& req, int n, int categories) {
  if (dep.routing.rows != n || dep.routing.cols != n || dep.hops.rows != n ||
      dep.hops.cols != n || dep.flow.rows != n || dep.flow.cols != n)
    throw std::invalid_argument("validate: routing/hop/flow matrix must be N x N");
  if (dep.placement.rows != req.chain_length() || (dep.placement.rows > 0 && dep.placement.cols != n))
    throw std::invalid_argument("validate: placement matrix must be chain x N");
  for (int k : req.chain)
    if (k < 0 || k >= categories)
      throw std::invalid_argument("validate: chain category out of range");
  if (req.source < 0 || req.source >= n || req.destination < 0 || req.destination >= n)
    throw std::invalid_argument("validate: request endpoint out of range");
}

// host node of the j-th chain VNF, or -1 when the row is not one-hot
int placed_node(const Mat& placement, int j) {
  int host = -1;
  for (int nn = 0; nn < placement.cols; ++nn) {
    if (placement(j, nn) == 1.0) {
      if (host >= 0) return -1;
      host = nn;
    } else if (placement(j, nn) != 0.0) {
      return -1;
    }
  }
  return host;
}

}  // namespace

ConstraintReport validate(const std::vector<Deployment>& deployments,
                          const std::vector<ServiceRequest>& requests,
                          const SubstrateNetwork& net, const VnfCatalog& catalog) {
  if (deployments.size() != requests.size())
    throw std::invalid_argument("validate: one deployment per request expected");
  const int n = net.node_count;
  for (std::size_t i = 0; i < requests.size(); ++i)
    if (!requests[i].is_padding()) check_dims(deployments[i], requests[i], n, catalog.category_count());

  ConstraintReport rep;
  rep.satisfied.fill(true);
  auto fail = [&rep](int c) {
    if (rep.ok(c)) rep.violated.push_back("C" + std::to_string(c));
    rep.satisfied[static_cast<std::size_t>(c - 1)] = false;
  };

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    if (req.is_padding()) continue;
    const auto& dep = deployments[i];
    const auto& R = dep.routing;
    const auto& Q = dep.hops;
    const auto& P = dep.placement;
    const int s = req.source;
    const int t = req.destination;

    // R and Q must live on the link set; the constraint sums below range
    // over existing links only.
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (net.adjacency(u, v) == 0.0 && (R(u, v) != 0.0 || Q(u, v) != 0.0))
          rep.support_ok = false;

    // C1: per-request flow direction conservation on R
    for (int u = 0; u < n; ++u) {
      const double net_out = R.row_sum(u) - R.col_sum(u);
      const double want = (u == s) ? 1.0 : (u == t) ? -1.0 : 0.0;
      if (net_out != want) fail(1);
    }

    // C2: one-way links
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (R(u, v) + R(v, u) > 1.0) fail(2);

    // C3: acyclicity; at most two incident routing entries per node
    for (int u = 0; u < n; ++u) {
      if (R.row_sum(u) + R.col_sum(u) > 2.0) {
        fail(3);
        ++rep.class3_tally;
      }
    }

    // C4: flow conservation on H = rate * R
    for (int u = 0; u < n; ++u) {
      const double net_flow = dep.flow.row_sum(u) - dep.flow.col_sum(u);
      const double want = (u == s) ? req.rate : (u == t) ? -req.rate : 0.0;
      if (std::fabs(net_flow - want) > kFeasibilityTol) fail(4);
    }

    // C5/C6: nothing enters the source; exactly one first hop leaves it
    if (R.col_sum(s) != 0.0 || Q.col_sum(s) != 0.0) fail(5);
    if (R.row_sum(s) != 1.0 || Q.row_sum(s) != 1.0) fail(6);
    // C7/C8: nothing leaves the destination; the last hop enters it
    if (R.row_sum(t) != 0.0 || Q.row_sum(t) != 0.0) fail(7);
    if (R.col_sum(t) != 1.0 || Q.col_sum(t) != static_cast<double>(dep.hop_count)) fail(8);

    // C9: hops only on routing links
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (Q(u, v) != R(u, v) * Q(u, v)) fail(9);

    // C10: hop continuity everywhere but the destination
    for (int u = 0; u < n; ++u) {
      if (u == t) continue;
      if (Q.row_sum(u) != Q.col_sum(u) + R.row_sum(u)) fail(10);
    }

    // C11/C12: each VNF on exactly one node, all VNFs placed
    double total_placed = 0.0;
    for (int j = 0; j < req.chain_length(); ++j) {
      if (P.row_sum(j) != 1.0) fail(11);
      total_placed += P.row_sum(j);
    }
    if (total_placed != static_cast<double>(req.chain_length())) fail(12);

    // C13/C14: hosts lie on the routing chain (source/destination exempt)
    bool c13 = true, c14 = true, c15 = true;
    for (int j = 0; j < req.chain_length(); ++j) {
      for (int nn = 0; nn < n; ++nn) {
        if (nn != s && P(j, nn) > R.col_sum(nn)) c13 = false;
        if (nn != t && P(j, nn) > R.row_sum(nn)) c14 = false;
      }
    }

    // C15: chain order follows hop order of the host nodes
    for (int j = 0; j + 1 < req.chain_length(); ++j) {
      const int a = placed_node(P, j);
      const int b = placed_node(P, j + 1);
      if (a < 0 || b < 0) continue;  // C11 already failed
      if (Q.col_sum(a) > Q.col_sum(b)) c15 = false;
    }
    if (!c13) fail(13);
    if (!c14) fail(14);
    if (!c15) fail(15);
    rep.class2_tally += (!c13 ? 1 : 0) + (!c14 ? 1 : 0) + (!c15 ? 1 : 0);
  }

  // C16/C17: aggregate node loads across all requests
  std::vector<double> compute_load(n, 0.0), memory_load(n, 0.0);
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    if (req.is_padding()) continue;
    const auto& P = deployments[i].placement;
    for (int j = 0; j < req.chain_length(); ++j) {
      const int k = req.chain[j];
      for (int nn = 0; nn < n; ++nn) {
        compute_load[nn] += catalog.compute_req(k, req.rate) * P(j, nn);
        memory_load[nn] += catalog.memory_req[k] * P(j, nn);
      }
    }
  }
  for (int nn = 0; nn < n; ++nn) {
    if (compute_load[nn] > net.compute_cap[nn] + kFeasibilityTol) fail(16);
    if (memory_load[nn] > net.memory_cap[nn] + kFeasibilityTol) fail(17);
  }

  // C18: aggregate directed link loads
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (net.adjacency(u, v) == 0.0) continue;
      double load = 0.0;
      for (std::size_t i = 0; i < requests.size(); ++i) {
        if (requests[i].is_padding()) continue;
        load += requests[i].rate * deployments[i].routing(u, v);
      }
      if (load > net.bandwidth_cap(u, v) + kFeasibilityTol) {
        fail(18);
        ++rep.class1_tally;
      }
    }
  }

  if (!rep.support_ok) {
    rep.violated.push_back("support");
  }
  return rep;
}

double evaluate_cost(const Deployment& dep, const ServiceRequest& req,
                     const SubstrateNetwork& net, const VnfCatalog& catalog) {
  if (req.is_padding()) return 0.0;
  const int n = net.node_count;
  double deploy = 0.0, utilization = 0.0, bandwidth = 0.0;
  for (int j = 0; j < req.chain_length(); ++j) {
    const int k = req.chain[j];
    for (int nn = 0; nn < n; ++nn) {
      const double p = dep.placement(j, nn);
      deploy += net.deploy_cost(k, nn) * p;
      utilization += p * (catalog.compute_req(k, req.rate) * net.compute_cost[nn] +
                          catalog.memory_req[k] * net.memory_cost[nn]);
    }
  }
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      bandwidth += req.rate * dep.routing(u, v) * net.bandwidth_cost(u, v);
  return deploy + utilization + bandwidth;
}

double evaluate_delay(const Deployment& dep, const ServiceRequest& req,
                      const SubstrateNetwork& net, const VnfCatalog& catalog) {
  if (req.is_padding()) return 0.0;
  const int n = net.node_count;
  double transmission = 0.0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      transmission += req.rate * dep.routing(u, v) * net.link_delay(u, v);
  // 1 + sum(R) nodes sit along the routing chain, each adds the fixed delay
  const double invariant = net.node_fixed_delay * (1.0 + dep.routing.sum());
  double processing = 0.0;
  for (int j = 0; j < req.chain_length(); ++j) {
    const int k = req.chain[j];
    for (int nn = 0; nn < n; ++nn)
      processing += dep.placement(j, nn) * catalog.dyn_delay_per_rate[k] * req.rate;
  }
  return transmission + invariant + processing;
}

ObjectiveBreakdown evaluate_objective(const std::vector<Deployment>& deployments,
                                      const std::vector<ServiceRequest>& requests,
                                      const SubstrateNetwork& net, const VnfCatalog& catalog,
                                      double scale_cost, double scale_delay) {
  if (deployments.size() != requests.size())
    throw std::invalid_argument("evaluate_objective: one deployment per request expected");
  ObjectiveBreakdown out;
  out.scale_cost = scale_cost;
  out.scale_delay = scale_delay;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    if (req.is_padding()) {
      out.cost_total.push_back(0.0);
      out.delay_total.push_back(0.0);
      out.weighted.push_back(0.0);
      continue;
    }
    const double c = evaluate_cost(deployments[i], req, net, catalog);
    const double d = evaluate_delay(deployments[i], req, net, catalog);
    const double w = req.cost_factor * scale_cost * c + req.delay_factor * scale_delay * d;
    out.cost_total.push_back(c);
    out.delay_total.push_back(d);
    out.weighted.push_back(w);
    out.objective += w;
  }
  return out;
}

std::vector<int> routing_path(const Deployment& dep, int source) {
  const int n = dep.routing.rows;
  std::vector<int> path{source};
  int cur = source;
  const int hops = dep.hop_count;
  for (int m = 1; m <= hops; ++m) {
    int next = -1;
    for (int v = 0; v < n; ++v) {
      if (dep.hops(cur, v) == static_cast<double>(m)) {
        if (next >= 0) throw std::runtime_error("routing_path: ambiguous hop");
        next = v;
      }
    }
    if (next < 0) throw std::runtime_error("routing_path: hop matrix is not one contiguous walk");
    path.push_back(next);
    cur = next;
  }
  return path;
}

std::string deployment_to_json(const Deployment& dep, const ServiceRequest& req) {
  nlohmann::json j;
  j["request_id"] = req.id;
  j["rate"] = req.rate;
  nlohmann::json placement = nlohmann::json::array();
  for (int r = 0; r < dep.placement.rows; ++r) {
    int host = -1;
    for (int c = 0; c < dep.placement.cols; ++c)
      if (dep.placement(r, c) == 1.0) host = c;
    if (host < 0) throw std::runtime_error("deployment_to_json: placement row is not one-hot");
    placement.push_back(host + 1);
  }
  j["placement"] = placement;
  nlohmann::json path = nlohmann::json::array();
  for (int node : routing_path(dep, req.source)) path.push_back(node + 1);
  j["path"] = path;
  return j.dump();
}

Deployment deployment_from_json(const std::string& text, int node_count, int* request_id,
                                double* rate) {
  const auto j = nlohmann::json::parse(text);
  if (request_id) *request_id = j.at("request_id").get<int>();
  const double r = j.at("rate").get<double>();
  if (rate) *rate = r;
  const auto hosts = j.at("placement").get<std::vector<int>>();
  const auto path = j.at("path").get<std::vector<int>>();
  Mat placement(static_cast<int>(hosts.size()), node_count);
  for (std::size_t row = 0; row < hosts.size(); ++row) {
    const int host = hosts[row] - 1;
    if (host < 0 || host >= node_count) throw std::runtime_error("deployment json: host out of range");
    placement(static_cast<int>(row), host) = 1.0;
  }
  Mat routing(node_count, node_count), hops(node_count, node_count);
  for (std::size_t p = 0; p + 1 < path.size(); ++p) {
    const int u = path[p] - 1, v = path[p + 1] - 1;
    if (u < 0 || u >= node_count || v < 0 || v >= node_count)
      throw std::runtime_error("deployment json: path node out of range");
    routing(u, v) = 1.0;
    hops(u, v) = static_cast<double>(p + 1);
  }
  return make_deployment(std::move(placement), std::move(routing), std::move(hops), r);
}

}  // namespace vnfpr
