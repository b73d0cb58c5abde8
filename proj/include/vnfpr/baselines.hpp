#pragma once

#include <optional>
#include <vector>

#include "vnfpr/solution.hpp"

namespace vnfpr {

enum class PathWeight { Hops, LinkDelay, BandwidthCost };

// Minimal-weight simple path, deterministic tie-break towards smaller node
// indices. blocked nodes (and links with remaining bandwidth below
// min_bandwidth, when a ledger is given) are unusable; src is always usable.
std::optional<std::vector<int>> shortest_path(const SubstrateNetwork& net, int src, int dst,
                                              PathWeight weight,
                                              const std::vector<bool>* blocked = nullptr,
                                              const ResourceLedger* ledger = nullptr,
                                              double min_bandwidth = 0.0);

// All simple src -> dst paths with at most max_hops links, in lexicographic
// node-sequence order.
std::vector<std::vector<int>> enumerate_simple_paths(const SubstrateNetwork& net, int src, int dst,
                                                     int max_hops);

struct SolveLimits {
  int max_nodes = 6;
  int max_requests = 2;
  int max_chain = 2;
  int max_hops = 5;
};

struct ExactResult {
  bool feasible = false;
  std::vector<Deployment> deployments;
  double objective = 0.0;
};

// Exhaustive oracle: enumerates every simple path within the hop bound and
// every order-respecting VNF-to-path-node assignment, keeps the feasible
// combination with the smallest weighted objective. Ties break towards the
// first candidate in (path, assignment) enumeration order. Throws when the
// instance exceeds the limits.
ExactResult exact_solve(const std::vector<ServiceRequest>& requests, const SubstrateNetwork& net,
                        const VnfCatalog& catalog, double psi_cost = 1.0, double psi_delay = 1.0,
                        const SolveLimits& limits = {});

struct BaselineResult {
  std::vector<Deployment> deployments;  // aligned with requests
  std::vector<bool> accepted;
};

// Best-fit decreasing placement (largest compute demand onto the node with
// the most remaining compute), then a delay-weighted shortest path threaded
// through the hosts in chain order. Requests are served in input order and
// rejected deployments consume nothing.
BaselineResult greedy_bestfit(const std::vector<ServiceRequest>& requests,
                              const SubstrateNetwork& net, const VnfCatalog& catalog);

// Walks from the source and places each VNF on the nearest feasible node by
// hop count, then heads to the destination.
BaselineResult greedy_nearest(const std::vector<ServiceRequest>& requests,
                              const SubstrateNetwork& net, const VnfCatalog& catalog);

}  // namespace vnfpr
