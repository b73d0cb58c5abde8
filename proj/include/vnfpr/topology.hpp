#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vnfpr/matrix.hpp"

namespace vnfpr {

// Uniform sampling ranges for substrate attributes. Defaults follow the
// experiment setup this engine reproduces; bandwidth capacity is drawn from
// the same range as node capacities (the setup leaves it open).
struct DistributionSpec {
  struct Range {
    double lo = 0.0;
    double hi = 0.0;
  };

  Range compute_cap{250.0, 350.0};
  Range memory_cap{250.0, 350.0};
  Range compute_cost{1.0, 3.0};
  Range memory_cost{1.0, 3.0};
  Range bandwidth_cap{250.0, 350.0};
  Range bandwidth_cost{5.0, 15.0};
  Range deploy_cost{5.0, 15.0};
  Range link_delay{0.5, 3.0};
  double node_fixed_delay = 1.0;
  int vnf_categories = 10;
};

// Undirected substrate graph with per-node/link resources and cost/delay
// coefficients. Node indices are 0-based internally and 1-based in files.
// Immutable after construction; safe to share across threads.
struct SubstrateNetwork {
  int node_count = 0;
  std::vector<std::pair<int, int>> links;  // u < v, sorted
  Mat adjacency;                           // N x N, 0/1, symmetric, zero diagonal

  std::vector<double> compute_cap;   // C_n
  std::vector<double> memory_cap;    // M_n
  std::vector<double> compute_cost;  // cost per compute unit at node n
  std::vector<double> memory_cost;   // cost per memory unit at node n

  Mat bandwidth_cap;   // N x N, symmetric, zero off links
  Mat bandwidth_cost;  // cost per rate unit on link
  Mat link_delay;      // delay per rate unit on link
  Mat deploy_cost;     // K x N, category x node deployment cost
  double node_fixed_delay = 0.0;

  int link_count() const { return static_cast<int>(links.size()); }
  bool has_link(int u, int v) const;
  std::vector<int> neighbors(int u) const;  // ascending

  // throws if symmetry/diagonal/nonnegativity invariants are broken
  void check_invariants() const;
};

// Mutable per-episode resource bookkeeping, owned by one episode at a time.
struct ResourceLedger {
  std::vector<double> remaining_compute;
  std::vector<double> remaining_memory;
  Mat remaining_bandwidth;

  static ResourceLedger full_of(const SubstrateNetwork& net);

  void reset_bandwidth(const SubstrateNetwork& net);
};

struct TopologyChange {
  struct LinkAdd {
    int u = 0;  // 0-based; may reference index N when new_node is present
    int v = 0;
    double bandwidth = 0.0;
    double cost = 0.0;
    double delay = 0.0;
  };
  struct NodeAdd {
    double compute_cap = 0.0;
    double memory_cap = 0.0;
    double compute_cost = 0.0;
    double memory_cost = 0.0;
    std::vector<double> deploy_cost;  // one entry per VNF category
  };

  std::vector<LinkAdd> links;
  std::optional<NodeAdd> new_node;

  // convenience: fill attribute values of a change from dist ranges
  static TopologyChange sample_links(const SubstrateNetwork& net, int count,
                                     std::uint64_t seed,
                                     const DistributionSpec& dist = {});
  static TopologyChange sample_node_with_links(const SubstrateNetwork& net,
                                               int link_count, std::uint64_t seed,
                                               const DistributionSpec& dist = {});
};

// Parses the plain node/link text format:
//   nodes <N>
//   link <u> <v>        (1-based endpoints)
//   seed <int>          (optional; samples attributes with DistributionSpec defaults)
// '#' starts a comment. Errors name the offending line.
SubstrateNetwork parse_topology(const std::string& text);

SubstrateNetwork load_topology_file(const std::string& path);

// Samples all attributes i.i.d. uniform from dist. Pure function of
// (topology structure, seed, dist).
SubstrateNetwork generate_instance(const SubstrateNetwork& topology, std::uint64_t seed,
                                   const DistributionSpec& dist = {});

// Returns a new network with links (and optionally one node) added. Existing
// indices and attribute values are preserved exactly; a new node gets index N.
SubstrateNetwork mutate_topology(const SubstrateNetwork& net, const TopologyChange& change);

}  // namespace vnfpr
