#include "vnfpr/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vnfpr/rng.hpp"

namespace vnfpr {

bool SubstrateNetwork::has_link(int u, int v) const {
  if (u < 0 || v < 0 || u >= node_count || v >= node_count) return false;
  return adjacency(u, v) != 0.0;
}

std::vector<int> SubstrateNetwork::neighbors(int u) const {
  std::vector<int> out;
  for (int v = 0; v < node_count; ++v)
    if (adjacency(u, v) != 0.0) out.push_back(v);
  return out;
}

void SubstrateNetwork::check_invariants() const {
  const int n = node_count;
  if (adjacency.rows != n || adjacency.cols != n)
    throw std::runtime_error("substrate: adjacency shape mismatch");
  for (int u = 0; u < n; ++u) {
    if (adjacency(u, u) != 0.0) throw std::runtime_error("substrate: nonzero diagonal");
    for (int v = 0; v < n; ++v) {
      if (adjacency(u, v) != adjacency(v, u))
        throw std::runtime_error("substrate: adjacency not symmetric");
      if (bandwidth_cap(u, v) != bandwidth_cap(v, u))
        throw std::runtime_error("substrate: bandwidth not symmetric");
      if (adjacency(u, v) == 0.0 && bandwidth_cap(u, v) != 0.0)
        throw std::runtime_error("substrate: bandwidth on non-link");
      if (bandwidth_cap(u, v) < 0.0)
        throw std::runtime_error("substrate: negative bandwidth");
    }
  }
  for (int u = 0; u < n; ++u) {
    if (compute_cap[u] < 0.0 || memory_cap[u] < 0.0)
      throw std::runtime_error("substrate: negative capacity");
  }
  for (const auto& [u, v] : links) {
    if (adjacency(u, v) != 1.0) throw std::runtime_error("substrate: link missing from adjacency");
  }
  double ones = 0.0;
  for (double a : adjacency.data) ones += a;
  if (ones != 2.0 * static_cast<double>(links.size()))
    throw std::runtime_error("substrate: adjacency/link count mismatch");
}

ResourceLedger ResourceLedger::full_of(const SubstrateNetwork& net) {
  ResourceLedger ledger;
  ledger.remaining_compute = net.compute_cap;
  ledger.remaining_memory = net.memory_cap;
  ledger.remaining_bandwidth = net.bandwidth_cap;
  return ledger;
}

void ResourceLedger::reset_bandwidth(const SubstrateNetwork& net) {
  remaining_bandwidth = net.bandwidth_cap;
}

namespace {

struct ParsedStructure {
  int node_count = 0;
  std::vector<std::pair<int, int>> links;
  std::optional<std::uint64_t> seed;
};

SubstrateNetwork build_empty(int node_count, std::vector<std::pair<int, int>> links,
                             int categories) {
  SubstrateNetwork net;
  net.node_count = node_count;
  std::sort(links.begin(), links.end());
  net.links = std::move(links);
  net.adjacency = Mat(node_count, node_count);
  for (const auto& [u, v] : net.links) {
    net.adjacency(u, v) = 1.0;
    net.adjacency(v, u) = 1.0;
  }
  net.compute_cap.assign(node_count, 0.0);
  net.memory_cap.assign(node_count, 0.0);
  net.compute_cost.assign(node_count, 0.0);
  net.memory_cost.assign(node_count, 0.0);
  net.bandwidth_cap = Mat(node_count, node_count);
  net.bandwidth_cost = Mat(node_count, node_count);
  net.link_delay = Mat(node_count, node_count);
  net.deploy_cost = Mat(categories, node_count);
  net.node_fixed_delay = 0.0;
  return net;
}

[[noreturn]] void parse_fail(int line_no, const std::string& line, const std::string& why) {
  std::ostringstream os;
  os << "topology parse error at line " << line_no << " (\"" << line << "\"): " << why;
  throw std::runtime_error(os.str());
}

}  // namespace

SubstrateNetwork parse_topology(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  ParsedStructure parsed;
  bool have_nodes = false;
  std::set<std::pair<int, int>> seen;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;  // blank

    if (keyword == "nodes") {
      int n = 0;
      if (!(ls >> n) || n <= 0) parse_fail(line_no, raw, "expected positive node count");
      if (have_nodes) parse_fail(line_no, raw, "duplicate nodes line");
      parsed.node_count = n;
      have_nodes = true;
    } else if (keyword == "link") {
      if (!have_nodes) parse_fail(line_no, raw, "link before nodes line");
      int u1 = 0, v1 = 0;
      if (!(ls >> u1 >> v1)) parse_fail(line_no, raw, "expected two node indices");
      if (u1 == v1) parse_fail(line_no, raw, "self-loop");
      if (u1 < 1 || v1 < 1 || u1 > parsed.node_count || v1 > parsed.node_count)
        parse_fail(line_no, raw, "node index out of range");
      int u = u1 - 1, v = v1 - 1;
      if (u > v) std::swap(u, v);
      if (!seen.insert({u, v}).second) parse_fail(line_no, raw, "duplicate link");
      parsed.links.emplace_back(u, v);
    } else if (keyword == "seed") {
      long long s = 0;
      if (!(ls >> s)) parse_fail(line_no, raw, "expected integer seed");
      parsed.seed = static_cast<std::uint64_t>(s);
    } else {
      parse_fail(line_no, raw, "unknown keyword '" + keyword + "'");
    }
    std::string extra;
    if (ls >> extra) parse_fail(line_no, raw, "trailing tokens");
  }
  if (!have_nodes) throw std::runtime_error("topology parse error: missing nodes line");

  DistributionSpec dist;
  SubstrateNetwork net = build_empty(parsed.node_count, parsed.links, dist.vnf_categories);
  if (parsed.seed) net = generate_instance(net, *parsed.seed, dist);
  net.check_invariants();
  return net;
}

SubstrateNetwork load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_topology(ss.str());
}

namespace {

double sample_range(Rng& rng, const DistributionSpec::Range& r, const char* name) {
  if (r.lo > r.hi)
    throw std::invalid_argument(std::string("invalid range for ") + name + ": lo > hi");
  return rng.uniform(r.lo, r.hi);
}

}  // namespace

SubstrateNetwork generate_instance(const SubstrateNetwork& topology, std::uint64_t seed,
                                   const DistributionSpec& dist) {
  if (dist.vnf_categories <= 0)
    throw std::invalid_argument("generate_instance: vnf_categories must be positive");
  SubstrateNetwork net = build_empty(topology.node_count, topology.links, dist.vnf_categories);
  Rng rng(seed);
  const int n = net.node_count;

  // Sampling order is part of the reproducibility contract: node arrays in
  // node order, then per sorted link (bandwidth, cost, delay), then the
  // deploy-cost matrix row-major.
  for (int i = 0; i < n; ++i) net.compute_cap[i] = sample_range(rng, dist.compute_cap, "compute_cap");
  for (int i = 0; i < n; ++i) net.memory_cap[i] = sample_range(rng, dist.memory_cap, "memory_cap");
  for (int i = 0; i < n; ++i) net.compute_cost[i] = sample_range(rng, dist.compute_cost, "compute_cost");
  for (int i = 0; i < n; ++i) net.memory_cost[i] = sample_range(rng, dist.memory_cost, "memory_cost");

  for (const auto& [u, v] : net.links) {
    const double bw = sample_range(rng, dist.bandwidth_cap, "bandwidth_cap");
    const double bc = sample_range(rng, dist.bandwidth_cost, "bandwidth_cost");
    const double dl = sample_range(rng, dist.link_delay, "link_delay");
    net.bandwidth_cap(u, v) = net.bandwidth_cap(v, u) = bw;
    net.bandwidth_cost(u, v) = net.bandwidth_cost(v, u) = bc;
    net.link_delay(u, v) = net.link_delay(v, u) = dl;
  }

  for (int k = 0; k < dist.vnf_categories; ++k)
    for (int i = 0; i < n; ++i) net.deploy_cost(k, i) = sample_range(rng, dist.deploy_cost, "deploy_cost");

  net.node_fixed_delay = dist.node_fixed_delay;
  net.check_invariants();
  return net;
}

namespace {

Mat grow(const Mat& m, int rows, int cols) {
  Mat out(rows, cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace

SubstrateNetwork mutate_topology(const SubstrateNetwork& net, const TopologyChange& change) {
  SubstrateNetwork out = net;
  const int old_n = net.node_count;
  const int new_n = old_n + (change.new_node ? 1 : 0);

  if (change.new_node) {
    const auto& node = *change.new_node;
    if (static_cast<int>(node.deploy_cost.size()) != net.deploy_cost.rows)
      throw std::invalid_argument("mutate_topology: deploy_cost size != category count");
    out.node_count = new_n;
    out.adjacency = grow(net.adjacency, new_n, new_n);
    out.bandwidth_cap = grow(net.bandwidth_cap, new_n, new_n);
    out.bandwidth_cost = grow(net.bandwidth_cost, new_n, new_n);
    out.link_delay = grow(net.link_delay, new_n, new_n);
    out.deploy_cost = grow(net.deploy_cost, net.deploy_cost.rows, new_n);
    out.compute_cap.push_back(node.compute_cap);
    out.memory_cap.push_back(node.memory_cap);
    out.compute_cost.push_back(node.compute_cost);
    out.memory_cost.push_back(node.memory_cost);
    for (int k = 0; k < out.deploy_cost.rows; ++k) out.deploy_cost(k, old_n) = node.deploy_cost[k];
  }

  for (const auto& add : change.links) {
    int u = add.u, v = add.v;
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= new_n) throw std::invalid_argument("mutate_topology: endpoint out of range");
    if (u == v) throw std::invalid_argument("mutate_topology: self-loop");
    if (out.adjacency(u, v) != 0.0) throw std::invalid_argument("mutate_topology: link already exists");
    out.adjacency(u, v) = out.adjacency(v, u) = 1.0;
    out.bandwidth_cap(u, v) = out.bandwidth_cap(v, u) = add.bandwidth;
    out.bandwidth_cost(u, v) = out.bandwidth_cost(v, u) = add.cost;
    out.link_delay(u, v) = out.link_delay(v, u) = add.delay;
    out.links.emplace_back(u, v);
  }
  std::sort(out.links.begin(), out.links.end());
  out.check_invariants();
  return out;
}

namespace {

std::vector<std::pair<int, int>> pick_absent_links(const SubstrateNetwork& net, int extra_node,
                                                   int count, Rng& rng, bool from_new_node) {
  const int n = net.node_count;
  std::vector<std::pair<int, int>> candidates;
  if (from_new_node) {
    for (int u = 0; u < n; ++u) candidates.emplace_back(u, extra_node);
  } else {
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (net.adjacency(u, v) == 0.0) candidates.emplace_back(u, v);
  }
  if (static_cast<int>(candidates.size()) < count)
    throw std::invalid_argument("topology change: not enough absent links to add");
  std::vector<std::pair<int, int>> picked;
  for (int i = 0; i < count; ++i) {
    const auto idx = rng.below(candidates.size());
    picked.push_back(candidates[idx]);
    candidates.erase(candidates.begin() + static_cast<long>(idx));
  }
  return picked;
}

}  // namespace

TopologyChange TopologyChange::sample_links(const SubstrateNetwork& net, int count,
                                            std::uint64_t seed, const DistributionSpec& dist) {
  Rng rng(seed);
  TopologyChange change;
  for (const auto& [u, v] : pick_absent_links(net, -1, count, rng, false)) {
    LinkAdd add;
    add.u = u;
    add.v = v;
    add.bandwidth = rng.uniform(dist.bandwidth_cap.lo, dist.bandwidth_cap.hi);
    add.cost = rng.uniform(dist.bandwidth_cost.lo, dist.bandwidth_cost.hi);
    add.delay = rng.uniform(dist.link_delay.lo, dist.link_delay.hi);
    change.links.push_back(add);
  }
  return change;
}

TopologyChange TopologyChange::sample_node_with_links(const SubstrateNetwork& net, int link_count,
                                                      std::uint64_t seed,
                                                      const DistributionSpec& dist) {
  Rng rng(seed);
  TopologyChange change;
  TopologyChange::NodeAdd node;
  node.compute_cap = rng.uniform(dist.compute_cap.lo, dist.compute_cap.hi);
  node.memory_cap = rng.uniform(dist.memory_cap.lo, dist.memory_cap.hi);
  node.compute_cost = rng.uniform(dist.compute_cost.lo, dist.compute_cost.hi);
  node.memory_cost = rng.uniform(dist.memory_cost.lo, dist.memory_cost.hi);
  for (int k = 0; k < net.deploy_cost.rows; ++k)
    node.deploy_cost.push_back(rng.uniform(dist.deploy_cost.lo, dist.deploy_cost.hi));
  change.new_node = node;
  for (const auto& [u, v] : pick_absent_links(net, net.node_count, link_count, rng, true)) {
    LinkAdd add;
    add.u = u;
    add.v = v;
    add.bandwidth = rng.uniform(dist.bandwidth_cap.lo, dist.bandwidth_cap.hi);
    add.cost = rng.uniform(dist.bandwidth_cost.lo, dist.bandwidth_cost.hi);
    add.delay = rng.uniform(dist.link_delay.lo, dist.link_delay.hi);
    change.links.push_back(add);
  }
  return change;
}

}  // namespace vnfpr
