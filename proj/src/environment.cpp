#include "vnfpr/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vnfpr {

int field_width(FieldKind kind, int nodes, int categories) {
  switch (kind) {
    case FieldKind::Scalar: return 1;
    case FieldKind::PerNode: return nodes;
    case FieldKind::PerCategory: return categories;
    case FieldKind::NodeByNode: return nodes * nodes;
    case FieldKind::CategoryByNode: return categories * nodes;
  }
  return 0;
}

int layout_width(const Layout& layout, int nodes, int categories) {
  int w = 0;
  for (const auto& f : layout) w += f.repeat * field_width(f.kind, nodes, categories);
  return w;
}

std::vector<int> layout_remap(const Layout& layout, int old_nodes, int new_nodes, int categories) {
  std::vector<int> map;
  map.reserve(static_cast<std::size_t>(layout_width(layout, new_nodes, categories)));
  int old_base = 0;
  for (const auto& f : layout) {
    for (int rep = 0; rep < f.repeat; ++rep) {
      switch (f.kind) {
        case FieldKind::Scalar:
          map.push_back(old_base);
          break;
        case FieldKind::PerNode:
          for (int v = 0; v < new_nodes; ++v) map.push_back(v < old_nodes ? old_base + v : -1);
          break;
        case FieldKind::PerCategory:
          for (int k = 0; k < categories; ++k) map.push_back(old_base + k);
          break;
        case FieldKind::NodeByNode:
          for (int u = 0; u < new_nodes; ++u)
            for (int v = 0; v < new_nodes; ++v)
              map.push_back(u < old_nodes && v < old_nodes ? old_base + u * old_nodes + v : -1);
          break;
        case FieldKind::CategoryByNode:
          for (int k = 0; k < categories; ++k)
            for (int v = 0; v < new_nodes; ++v)
              map.push_back(v < old_nodes ? old_base + k * old_nodes + v : -1);
          break;
      }
      old_base += field_width(f.kind, old_nodes, categories);
    }
  }
  return map;
}

Layout placement_self_layout() {
  // rate, cost factor, delay factor, source, destination, chain mask, remaining mask
  return {{FieldKind::Scalar, 3},
          {FieldKind::PerNode, 2},
          {FieldKind::PerCategory, 2}};
}

Layout placement_other_layout(int agents) {
  Layout layout;
  for (int i = 0; i < agents; ++i) {
    layout.push_back({FieldKind::Scalar, 3});
    layout.push_back({FieldKind::PerNode, 2});
    layout.push_back({FieldKind::PerCategory, 1});
  }
  return layout;
}

Layout placement_sn_layout() {
  // remaining compute, remaining memory, adjacency
  return {{FieldKind::PerNode, 2}, {FieldKind::NodeByNode, 1}};
}

Layout routing_self_layout() {
  // rate, factors, source, destination, padded placement, current routing matrix
  return {{FieldKind::Scalar, 3},
          {FieldKind::PerNode, 2},
          {FieldKind::CategoryByNode, 1},
          {FieldKind::NodeByNode, 1}};
}

Layout routing_other_layout(int agents) {
  Layout layout;
  for (int i = 0; i < agents; ++i) {
    layout.push_back({FieldKind::Scalar, 3});
    layout.push_back({FieldKind::PerNode, 2});
    layout.push_back({FieldKind::CategoryByNode, 1});
  }
  return layout;
}

Layout routing_sn_layout() {
  // remaining bandwidth, adjacency
  return {{FieldKind::NodeByNode, 2}};
}

Layout placement_result_layout(int agents) {
  return {{FieldKind::CategoryByNode, agents - 1}};
}

Layout routing_result_layout(int agents) {
  return {{FieldKind::NodeByNode, agents - 1}};
}

std::vector<double> joint_reward(const std::vector<Deployment>& deployments,
                                 const std::vector<ServiceRequest>& requests,
                                 const SubstrateNetwork& net, const VnfCatalog& catalog,
                                 const JointRewardCoeffs& coeffs, double scale_cost,
                                 double scale_delay) {
  const auto breakdown =
      evaluate_objective(deployments, requests, net, catalog, scale_cost, scale_delay);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < requests.size(); ++i)
    if (!requests[i].is_padding()) active.push_back(i);

  std::vector<double> rewards(requests.size(), 0.0);
  if (active.empty()) return rewards;
  for (std::size_t i : active)
    if (breakdown.weighted[i] <= 0.0)
      throw std::runtime_error("joint_reward: degenerate objective (theta <= 0)");

  // eta_i = prod_{z != i} theta_z / sum_m prod_{z != m} theta_z
  std::vector<double> excl_prod(active.size(), 1.0);
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t b = 0; b < active.size(); ++b)
      if (a != b) excl_prod[a] *= breakdown.weighted[active[b]];
  double denom = 0.0;
  for (double p : excl_prod) denom += p;

  const double shaped =
      coeffs.omega_dec * std::exp(coeffs.omega_scal * breakdown.objective + coeffs.omega_trans);
  for (std::size_t a = 0; a < active.size(); ++a)
    rewards[active[a]] = (excl_prod[a] / denom) * shaped;
  return rewards;
}

std::vector<double> StepAction::one_hot(int nodes) const {
  if (node < 0 || node >= nodes) throw std::invalid_argument("StepAction: node out of range");
  std::vector<double> v(nodes, 0.0);
  v[node] = 1.0;
  return v;
}

Mat compose_placement(const std::vector<StepAction>& actions, int nodes) {
  Mat placement(static_cast<int>(actions.size()), nodes);
  for (std::size_t j = 0; j < actions.size(); ++j) {
    if (actions[j].node < 0 || actions[j].node >= nodes)
      throw std::invalid_argument("compose_placement: node out of range");
    placement(static_cast<int>(j), actions[j].node) = 1.0;
  }
  return placement;
}

std::pair<Mat, Mat> compose_routing(const std::vector<StepAction>& actions, int source, int nodes) {
  Mat routing(nodes, nodes), hops(nodes, nodes);
  int prev = source;
  int hop = 0;
  for (const auto& a : actions) {
    if (a.node < 0 || a.node >= nodes)
      throw std::invalid_argument("compose_routing: node out of range");
    routing(prev, a.node) = 1.0;
    hops(prev, a.node) = static_cast<double>(++hop);
    prev = a.node;
  }
  return {std::move(routing), std::move(hops)};
}

// ---------------------------------------------------------------------------
// observation encoding helpers
// ---------------------------------------------------------------------------

namespace {

void append_one_hot(std::vector<double>& out, int index, int width) {
  for (int i = 0; i < width; ++i) out.push_back(i == index ? 1.0 : 0.0);
}

void append_request_header(std::vector<double>& out, const ServiceRequest& req, int nodes) {
  out.push_back(req.rate * kRateScale);
  out.push_back(req.cost_factor);
  out.push_back(req.delay_factor);
  append_one_hot(out, req.source, nodes);
  append_one_hot(out, req.destination, nodes);
}

void append_category_mask(std::vector<double>& out, const ServiceRequest& req, int categories) {
  std::vector<double> mask(categories, 0.0);
  for (int k : req.chain) mask[static_cast<std::size_t>(k)] = 1.0;
  out.insert(out.end(), mask.begin(), mask.end());
}

}  // namespace

Mat padded_placement(const ServiceRequest& req, const std::vector<int>& placed_nodes, int nodes,
                     int categories) {
  Mat padded(categories, nodes);
  for (std::size_t j = 0; j < placed_nodes.size() && j < req.chain.size(); ++j)
    padded(req.chain[j], placed_nodes[j]) = 1.0;
  return padded;
}

std::vector<double> placement_other_obs(const EnvContext& ctx) {
  std::vector<double> out;
  for (const auto& req : ctx.batch) {
    append_request_header(out, req, ctx.nodes());
    append_category_mask(out, req, ctx.categories());
  }
  return out;
}

std::vector<double> routing_other_obs(const EnvContext& ctx,
                                      const std::vector<Mat>& padded_placements) {
  std::vector<double> out;
  for (int i = 0; i < ctx.agents(); ++i) {
    append_request_header(out, ctx.batch[i], ctx.nodes());
    const auto& p = padded_placements[static_cast<std::size_t>(i)];
    out.insert(out.end(), p.data.begin(), p.data.end());
  }
  return out;
}

std::vector<double> other_placement_results(const std::vector<Mat>& padded_placements, int self) {
  std::vector<double> out;
  for (std::size_t z = 0; z < padded_placements.size(); ++z) {
    if (static_cast<int>(z) == self) continue;
    out.insert(out.end(), padded_placements[z].data.begin(), padded_placements[z].data.end());
  }
  return out;
}

std::vector<double> other_routing_results(const std::vector<Mat>& routings, int self) {
  std::vector<double> out;
  for (std::size_t z = 0; z < routings.size(); ++z) {
    if (static_cast<int>(z) == self) continue;
    out.insert(out.end(), routings[z].data.begin(), routings[z].data.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// placement episode
// ---------------------------------------------------------------------------

PlacementEpisode::PlacementEpisode(const EnvContext* ctx, int agent) : ctx_(ctx), agent_(agent) {
  done_ = ctx_->batch[static_cast<std::size_t>(agent)].chain.empty();
}

Observation PlacementEpisode::observe(const ResourceLedger& ledger) const {
  const auto& req = ctx_->batch[static_cast<std::size_t>(agent_)];
  const int nodes = ctx_->nodes();
  const int categories = ctx_->categories();
  Observation obs;

  append_request_header(obs.self_obs, req, nodes);
  append_category_mask(obs.self_obs, req, categories);
  std::vector<double> remaining(static_cast<std::size_t>(categories), 0.0);
  for (std::size_t j = placed_.size(); j < req.chain.size(); ++j)
    remaining[static_cast<std::size_t>(req.chain[j])] = 1.0;
  obs.self_obs.insert(obs.self_obs.end(), remaining.begin(), remaining.end());

  obs.other_obs = placement_other_obs(*ctx_);

  const auto& net = *ctx_->net;
  for (int v = 0; v < nodes; ++v)
    obs.sn_info.push_back(net.compute_cap[v] > 0.0 ? ledger.remaining_compute[v] / net.compute_cap[v]
                                                   : 0.0);
  for (int v = 0; v < nodes; ++v)
    obs.sn_info.push_back(net.memory_cap[v] > 0.0 ? ledger.remaining_memory[v] / net.memory_cap[v]
                                                  : 0.0);
  obs.sn_info.insert(obs.sn_info.end(), net.adjacency.data.begin(), net.adjacency.data.end());
  return obs;
}

StepOutcome PlacementEpisode::step(const StepAction& action, ResourceLedger& ledger,
                                   const InternalRewardCoeffs& coeffs) {
  if (done_) throw std::logic_error("placement episode already done");
  const auto& req = ctx_->batch[static_cast<std::size_t>(agent_)];
  const int node = action.node;
  if (node < 0 || node >= ctx_->nodes())
    throw std::invalid_argument("placement step: node out of range");

  const int j = static_cast<int>(placed_.size());
  const int category = req.chain[static_cast<std::size_t>(j)];
  const double need_compute = ctx_->catalog->compute_req(category, req.rate);
  const double need_memory = ctx_->catalog->memory_req[static_cast<std::size_t>(category)];

  const bool compute_violation = need_compute > ledger.remaining_compute[node] + kFeasibilityTol;
  const bool memory_violation = need_memory > ledger.remaining_memory[node] + kFeasibilityTol;

  StepOutcome out;
  out.reward = coeffs.omega_placement *
               (static_cast<double>(compute_violation) + static_cast<double>(memory_violation));
  if (!compute_violation && !memory_violation) {
    ledger.remaining_compute[node] -= need_compute;
    ledger.remaining_memory[node] -= need_memory;
  } else {
    clean_ = false;
  }

  placed_.push_back(node);
  done_ = static_cast<int>(placed_.size()) == req.chain_length();
  out.done = done_;
  return out;
}

Mat PlacementEpisode::placement() const {
  std::vector<StepAction> actions;
  for (int node : placed_) actions.push_back({node});
  return compose_placement(actions, ctx_->nodes());
}

Mat PlacementEpisode::padded_placement() const {
  return vnfpr::padded_placement(ctx_->batch[static_cast<std::size_t>(agent_)], placed_,
                                 ctx_->nodes(), ctx_->categories());
}

// ---------------------------------------------------------------------------
// routing episode
// ---------------------------------------------------------------------------

RoutingEpisode::RoutingEpisode(const EnvContext* ctx, int agent, std::vector<int> placed_nodes,
                               const std::vector<Mat>* all_padded)
    : ctx_(ctx),
      agent_(agent),
      placed_nodes_(std::move(placed_nodes)),
      all_padded_(all_padded),
      routing_(ctx->nodes(), ctx->nodes()),
      hops_(ctx->nodes(), ctx->nodes()),
      current_(ctx->batch[static_cast<std::size_t>(agent)].source) {
  const auto& req = ctx_->batch[static_cast<std::size_t>(agent_)];
  if (req.source == req.destination) {
    // degenerate walk (padding requests): nothing to route
    done_ = true;
    reached_ = true;
  }
}

Observation RoutingEpisode::observe(const ResourceLedger& ledger) const {
  const auto& req = ctx_->batch[static_cast<std::size_t>(agent_)];
  const auto& net = *ctx_->net;
  const int nodes = ctx_->nodes();
  Observation obs;

  append_request_header(obs.self_obs, req, nodes);
  const Mat& padded = (*all_padded_)[static_cast<std::size_t>(agent_)];
  obs.self_obs.insert(obs.self_obs.end(), padded.data.begin(), padded.data.end());
  obs.self_obs.insert(obs.self_obs.end(), routing_.data.begin(), routing_.data.end());

  obs.other_obs = routing_other_obs(*ctx_, *all_padded_);

  for (int u = 0; u < nodes; ++u)
    for (int v = 0; v < nodes; ++v)
      obs.sn_info.push_back(net.bandwidth_cap(u, v) > 0.0
                                ? ledger.remaining_bandwidth(u, v) / net.bandwidth_cap(u, v)
                                : 0.0);
  obs.sn_info.insert(obs.sn_info.end(), net.adjacency.data.begin(), net.adjacency.data.end());
  return obs;
}

bool RoutingEpisode::order_violated() const {
  const auto& req = ctx_->batch[static_cast<std::size_t>(agent_)];
  for (std::size_t j = 0; j + 1 < placed_nodes_.size(); ++j) {
    if (j + 1 >= req.chain.size()) break;
    const double ha = hops_.col_sum(placed_nodes_[j]);
    const double hb = hops_.col_sum(placed_nodes_[j + 1]);
    const bool a_on = placed_nodes_[j] == req.source || ha > 0.0;
    const bool b_on = placed_nodes_[j + 1] == req.source || hb > 0.0;
    if (a_on && b_on) {
      const double hop_a = placed_nodes_[j] == req.source ? 0.0 : ha;
      const double hop_b = placed_nodes_[j + 1] == req.source ? 0.0 : hb;
      if (hop_a > hop_b) return true;
    }
  }
  return false;
}

double RoutingEpisode::terminal_recheck(const InternalRewardCoeffs& coeffs) {
  const auto& req = ctx_->batch[static_cast<std::size_t>(agent_)];
  const int nodes = ctx_->nodes();
  double reward = 0.0;

  bool c13 = true, c14 = true;
  for (std::size_t j = 0; j < placed_nodes_.size() && j < req.chain.size(); ++j) {
    const int host = placed_nodes_[j];
    if (host != req.source && routing_.col_sum(host) < 1.0) c13 = false;
    if (host != req.destination && routing_.row_sum(host) < 1.0) c14 = false;
  }
  const bool c15 = !order_violated();
  reward += coeffs.omega_class2 * (static_cast<double>(!c13) + static_cast<double>(!c14) +
                                   static_cast<double>(!c15));

  bool c3 = true;
  for (int u = 0; u < nodes; ++u)
    if (routing_.row_sum(u) + routing_.col_sum(u) > 2.0) c3 = false;
  reward += coeffs.omega_class3 * static_cast<double>(!c3);

  if (!c13 || !c14 || !c15 || !c3) clean_ = false;
  return reward;
}

StepOutcome RoutingEpisode::step(const StepAction& action, ResourceLedger& ledger,
                                 const InternalRewardCoeffs& coeffs) {
  if (done_) throw std::logic_error("routing episode already done");
  const auto& req = ctx_->batch[static_cast<std::size_t>(agent_)];
  const auto& net = *ctx_->net;
  const int nodes = ctx_->nodes();
  const int node = action.node;
  if (node < 0 || node >= nodes) throw std::invalid_argument("routing step: node out of range");

  StepOutcome out;
  ++steps_;

  if (net.adjacency(current_, node) == 0.0) {
    // no such link: rejected, penalized as a cycle-class violation
    out.reward = coeffs.omega_class3;
    clean_ = false;
    if (steps_ >= nodes - 1) {
      done_ = true;
      out.reward += terminal_recheck(coeffs);
    }
    out.done = done_;
    return out;
  }

  routing_(current_, node) = 1.0;
  hops_(current_, node) = static_cast<double>(++hop_);

  const bool bandwidth_violation =
      req.rate > ledger.remaining_bandwidth(current_, node) + kFeasibilityTol;
  if (bandwidth_violation) {
    clean_ = false;
  } else {
    ledger.remaining_bandwidth(current_, node) -= req.rate;
  }
  out.reward += coeffs.omega_class1 * static_cast<double>(bandwidth_violation);

  bool cycle = false;
  for (int u = 0; u < nodes; ++u)
    if (routing_.row_sum(u) + routing_.col_sum(u) > 2.0) cycle = true;
  if (cycle) clean_ = false;
  out.reward += coeffs.omega_class3 * static_cast<double>(cycle);

  current_ = node;
  if (node == req.destination) {
    done_ = true;
    reached_ = true;
  } else if (steps_ >= nodes - 1) {
    done_ = true;
  }

  if (done_) {
    out.reward += terminal_recheck(coeffs);
  } else if (order_violated()) {
    out.reward += coeffs.omega_class2;
    clean_ = false;
  }
  out.done = done_;
  return out;
}

}  // namespace vnfpr
