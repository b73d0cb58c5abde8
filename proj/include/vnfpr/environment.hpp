#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vnfpr/catalog.hpp"
#include "vnfpr/solution.hpp"
#include "vnfpr/topology.hpp"

namespace vnfpr {

// ---------------------------------------------------------------------------
// input layout descriptors
//
// Observation vectors are concatenations of fields whose widths depend on the
// node count N and category count K. Layouts drive both encoding and the
// parameter migration remap (which input positions survive a node addition).
// ---------------------------------------------------------------------------

enum class FieldKind { Scalar, PerNode, PerCategory, NodeByNode, CategoryByNode };

struct Field {
  FieldKind kind;
  int repeat = 1;  // consecutive fields of the same kind
};

using Layout = std::vector<Field>;

int field_width(FieldKind kind, int nodes, int categories);
int layout_width(const Layout& layout, int nodes, int categories);

// For every position of the layout at new_nodes, the matching position at
// old_nodes, or -1 for positions that involve a new node index.
std::vector<int> layout_remap(const Layout& layout, int old_nodes, int new_nodes, int categories);

// observation block layouts (M = number of agents in the batch)
Layout placement_self_layout();
Layout placement_other_layout(int agents);
Layout placement_sn_layout();
Layout routing_self_layout();
Layout routing_other_layout(int agents);
Layout routing_sn_layout();
Layout placement_result_layout(int agents);  // other agents' placement matrices
Layout routing_result_layout(int agents);    // other agents' routing matrices

// ---------------------------------------------------------------------------
// internal/joint rewards
// ---------------------------------------------------------------------------

struct InternalRewardCoeffs {
  double omega_placement = -10.0;  // C16/C17 penalty
  double omega_class1 = -8.0;      // C18
  double omega_class2 = -2.0;      // C13..C15
  double omega_class3 = -1.0;      // C3
};

struct JointRewardCoeffs {
  double omega_dec = 1.0;     // > 0
  double omega_scal = -0.05;  // < 0
  double omega_trans = 20.0;  // > 0

  static JointRewardCoeffs defaults_for(int batch_agents) {
    JointRewardCoeffs c;
    c.omega_scal = -1.0 / (10.0 * batch_agents);
    return c;
  }
};

// Difference-reward split of the batch objective: agent i receives
// eta_i * omega_dec * exp(omega_scal * sum(theta) + omega_trans) with
// eta_i = prod_{z != i} theta_z / sum_m prod_{z != m} theta_z.
// Padding requests get 0 and do not enter the products. The same value
// serves as the placement and routing reward of agent i.
std::vector<double> joint_reward(const std::vector<Deployment>& deployments,
                                 const std::vector<ServiceRequest>& requests,
                                 const SubstrateNetwork& net, const VnfCatalog& catalog,
                                 const JointRewardCoeffs& coeffs, double scale_cost = 1.0,
                                 double scale_delay = 1.0);

// ---------------------------------------------------------------------------
// actions and episode composition
// ---------------------------------------------------------------------------

struct StepAction {
  int node = -1;

  std::vector<double> one_hot(int nodes) const;
};

// Stacks one placement action row per chain VNF.
Mat compose_placement(const std::vector<StepAction>& actions, int nodes);

// Builds R and Q from the visited-node sequence: the m-th link gets hop m.
std::pair<Mat, Mat> compose_routing(const std::vector<StepAction>& actions, int source, int nodes);

// ---------------------------------------------------------------------------
// episodes
// ---------------------------------------------------------------------------

// Shared static context of one batch of concurrently deployed requests.
struct EnvContext {
  const SubstrateNetwork* net = nullptr;
  const VnfCatalog* catalog = nullptr;
  std::vector<ServiceRequest> batch;

  int nodes() const { return net->node_count; }
  int categories() const { return catalog->category_count(); }
  int agents() const { return static_cast<int>(batch.size()); }
};

// encoded observation blocks of one agent
struct Observation {
  std::vector<double> self_obs;
  std::vector<double> other_obs;
  std::vector<double> sn_info;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
};

// N_f,i-step sequential placement of one request's chain. Resources are
// debited from the shared ledger only when the step satisfies C16 and C17.
class PlacementEpisode {
 public:
  PlacementEpisode(const EnvContext* ctx, int agent);

  bool done() const { return done_; }
  bool clean() const { return clean_; }  // no C16/C17 violation so far
  int steps_taken() const { return static_cast<int>(placed_.size()); }
  const std::vector<int>& placed_nodes() const { return placed_; }

  Observation observe(const ResourceLedger& ledger) const;
  StepOutcome step(const StepAction& action, ResourceLedger& ledger,
                   const InternalRewardCoeffs& coeffs);

  Mat placement() const;          // chain x N
  Mat padded_placement() const;   // K x N, category-mapped

 private:
  const EnvContext* ctx_;
  int agent_;
  std::vector<int> placed_;
  bool done_ = false;
  bool clean_ = true;
};

// Up-to-(N-1)-step routing walk from the request source. Steps to
// non-adjacent nodes are rejected (route unchanged) and penalized like a
// cycle; accepted steps append the link, debit bandwidth when C18 holds,
// and the terminal step re-checks C13..C15 and C3 on the whole route.
class RoutingEpisode {
 public:
  // all_padded holds every agent's category-mapped placement (static during
  // the routing phase) and must outlive the episode
  RoutingEpisode(const EnvContext* ctx, int agent, std::vector<int> placed_nodes,
                 const std::vector<Mat>* all_padded);

  bool done() const { return done_; }
  bool reached_destination() const { return reached_; }
  // SRR flag: destination reached with C3, C13..C15 and C18 all clean
  bool clean() const { return reached_ && clean_; }
  int steps_taken() const { return steps_; }
  int current_node() const { return current_; }

  Observation observe(const ResourceLedger& ledger) const;
  StepOutcome step(const StepAction& action, ResourceLedger& ledger,
                   const InternalRewardCoeffs& coeffs);

  const Mat& routing() const { return routing_; }
  const Mat& hops() const { return hops_; }

 private:
  bool order_violated() const;
  double terminal_recheck(const InternalRewardCoeffs& coeffs);

  const EnvContext* ctx_;
  int agent_;
  std::vector<int> placed_nodes_;
  const std::vector<Mat>* all_padded_;
  Mat routing_;
  Mat hops_;
  int current_;
  int steps_ = 0;
  int hop_ = 0;
  bool done_ = false;
  bool reached_ = false;
  bool clean_ = true;
};

// category-mapped placement: row k is the one-hot host of the chain VNF with
// category k, zero when the category is unused or not yet placed
Mat padded_placement(const ServiceRequest& req, const std::vector<int>& placed_nodes,
                     int nodes, int categories);

// static other-observation blocks, identical for every agent of the batch
std::vector<double> placement_other_obs(const EnvContext& ctx);
std::vector<double> routing_other_obs(const EnvContext& ctx, const std::vector<Mat>& padded_placements);

// flattened results of the other agents for the centralized critics
std::vector<double> other_placement_results(const std::vector<Mat>& padded_placements, int self);
std::vector<double> other_routing_results(const std::vector<Mat>& routings, int self);

// encoding scale constants (observation values are scaled into unit range;
// resources are expressed as fractions of their capacity)
inline constexpr double kRateScale = 0.1;

}  // namespace vnfpr
