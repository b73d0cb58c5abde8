#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vnfpr/agent.hpp"
#include "vnfpr/catalog.hpp"
#include "vnfpr/environment.hpp"

namespace vnfpr {

struct HyperParams {
  // learning rates: placement/routing actor and critic networks
  double lr_placement_actor = 0.002;
  double lr_routing_actor = 0.001;
  double lr_placement_critic = 0.05;
  double lr_routing_critic = 0.01;
  double gamma = 0.99;

  int epochs = 10000;
  int max_placement_episodes = 500;  // refinement episodes per epoch
  int max_routing_episodes = 1000;
  int placement_pre_limit = 4500;  // lifetime cap on refinement rounds
  int routing_pre_limit = 4500;

  int batch_size = 256;
  int replay_capacity = 4000;
  // gradient-update cadence inside the refinement loops; 1 trains after
  // every episode once the replays are full
  int refine_update_every = 1;
  // minibatch updates per training trigger
  int update_iterations = 1;
  // L2 decay on actor output logits; keeps the softmax from saturating so
  // far that policy gradients vanish (0 disables)
  double actor_logit_decay = 0.0;
  // critic-only warmup: actor steps start after this many update calls
  int actor_update_delay = 0;
  double tau = 0.01;
  double rmsprop_decay = 0.99;
  double rmsprop_epsilon = 1e-8;
  double noise_sigma_start = 0.5;
  double noise_sigma_end = 0.01;
  // exploration floor inside the refinement loops (0 follows the schedule)
  double noise_sigma_refine_floor = 0.0;

  InternalRewardCoeffs internal;
  double omega_dec = 1.0;
  double omega_trans = 20.0;
  double omega_scal = 0.0;  // 0 selects -1/(10 * batch_agents)
  double psi_cost = 1.0;
  double psi_delay = 1.0;

  int hidden_width = 64;
  int bottleneck_width = 16;
  int residual_blocks = 2;

  JointRewardCoeffs joint_coeffs(int batch_agents) const;
  void check() const;  // throws on out-of-range values
};

struct TrainedModel {
  int nodes = 0;
  int categories = 0;
  int batch_agents = 0;
  HyperParams hyper;
  std::vector<AgentBundle> placement;
  std::vector<AgentBundle> routing;
};

NetworkShape placement_actor_shape(int nodes, int categories, int agents, const HyperParams& hyper);
NetworkShape placement_critic_shape(int nodes, int categories, int agents, const HyperParams& hyper);
NetworkShape routing_actor_shape(int nodes, int categories, int agents, const HyperParams& hyper);
NetworkShape routing_critic_shape(int nodes, int categories, int agents, const HyperParams& hyper);

TrainedModel make_model(int nodes, int categories, int batch_agents, const HyperParams& hyper,
                        std::uint64_t seed);

struct EpochLog {
  int epoch = 0;
  bool joint_computed = false;
  std::vector<double> joint;  // per agent, zero when not computed
  double total_joint = 0.0;
  bool all_spr = false;
  bool all_srr = false;
  int placement_refinements = 0;  // refinement episodes run this epoch
  int routing_refinements = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;

  // windowed mean of total joint rewards (absent epochs count as zero)
  std::vector<double> smoothed_totals(int window) const;
};

// Runs the epoch loop on one fixed batch of requests (padded to the model's
// agent count by the caller). Appends per-epoch records to the returned log.
// trace, when set, receives one JSON line per decision step.
TrainLog train(TrainedModel& model, const std::vector<ServiceRequest>& batch,
               const SubstrateNetwork& net, const VnfCatalog& catalog, std::uint64_t seed,
               std::ostream* trace = nullptr);

struct DeploymentResult {
  std::vector<Deployment> deployments;  // aligned with requests
  std::vector<bool> accepted;           // padding entries stay false
};

// Batch-by-batch greedy deployment against one persistent ledger. A batch is
// accepted only when its joint rollout validates against the remaining
// resources; rejected batches leave the ledger untouched.
DeploymentResult deploy_all(const std::vector<ServiceRequest>& requests,
                            const SubstrateNetwork& net, const VnfCatalog& catalog,
                            const TrainedModel& model);

// Parameter migration to a changed topology. Layers whose width depends on
// the node count are reshaped (surviving node slices copied, new slices
// freshly initialized) and stay trainable; every other layer is copied
// verbatim and frozen. Node removal is unsupported.
TrainedModel migrate(const TrainedModel& model, const SubstrateNetwork& new_net,
                     std::uint64_t seed);

void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

std::string hyper_to_json(const HyperParams& hyper);
HyperParams hyper_from_json(const std::string& text);

}  // namespace vnfpr
