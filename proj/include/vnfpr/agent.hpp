#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "vnfpr/environment.hpp"
#include "vnfpr/mlp.hpp"

namespace vnfpr {

// Actor and critic networks share this two-part realization: the other-agent
// observation block passes through a narrow encoder, whose embedding joins
// the remaining input in front of the 64-wide residual trunk.
struct AgentNet {
  Mlp other_enc;  // other-obs -> bottleneck embedding
  Mlp trunk;      // [base, embedding] -> output

  int base_dim() const { return trunk.input_dim() - other_enc.output_dim(); }
};

struct AgentNetCache {
  MlpCache enc;
  MlpCache trunk;
};

struct AgentNetGrads {
  MlpGrads enc;
  MlpGrads trunk;
  std::vector<double> base_input;  // dL/d(base)

  void accumulate(const AgentNetGrads& other);
  void scale(double k);
};

std::vector<double> agentnet_forward(const AgentNet& net, const std::vector<double>& base,
                                     const std::vector<double>& other);
std::vector<double> agentnet_forward(const AgentNet& net, const std::vector<double>& base,
                                     const std::vector<double>& other, AgentNetCache& cache);
AgentNetGrads agentnet_backward(const AgentNet& net, const AgentNetCache& cache,
                                const std::vector<double>& upstream);

struct NetworkShape {
  int base_dim = 0;
  int other_dim = 0;
  int output_dim = 0;
  int hidden_width = 64;
  int bottleneck_width = 16;
  int residual_blocks = 2;
};

AgentNet make_agent_net(const NetworkShape& shape, Rng& rng);

// One stored decision step. other_results holds the flattened final
// placement (or routing) matrices of the other M-1 agents.
struct Transition {
  std::vector<double> self_obs, other_obs, sn_info;
  int action = -1;
  std::vector<double> other_results;
  double reward = 0.0;
  std::vector<double> next_self, next_other, next_sn;
  bool terminal = false;
};

// bounded FIFO of transitions; oldest evicted first
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return buffer_.size() == capacity_; }
  const Transition& at(std::size_t i) const { return buffer_[i]; }
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> buffer_;
};

struct AgentBundle {
  AgentNet actor;
  AgentNet critic;
  AgentNet target_actor;
  AgentNet target_critic;
  RmsProp actor_enc_opt, actor_trunk_opt, critic_enc_opt, critic_trunk_opt;
  ReplayMemory replay;
  double lr_actor = 0.0;
  double lr_critic = 0.0;
  int action_dim = 0;
  int updates_done = 0;

  AgentBundle(const NetworkShape& actor_shape, const NetworkShape& critic_shape,
              std::size_t replay_capacity, double lr_a, double lr_c, Rng& rng);

  void reset_optimizers(double decay, double epsilon);
};

// actor forward on an observation; explore with seeded per-logit Gaussian
// noise, final action is the argmax of the perturbed distribution
StepAction select_action(const AgentBundle& bundle, const Observation& obs, double noise_sigma,
                         Rng& rng);

std::vector<double> actor_distribution(const AgentBundle& bundle, const Observation& obs);

double critic_value(const AgentNet& critic, const Observation& obs,
                    const std::vector<double>& action, const std::vector<double>& other_results);

// One RMSProp step on the mean squared TD error against the target networks;
// returns the pre-step loss.
double update_critic(AgentBundle& bundle, const std::vector<const Transition*>& minibatch,
                     double gamma);

// One deterministic policy-gradient ascent step through the critic; returns
// the pre-step mean Q of the minibatch. logit_decay adds an L2 pull on the
// actor's output logits so the softmax stays responsive.
double update_actor(AgentBundle& bundle, const std::vector<const Transition*>& minibatch,
                    double logit_decay = 0.0);

// target <- tau * online + (1 - tau) * target for all four networks
void soft_update(AgentBundle& bundle, double tau);

}  // namespace vnfpr
