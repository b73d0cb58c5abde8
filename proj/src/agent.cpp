#include "vnfpr/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vnfpr {

void AgentNetGrads::accumulate(const AgentNetGrads& other) {
  enc.accumulate(other.enc);
  trunk.accumulate(other.trunk);
  for (std::size_t i = 0; i < base_input.size(); ++i) base_input[i] += other.base_input[i];
}

void AgentNetGrads::scale(double k) {
  enc.scale(k);
  trunk.scale(k);
  for (double& v : base_input) v *= k;
}

std::vector<double> agentnet_forward(const AgentNet& net, const std::vector<double>& base,
                                     const std::vector<double>& other, AgentNetCache& cache) {
  if (static_cast<int>(other.size()) != net.other_enc.input_dim())
    throw std::invalid_argument("agentnet_forward: other-obs dimension mismatch");
  if (static_cast<int>(base.size()) != net.base_dim())
    throw std::invalid_argument("agentnet_forward: base dimension mismatch");
  const auto embedding = mlp_forward(net.other_enc, other, cache.enc);
  std::vector<double> joined = base;
  joined.insert(joined.end(), embedding.begin(), embedding.end());
  return mlp_forward(net.trunk, joined, cache.trunk);
}

std::vector<double> agentnet_forward(const AgentNet& net, const std::vector<double>& base,
                                     const std::vector<double>& other) {
  AgentNetCache cache;
  return agentnet_forward(net, base, other, cache);
}

AgentNetGrads agentnet_backward(const AgentNet& net, const AgentNetCache& cache,
                                const std::vector<double>& upstream) {
  AgentNetGrads grads;
  grads.trunk = mlp_backward(net.trunk, cache.trunk, upstream);
  const int base_dim = net.base_dim();
  grads.base_input.assign(grads.trunk.input.begin(), grads.trunk.input.begin() + base_dim);
  const std::vector<double> d_embedding(grads.trunk.input.begin() + base_dim,
                                        grads.trunk.input.end());
  grads.enc = mlp_backward(net.other_enc, cache.enc, d_embedding);
  return grads;
}

AgentNet make_agent_net(const NetworkShape& shape, Rng& rng) {
  AgentNet net;
  net.other_enc = make_mlp({shape.other_dim, shape.bottleneck_width}, {Activation::Relu}, rng);

  std::vector<int> dims{shape.base_dim + shape.bottleneck_width, shape.hidden_width};
  std::vector<Activation> acts{Activation::Relu};
  for (int i = 0; i < shape.residual_blocks; ++i) {
    dims.push_back(shape.hidden_width);
    acts.push_back(Activation::Residual);
  }
  dims.push_back(shape.output_dim);
  acts.push_back(shape.output_dim == 1 ? Activation::Linear : Activation::Softmax);
  net.trunk = make_mlp(dims, acts, rng);
  return net;
}

void ReplayMemory::push(Transition t) {
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayMemory::sample(std::size_t batch, Rng& rng) const {
  if (buffer_.size() < batch)
    throw std::runtime_error("ReplayMemory::sample: not enough stored transitions");
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i)
    out.push_back(&buffer_[static_cast<std::size_t>(rng.below(buffer_.size()))]);
  return out;
}

AgentBundle::AgentBundle(const NetworkShape& actor_shape, const NetworkShape& critic_shape,
                         std::size_t replay_capacity, double lr_a, double lr_c, Rng& rng)
    : actor(make_agent_net(actor_shape, rng)),
      critic(make_agent_net(critic_shape, rng)),
      target_actor(actor),
      target_critic(critic),
      actor_enc_opt(RmsProp::for_net(actor.other_enc)),
      actor_trunk_opt(RmsProp::for_net(actor.trunk)),
      critic_enc_opt(RmsProp::for_net(critic.other_enc)),
      critic_trunk_opt(RmsProp::for_net(critic.trunk)),
      replay(replay_capacity),
      lr_actor(lr_a),
      lr_critic(lr_c),
      action_dim(actor_shape.output_dim) {}

void AgentBundle::reset_optimizers(double decay, double epsilon) {
  actor_enc_opt = RmsProp::for_net(actor.other_enc, decay, epsilon);
  actor_trunk_opt = RmsProp::for_net(actor.trunk, decay, epsilon);
  critic_enc_opt = RmsProp::for_net(critic.other_enc, decay, epsilon);
  critic_trunk_opt = RmsProp::for_net(critic.trunk, decay, epsilon);
}

namespace {

std::vector<double> actor_base(const Observation& obs) {
  std::vector<double> base = obs.self_obs;
  base.insert(base.end(), obs.sn_info.begin(), obs.sn_info.end());
  return base;
}

std::vector<double> critic_base(const Observation& obs, const std::vector<double>& action,
                                const std::vector<double>& other_results) {
  std::vector<double> base = obs.self_obs;
  base.insert(base.end(), obs.sn_info.begin(), obs.sn_info.end());
  base.insert(base.end(), action.begin(), action.end());
  base.insert(base.end(), other_results.begin(), other_results.end());
  return base;
}

}  // namespace

std::vector<double> actor_distribution(const AgentBundle& bundle, const Observation& obs) {
  return agentnet_forward(bundle.actor, actor_base(obs), obs.other_obs);
}

StepAction select_action(const AgentBundle& bundle, const Observation& obs, double noise_sigma,
                         Rng& rng) {
  const auto probs = actor_distribution(bundle, obs);
  int best = 0;
  double best_score = -1e300;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    double score = std::log(probs[n] + 1e-12);
    if (noise_sigma > 0.0) score += noise_sigma * rng.gaussian();
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(n);
    }
  }
  return StepAction{best};
}

double critic_value(const AgentNet& critic, const Observation& obs,
                    const std::vector<double>& action, const std::vector<double>& other_results) {
  return agentnet_forward(critic, critic_base(obs, action, other_results), obs.other_obs)[0];
}

double update_critic(AgentBundle& bundle, const std::vector<const Transition*>& minibatch,
                     double gamma) {
  if (minibatch.empty()) throw std::invalid_argument("update_critic: empty minibatch");
  const double inv_b = 1.0 / static_cast<double>(minibatch.size());

  AgentNetGrads total;
  bool first = true;
  double loss = 0.0;
  for (const Transition* t : minibatch) {
    Observation obs{t->self_obs, t->other_obs, t->sn_info};
    Observation next_obs{t->next_self, t->next_other, t->next_sn};

    double target = t->reward;
    if (!t->terminal) {
      const auto next_action =
          agentnet_forward(bundle.target_actor, actor_base(next_obs), next_obs.other_obs);
      target += gamma * critic_value(bundle.target_critic, next_obs, next_action, t->other_results);
    }

    std::vector<double> action(static_cast<std::size_t>(bundle.action_dim), 0.0);
    action[static_cast<std::size_t>(t->action)] = 1.0;
    AgentNetCache cache;
    const double pred =
        agentnet_forward(bundle.critic, critic_base(obs, action, t->other_results), obs.other_obs,
                         cache)[0];
    const double err = pred - target;
    loss += err * err * inv_b;

    AgentNetGrads g = agentnet_backward(bundle.critic, cache, {2.0 * err * inv_b});
    if (first) {
      total = std::move(g);
      first = false;
    } else {
      total.accumulate(g);
    }
  }

  bundle.critic_enc_opt.step(bundle.critic.other_enc, total.enc, bundle.lr_critic);
  bundle.critic_trunk_opt.step(bundle.critic.trunk, total.trunk, bundle.lr_critic);
  return loss;
}

double update_actor(AgentBundle& bundle, const std::vector<const Transition*>& minibatch,
                    double logit_decay) {
  if (minibatch.empty()) throw std::invalid_argument("update_actor: empty minibatch");
  const double inv_b = 1.0 / static_cast<double>(minibatch.size());
  const int base_prefix = static_cast<int>(minibatch.front()->self_obs.size() +
                                           minibatch.front()->sn_info.size());

  AgentNetGrads actor_total;
  bool first = true;
  double mean_q = 0.0;
  for (const Transition* t : minibatch) {
    Observation obs{t->self_obs, t->other_obs, t->sn_info};

    AgentNetCache actor_cache;
    const auto action =
        agentnet_forward(bundle.actor, actor_base(obs), obs.other_obs, actor_cache);

    AgentNetCache critic_cache;
    const double q =
        agentnet_forward(bundle.critic, critic_base(obs, action, t->other_results), obs.other_obs,
                         critic_cache)[0];
    mean_q += q * inv_b;

    // dQ/da, then chain through the actor; ascent via negated gradients
    const AgentNetGrads critic_grads = agentnet_backward(bundle.critic, critic_cache, {1.0});
    std::vector<double> dq_da(critic_grads.base_input.begin() + base_prefix,
                              critic_grads.base_input.begin() + base_prefix + bundle.action_dim);
    for (double& v : dq_da) v *= -inv_b;

    AgentNetGrads g = agentnet_backward(bundle.actor, actor_cache, dq_da);
    if (logit_decay > 0.0) {
      // descend (decay/2)*|logits|^2 on the output layer parameters
      const auto& logits = actor_cache.trunk.pre.back();
      const auto& hidden = actor_cache.trunk.inputs.back();
      auto& dW = g.trunk.weights.back();
      auto& db = g.trunk.bias.back();
      for (std::size_t r = 0; r < logits.size(); ++r) {
        const double zr = logit_decay * inv_b * logits[r];
        db[r] += zr;
        for (std::size_t c = 0; c < hidden.size(); ++c)
          dW(static_cast<int>(r), static_cast<int>(c)) += zr * hidden[c];
      }
    }
    if (first) {
      actor_total = std::move(g);
      first = false;
    } else {
      actor_total.accumulate(g);
    }
  }

  bundle.actor_enc_opt.step(bundle.actor.other_enc, actor_total.enc, bundle.lr_actor);
  bundle.actor_trunk_opt.step(bundle.actor.trunk, actor_total.trunk, bundle.lr_actor);
  return mean_q;
}

namespace {

void blend(Mlp& target, const Mlp& online, double tau) {
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    auto& tl = target.layers[l];
    const auto& ol = online.layers[l];
    for (std::size_t i = 0; i < tl.weights.data.size(); ++i)
      tl.weights.data[i] = tau * ol.weights.data[i] + (1.0 - tau) * tl.weights.data[i];
    for (std::size_t i = 0; i < tl.bias.size(); ++i)
      tl.bias[i] = tau * ol.bias[i] + (1.0 - tau) * tl.bias[i];
  }
}

}  // namespace

void soft_update(AgentBundle& bundle, double tau) {
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau outside (0,1]");
  blend(bundle.target_actor.other_enc, bundle.actor.other_enc, tau);
  blend(bundle.target_actor.trunk, bundle.actor.trunk, tau);
  blend(bundle.target_critic.other_enc, bundle.critic.other_enc, tau);
  blend(bundle.target_critic.trunk, bundle.critic.trunk, tau);
}

}  // namespace vnfpr
