#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "vnfpr/agent.hpp"

using namespace vnfpr;

namespace {

NetworkShape small_actor_shape() {
  NetworkShape s;
  s.base_dim = 12;
  s.other_dim = 9;
  s.output_dim = 5;
  s.hidden_width = 16;
  s.bottleneck_width = 4;
  s.residual_blocks = 1;
  return s;
}

NetworkShape small_critic_shape() {
  NetworkShape s = small_actor_shape();
  s.base_dim += 5 + 10;  // action plus other results
  s.output_dim = 1;
  return s;
}

AgentBundle small_bundle(std::uint64_t seed) {
  Rng rng(seed);
  return AgentBundle(small_actor_shape(), small_critic_shape(), 64, 0.01, 0.02, rng);
}

Observation random_obs(Rng& rng, int self_dim, int other_dim, int sn_dim) {
  Observation obs;
  for (int i = 0; i < self_dim; ++i) obs.self_obs.push_back(rng.uniform(0.0, 1.0));
  for (int i = 0; i < other_dim; ++i) obs.other_obs.push_back(rng.uniform(0.0, 1.0));
  for (int i = 0; i < sn_dim; ++i) obs.sn_info.push_back(rng.uniform(0.0, 1.0));
  return obs;
}

Transition random_transition(Rng& rng, const AgentBundle& bundle) {
  Transition t;
  const Observation obs = random_obs(rng, 7, 9, 5);  // 7 + 5 = base 12
  t.self_obs = obs.self_obs;
  t.other_obs = obs.other_obs;
  t.sn_info = obs.sn_info;
  t.action = static_cast<int>(rng.below(5));
  for (int i = 0; i < 10; ++i) t.other_results.push_back(rng.uniform(0.0, 1.0));
  t.reward = rng.uniform(-1.0, 1.0);
  const Observation next = random_obs(rng, 7, 9, 5);
  t.next_self = next.self_obs;
  t.next_other = next.other_obs;
  t.next_sn = next.sn_info;
  t.terminal = rng.below(4) == 0;
  (void)bundle;
  return t;
}

}  // namespace

TEST_CASE("replay memory is a bounded FIFO") {
  ReplayMemory replay(10);
  Rng rng(1);
  AgentBundle bundle = small_bundle(1);
  for (int i = 0; i < 13; ++i) {
    Transition t = random_transition(rng, bundle);
    t.reward = static_cast<double>(i);
    replay.push(std::move(t));
  }
  CHECK(replay.size() == 10);
  CHECK(replay.full());
  // the first three rewards were evicted
  std::set<double> rewards;
  for (std::size_t i = 0; i < replay.size(); ++i) rewards.insert(replay.at(i).reward);
  for (int evicted = 0; evicted < 3; ++evicted) CHECK(rewards.count(evicted) == 0);
  CHECK(rewards.count(12.0) == 1);
}

TEST_CASE("zero noise selects the actor argmax deterministically") {
  AgentBundle bundle = small_bundle(3);
  Rng obs_rng(5);
  const Observation obs = random_obs(obs_rng, 7, 9, 5);
  Rng a(7), b(7);
  const StepAction first = select_action(bundle, obs, 0.0, a);
  const StepAction second = select_action(bundle, obs, 0.0, b);
  CHECK(first.node == second.node);

  const auto probs = actor_distribution(bundle, obs);
  int argmax = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] > probs[static_cast<std::size_t>(argmax)]) argmax = static_cast<int>(i);
  CHECK(first.node == argmax);
}

TEST_CASE("same seed and state reproduce the same exploratory action") {
  AgentBundle bundle = small_bundle(3);
  Rng obs_rng(6);
  const Observation obs = random_obs(obs_rng, 7, 9, 5);
  Rng a(11), b(11);
  CHECK(select_action(bundle, obs, 0.8, a).node == select_action(bundle, obs, 0.8, b).node);
}

TEST_CASE("large noise explores every node eventually") {
  AgentBundle bundle = small_bundle(4);
  Rng obs_rng(9);
  const Observation obs = random_obs(obs_rng, 7, 9, 5);
  Rng rng(13);
  std::set<int> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(select_action(bundle, obs, 5.0, rng).node);
  CHECK(seen.size() == 5);
}

TEST_CASE("critic value is a deterministic finite scalar") {
  AgentBundle bundle = small_bundle(5);
  Rng obs_rng(2);
  const Observation obs = random_obs(obs_rng, 7, 9, 5);
  std::vector<double> action(5, 0.0);
  action[2] = 1.0;
  std::vector<double> results(10, 0.25);
  const double q1 = critic_value(bundle.critic, obs, action, results);
  const double q2 = critic_value(bundle.critic, obs, action, results);
  CHECK(q1 == q2);
  CHECK(std::isfinite(q1));

  Observation zeros;
  zeros.self_obs.assign(7, 0.0);
  zeros.other_obs.assign(9, 0.0);
  zeros.sn_info.assign(5, 0.0);
  CHECK(std::isfinite(critic_value(bundle.critic, zeros, std::vector<double>(5, 0.0),
                                   std::vector<double>(10, 0.0))));
}

TEST_CASE("swapping identical other-agent blocks leaves the critic unchanged") {
  AgentBundle bundle = small_bundle(6);
  Rng obs_rng(3);
  const Observation obs = random_obs(obs_rng, 7, 9, 5);
  std::vector<double> action(5, 0.0);
  action[0] = 1.0;
  // two 5-wide result blocks with identical contents
  std::vector<double> results{1, 0, 0, 0, 1, 1, 0, 0, 0, 1};
  const double q = critic_value(bundle.critic, obs, action, results);
  std::vector<double> swapped{1, 0, 0, 0, 1, 1, 0, 0, 0, 1};
  CHECK(critic_value(bundle.critic, obs, action, swapped) == q);
}

TEST_CASE("agent net gradients pass the finite-difference audit") {
  Rng rng(21);
  AgentBundle bundle = small_bundle(21);
  std::vector<double> base(static_cast<std::size_t>(bundle.actor.base_dim()));
  std::vector<double> other(9);
  for (double& v : base) v = rng.uniform(-1.0, 1.0);
  for (double& v : other) v = rng.uniform(-1.0, 1.0);
  std::vector<double> upstream(5);
  for (double& v : upstream) v = rng.uniform(-1.0, 1.0);

  const auto audit = oracle::finite_difference_audit(bundle.actor, base, other, upstream);
  CHECK(audit.checked > 100);
  CHECK(audit.max_rel_error < 1e-4);
}

TEST_CASE("terminal transitions bootstrap to the bare reward") {
  AgentBundle bundle = small_bundle(8);
  Rng rng(31);
  Transition t = random_transition(rng, bundle);
  t.terminal = true;
  t.reward = 2.5;

  // with gamma = 0 and terminal masking, the TD target is exactly the reward
  std::vector<double> action(5, 0.0);
  action[static_cast<std::size_t>(t.action)] = 1.0;
  Observation obs{t.self_obs, t.other_obs, t.sn_info};
  const double pred = critic_value(bundle.critic, obs, action, t.other_results);
  const double expected_loss = (pred - 2.5) * (pred - 2.5);
  const double loss = update_critic(bundle, {&t}, 0.99);
  CHECK(loss == doctest::Approx(expected_loss).epsilon(1e-9));
}

TEST_CASE("gamma zero removes the next-state term") {
  AgentBundle a = small_bundle(9);
  AgentBundle b = small_bundle(9);
  Rng rng(41);
  Transition t = random_transition(rng, a);
  t.terminal = false;

  Transition t2 = t;
  // under gamma = 0 the next state cannot matter
  for (double& v : t2.next_self) v += 0.37;
  const double loss_a = update_critic(a, {&t}, 0.0);
  const double loss_b = update_critic(b, {&t2}, 0.0);
  CHECK(loss_a == doctest::Approx(loss_b).epsilon(1e-12));
}

TEST_CASE("repeated critic updates shrink the TD loss on a fixed transition") {
  AgentBundle bundle = small_bundle(10);
  bundle.lr_critic = 0.005;
  Rng rng(51);
  Transition t = random_transition(rng, bundle);
  t.terminal = true;
  t.reward = 1.0;

  double first = update_critic(bundle, {&t}, 0.99);
  double last = first;
  bool decreased_overall = true;
  for (int i = 0; i < 50; ++i) {
    const double loss = update_critic(bundle, {&t}, 0.99);
    last = loss;
  }
  decreased_overall = last < first;
  CHECK(decreased_overall);
}

TEST_CASE("a constant critic produces a zero actor gradient") {
  AgentBundle bundle = small_bundle(11);
  // zero out the critic so Q is flat in the action
  for (auto& layer : bundle.critic.trunk.layers) {
    for (double& w : layer.weights.data) w = 0.0;
    for (double& b : layer.bias) b = 0.0;
  }
  for (auto& layer : bundle.critic.other_enc.layers) {
    for (double& w : layer.weights.data) w = 0.0;
    for (double& b : layer.bias) b = 0.0;
  }
  Rng rng(61);
  Transition t = random_transition(rng, bundle);
  const AgentNet actor_before = bundle.actor;
  update_actor(bundle, {&t});
  // flat landscape: no movement anywhere
  for (std::size_t l = 0; l < bundle.actor.trunk.layers.size(); ++l)
    CHECK(bundle.actor.trunk.layers[l].weights == actor_before.trunk.layers[l].weights);
}

namespace {

// replaces the critic with the exact linear map Q = w . action
void install_linear_critic(AgentBundle& bundle, const std::vector<double>& w) {
  AgentNet& critic = bundle.critic;
  for (auto& layer : critic.other_enc.layers) {
    for (double& x : layer.weights.data) x = 0.0;
    for (double& b : layer.bias) b = 0.0;
  }
  critic.trunk.layers.clear();
  Layer lin;
  lin.weights = Mat(1, 27 + critic.other_enc.output_dim());
  lin.bias.assign(1, 0.0);
  lin.activation = Activation::Linear;
  // action block sits at offset 12 of the critic base (7 self + 5 sn)
  for (int i = 0; i < 5; ++i) lin.weights(0, 12 + i) = w[static_cast<std::size_t>(i)];
  critic.trunk.layers.push_back(lin);
  bundle.critic_trunk_opt = RmsProp::for_net(critic.trunk);
  bundle.critic_enc_opt = RmsProp::for_net(critic.other_enc);
}

}  // namespace

TEST_CASE("dQ/da of a linear critic matches the installed weights exactly") {
  AgentBundle bundle = small_bundle(12);
  const std::vector<double> w{0.3, -0.2, 0.5, 0.1, -0.4};
  install_linear_critic(bundle, w);

  Rng rng(71);
  Transition t = random_transition(rng, bundle);
  Observation obs{t.self_obs, t.other_obs, t.sn_info};
  std::vector<double> base = obs.self_obs;
  base.insert(base.end(), obs.sn_info.begin(), obs.sn_info.end());
  std::vector<double> action(5, 0.2);
  base.insert(base.end(), action.begin(), action.end());
  base.insert(base.end(), t.other_results.begin(), t.other_results.end());

  AgentNetCache cache;
  agentnet_forward(bundle.critic, base, obs.other_obs, cache);
  const AgentNetGrads grads = agentnet_backward(bundle.critic, cache, {1.0});
  for (int i = 0; i < 5; ++i)
    CHECK(grads.base_input[static_cast<std::size_t>(12 + i)] ==
          doctest::Approx(w[static_cast<std::size_t>(i)]).epsilon(1e-5));
}

TEST_CASE("actor updates ascend a linear critic in most seeds") {
  const std::vector<double> w{0.3, -0.2, 0.5, 0.1, -0.4};
  int improved = 0;
  const int trials = 20;
  for (int seed = 0; seed < trials; ++seed) {
    AgentBundle bundle = small_bundle(100 + static_cast<std::uint64_t>(seed));
    bundle.lr_actor = 0.001;
    install_linear_critic(bundle, w);
    Rng rng(200 + static_cast<std::uint64_t>(seed));
    Transition t = random_transition(rng, bundle);
    Observation obs{t.self_obs, t.other_obs, t.sn_info};
    std::vector<double> actor_base = obs.self_obs;
    actor_base.insert(actor_base.end(), obs.sn_info.begin(), obs.sn_info.end());

    const double q_before = update_actor(bundle, {&t});
    const auto a_now = agentnet_forward(bundle.actor, actor_base, obs.other_obs);
    double q_after = 0.0;
    for (int i = 0; i < 5; ++i)
      q_after += w[static_cast<std::size_t>(i)] * a_now[static_cast<std::size_t>(i)];
    if (q_after >= q_before - 1e-12) ++improved;
  }
  CHECK(improved >= 18);  // ascent in at least 90% of seeds
}

TEST_CASE("soft update blends towards the online parameters") {
  AgentBundle bundle = small_bundle(13);
  for (auto& layer : bundle.actor.trunk.layers)
    for (double& w : layer.weights.data) w = 2.0;
  for (auto& layer : bundle.target_actor.trunk.layers)
    for (double& w : layer.weights.data) w = 0.0;

  SUBCASE("tau = 1 copies exactly") {
    soft_update(bundle, 1.0);
    for (auto& layer : bundle.target_actor.trunk.layers)
      for (double w : layer.weights.data) CHECK(w == 2.0);
  }
  SUBCASE("tau = 0.5 lands midway") {
    soft_update(bundle, 0.5);
    for (auto& layer : bundle.target_actor.trunk.layers)
      for (double w : layer.weights.data) CHECK(w == 1.0);
  }
  SUBCASE("repeated updates converge geometrically") {
    for (int i = 0; i < 200; ++i) soft_update(bundle, 0.1);
    for (auto& layer : bundle.target_actor.trunk.layers)
      for (double w : layer.weights.data) CHECK(w == doctest::Approx(2.0).epsilon(1e-6));
  }
}
