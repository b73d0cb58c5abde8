#include "vnfpr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vnfpr {

JointRewardCoeffs HyperParams::joint_coeffs(int batch_agents) const {
  JointRewardCoeffs c;
  c.omega_dec = omega_dec;
  c.omega_trans = omega_trans;
  c.omega_scal = omega_scal != 0.0 ? omega_scal : -1.0 / (10.0 * batch_agents);
  return c;
}

void HyperParams::check() const {
  if (lr_placement_actor <= 0.0 || lr_routing_actor <= 0.0 || lr_placement_critic <= 0.0 ||
      lr_routing_critic <= 0.0)
    throw std::invalid_argument("hyper: learning rates must be positive");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("hyper: gamma outside [0,1]");
  if (epochs < 0) throw std::invalid_argument("hyper: negative epoch count");
  if (max_placement_episodes < 1 || max_routing_episodes < 1)
    throw std::invalid_argument("hyper: episode limits must be >= 1");
  if (batch_size < 1 || replay_capacity < batch_size)
    throw std::invalid_argument("hyper: replay capacity must hold at least one minibatch");
  if (refine_update_every < 1)
    throw std::invalid_argument("hyper: refine_update_every must be >= 1");
  if (update_iterations < 1)
    throw std::invalid_argument("hyper: update_iterations must be >= 1");
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("hyper: tau outside (0,1]");
  if (omega_dec <= 0.0 || omega_trans <= 0.0 || omega_scal > 0.0)
    throw std::invalid_argument("hyper: joint reward coefficient signs");
  if (hidden_width < 1 || bottleneck_width < 1 || residual_blocks < 0)
    throw std::invalid_argument("hyper: network shape");
}

namespace {

int placement_base_width(int nodes, int categories) {
  return layout_width(placement_self_layout(), nodes, categories) +
         layout_width(placement_sn_layout(), nodes, categories);
}

int routing_base_width(int nodes, int categories) {
  return layout_width(routing_self_layout(), nodes, categories) +
         layout_width(routing_sn_layout(), nodes, categories);
}

}  // namespace

NetworkShape placement_actor_shape(int nodes, int categories, int agents,
                                   const HyperParams& hyper) {
  NetworkShape s;
  s.base_dim = placement_base_width(nodes, categories);
  s.other_dim = layout_width(placement_other_layout(agents), nodes, categories);
  s.output_dim = nodes;
  s.hidden_width = hyper.hidden_width;
  s.bottleneck_width = hyper.bottleneck_width;
  s.residual_blocks = hyper.residual_blocks;
  return s;
}

NetworkShape placement_critic_shape(int nodes, int categories, int agents,
                                    const HyperParams& hyper) {
  NetworkShape s = placement_actor_shape(nodes, categories, agents, hyper);
  s.base_dim += nodes + layout_width(placement_result_layout(agents), nodes, categories);
  s.output_dim = 1;
  return s;
}

NetworkShape routing_actor_shape(int nodes, int categories, int agents, const HyperParams& hyper) {
  NetworkShape s;
  s.base_dim = routing_base_width(nodes, categories);
  s.other_dim = layout_width(routing_other_layout(agents), nodes, categories);
  s.output_dim = nodes;
  s.hidden_width = hyper.hidden_width;
  s.bottleneck_width = hyper.bottleneck_width;
  s.residual_blocks = hyper.residual_blocks;
  return s;
}

NetworkShape routing_critic_shape(int nodes, int categories, int agents, const HyperParams& hyper) {
  NetworkShape s = routing_actor_shape(nodes, categories, agents, hyper);
  s.base_dim += nodes + layout_width(routing_result_layout(agents), nodes, categories);
  s.output_dim = 1;
  return s;
}

TrainedModel make_model(int nodes, int categories, int batch_agents, const HyperParams& hyper,
                        std::uint64_t seed) {
  hyper.check();
  if (nodes < 2 || categories < 1 || batch_agents < 1)
    throw std::invalid_argument("make_model: bad dimensions");
  TrainedModel model;
  model.nodes = nodes;
  model.categories = categories;
  model.batch_agents = batch_agents;
  model.hyper = hyper;
  Rng rng(seed);
  const std::size_t replay = static_cast<std::size_t>(hyper.replay_capacity);
  for (int i = 0; i < batch_agents; ++i) {
    model.placement.emplace_back(placement_actor_shape(nodes, categories, batch_agents, hyper),
                                 placement_critic_shape(nodes, categories, batch_agents, hyper),
                                 replay, hyper.lr_placement_actor, hyper.lr_placement_critic, rng);
    model.routing.emplace_back(routing_actor_shape(nodes, categories, batch_agents, hyper),
                               routing_critic_shape(nodes, categories, batch_agents, hyper),
                               replay, hyper.lr_routing_actor, hyper.lr_routing_critic, rng);
  }
  for (auto& b : model.placement)
    b.reset_optimizers(hyper.rmsprop_decay, hyper.rmsprop_epsilon);
  for (auto& b : model.routing)
    b.reset_optimizers(hyper.rmsprop_decay, hyper.rmsprop_epsilon);
  return model;
}

std::vector<double> TrainLog::smoothed_totals(int window) const {
  std::vector<double> out;
  double acc = 0.0;
  std::vector<double> totals;
  for (const auto& e : epochs) totals.push_back(e.joint_computed ? e.total_joint : 0.0);
  for (std::size_t i = 0; i < totals.size(); ++i) {
    acc += totals[i];
    if (i >= static_cast<std::size_t>(window)) acc -= totals[i - static_cast<std::size_t>(window)];
    const double denom = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out.push_back(acc / static_cast<double>(denom));
  }
  return out;
}

// ---------------------------------------------------------------------------
// rollouts
// ---------------------------------------------------------------------------

namespace {

struct AgentRollout {
  std::vector<Observation> states;
  std::vector<int> actions;
  std::vector<double> rewards;  // internal rewards per step
  std::vector<Observation> next_states;
  bool clean = true;
  std::vector<int> placed;  // placement phase result
  Mat routing, hops;        // routing phase result
  bool reached = false;
};

struct TraceSink {
  std::ostream* out = nullptr;
  int epoch = 0;
  int episode = 0;
  const char* phase = "";

  void emit(int agent, int step, int action, double reward) const {
    if (!out) return;
    nlohmann::json j;
    j["phase"] = phase;
    j["epoch"] = epoch;
    j["episode"] = episode;
    j["agent"] = agent;
    j["step"] = step;
    j["action"] = action + 1;
    j["reward"] = reward;
    (*out) << j.dump() << "\n";
  }
};

// Runs one lockstep placement episode round for every agent. Agents whose
// entry in `frozen` is already clean are skipped (their results are kept by
// the caller together with their ledger debits).
std::vector<AgentRollout> run_placement_phase(TrainedModel& model, const EnvContext& ctx,
                                              ResourceLedger& ledger, double sigma, Rng& rng,
                                              const TraceSink& trace,
                                              const std::vector<AgentRollout>* frozen = nullptr,
                                              bool uniform_explore = false) {
  const int agents = ctx.agents();
  std::vector<bool> skip(static_cast<std::size_t>(agents), false);
  if (frozen)
    for (int i = 0; i < agents; ++i)
      skip[static_cast<std::size_t>(i)] = (*frozen)[static_cast<std::size_t>(i)].clean;

  std::vector<PlacementEpisode> episodes;
  episodes.reserve(static_cast<std::size_t>(agents));
  for (int i = 0; i < agents; ++i) episodes.emplace_back(&ctx, i);
  std::vector<AgentRollout> rollouts(static_cast<std::size_t>(agents));

  int round = 0;
  while (true) {
    bool any_active = false;
    for (int i = 0; i < agents; ++i)
      if (!skip[static_cast<std::size_t>(i)] && !episodes[static_cast<std::size_t>(i)].done())
        any_active = true;
    if (!any_active) break;

    // observations freeze at the round barrier; debits apply in agent order
    std::vector<Observation> obs(static_cast<std::size_t>(agents));
    std::vector<bool> acting(static_cast<std::size_t>(agents), false);
    for (int i = 0; i < agents; ++i) {
      if (!skip[static_cast<std::size_t>(i)] && !episodes[static_cast<std::size_t>(i)].done()) {
        obs[static_cast<std::size_t>(i)] = episodes[static_cast<std::size_t>(i)].observe(ledger);
        acting[static_cast<std::size_t>(i)] = true;
      }
    }
    for (int i = 0; i < agents; ++i) {
      if (!acting[static_cast<std::size_t>(i)]) continue;
      auto& ep = episodes[static_cast<std::size_t>(i)];
      auto& ro = rollouts[static_cast<std::size_t>(i)];
      const StepAction action =
          uniform_explore ? StepAction{static_cast<int>(rng.below(ctx.nodes()))}
                          : select_action(model.placement[static_cast<std::size_t>(i)],
                                          obs[static_cast<std::size_t>(i)], sigma, rng);
      const StepOutcome outcome = ep.step(action, ledger, model.hyper.internal);
      ro.states.push_back(std::move(obs[static_cast<std::size_t>(i)]));
      ro.actions.push_back(action.node);
      ro.rewards.push_back(outcome.reward);
      trace.emit(i, round, action.node, outcome.reward);
    }
    for (int i = 0; i < agents; ++i) {
      if (!acting[static_cast<std::size_t>(i)]) continue;
      rollouts[static_cast<std::size_t>(i)].next_states.push_back(
          episodes[static_cast<std::size_t>(i)].observe(ledger));
    }
    ++round;
  }

  for (int i = 0; i < agents; ++i) {
    if (skip[static_cast<std::size_t>(i)]) {
      rollouts[static_cast<std::size_t>(i)] = (*frozen)[static_cast<std::size_t>(i)];
      continue;
    }
    rollouts[static_cast<std::size_t>(i)].clean = episodes[static_cast<std::size_t>(i)].clean();
    rollouts[static_cast<std::size_t>(i)].placed =
        episodes[static_cast<std::size_t>(i)].placed_nodes();
  }
  return rollouts;
}

std::vector<AgentRollout> run_routing_phase(TrainedModel& model, const EnvContext& ctx,
                                            ResourceLedger& ledger,
                                            const std::vector<std::vector<int>>& placements,
                                            const std::vector<Mat>& all_padded, double sigma,
                                            Rng& rng, const TraceSink& trace,
                                            const std::vector<AgentRollout>* frozen = nullptr,
                                            bool uniform_explore = false) {
  const int agents = ctx.agents();
  std::vector<bool> skip(static_cast<std::size_t>(agents), false);
  if (frozen)
    for (int i = 0; i < agents; ++i)
      skip[static_cast<std::size_t>(i)] = (*frozen)[static_cast<std::size_t>(i)].clean;

  std::vector<RoutingEpisode> episodes;
  episodes.reserve(static_cast<std::size_t>(agents));
  for (int i = 0; i < agents; ++i)
    episodes.emplace_back(&ctx, i, placements[static_cast<std::size_t>(i)], &all_padded);
  std::vector<AgentRollout> rollouts(static_cast<std::size_t>(agents));

  int round = 0;
  while (true) {
    bool any_active = false;
    for (int i = 0; i < agents; ++i)
      if (!skip[static_cast<std::size_t>(i)] && !episodes[static_cast<std::size_t>(i)].done())
        any_active = true;
    if (!any_active) break;

    std::vector<Observation> obs(static_cast<std::size_t>(agents));
    std::vector<bool> acting(static_cast<std::size_t>(agents), false);
    for (int i = 0; i < agents; ++i) {
      if (!skip[static_cast<std::size_t>(i)] && !episodes[static_cast<std::size_t>(i)].done()) {
        obs[static_cast<std::size_t>(i)] = episodes[static_cast<std::size_t>(i)].observe(ledger);
        acting[static_cast<std::size_t>(i)] = true;
      }
    }
    for (int i = 0; i < agents; ++i) {
      if (!acting[static_cast<std::size_t>(i)]) continue;
      auto& ep = episodes[static_cast<std::size_t>(i)];
      auto& ro = rollouts[static_cast<std::size_t>(i)];
      const StepAction action =
          uniform_explore ? StepAction{static_cast<int>(rng.below(ctx.nodes()))}
                          : select_action(model.routing[static_cast<std::size_t>(i)],
                                          obs[static_cast<std::size_t>(i)], sigma, rng);
      const StepOutcome outcome = ep.step(action, ledger, model.hyper.internal);
      ro.states.push_back(std::move(obs[static_cast<std::size_t>(i)]));
      ro.actions.push_back(action.node);
      ro.rewards.push_back(outcome.reward);
      trace.emit(i, round, action.node, outcome.reward);
    }
    for (int i = 0; i < agents; ++i) {
      if (!acting[static_cast<std::size_t>(i)]) continue;
      rollouts[static_cast<std::size_t>(i)].next_states.push_back(
          episodes[static_cast<std::size_t>(i)].observe(ledger));
    }
    ++round;
  }

  for (int i = 0; i < agents; ++i) {
    if (skip[static_cast<std::size_t>(i)]) {
      rollouts[static_cast<std::size_t>(i)] = (*frozen)[static_cast<std::size_t>(i)];
      continue;
    }
    auto& ro = rollouts[static_cast<std::size_t>(i)];
    ro.clean = episodes[static_cast<std::size_t>(i)].clean();
    ro.reached = episodes[static_cast<std::size_t>(i)].reached_destination();
    ro.routing = episodes[static_cast<std::size_t>(i)].routing();
    ro.hops = episodes[static_cast<std::size_t>(i)].hops();
  }
  return rollouts;
}

bool all_clean(const std::vector<AgentRollout>& rollouts) {
  for (const auto& ro : rollouts)
    if (!ro.clean) return false;
  return true;
}

void store_rollout(AgentBundle& bundle, const AgentRollout& rollout,
                   const std::vector<double>& other_results, double terminal_bonus) {
  for (std::size_t t = 0; t < rollout.actions.size(); ++t) {
    Transition tr;
    tr.self_obs = rollout.states[t].self_obs;
    tr.other_obs = rollout.states[t].other_obs;
    tr.sn_info = rollout.states[t].sn_info;
    tr.action = rollout.actions[t];
    tr.other_results = other_results;
    tr.terminal = t + 1 == rollout.actions.size();
    tr.reward = rollout.rewards[t] + (tr.terminal ? terminal_bonus : 0.0);
    tr.next_self = rollout.next_states[t].self_obs;
    tr.next_other = rollout.next_states[t].other_obs;
    tr.next_sn = rollout.next_states[t].sn_info;
    bundle.replay.push(std::move(tr));
  }
}

bool replays_full(const std::vector<AgentBundle>& bundles) {
  for (const auto& b : bundles)
    if (!b.replay.full()) return false;
  return true;
}

void train_module(std::vector<AgentBundle>& bundles, const HyperParams& hyper, Rng& rng) {
  for (auto& bundle : bundles) {
    if (bundle.replay.size() < static_cast<std::size_t>(hyper.batch_size)) continue;
    for (int it = 0; it < hyper.update_iterations; ++it) {
      const auto batch = bundle.replay.sample(static_cast<std::size_t>(hyper.batch_size), rng);
      update_critic(bundle, batch, hyper.gamma);
      if (bundle.updates_done >= hyper.actor_update_delay)
        update_actor(bundle, batch, hyper.actor_logit_decay);
      soft_update(bundle, hyper.tau);
      ++bundle.updates_done;
    }
  }
}

std::vector<Mat> padded_placements_of(const EnvContext& ctx,
                                      const std::vector<std::vector<int>>& placements) {
  std::vector<Mat> out;
  for (int i = 0; i < ctx.agents(); ++i)
    out.push_back(padded_placement(ctx.batch[static_cast<std::size_t>(i)],
                                   placements[static_cast<std::size_t>(i)], ctx.nodes(),
                                   ctx.categories()));
  return out;
}

}  // namespace

TrainLog train(TrainedModel& model, const std::vector<ServiceRequest>& batch,
               const SubstrateNetwork& net, const VnfCatalog& catalog, std::uint64_t seed,
               std::ostream* trace_out) {
  model.hyper.check();
  if (static_cast<int>(batch.size()) != model.batch_agents)
    throw std::invalid_argument("train: request batch size must equal the model's agent count");
  if (net.node_count != model.nodes || catalog.category_count() != model.categories)
    throw std::invalid_argument("train: model was built for a different instance size");

  const HyperParams& hyper = model.hyper;
  EnvContext ctx{&net, &catalog, batch};
  const JointRewardCoeffs joint_coeffs = hyper.joint_coeffs(model.batch_agents);
  Rng rng(seed);
  TrainLog log;
  const int agents = model.batch_agents;

  int placement_rounds = 0;  // lifetime refinement-round counters
  int routing_rounds = 0;
  bool previous_epoch_failed = false;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const double frac = hyper.epochs > 1 ? static_cast<double>(epoch - 1) / (hyper.epochs - 1) : 0.0;
    double sigma =
        hyper.noise_sigma_start + (hyper.noise_sigma_end - hyper.noise_sigma_start) * frac;
    // a failed epoch keeps the exploration pressure up so both modules can
    // leave a dead end (a suitable placement may not admit any route)
    if (previous_epoch_failed) sigma = std::max(sigma, hyper.noise_sigma_refine_floor);

    EpochLog entry;
    entry.epoch = epoch;
    TraceSink trace{trace_out, epoch, 0, "placement"};

    // ---- placement phase: each agent repeats until it lands an SPR ----
    ResourceLedger ledger = ResourceLedger::full_of(net);
    auto placement_rollouts = run_placement_phase(model, ctx, ledger, sigma, rng, trace);

    if (!all_clean(placement_rollouts)) {
      ++placement_rounds;
      if (placement_rounds <= hyper.placement_pre_limit) {
        for (int episode = 1; episode <= hyper.max_placement_episodes; ++episode) {
          trace.episode = episode;
          ++entry.placement_refinements;
          const bool feedback = (episode - 1) % hyper.refine_update_every == 0;
          if (feedback) {
            std::vector<std::vector<int>> failed_placements;
            for (const auto& ro : placement_rollouts) failed_placements.push_back(ro.placed);
            const auto failed_padded = padded_placements_of(ctx, failed_placements);
            for (int i = 0; i < agents; ++i)
              store_rollout(model.placement[static_cast<std::size_t>(i)],
                            placement_rollouts[static_cast<std::size_t>(i)],
                            other_placement_results(failed_padded, i), 0.0);
            if (replays_full(model.placement)) train_module(model.placement, hyper, rng);
          }

          // keep every clean agent frozen with its debits; re-roll the rest
          ledger = ResourceLedger::full_of(net);
          for (int i = 0; i < agents; ++i) {
            const auto& ro = placement_rollouts[static_cast<std::size_t>(i)];
            if (!ro.clean) continue;
            const auto& req = batch[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < ro.placed.size(); ++j) {
              const int k = req.chain[j];
              ledger.remaining_compute[static_cast<std::size_t>(ro.placed[j])] -=
                  catalog.compute_req(k, req.rate);
              ledger.remaining_memory[static_cast<std::size_t>(ro.placed[j])] -=
                  catalog.memory_req[static_cast<std::size_t>(k)];
            }
          }
          const bool uniform = episode * 2 > hyper.max_placement_episodes;
          auto retry = run_placement_phase(model, ctx, ledger,
                                           std::max(sigma, hyper.noise_sigma_refine_floor), rng,
                                           trace, &placement_rollouts, uniform);
          for (int i = 0; i < agents; ++i)
            if (!placement_rollouts[static_cast<std::size_t>(i)].clean)
              placement_rollouts[static_cast<std::size_t>(i)] =
                  std::move(retry[static_cast<std::size_t>(i)]);
          if (all_clean(placement_rollouts)) break;
        }
      }
      if (!all_clean(placement_rollouts) && placement_rounds < hyper.placement_pre_limit) {
        std::vector<std::vector<int>> failed_placements;
        for (const auto& ro : placement_rollouts) failed_placements.push_back(ro.placed);
        const auto failed_padded = padded_placements_of(ctx, failed_placements);
        for (int i = 0; i < agents; ++i)
          store_rollout(model.placement[static_cast<std::size_t>(i)],
                        placement_rollouts[static_cast<std::size_t>(i)],
                        other_placement_results(failed_padded, i), 0.0);
        if (replays_full(model.placement)) train_module(model.placement, hyper, rng);
        previous_epoch_failed = true;
        log.epochs.push_back(entry);
        continue;  // no SPR set this epoch and the override has not fired
      }
    }
    entry.all_spr = all_clean(placement_rollouts);

    std::vector<std::vector<int>> placements;
    for (const auto& ro : placement_rollouts) placements.push_back(ro.placed);
    const auto padded = padded_placements_of(ctx, placements);

    // rebuild node debits from the final placements, then route
    ledger = ResourceLedger::full_of(net);
    for (int i = 0; i < agents; ++i) {
      const auto& req = batch[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < placements[static_cast<std::size_t>(i)].size(); ++j) {
        const int k = req.chain[j];
        const int host = placements[static_cast<std::size_t>(i)][j];
        ledger.remaining_compute[static_cast<std::size_t>(host)] -= catalog.compute_req(k, req.rate);
        ledger.remaining_memory[static_cast<std::size_t>(host)] -=
            catalog.memory_req[static_cast<std::size_t>(k)];
      }
    }

    // ---- routing phase: each agent repeats until it lands an SRR ----
    trace.phase = "routing";
    trace.episode = 0;
    auto routing_rollouts =
        run_routing_phase(model, ctx, ledger, placements, padded, sigma, rng, trace, nullptr);

    if (!all_clean(routing_rollouts)) {
      ++routing_rounds;
      if (routing_rounds <= hyper.routing_pre_limit) {
        for (int episode = 1; episode <= hyper.max_routing_episodes; ++episode) {
          trace.episode = episode;
          ++entry.routing_refinements;
          const bool feedback = (episode - 1) % hyper.refine_update_every == 0;
          if (feedback) {
            std::vector<Mat> failed_routings;
            for (const auto& ro : routing_rollouts) failed_routings.push_back(ro.routing);
            for (int i = 0; i < agents; ++i)
              store_rollout(model.routing[static_cast<std::size_t>(i)],
                            routing_rollouts[static_cast<std::size_t>(i)],
                            other_routing_results(failed_routings, i), 0.0);
            if (replays_full(model.routing)) train_module(model.routing, hyper, rng);
          }

          // frozen agents keep their routes and bandwidth debits
          ledger.reset_bandwidth(net);
          for (int i = 0; i < agents; ++i) {
            const auto& ro = routing_rollouts[static_cast<std::size_t>(i)];
            if (!ro.clean) continue;
            const double rate = batch[static_cast<std::size_t>(i)].rate;
            for (int u = 0; u < net.node_count; ++u)
              for (int v = 0; v < net.node_count; ++v)
                ledger.remaining_bandwidth(u, v) -= rate * ro.routing(u, v);
          }
          const bool uniform = episode * 2 > hyper.max_routing_episodes;
          auto retry = run_routing_phase(model, ctx, ledger, placements, padded,
                                         std::max(sigma, hyper.noise_sigma_refine_floor), rng,
                                         trace, &routing_rollouts, uniform);
          for (int i = 0; i < agents; ++i)
            if (!routing_rollouts[static_cast<std::size_t>(i)].clean)
              routing_rollouts[static_cast<std::size_t>(i)] =
                  std::move(retry[static_cast<std::size_t>(i)]);
          if (all_clean(routing_rollouts)) break;
        }
      }
      if (!all_clean(routing_rollouts) && routing_rounds < hyper.routing_pre_limit) {
        std::vector<Mat> failed_routings;
        for (const auto& ro : routing_rollouts) failed_routings.push_back(ro.routing);
        for (int i = 0; i < agents; ++i)
          store_rollout(model.routing[static_cast<std::size_t>(i)],
                        routing_rollouts[static_cast<std::size_t>(i)],
                        other_routing_results(failed_routings, i), 0.0);
        if (replays_full(model.routing)) train_module(model.routing, hyper, rng);
        previous_epoch_failed = true;
        log.epochs.push_back(entry);
        continue;
      }
    }
    entry.all_srr = all_clean(routing_rollouts);

    // ---- joint rewards on the assembled results ----
    std::vector<Deployment> deployments;
    for (int i = 0; i < agents; ++i) {
      std::vector<StepAction> acts;
      for (int node : placements[static_cast<std::size_t>(i)]) acts.push_back({node});
      deployments.push_back(make_deployment(compose_placement(acts, model.nodes),
                                            routing_rollouts[static_cast<std::size_t>(i)].routing,
                                            routing_rollouts[static_cast<std::size_t>(i)].hops,
                                            batch[static_cast<std::size_t>(i)].rate));
    }
    const auto joint = joint_reward(deployments, batch, net, catalog, joint_coeffs, hyper.psi_cost,
                                    hyper.psi_delay);
    entry.joint_computed = true;
    entry.joint = joint;
    for (double r : joint) entry.total_joint += r;

    std::vector<Mat> routings;
    for (const auto& ro : routing_rollouts) routings.push_back(ro.routing);
    for (int i = 0; i < agents; ++i) {
      store_rollout(model.placement[static_cast<std::size_t>(i)],
                    placement_rollouts[static_cast<std::size_t>(i)],
                    other_placement_results(padded, i), joint[static_cast<std::size_t>(i)]);
      store_rollout(model.routing[static_cast<std::size_t>(i)],
                    routing_rollouts[static_cast<std::size_t>(i)],
                    other_routing_results(routings, i), joint[static_cast<std::size_t>(i)]);
    }
    if (replays_full(model.placement)) train_module(model.placement, hyper, rng);
    if (replays_full(model.routing)) train_module(model.routing, hyper, rng);

    previous_epoch_failed = false;
    log.epochs.push_back(entry);
  }
  return log;
}

// ---------------------------------------------------------------------------
// deployment
// ---------------------------------------------------------------------------

DeploymentResult deploy_all(const std::vector<ServiceRequest>& requests,
                            const SubstrateNetwork& net, const VnfCatalog& catalog,
                            const TrainedModel& model) {
  DeploymentResult result;
  if (requests.empty()) return result;
  if (net.node_count != model.nodes || catalog.category_count() != model.categories)
    throw std::invalid_argument("deploy_all: model was built for a different instance size");

  const auto batches = pad_to_batches(requests, model.batch_agents);
  ResourceLedger ledger = ResourceLedger::full_of(net);
  TrainedModel rollout_model = model;  // greedy rollouts leave the model untouched
  Rng rng(0);
  TraceSink no_trace;

  for (const auto& batch : batches) {
    EnvContext ctx{&net, &catalog, batch};
    const ResourceLedger snapshot = ledger;

    auto placement_rollouts = run_placement_phase(rollout_model, ctx, ledger, 0.0, rng, no_trace);
    std::vector<std::vector<int>> placements;
    for (const auto& ro : placement_rollouts) placements.push_back(ro.placed);
    const auto padded = padded_placements_of(ctx, placements);
    auto routing_rollouts =
        run_routing_phase(rollout_model, ctx, ledger, placements, padded, 0.0, rng, no_trace);

    std::vector<Deployment> deployments;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::vector<StepAction> acts;
      for (int node : placements[i]) acts.push_back({node});
      deployments.push_back(make_deployment(compose_placement(acts, model.nodes),
                                            routing_rollouts[i].routing, routing_rollouts[i].hops,
                                            batch[i].rate));
    }

    // validate against the resources that were actually left for this batch
    SubstrateNetwork remaining_net = net;
    remaining_net.compute_cap = snapshot.remaining_compute;
    remaining_net.memory_cap = snapshot.remaining_memory;
    remaining_net.bandwidth_cap = snapshot.remaining_bandwidth;
    bool feasible = all_clean(placement_rollouts) && all_clean(routing_rollouts);
    if (feasible) {
      const auto report = validate(deployments, batch, remaining_net, catalog);
      feasible = report.feasible();
    }

    if (!feasible) ledger = snapshot;  // rejected batches consume nothing
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (batch[i].is_padding()) continue;
      result.deployments.push_back(deployments[i]);
      result.accepted.push_back(feasible);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// parameter migration
// ---------------------------------------------------------------------------

namespace {

Layer remap_input_layer(const Layer& old_layer, const std::vector<int>& input_map, Rng& rng) {
  Layer layer;
  layer.activation = old_layer.activation;
  layer.trainable = true;
  layer.bias = old_layer.bias;
  layer.weights = Mat(old_layer.out_dim(), static_cast<int>(input_map.size()));
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_map.size()));
  for (int r = 0; r < layer.weights.rows; ++r) {
    for (int c = 0; c < layer.weights.cols; ++c) {
      const int src = input_map[static_cast<std::size_t>(c)];
      layer.weights(r, c) = src >= 0 ? old_layer.weights(r, src) : rng.uniform(-bound, bound);
    }
  }
  return layer;
}

Layer remap_output_layer(const Layer& old_layer, int new_rows, Rng& rng) {
  Layer layer;
  layer.activation = old_layer.activation;
  layer.trainable = true;
  layer.weights = Mat(new_rows, old_layer.in_dim());
  layer.bias.assign(static_cast<std::size_t>(new_rows), 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(old_layer.in_dim()));
  for (int r = 0; r < new_rows; ++r) {
    for (int c = 0; c < old_layer.in_dim(); ++c)
      layer.weights(r, c) = r < old_layer.out_dim() ? old_layer.weights(r, c)
                                                    : rng.uniform(-bound, bound);
    layer.bias[static_cast<std::size_t>(r)] =
        r < old_layer.out_dim() ? old_layer.bias[static_cast<std::size_t>(r)] : rng.uniform(-bound, bound);
  }
  return layer;
}

// trunk input = [base fields, bottleneck embedding scalars]
Layout trunk_layout(Layout base, int bottleneck_width) {
  base.push_back({FieldKind::Scalar, bottleneck_width});
  return base;
}

Layout concat(Layout a, const Layout& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void migrate_net(AgentNet& net, const Layout& trunk_in, const Layout& enc_in, bool actor_output,
                 int old_nodes, int new_nodes, int categories, Rng& rng) {
  for (auto& layer : net.trunk.layers) layer.trainable = false;
  for (auto& layer : net.other_enc.layers) layer.trainable = false;

  if (new_nodes != old_nodes) {
    net.trunk.layers.front() = remap_input_layer(
        net.trunk.layers.front(), layout_remap(trunk_in, old_nodes, new_nodes, categories), rng);
    net.other_enc.layers.front() = remap_input_layer(
        net.other_enc.layers.front(), layout_remap(enc_in, old_nodes, new_nodes, categories), rng);
    if (actor_output)
      net.trunk.layers.back() = remap_output_layer(net.trunk.layers.back(), new_nodes, rng);
  } else {
    net.trunk.layers.front().trainable = true;
    net.other_enc.layers.front().trainable = true;
    if (actor_output) net.trunk.layers.back().trainable = true;
  }
}

}  // namespace

TrainedModel migrate(const TrainedModel& model, const SubstrateNetwork& new_net,
                     std::uint64_t seed) {
  const int old_nodes = model.nodes;
  const int new_nodes = new_net.node_count;
  if (new_nodes < old_nodes)
    throw std::invalid_argument("migrate: node removal is unsupported");

  TrainedModel out = model;
  out.nodes = new_nodes;
  Rng rng(seed);
  const int k = model.categories;
  const int m = model.batch_agents;
  const int bw = model.hyper.bottleneck_width;

  const Layout p_actor_in = trunk_layout(
      concat(placement_self_layout(), placement_sn_layout()), bw);
  Layout p_critic_base = concat(placement_self_layout(), placement_sn_layout());
  p_critic_base.push_back({FieldKind::PerNode, 1});  // action
  const Layout p_critic_in = trunk_layout(concat(p_critic_base, placement_result_layout(m)), bw);

  const Layout r_actor_in = trunk_layout(concat(routing_self_layout(), routing_sn_layout()), bw);
  Layout r_critic_base = concat(routing_self_layout(), routing_sn_layout());
  r_critic_base.push_back({FieldKind::PerNode, 1});
  const Layout r_critic_in = trunk_layout(concat(r_critic_base, routing_result_layout(m)), bw);

  for (auto& bundle : out.placement) {
    migrate_net(bundle.actor, p_actor_in, placement_other_layout(m), true, old_nodes, new_nodes, k, rng);
    migrate_net(bundle.target_actor, p_actor_in, placement_other_layout(m), true, old_nodes,
                new_nodes, k, rng);
    migrate_net(bundle.critic, p_critic_in, placement_other_layout(m), false, old_nodes, new_nodes,
                k, rng);
    migrate_net(bundle.target_critic, p_critic_in, placement_other_layout(m), false, old_nodes,
                new_nodes, k, rng);
    bundle.action_dim = new_nodes;
    bundle.reset_optimizers(model.hyper.rmsprop_decay, model.hyper.rmsprop_epsilon);
  }
  for (auto& bundle : out.routing) {
    migrate_net(bundle.actor, r_actor_in, routing_other_layout(m), true, old_nodes, new_nodes, k, rng);
    migrate_net(bundle.target_actor, r_actor_in, routing_other_layout(m), true, old_nodes,
                new_nodes, k, rng);
    migrate_net(bundle.critic, r_critic_in, routing_other_layout(m), false, old_nodes, new_nodes, k,
                rng);
    migrate_net(bundle.target_critic, r_critic_in, routing_other_layout(m), false, old_nodes,
                new_nodes, k, rng);
    bundle.action_dim = new_nodes;
    bundle.reset_optimizers(model.hyper.rmsprop_decay, model.hyper.rmsprop_epsilon);
  }
  return out;
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

namespace {

nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    nlohmann::json j;
    j["rows"] = layer.weights.rows;
    j["cols"] = layer.weights.cols;
    j["weights"] = layer.weights.data;
    j["bias"] = layer.bias;
    j["activation"] = activation_name(layer.activation);
    j["trainable"] = layer.trainable;
    layers.push_back(std::move(j));
  }
  return nlohmann::json{{"layers", layers}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net;
  for (const auto& l : j.at("layers")) {
    Layer layer;
    layer.weights = Mat(l.at("rows").get<int>(), l.at("cols").get<int>());
    layer.weights.data = l.at("weights").get<std::vector<double>>();
    if (layer.weights.data.size() !=
        static_cast<std::size_t>(layer.weights.rows) * layer.weights.cols)
      throw std::runtime_error("checkpoint: weight size mismatch");
    layer.bias = l.at("bias").get<std::vector<double>>();
    layer.activation = activation_from_name(l.at("activation").get<std::string>());
    layer.trainable = l.at("trainable").get<bool>();
    net.layers.push_back(std::move(layer));
  }
  return net;
}

nlohmann::json agentnet_to_json(const AgentNet& net) {
  return nlohmann::json{{"other_enc", mlp_to_json(net.other_enc)},
                        {"trunk", mlp_to_json(net.trunk)}};
}

AgentNet agentnet_from_json(const nlohmann::json& j) {
  AgentNet net;
  net.other_enc = mlp_from_json(j.at("other_enc"));
  net.trunk = mlp_from_json(j.at("trunk"));
  return net;
}

nlohmann::json hyper_json(const HyperParams& h) {
  nlohmann::json j;
  j["lr_placement_actor"] = h.lr_placement_actor;
  j["lr_routing_actor"] = h.lr_routing_actor;
  j["lr_placement_critic"] = h.lr_placement_critic;
  j["lr_routing_critic"] = h.lr_routing_critic;
  j["gamma"] = h.gamma;
  j["epochs"] = h.epochs;
  j["max_placement_episodes"] = h.max_placement_episodes;
  j["max_routing_episodes"] = h.max_routing_episodes;
  j["placement_pre_limit"] = h.placement_pre_limit;
  j["routing_pre_limit"] = h.routing_pre_limit;
  j["batch_size"] = h.batch_size;
  j["replay_capacity"] = h.replay_capacity;
  j["refine_update_every"] = h.refine_update_every;
  j["update_iterations"] = h.update_iterations;
  j["actor_logit_decay"] = h.actor_logit_decay;
  j["actor_update_delay"] = h.actor_update_delay;
  j["tau"] = h.tau;
  j["rmsprop_decay"] = h.rmsprop_decay;
  j["rmsprop_epsilon"] = h.rmsprop_epsilon;
  j["noise_sigma_start"] = h.noise_sigma_start;
  j["noise_sigma_end"] = h.noise_sigma_end;
  j["noise_sigma_refine_floor"] = h.noise_sigma_refine_floor;
  j["omega_placement"] = h.internal.omega_placement;
  j["omega_class1"] = h.internal.omega_class1;
  j["omega_class2"] = h.internal.omega_class2;
  j["omega_class3"] = h.internal.omega_class3;
  j["omega_dec"] = h.omega_dec;
  j["omega_trans"] = h.omega_trans;
  j["omega_scal"] = h.omega_scal;
  j["psi_cost"] = h.psi_cost;
  j["psi_delay"] = h.psi_delay;
  j["hidden_width"] = h.hidden_width;
  j["bottleneck_width"] = h.bottleneck_width;
  j["residual_blocks"] = h.residual_blocks;
  j["rng_algorithm"] = Rng::kAlgorithmId;
  return j;
}

HyperParams hyper_from(const nlohmann::json& j) {
  HyperParams h;
  h.lr_placement_actor = j.value("lr_placement_actor", h.lr_placement_actor);
  h.lr_routing_actor = j.value("lr_routing_actor", h.lr_routing_actor);
  h.lr_placement_critic = j.value("lr_placement_critic", h.lr_placement_critic);
  h.lr_routing_critic = j.value("lr_routing_critic", h.lr_routing_critic);
  h.gamma = j.value("gamma", h.gamma);
  h.epochs = j.value("epochs", h.epochs);
  h.max_placement_episodes = j.value("max_placement_episodes", h.max_placement_episodes);
  h.max_routing_episodes = j.value("max_routing_episodes", h.max_routing_episodes);
  h.placement_pre_limit = j.value("placement_pre_limit", h.placement_pre_limit);
  h.routing_pre_limit = j.value("routing_pre_limit", h.routing_pre_limit);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.replay_capacity = j.value("replay_capacity", h.replay_capacity);
  h.refine_update_every = j.value("refine_update_every", h.refine_update_every);
  h.update_iterations = j.value("update_iterations", h.update_iterations);
  h.actor_logit_decay = j.value("actor_logit_decay", h.actor_logit_decay);
  h.actor_update_delay = j.value("actor_update_delay", h.actor_update_delay);
  h.tau = j.value("tau", h.tau);
  h.rmsprop_decay = j.value("rmsprop_decay", h.rmsprop_decay);
  h.rmsprop_epsilon = j.value("rmsprop_epsilon", h.rmsprop_epsilon);
  h.noise_sigma_start = j.value("noise_sigma_start", h.noise_sigma_start);
  h.noise_sigma_end = j.value("noise_sigma_end", h.noise_sigma_end);
  h.noise_sigma_refine_floor = j.value("noise_sigma_refine_floor", h.noise_sigma_refine_floor);
  h.internal.omega_placement = j.value("omega_placement", h.internal.omega_placement);
  h.internal.omega_class1 = j.value("omega_class1", h.internal.omega_class1);
  h.internal.omega_class2 = j.value("omega_class2", h.internal.omega_class2);
  h.internal.omega_class3 = j.value("omega_class3", h.internal.omega_class3);
  h.omega_dec = j.value("omega_dec", h.omega_dec);
  h.omega_trans = j.value("omega_trans", h.omega_trans);
  h.omega_scal = j.value("omega_scal", h.omega_scal);
  h.psi_cost = j.value("psi_cost", h.psi_cost);
  h.psi_delay = j.value("psi_delay", h.psi_delay);
  h.hidden_width = j.value("hidden_width", h.hidden_width);
  h.bottleneck_width = j.value("bottleneck_width", h.bottleneck_width);
  h.residual_blocks = j.value("residual_blocks", h.residual_blocks);
  return h;
}

}  // namespace

std::string hyper_to_json(const HyperParams& hyper) { return hyper_json(hyper).dump(2); }

HyperParams hyper_from_json(const std::string& text) {
  return hyper_from(nlohmann::json::parse(text));
}

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["nodes"] = model.nodes;
  j["categories"] = model.categories;
  j["batch_agents"] = model.batch_agents;
  j["hyper"] = hyper_json(model.hyper);
  auto bundles_json = [](const std::vector<AgentBundle>& bundles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : bundles) {
      arr.push_back(nlohmann::json{{"actor", agentnet_to_json(b.actor)},
                                   {"critic", agentnet_to_json(b.critic)},
                                   {"target_actor", agentnet_to_json(b.target_actor)},
                                   {"target_critic", agentnet_to_json(b.target_critic)}});
    }
    return arr;
  };
  j["placement"] = bundles_json(model.placement);
  j["routing"] = bundles_json(model.routing);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("checkpoint: unsupported format version");

  const int nodes = j.at("nodes").get<int>();
  const int categories = j.at("categories").get<int>();
  const int agents = j.at("batch_agents").get<int>();
  const HyperParams hyper = hyper_from(j.at("hyper"));

  TrainedModel model = make_model(nodes, categories, agents, hyper, 0);
  auto load_bundles = [&](std::vector<AgentBundle>& bundles, const nlohmann::json& arr) {
    if (arr.size() != bundles.size()) throw std::runtime_error("checkpoint: bundle count mismatch");
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      bundles[i].actor = agentnet_from_json(arr[i].at("actor"));
      bundles[i].critic = agentnet_from_json(arr[i].at("critic"));
      bundles[i].target_actor = agentnet_from_json(arr[i].at("target_actor"));
      bundles[i].target_critic = agentnet_from_json(arr[i].at("target_critic"));
      bundles[i].reset_optimizers(hyper.rmsprop_decay, hyper.rmsprop_epsilon);
    }
  };
  load_bundles(model.placement, j.at("placement"));
  load_bundles(model.routing, j.at("routing"));
  return model;
}

}  // namespace vnfpr
