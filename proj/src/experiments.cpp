#include "vnfpr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace vnfpr {

void ExperimentConfig::check() const {
  if (topology_path.empty()) throw std::invalid_argument("config: topology path is empty");
  if (seeds.empty()) throw std::invalid_argument("config: seeds list is empty");
  if (method != "madrl" && method != "greedy-bestfit" && method != "greedy-nearest" &&
      method != "exact")
    throw std::invalid_argument("config: unknown method '" + method + "'");
  if (request_count < 1) throw std::invalid_argument("config: request_count must be >= 1");
  if (mean_delay_factor < 0.0 || mean_delay_factor > 1.0)
    throw std::invalid_argument("config: mean_delay_factor outside [0,1]");
  if (batch_agents < 1) throw std::invalid_argument("config: batch_agents must be >= 1");
  if (categories < 1) throw std::invalid_argument("config: categories must be >= 1");
  if (cdf_points < 1) throw std::invalid_argument("config: cdf_points must be >= 1");
  if (smoothing_window < 1) throw std::invalid_argument("config: smoothing_window must be >= 1");
  hyper.check();
}

namespace {

DistributionSpec::Range range_from(const nlohmann::json& j, const DistributionSpec::Range& fallback) {
  if (j.is_null()) return fallback;
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json range_json(const DistributionSpec::Range& r) {
  return nlohmann::json::array({r.lo, r.hi});
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentConfig c;
  c.topology_path = j.at("topology").get<std::string>();
  c.instance_seed = j.value("instance_seed", c.instance_seed);
  c.categories = j.value("categories", c.categories);
  c.catalog_seed = j.value("catalog_seed", c.catalog_seed);
  if (j.contains("dist")) {
    const auto& d = j.at("dist");
    c.dist.compute_cap = range_from(d.value("compute_cap", nlohmann::json()), c.dist.compute_cap);
    c.dist.memory_cap = range_from(d.value("memory_cap", nlohmann::json()), c.dist.memory_cap);
    c.dist.compute_cost = range_from(d.value("compute_cost", nlohmann::json()), c.dist.compute_cost);
    c.dist.memory_cost = range_from(d.value("memory_cost", nlohmann::json()), c.dist.memory_cost);
    c.dist.bandwidth_cap =
        range_from(d.value("bandwidth_cap", nlohmann::json()), c.dist.bandwidth_cap);
    c.dist.bandwidth_cost =
        range_from(d.value("bandwidth_cost", nlohmann::json()), c.dist.bandwidth_cost);
    c.dist.deploy_cost = range_from(d.value("deploy_cost", nlohmann::json()), c.dist.deploy_cost);
    c.dist.link_delay = range_from(d.value("link_delay", nlohmann::json()), c.dist.link_delay);
    c.dist.node_fixed_delay = d.value("node_fixed_delay", c.dist.node_fixed_delay);
  }
  c.dist.vnf_categories = c.categories;
  if (j.contains("requests")) {
    const auto& r = j.at("requests");
    c.request_count = r.value("count", c.request_count);
    c.rate = r.value("rate", c.rate);
    c.mean_delay_factor = r.value("mean_delay_factor", c.mean_delay_factor);
    c.min_chain = r.value("min_chain", c.min_chain);
    c.max_chain = r.value("max_chain", c.max_chain);
  }
  c.method = j.value("method", c.method);
  c.batch_agents = j.value("batch_agents", c.batch_agents);
  if (j.contains("hyper")) c.hyper = hyper_from_json(j.at("hyper").dump());
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.output_dir = j.value("output_dir", c.output_dir);
  c.cdf_points = j.value("cdf_points", c.cdf_points);
  c.smoothing_window = j.value("smoothing_window", c.smoothing_window);
  c.check();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["topology"] = c.topology_path;
  j["instance_seed"] = c.instance_seed;
  j["categories"] = c.categories;
  j["catalog_seed"] = c.catalog_seed;
  j["dist"] = {{"compute_cap", range_json(c.dist.compute_cap)},
               {"memory_cap", range_json(c.dist.memory_cap)},
               {"compute_cost", range_json(c.dist.compute_cost)},
               {"memory_cost", range_json(c.dist.memory_cost)},
               {"bandwidth_cap", range_json(c.dist.bandwidth_cap)},
               {"bandwidth_cost", range_json(c.dist.bandwidth_cost)},
               {"deploy_cost", range_json(c.dist.deploy_cost)},
               {"link_delay", range_json(c.dist.link_delay)},
               {"node_fixed_delay", c.dist.node_fixed_delay}};
  j["requests"] = {{"count", c.request_count},
                   {"rate", c.rate},
                   {"mean_delay_factor", c.mean_delay_factor},
                   {"min_chain", c.min_chain},
                   {"max_chain", c.max_chain}};
  j["method"] = c.method;
  j["batch_agents"] = c.batch_agents;
  j["hyper"] = nlohmann::json::parse(hyper_to_json(c.hyper));
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["cdf_points"] = c.cdf_points;
  j["smoothing_window"] = c.smoothing_window;
  return j.dump(2);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

namespace {

struct Instance {
  SubstrateNetwork net;
  VnfCatalog catalog;
};

Instance build_instance(const ExperimentConfig& config) {
  Instance inst;
  const SubstrateNetwork structure = load_topology_file(config.topology_path);
  DistributionSpec dist = config.dist;
  dist.vnf_categories = config.categories;
  inst.net = config.instance_seed != 0 ? generate_instance(structure, config.instance_seed, dist)
                                       : structure;
  inst.catalog = sample_catalog(config.categories, config.catalog_seed, config.catalog_dist);
  return inst;
}

std::vector<ServiceRequest> build_requests(const ExperimentConfig& config,
                                           const SubstrateNetwork& net,
                                           const VnfCatalog& catalog, std::uint64_t seed,
                                           int count) {
  RequestGenParams params;
  params.rate = config.rate;
  params.min_chain = config.min_chain;
  params.max_chain = config.max_chain;
  return generate_requests(net, catalog, count, config.mean_delay_factor, seed, params);
}

TrainedModel train_for_experiment(const ExperimentConfig& config, const SubstrateNetwork& net,
                                  const VnfCatalog& catalog,
                                  const std::vector<ServiceRequest>& requests, std::uint64_t seed) {
  const auto batches = pad_to_batches(requests, config.batch_agents);
  TrainedModel model =
      make_model(net.node_count, catalog.category_count(), config.batch_agents, config.hyper, seed);
  train(model, batches.front(), net, catalog, seed);
  return model;
}

}  // namespace

MethodOutput run_method(const std::string& method, const std::vector<ServiceRequest>& requests,
                        const SubstrateNetwork& net, const VnfCatalog& catalog,
                        const TrainedModel* model, const ExperimentConfig& config) {
  MethodOutput out;
  if (method == "greedy-bestfit") {
    auto r = greedy_bestfit(requests, net, catalog);
    out.deployments = std::move(r.deployments);
    out.accepted = std::move(r.accepted);
  } else if (method == "greedy-nearest") {
    auto r = greedy_nearest(requests, net, catalog);
    out.deployments = std::move(r.deployments);
    out.accepted = std::move(r.accepted);
  } else if (method == "exact") {
    auto r = exact_solve(requests, net, catalog, config.hyper.psi_cost, config.hyper.psi_delay);
    if (r.feasible) {
      out.deployments = std::move(r.deployments);
      out.accepted.assign(requests.size(), true);
    } else {
      for (const auto& req : requests) {
        Deployment dep;
        dep.placement = Mat(req.chain_length(), net.node_count);
        dep.routing = Mat(net.node_count, net.node_count);
        dep.hops = Mat(net.node_count, net.node_count);
        dep.flow = Mat(net.node_count, net.node_count);
        out.deployments.push_back(std::move(dep));
      }
      out.accepted.assign(requests.size(), false);
    }
  } else if (method == "madrl") {
    if (!model) throw std::invalid_argument("run_method: madrl needs a trained model");
    auto r = deploy_all(requests, net, catalog, *model);
    out.deployments = std::move(r.deployments);
    out.accepted = std::move(r.accepted);
  } else {
    throw std::invalid_argument("run_method: unknown method " + method);
  }
  for (std::size_t i = 0; i < requests.size(); ++i)
    if (requests[i].is_padding() && i < out.accepted.size()) out.accepted[i] = false;
  return out;
}

namespace {

MetricsRecord metrics_of(const std::vector<ServiceRequest>& requests, const MethodOutput& output,
                         const SubstrateNetwork& net, const VnfCatalog& catalog,
                         const HyperParams& hyper, std::uint64_t seed) {
  MetricsRecord rec;
  rec.seed = seed;
  int total = 0, accepted = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    if (req.is_padding()) continue;
    ++total;
    PerRequestRecord pr;
    pr.id = req.id;
    pr.accepted = output.accepted[i];
    if (pr.accepted) {
      ++accepted;
      pr.cost = evaluate_cost(output.deployments[i], req, net, catalog);
      pr.delay = evaluate_delay(output.deployments[i], req, net, catalog);
      pr.weighted = req.cost_factor * hyper.psi_cost * pr.cost +
                    req.delay_factor * hyper.psi_delay * pr.delay;
      rec.throughput += req.rate;
      rec.objective += pr.weighted;
    }
    rec.per_request.push_back(pr);
  }
  rec.acceptance_ratio = total > 0 ? static_cast<double>(accepted) / total : 0.0;
  return rec;
}

}  // namespace

namespace {

int thread_cap() {
  const char* env = std::getenv("VNF_ORCH_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config) {
  config.check();
  const Instance inst = build_instance(config);

  std::vector<MetricsRecord> records(config.seeds.size());
  auto run_seed = [&](std::size_t idx) {
    const std::uint64_t seed = config.seeds[idx];
    const auto requests =
        build_requests(config, inst.net, inst.catalog, seed, config.request_count);

    TrainedModel model;
    const TrainedModel* model_ptr = nullptr;
    if (config.method == "madrl") {
      model = train_for_experiment(config, inst.net, inst.catalog, requests, seed);
      model_ptr = &model;
    }
    const MethodOutput output =
        run_method(config.method, requests, inst.net, inst.catalog, model_ptr, config);

    // accepted deployments must stand up to the whole-solution validator
    std::vector<Deployment> accepted_deps;
    std::vector<ServiceRequest> accepted_reqs;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (output.accepted[i]) {
        accepted_deps.push_back(output.deployments[i]);
        accepted_reqs.push_back(requests[i]);
      }
    }
    if (!accepted_deps.empty() &&
        !validate(accepted_deps, accepted_reqs, inst.net, inst.catalog).feasible())
      throw std::runtime_error("run_experiment: accepted deployment failed validation");

    records[idx] = metrics_of(requests, output, inst.net, inst.catalog, config.hyper, seed);
  };

  // seeds run independently; records land in seed order either way
  const int threads = std::min<int>(thread_cap(), static_cast<int>(config.seeds.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) run_seed(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < config.seeds.size();
             i += static_cast<std::size_t>(threads))
          run_seed(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (!config.output_dir.empty()) write_metrics_files(config, records);
  return records;
}

std::vector<std::pair<double, double>> emit_cdf(const std::vector<double>& values, int points) {
  if (values.empty()) throw std::invalid_argument("emit_cdf: empty input");
  if (points < 1) throw std::invalid_argument("emit_cdf: points must be >= 1");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  for (int p = 1; p <= points; ++p) {
    const double q = static_cast<double>(p) / points;
    const auto idx = static_cast<std::size_t>(
        std::max(0.0, std::ceil(q * n) - 1.0));
    const double x = sorted[std::min(idx, sorted.size() - 1)];
    const double f =
        static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) / n;
    out.emplace_back(x, f);
  }
  return out;
}

double ecdf_at(const std::vector<double>& values, double x) {
  if (values.empty()) throw std::invalid_argument("ecdf_at: empty input");
  double count = 0.0;
  for (double v : values)
    if (v <= x) count += 1.0;
  return count / static_cast<double>(values.size());
}

std::vector<SweepPoint> throughput_sweep(const ExperimentConfig& config, std::uint64_t seed,
                                         const std::vector<int>& request_counts) {
  config.check();
  if (request_counts.empty()) throw std::invalid_argument("throughput_sweep: no request counts");
  const Instance inst = build_instance(config);
  const int max_count = *std::max_element(request_counts.begin(), request_counts.end());
  const auto full_stream = build_requests(config, inst.net, inst.catalog, seed, max_count);

  TrainedModel model;
  const TrainedModel* model_ptr = nullptr;
  if (config.method == "madrl") {
    model = train_for_experiment(config, inst.net, inst.catalog, full_stream, seed);
    model_ptr = &model;
  }

  std::vector<SweepPoint> out;
  for (int count : request_counts) {
    const std::vector<ServiceRequest> prefix(full_stream.begin(), full_stream.begin() + count);
    const MethodOutput output =
        run_method(config.method, prefix, inst.net, inst.catalog, model_ptr, config);
    const MetricsRecord rec =
        metrics_of(prefix, output, inst.net, inst.catalog, config.hyper, seed);
    out.push_back({count, rec.throughput, rec.acceptance_ratio});
  }
  return out;
}

MigrationOutcome migration_study(const ExperimentConfig& config, std::uint64_t seed,
                                 ChangeKind kind, int link_count) {
  config.check();
  const Instance inst = build_instance(config);
  const auto requests =
      build_requests(config, inst.net, inst.catalog, seed, config.batch_agents);
  const auto batch = pad_to_batches(requests, config.batch_agents).front();

  TrainedModel base = make_model(inst.net.node_count, inst.catalog.category_count(),
                                 config.batch_agents, config.hyper, seed);
  const TrainLog base_log = train(base, batch, inst.net, inst.catalog, seed);
  const auto base_smoothed = base_log.smoothed_totals(config.smoothing_window);
  if (base_smoothed.empty()) throw std::runtime_error("migration_study: base training ran 0 epochs");

  MigrationOutcome outcome;
  outcome.threshold = 0.95 * base_smoothed.back();

  const TopologyChange change =
      kind == ChangeKind::LinksOnly
          ? TopologyChange::sample_links(inst.net, link_count, seed + 101, config.dist)
          : TopologyChange::sample_node_with_links(inst.net, link_count, seed + 101, config.dist);
  const SubstrateNetwork mutated = mutate_topology(inst.net, change);

  auto epochs_to_threshold = [&](const TrainLog& log) {
    const auto smoothed = log.smoothed_totals(config.smoothing_window);
    for (std::size_t e = 0; e < smoothed.size(); ++e)
      if (smoothed[e] >= outcome.threshold) return static_cast<int>(e + 1);
    return -1;
  };

  TrainedModel migrated = migrate(base, mutated, seed + 202);
  const TrainLog migrated_log = train(migrated, batch, mutated, inst.catalog, seed + 303);
  outcome.epochs_migrated = epochs_to_threshold(migrated_log);
  outcome.censored_migrated = outcome.epochs_migrated < 0;

  TrainedModel retrained = make_model(mutated.node_count, inst.catalog.category_count(),
                                      config.batch_agents, config.hyper, seed + 404);
  const TrainLog retrained_log = train(retrained, batch, mutated, inst.catalog, seed + 303);
  outcome.epochs_retrained = epochs_to_threshold(retrained_log);
  outcome.censored_retrained = outcome.epochs_retrained < 0;
  return outcome;
}

// ---------------------------------------------------------------------------
// file output
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void write_metrics_files(const ExperimentConfig& config, const std::vector<MetricsRecord>& records) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  for (const auto& rec : records) {
    std::ofstream out(fs::path(config.output_dir) /
                      ("requests_seed" + std::to_string(rec.seed) + ".csv"));
    out << "id,accepted,cost,delay,weighted\n";
    for (const auto& pr : rec.per_request)
      out << pr.id << "," << (pr.accepted ? 1 : 0) << "," << fmt(pr.cost) << "," << fmt(pr.delay)
          << "," << fmt(pr.weighted) << "\n";
  }

  {
    std::ofstream out(fs::path(config.output_dir) / "summary.csv");
    out << "seed,acceptance_ratio,throughput,objective\n";
    for (const auto& rec : records)
      out << rec.seed << "," << fmt(rec.acceptance_ratio) << "," << fmt(rec.throughput) << ","
          << fmt(rec.objective) << "\n";
  }

  {
    const std::string config_text = config_to_json(config);
    nlohmann::json manifest;
    manifest["schema_version"] = "1.0.0";
    manifest["config"] = nlohmann::json::parse(config_text);
    manifest["config_hash"] = fnv1a(config_text);
    manifest["smoothing_window"] = config.smoothing_window;
    manifest["rng_algorithm"] = Rng::kAlgorithmId;
    std::ofstream out(fs::path(config.output_dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
}

}  // namespace vnfpr
