#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vnfpr/experiments.hpp"

namespace {

using namespace vnfpr;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << text;
}

SubstrateNetwork load_instance(const std::string& topology, std::uint64_t instance_seed,
                               int categories) {
  SubstrateNetwork structure = load_topology_file(topology);
  if (instance_seed == 0) return structure;
  DistributionSpec dist;
  dist.vnf_categories = categories;
  return generate_instance(structure, instance_seed, dist);
}

int run_check(const std::string& deployment_path, const std::string& topology,
              std::uint64_t instance_seed, const std::string& catalog_path,
              const std::string& requests_path) {
  const VnfCatalog catalog = catalog_from_json(slurp(catalog_path));
  const SubstrateNetwork net = load_instance(topology, instance_seed, catalog.category_count());
  const auto requests = requests_from_jsonl(slurp(requests_path));

  std::vector<Deployment> deployments;
  std::vector<ServiceRequest> matched;
  std::istringstream lines(slurp(deployment_path));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    int request_id = -1;
    Deployment dep = deployment_from_json(line, net.node_count, &request_id);
    const ServiceRequest* req = nullptr;
    for (const auto& r : requests)
      if (r.id == request_id) req = &r;
    if (!req) throw std::runtime_error("deployment references unknown request id " +
                                       std::to_string(request_id));
    deployments.push_back(std::move(dep));
    matched.push_back(*req);
  }

  const ConstraintReport report = validate(deployments, matched, net, catalog);
  for (int c = 1; c <= 18; ++c)
    std::cout << "C" << c << ": " << (report.ok(c) ? "ok" : "violated") << "\n";
  if (!report.support_ok) std::cout << "routing uses non-links\n";
  std::cout << (report.feasible() ? "FEASIBLE" : "INFEASIBLE") << "\n";
  return report.feasible() ? 0 : 1;
}

std::string deployments_jsonl(const MethodOutput& output,
                              const std::vector<ServiceRequest>& requests) {
  std::ostringstream out;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (requests[i].is_padding() || !output.accepted[i]) continue;
    out << deployment_to_json(output.deployments[i], requests[i]) << "\n";
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"service chain placement and routing engine"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate an instance bundle (catalog + requests)");
  std::string gen_topology, gen_out = ".";
  std::uint64_t gen_instance_seed = 1, gen_catalog_seed = 1, gen_seed = 1;
  int gen_categories = 10, gen_requests = 20;
  double gen_rate = 5.4, gen_mdf = 0.5;
  gen->add_option("--topology", gen_topology)->required();
  gen->add_option("--seed", gen_seed, "request generation seed");
  gen->add_option("--instance-seed", gen_instance_seed);
  gen->add_option("--catalog-seed", gen_catalog_seed);
  gen->add_option("--categories", gen_categories);
  gen->add_option("--requests", gen_requests);
  gen->add_option("--rate", gen_rate);
  gen->add_option("--mean-delay-factor", gen_mdf);
  gen->add_option("--out-dir", gen_out);

  // ---- check ----
  auto* check = app.add_subcommand("check", "validate a deployment file");
  std::string check_deployment, check_topology, check_catalog, check_requests;
  std::uint64_t check_instance_seed = 1;
  check->add_option("--deployment", check_deployment)->required();
  check->add_option("--topology", check_topology)->required();
  check->add_option("--instance-seed", check_instance_seed);
  check->add_option("--catalog", check_catalog)->required();
  check->add_option("--requests", check_requests)->required();

  // ---- solve-exact / solve-greedy ----
  auto* solve_exact = app.add_subcommand("solve-exact", "exhaustive small-instance solver");
  auto* solve_greedy = app.add_subcommand("solve-greedy", "greedy heuristics");
  std::string solve_topology, solve_catalog, solve_requests, solve_out, greedy_kind = "bestfit";
  std::uint64_t solve_instance_seed = 1;
  for (auto* cmd : {solve_exact, solve_greedy}) {
    cmd->add_option("--topology", solve_topology)->required();
    cmd->add_option("--instance-seed", solve_instance_seed);
    cmd->add_option("--catalog", solve_catalog)->required();
    cmd->add_option("--requests", solve_requests)->required();
    cmd->add_option("--out", solve_out, "deployments JSONL output path");
  }
  solve_greedy->add_option("--method", greedy_kind, "bestfit | nearest");

  // ---- train / deploy / migrate ----
  auto* train_cmd = app.add_subcommand("train", "train the multi-agent model");
  std::string train_config, train_out = "model.ckpt", train_trace;
  train_cmd->add_option("--config", train_config)->required();
  train_cmd->add_option("--out", train_out);
  train_cmd->add_option("--trace", train_trace, "episode trace JSONL path");

  auto* deploy_cmd = app.add_subcommand("deploy", "deploy requests with a trained model");
  std::string deploy_model, deploy_topology, deploy_catalog, deploy_requests, deploy_out;
  std::uint64_t deploy_instance_seed = 1;
  deploy_cmd->add_option("--model", deploy_model)->required();
  deploy_cmd->add_option("--topology", deploy_topology)->required();
  deploy_cmd->add_option("--instance-seed", deploy_instance_seed);
  deploy_cmd->add_option("--catalog", deploy_catalog)->required();
  deploy_cmd->add_option("--requests", deploy_requests)->required();
  deploy_cmd->add_option("--out", deploy_out, "deployments JSONL output path");

  auto* migrate_cmd = app.add_subcommand("migrate", "migrate a model to a changed topology");
  std::string migrate_model, migrate_topology, migrate_out = "migrated.ckpt";
  std::uint64_t migrate_instance_seed = 1, migrate_seed = 1;
  migrate_cmd->add_option("--model", migrate_model)->required();
  migrate_cmd->add_option("--topology", migrate_topology)->required();
  migrate_cmd->add_option("--instance-seed", migrate_instance_seed);
  migrate_cmd->add_option("--seed", migrate_seed);
  migrate_cmd->add_option("--out", migrate_out);

  // ---- run / cdf / migrate-study ----
  auto* run_cmd = app.add_subcommand("run", "run an experiment config");
  std::string run_config;
  run_cmd->add_option("--config", run_config)->required();

  auto* cdf_cmd = app.add_subcommand("cdf", "empirical CDF of a CSV column");
  std::string cdf_input, cdf_column = "cost", cdf_output;
  int cdf_points = 100;
  cdf_cmd->add_option("--input", cdf_input)->required();
  cdf_cmd->add_option("--column", cdf_column);
  cdf_cmd->add_option("--points", cdf_points);
  cdf_cmd->add_option("--output", cdf_output);

  auto* study_cmd = app.add_subcommand("migrate-study", "migration vs retraining comparison");
  std::string study_config, study_kind = "links";
  int study_links = 2;
  study_cmd->add_option("--config", study_config)->required();
  study_cmd->add_option("--kind", study_kind, "links | node");
  study_cmd->add_option("--links", study_links);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const SubstrateNetwork net = load_instance(gen_topology, gen_instance_seed, gen_categories);
      const VnfCatalog catalog = sample_catalog(gen_categories, gen_catalog_seed);
      RequestGenParams params;
      params.rate = gen_rate;
      const auto requests = generate_requests(net, catalog, gen_requests, gen_mdf, gen_seed, params);
      spit(gen_out + "/catalog.json", catalog_to_json(catalog));
      spit(gen_out + "/requests.jsonl", requests_to_jsonl(requests));
      std::cout << "wrote " << gen_out << "/catalog.json and " << gen_out << "/requests.jsonl\n";
    } else if (*check) {
      return run_check(check_deployment, check_topology, check_instance_seed, check_catalog,
                       check_requests);
    } else if (*solve_exact || *solve_greedy) {
      const VnfCatalog catalog = catalog_from_json(slurp(solve_catalog));
      const SubstrateNetwork net =
          load_instance(solve_topology, solve_instance_seed, catalog.category_count());
      const auto requests = requests_from_jsonl(slurp(solve_requests));
      ExperimentConfig dummy;
      MethodOutput output;
      if (*solve_exact) {
        output = run_method("exact", requests, net, catalog, nullptr, dummy);
      } else {
        output = run_method(greedy_kind == "nearest" ? "greedy-nearest" : "greedy-bestfit",
                            requests, net, catalog, nullptr, dummy);
      }
      int accepted = 0;
      double objective = 0.0;
      for (std::size_t i = 0; i < requests.size(); ++i) {
        if (!output.accepted[i]) continue;
        ++accepted;
        objective += requests[i].cost_factor *
                         evaluate_cost(output.deployments[i], requests[i], net, catalog) +
                     requests[i].delay_factor *
                         evaluate_delay(output.deployments[i], requests[i], net, catalog);
      }
      std::cout << "accepted " << accepted << "/" << requests.size() << " objective " << objective
                << "\n";
      if (!solve_out.empty()) spit(solve_out, deployments_jsonl(output, requests));
    } else if (*train_cmd) {
      const ExperimentConfig config = load_config_file(train_config);
      const SubstrateNetwork net =
          load_instance(config.topology_path, config.instance_seed, config.categories);
      const VnfCatalog catalog = sample_catalog(config.categories, config.catalog_seed,
                                                config.catalog_dist);
      RequestGenParams params;
      params.rate = config.rate;
      params.min_chain = config.min_chain;
      params.max_chain = config.max_chain;
      const auto requests = generate_requests(net, catalog, config.request_count,
                                              config.mean_delay_factor, config.seeds.front(),
                                              params);
      const auto batch = pad_to_batches(requests, config.batch_agents).front();
      TrainedModel model = make_model(net.node_count, catalog.category_count(),
                                      config.batch_agents, config.hyper, config.seeds.front());
      std::ofstream trace;
      std::ostream* trace_ptr = nullptr;
      if (!train_trace.empty()) {
        trace.open(train_trace);
        trace_ptr = &trace;
      }
      const TrainLog log = train(model, batch, net, catalog, config.seeds.front(), trace_ptr);
      save_checkpoint(model, train_out);
      int joint_epochs = 0;
      for (const auto& e : log.epochs)
        if (e.joint_computed) ++joint_epochs;
      std::cout << "trained " << log.epochs.size() << " epochs (" << joint_epochs
                << " with joint rewards), checkpoint at " << train_out << "\n";
    } else if (*deploy_cmd) {
      const TrainedModel model = load_checkpoint(deploy_model);
      const VnfCatalog catalog = catalog_from_json(slurp(deploy_catalog));
      const SubstrateNetwork net =
          load_instance(deploy_topology, deploy_instance_seed, catalog.category_count());
      const auto requests = requests_from_jsonl(slurp(deploy_requests));
      const auto result = deploy_all(requests, net, catalog, model);
      MethodOutput output{result.deployments, result.accepted};
      int accepted = 0;
      for (bool a : result.accepted)
        if (a) ++accepted;
      std::cout << "accepted " << accepted << "/" << requests.size() << "\n";
      if (!deploy_out.empty()) spit(deploy_out, deployments_jsonl(output, requests));
    } else if (*migrate_cmd) {
      const TrainedModel model = load_checkpoint(migrate_model);
      const SubstrateNetwork net =
          load_instance(migrate_topology, migrate_instance_seed, model.categories);
      const TrainedModel migrated = migrate(model, net, migrate_seed);
      save_checkpoint(migrated, migrate_out);
      std::cout << "migrated model written to " << migrate_out << "\n";
    } else if (*run_cmd) {
      const ExperimentConfig config = load_config_file(run_config);
      const auto records = run_experiment(config);
      for (const auto& rec : records)
        std::cout << "seed " << rec.seed << ": acceptance " << rec.acceptance_ratio
                  << " throughput " << rec.throughput << " objective " << rec.objective << "\n";
    } else if (*cdf_cmd) {
      std::ifstream in(cdf_input);
      if (!in) throw std::runtime_error("cannot open: " + cdf_input);
      std::string header;
      std::getline(in, header);
      std::vector<std::string> columns;
      {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) columns.push_back(col);
      }
      int col_idx = -1;
      for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == cdf_column) col_idx = static_cast<int>(i);
      if (col_idx < 0) throw std::runtime_error("column not found: " + cdf_column);
      std::vector<double> values;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        for (int i = 0; std::getline(ls, cell, ','); ++i)
          if (i == col_idx) values.push_back(std::stod(cell));
      }
      const auto cdf = emit_cdf(values, cdf_points);
      std::ostringstream out;
      out << "x,F\n";
      for (const auto& [x, f] : cdf) out << x << "," << f << "\n";
      if (cdf_output.empty())
        std::cout << out.str();
      else
        spit(cdf_output, out.str());
    } else if (*study_cmd) {
      const ExperimentConfig config = load_config_file(study_config);
      const ChangeKind kind =
          study_kind == "node" ? ChangeKind::NodeWithLinks : ChangeKind::LinksOnly;
      std::cout << "seed,epochs_migrated,epochs_retrained,threshold\n";
      for (const std::uint64_t seed : config.seeds) {
        const MigrationOutcome outcome = migration_study(config, seed, kind, study_links);
        std::cout << seed << "," << outcome.epochs_migrated << "," << outcome.epochs_retrained
                  << "," << outcome.threshold << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
