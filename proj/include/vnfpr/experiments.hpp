#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vnfpr/baselines.hpp"
#include "vnfpr/trainer.hpp"

namespace vnfpr {

struct ExperimentConfig {
  std::string topology_path;
  std::uint64_t instance_seed = 1;  // substrate attribute sampling, fixed across seeds
  int categories = 10;
  std::uint64_t catalog_seed = 1;
  DistributionSpec dist;
  CatalogDistribution catalog_dist;

  int request_count = 20;
  double rate = 5.4;
  double mean_delay_factor = 0.5;
  int min_chain = 2;
  int max_chain = 4;

  std::string method = "greedy-bestfit";  // madrl | greedy-bestfit | greedy-nearest | exact
  int batch_agents = 5;
  HyperParams hyper;

  std::vector<std::uint64_t> seeds{1};
  std::string output_dir;  // empty: nothing written
  int cdf_points = 100;
  int smoothing_window = 100;

  void check() const;  // named diagnostics for invalid fields
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::string& path);

struct PerRequestRecord {
  int id = 0;
  bool accepted = false;
  double cost = 0.0;
  double delay = 0.0;
  double weighted = 0.0;
};

struct MetricsRecord {
  std::uint64_t seed = 0;
  std::vector<PerRequestRecord> per_request;
  double acceptance_ratio = 0.0;
  double throughput = 0.0;  // sum of accepted rates
  double objective = 0.0;   // sum of weighted terms over accepted requests
  int epochs_to_threshold = -1;
};

// method dispatch on one ready-made instance
struct MethodOutput {
  std::vector<Deployment> deployments;
  std::vector<bool> accepted;
};

MethodOutput run_method(const std::string& method, const std::vector<ServiceRequest>& requests,
                        const SubstrateNetwork& net, const VnfCatalog& catalog,
                        const TrainedModel* model, const ExperimentConfig& config);

// Builds the instance, generates requests, runs the method (training first
// for madrl) and validates accepted deployments. One record per seed; files
// (per-request CSVs, summary CSV, manifest JSON) land in output_dir when set.
std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config);

// Empirical CDF sampled at `points` quantile positions.
std::vector<std::pair<double, double>> emit_cdf(const std::vector<double>& values, int points);
double ecdf_at(const std::vector<double>& values, double x);

struct SweepPoint {
  int request_count = 0;
  double throughput = 0.0;
  double acceptance_ratio = 0.0;
};

// Evaluates nested request prefixes of one stream so throughput comparisons
// across M are apples-to-apples.
std::vector<SweepPoint> throughput_sweep(const ExperimentConfig& config, std::uint64_t seed,
                                         const std::vector<int>& request_counts);

enum class ChangeKind { LinksOnly, NodeWithLinks };

struct MigrationOutcome {
  double threshold = 0.0;
  int epochs_migrated = -1;   // -1 when censored
  int epochs_retrained = -1;
  bool censored_migrated = false;
  bool censored_retrained = false;
};

// Trains a base model, mutates the topology, then races migrated
// continue-training against a fresh retrain to 95% of the base model's
// converged smoothed reward.
MigrationOutcome migration_study(const ExperimentConfig& config, std::uint64_t seed,
                                 ChangeKind kind, int link_count);

void write_metrics_files(const ExperimentConfig& config, const std::vector<MetricsRecord>& records);

}  // namespace vnfpr
