#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vnfpr/topology.hpp"

namespace vnfpr {

// Per-category VNF resource profile. A category's compute demand scales with
// the service rate: compute_req(k, r) = compute_per_rate[k] * r.
struct VnfCatalog {
  std::vector<double> memory_req;         // f_k^m
  std::vector<double> compute_per_rate;   // eta_k
  std::vector<double> dyn_delay_per_rate; // d_k^dyn

  int category_count() const { return static_cast<int>(memory_req.size()); }
  double compute_req(int k, double rate) const { return compute_per_rate[k] * rate; }
};

struct CatalogDistribution {
  DistributionSpec::Range compute_per_rate{0.2, 1.0};
  DistributionSpec::Range memory_req{1.0, 5.0};
  DistributionSpec::Range dyn_delay{0.5, 3.0};
};

VnfCatalog sample_catalog(int categories, std::uint64_t seed,
                          const CatalogDistribution& dist = {});

// One service request: source/destination, ordered VNF chain (0-based
// category ids), rate and the cost/delay demand split (cost + delay = 1).
// Zero-demand padding entries have an empty chain and rate 0 and are
// excluded from every aggregate.
struct ServiceRequest {
  int id = 0;
  int source = 0;
  int destination = 0;
  std::vector<int> chain;
  double rate = 0.0;
  double cost_factor = 1.0;
  double delay_factor = 0.0;

  int chain_length() const { return static_cast<int>(chain.size()); }
  bool is_padding() const { return chain.empty() && rate == 0.0; }
};

struct RequestGenParams {
  int min_chain = 2;
  int max_chain = 4;
  double rate = 5.4;
};

// Samples `count` requests with chain lengths in [min_chain, max_chain],
// distinct categories within a chain, distinct uniform endpoints, and
// delay factors whose mean hits mean_delay_factor within 1/count.
std::vector<ServiceRequest> generate_requests(const SubstrateNetwork& net,
                                              const VnfCatalog& catalog, int count,
                                              double mean_delay_factor, std::uint64_t seed,
                                              const RequestGenParams& params = {});

// Splits requests into batches of exactly batch_size, appending zero-demand
// padding entries to the last batch.
std::vector<std::vector<ServiceRequest>> pad_to_batches(const std::vector<ServiceRequest>& requests,
                                                        int batch_size);

// JSON-lines serialization (1-based node and category indices in files).
std::string requests_to_jsonl(const std::vector<ServiceRequest>& requests);
std::vector<ServiceRequest> requests_from_jsonl(const std::string& text);

std::string catalog_to_json(const VnfCatalog& catalog);
VnfCatalog catalog_from_json(const std::string& text);

}  // namespace vnfpr
