#include "vnfpr/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vnfpr/rng.hpp"

namespace vnfpr {

VnfCatalog sample_catalog(int categories, std::uint64_t seed, const CatalogDistribution& dist) {
  if (categories <= 0) throw std::invalid_argument("sample_catalog: categories must be positive");
  Rng rng(seed);
  VnfCatalog cat;
  for (int k = 0; k < categories; ++k)
    cat.compute_per_rate.push_back(rng.uniform(dist.compute_per_rate.lo, dist.compute_per_rate.hi));
  for (int k = 0; k < categories; ++k)
    cat.memory_req.push_back(rng.uniform(dist.memory_req.lo, dist.memory_req.hi));
  for (int k = 0; k < categories; ++k)
    cat.dyn_delay_per_rate.push_back(rng.uniform(dist.dyn_delay.lo, dist.dyn_delay.hi));
  return cat;
}

std::vector<ServiceRequest> generate_requests(const SubstrateNetwork& net,
                                              const VnfCatalog& catalog, int count,
                                              double mean_delay_factor, std::uint64_t seed,
                                              const RequestGenParams& params) {
  if (count < 1) throw std::invalid_argument("generate_requests: count must be >= 1");
  if (mean_delay_factor < 0.0 || mean_delay_factor > 1.0)
    throw std::invalid_argument("generate_requests: mean_delay_factor outside [0,1]");
  if (catalog.category_count() == 0)
    throw std::invalid_argument("generate_requests: empty catalog");
  if (catalog.category_count() < params.max_chain)
    throw std::invalid_argument("generate_requests: insufficient categories for max chain length");
  if (net.node_count < 2)
    throw std::invalid_argument("generate_requests: need at least two nodes");

  Rng rng(seed);
  std::vector<ServiceRequest> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    ServiceRequest req;
    req.id = i;
    req.rate = params.rate;
    const int len = rng.uniform_int(params.min_chain, params.max_chain);
    // distinct categories within a chain
    std::vector<int> pool(catalog.category_count());
    for (int k = 0; k < catalog.category_count(); ++k) pool[k] = k;
    for (int j = 0; j < len; ++j) {
      const auto idx = rng.below(pool.size());
      req.chain.push_back(pool[idx]);
      pool.erase(pool.begin() + static_cast<long>(idx));
    }
    req.source = static_cast<int>(rng.below(net.node_count));
    do {
      req.destination = static_cast<int>(rng.below(net.node_count));
    } while (req.destination == req.source);
    out.push_back(std::move(req));
  }

  // Delay factors: uniform in a +-0.25 window around the target mean, then
  // shifted (with clamping redistributed) until the empirical mean matches.
  const double m = mean_delay_factor;
  const double lo = std::max(0.0, m - 0.25);
  const double hi = std::min(1.0, m + 0.25);
  std::vector<double> phi(count);
  for (int i = 0; i < count; ++i) phi[i] = rng.uniform(lo, hi);
  for (int pass = 0; pass < 64; ++pass) {
    double sum = 0.0;
    for (double p : phi) sum += p;
    const double err = m - sum / count;
    if (std::fabs(err) < 1e-12) break;
    int movable = 0;
    for (double p : phi)
      if ((err > 0.0 && p < 1.0) || (err < 0.0 && p > 0.0)) ++movable;
    if (movable == 0) break;
    const double shift = err * count / movable;
    for (double& p : phi) {
      if ((err > 0.0 && p < 1.0) || (err < 0.0 && p > 0.0))
        p = std::clamp(p + shift, 0.0, 1.0);
    }
  }
  for (int i = 0; i < count; ++i) {
    out[i].delay_factor = phi[i];
    out[i].cost_factor = 1.0 - phi[i];
  }
  return out;
}

std::vector<std::vector<ServiceRequest>> pad_to_batches(const std::vector<ServiceRequest>& requests,
                                                        int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("pad_to_batches: batch_size must be >= 1");
  std::vector<std::vector<ServiceRequest>> batches;
  const int m = static_cast<int>(requests.size());
  const int nbatches = (m + batch_size - 1) / batch_size;
  int next_id = 0;
  for (const auto& r : requests) next_id = std::max(next_id, r.id + 1);
  for (int b = 0; b < nbatches; ++b) {
    std::vector<ServiceRequest> batch;
    for (int j = b * batch_size; j < (b + 1) * batch_size; ++j) {
      if (j < m) {
        batch.push_back(requests[j]);
      } else {
        ServiceRequest pad;
        pad.id = next_id++;
        pad.rate = 0.0;
        pad.source = 0;
        pad.destination = 0;
        pad.cost_factor = 1.0;
        pad.delay_factor = 0.0;
        batch.push_back(pad);
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::string requests_to_jsonl(const std::vector<ServiceRequest>& requests) {
  std::ostringstream out;
  for (const auto& r : requests) {
    nlohmann::json j;
    j["id"] = r.id;
    j["source"] = r.source + 1;
    j["destination"] = r.destination + 1;
    nlohmann::json chain = nlohmann::json::array();
    for (int k : r.chain) chain.push_back(k + 1);
    j["chain"] = chain;
    j["rate"] = r.rate;
    j["cost_factor"] = r.cost_factor;
    j["delay_factor"] = r.delay_factor;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::vector<ServiceRequest> requests_from_jsonl(const std::string& text) {
  std::vector<ServiceRequest> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line);
    ServiceRequest r;
    r.id = j.at("id").get<int>();
    r.source = j.at("source").get<int>() - 1;
    r.destination = j.at("destination").get<int>() - 1;
    for (const auto& k : j.at("chain")) r.chain.push_back(k.get<int>() - 1);
    r.rate = j.at("rate").get<double>();
    r.cost_factor = j.at("cost_factor").get<double>();
    r.delay_factor = j.at("delay_factor").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

std::string catalog_to_json(const VnfCatalog& catalog) {
  nlohmann::json j;
  j["memory_req"] = catalog.memory_req;
  j["compute_per_rate"] = catalog.compute_per_rate;
  j["dyn_delay_per_rate"] = catalog.dyn_delay_per_rate;
  return j.dump(2);
}

VnfCatalog catalog_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  VnfCatalog cat;
  cat.memory_req = j.at("memory_req").get<std::vector<double>>();
  cat.compute_per_rate = j.at("compute_per_rate").get<std::vector<double>>();
  cat.dyn_delay_per_rate = j.at("dyn_delay_per_rate").get<std::vector<double>>();
  if (cat.memory_req.size() != cat.compute_per_rate.size() ||
      cat.memory_req.size() != cat.dyn_delay_per_rate.size())
    throw std::runtime_error("catalog json: array size mismatch");
  return cat;
}

}  // namespace vnfpr
