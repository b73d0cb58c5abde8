#pragma once

#include <array>
#include <string>
#include <vector>

#include "vnfpr/catalog.hpp"
#include "vnfpr/matrix.hpp"
#include "vnfpr/topology.hpp"

namespace vnfpr {

// Resource feasibility tolerance: usage is a violation only when it exceeds
// capacity by more than this (sums of sampled reals).
inline constexpr double kFeasibilityTol = 1e-9;

// Placement matrix P (chain x node), routing matrix R, hop matrix Q and the
// data-flow matrix H = rate * R for one request.
struct Deployment {
  Mat placement;
  Mat routing;
  Mat hops;
  Mat flow;
  int hop_count = 0;
};

Deployment make_deployment(Mat placement, Mat routing, Mat hops, double rate);

// Per-constraint verdicts. Constraint indices are 1-based (ok(3) answers
// constraint 3). support_ok guards that R and Q live on actual links; the
// constraint sums range over the link set and would not see phantom entries.
struct ConstraintReport {
  std::array<bool, 18> satisfied{};
  bool support_ok = true;
  std::vector<std::string> violated;
  // violation tallies for the routing constraint classes:
  // class I = C18, class II = C13..C15, class III = C3
  int class1_tally = 0;
  int class2_tally = 0;
  int class3_tally = 0;

  bool ok(int c) const { return satisfied[static_cast<std::size_t>(c - 1)]; }
  bool feasible() const { return violated.empty() && support_ok; }
  bool routing_path_ok() const;  // C1..C10 plus link support
};

struct ObjectiveBreakdown {
  std::vector<double> cost_total;   // per request
  std::vector<double> delay_total;  // per request
  std::vector<double> weighted;     // phi_c*psi_c*cost + phi_d*psi_d*delay
  double objective = 0.0;
  double scale_cost = 1.0;
  double scale_delay = 1.0;
};

// Evaluates every constraint literally as written and never short-circuits.
// Padding requests are skipped. Throws on dimension mismatch (a structural
// error, distinct from infeasibility).
ConstraintReport validate(const std::vector<Deployment>& deployments,
                          const std::vector<ServiceRequest>& requests,
                          const SubstrateNetwork& net, const VnfCatalog& catalog);

double evaluate_cost(const Deployment& dep, const ServiceRequest& req,
                     const SubstrateNetwork& net, const VnfCatalog& catalog);

double evaluate_delay(const Deployment& dep, const ServiceRequest& req,
                      const SubstrateNetwork& net, const VnfCatalog& catalog);

ObjectiveBreakdown evaluate_objective(const std::vector<Deployment>& deployments,
                                      const std::vector<ServiceRequest>& requests,
                                      const SubstrateNetwork& net, const VnfCatalog& catalog,
                                      double scale_cost = 1.0, double scale_delay = 1.0);

// JSON form: placement as the list of host node indices (chain order) and
// routing as the ordered node path, both 1-based in the file.
std::string deployment_to_json(const Deployment& dep, const ServiceRequest& req);
Deployment deployment_from_json(const std::string& text, int node_count, int* request_id = nullptr,
                                double* rate = nullptr);

// Reconstructs the node path source -> ... -> destination from the hop
// matrix. Throws if Q does not describe one contiguous walk.
std::vector<int> routing_path(const Deployment& dep, int source);

}  // namespace vnfpr
