#include "dgpsim/dual_baseline.hpp"

#include <algorithm>

#include "dgpsim/error.hpp"
#include "dgpsim/parallel.hpp"

namespace dgpsim {

namespace {

void require_strictly_convex(const DisutilitySpec& spec) {
  if (!spec.strictly_convex()) {
    throw NotInvertible("dual baseline needs strictly convex disutilities");
  }
}

double consensus_average(std::size_t i, double own, std::span<const double> received,
                         const MetropolisWeights& w) {
  double acc = w.self[i] * own;
  for (std::size_t m = 0; m < received.size(); ++m) acc += w.neighbor[i][m] * received[m];
  return acc;
}

}  // namespace

MetropolisWeights metropolis_weights(const GraphTopology& topology) {
  MetropolisWeights w;
  const std::size_t n = topology.size();
  w.self.assign(n, 1.0);
  w.neighbor.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : topology.neighbors(i)) {
      const double wij = 1.0 / (1.0 + static_cast<double>(std::max(topology.degree(i), topology.degree(j))));
      w.neighbor[i].push_back(wij);
      w.self[i] -= wij;
    }
  }
  return w;
}

std::vector<DualAgentState> dual_tick(const std::vector<DualAgentState>& agents,
                                      const std::vector<std::vector<double>>& neighbor_lambdas,
                                      std::span<const double> u_hats, double gamma,
                                      const GraphTopology& topology) {
  const std::size_t n = agents.size();
  if (topology.size() != n || neighbor_lambdas.size() != n || u_hats.size() != n) {
    throw ArityMismatch("dual round inputs must have one entry per agent");
  }
  const MetropolisWeights w = metropolis_weights(topology);
  std::vector<DualAgentState> next = agents;
  for (std::size_t i = 0; i < n; ++i) {
    require_strictly_convex(agents[i].spec);
    if (neighbor_lambdas[i].size() != topology.degree(i)) {
      throw ArityMismatch("neighbor lambdas do not match node degree");
    }
    next[i].lambda = consensus_average(i, agents[i].lambda, neighbor_lambdas[i], w) + gamma * u_hats[i];
    next[i].x = project(agents[i].spec, inv_grad(agents[i].spec, next[i].lambda));
  }
  return next;
}

DualNetwork::DualNetwork(std::span<const DisutilitySpec> specs, const GraphTopology& topology)
    : topology_(topology), weights_(metropolis_weights(topology)), next_lambda_(specs.size(), 0.0) {
  if (specs.size() != topology.size()) throw ArityMismatch("one disutility spec per graph node is required");
  agents_.reserve(specs.size());
  for (const auto& spec : specs) {
    validate_shape(spec);
    require_strictly_convex(spec);
    agents_.push_back(DualAgentState{0.0, 0.0, spec});
  }
}

std::vector<double> DualNetwork::positions() const {
  std::vector<double> x(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) x[i] = agents_[i].x;
  return x;
}

void DualNetwork::set_lambdas(std::span<const double> lambdas) {
  if (lambdas.size() != agents_.size()) throw ArityMismatch("lambda vector has the wrong length");
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].lambda = lambdas[i];
    agents_[i].x = project(agents_[i].spec, inv_grad(agents_[i].spec, lambdas[i]));
  }
}

void DualNetwork::tick(std::span<const double> u_hats, double gamma, unsigned threads) {
  if (u_hats.size() != agents_.size()) throw ArityMismatch("one mismatch estimate per agent is required");
  parallel_for(agents_.size(), threads, [&](std::size_t i) {
    double acc = weights_.self[i] * agents_[i].lambda;
    const auto& nb = topology_.neighbors(i);
    for (std::size_t m = 0; m < nb.size(); ++m) acc += weights_.neighbor[i][m] * agents_[nb[m]].lambda;
    next_lambda_[i] = acc + gamma * u_hats[i];
  });
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].lambda = next_lambda_[i];
    agents_[i].x = project(agents_[i].spec, inv_grad(agents_[i].spec, next_lambda_[i]));
  }
}

}  // namespace dgpsim
