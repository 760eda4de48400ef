#pragma once

// Reconstruction of the dual-decomposition baseline used for comparison.
//
// Each load keeps a local copy lambda_i of the (grid-wide) dual variable. Per
// tick it averages lambda over its closed neighborhood with Metropolis weights,
// adds gamma[k] u_hat_i, and consumes x_i = P_box[(grad f_i)^{-1}(lambda_i)].
// The inverse gradient makes the method unusable for disutilities with a flat
// region. The exact update of the original method is not reproduced here; the
// averaging weights and step placement are choices of this implementation.

#include <span>
#include <vector>

#include "dgpsim/disutility.hpp"
#include "dgpsim/graph.hpp"

namespace dgpsim {

struct DualAgentState {
  double lambda = 0.0;
  double x = 0.0;
  DisutilitySpec spec;
};

// Metropolis weights: w_ij = 1 / (1 + max(d_i, d_j)) for j in N_i, and
// w_ii = 1 - sum_j w_ij. Symmetric and doubly stochastic.
struct MetropolisWeights {
  std::vector<double> self;
  std::vector<std::vector<double>> neighbor;  // aligned with topology.neighbors(i)
};
MetropolisWeights metropolis_weights(const GraphTopology& topology);

// Functional round. neighbor_lambdas[i] is aligned with topology.neighbors(i).
// Throws NotInvertible if any agent's disutility is not strictly convex and
// ArityMismatch on misaligned inputs.
std::vector<DualAgentState> dual_tick(const std::vector<DualAgentState>& agents,
                                      const std::vector<std::vector<double>>& neighbor_lambdas,
                                      std::span<const double> u_hats, double gamma,
                                      const GraphTopology& topology);

class DualNetwork {
 public:
  // Throws NotInvertible if any spec is FlatQuadratic.
  DualNetwork(std::span<const DisutilitySpec> specs, const GraphTopology& topology);

  std::size_t size() const noexcept { return agents_.size(); }
  const std::vector<DualAgentState>& agents() const noexcept { return agents_; }
  std::vector<double> positions() const;
  void set_lambdas(std::span<const double> lambdas);

  void tick(std::span<const double> u_hats, double gamma, unsigned threads = 1);

 private:
  GraphTopology topology_;
  MetropolisWeights weights_;
  std::vector<DualAgentState> agents_;
  std::vector<double> next_lambda_;
};

}  // namespace dgpsim
