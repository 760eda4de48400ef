#pragma once

// Distributed gradient projection (DGP) agents.
//
// Every tick each load
//   1. takes its mismatch estimate u_hat_i[k],
//   2. broadcasts its own gradient to its neighbors and forms
//        dx_i = sum_{j in N_i} (grad f_j - grad f_i),
//   3. sets x_i <- P_box[x_i + alpha[k] dx_i + gamma[k] u_hat_i].
//
// Step 2 never changes the total consumption, so balancing is left entirely to
// the u_hat term. Only gradient values cross the network.

#include <span>
#include <vector>

#include "dgpsim/disutility.hpp"
#include "dgpsim/graph.hpp"

namespace dgpsim {

struct StepSchedule {
  double gamma0 = 0.01;
  double exponent = 0.8;  // must lie in (0.5, 1] so that sum gamma = inf, sum gamma^2 < inf
  double c = 5.0;         // alpha[k] = c gamma[k]

  void validate() const;
};

struct StepSizes {
  double alpha;
  double gamma;
};

// gamma[0] = gamma0, gamma[k] = gamma0 / k^exponent for k >= 1, alpha = c gamma.
StepSizes step_sizes(const StepSchedule& sched, long k);

// 1.5 * min_i q_i / n.
double default_gamma0(std::span<const DisutilitySpec> specs);

// The only payload agents ever exchange.
struct GradientMessage {
  NodeId sender;
  double gradient;
};

struct AgentState {
  double x = 0.0;
  DisutilitySpec spec;
  std::vector<NodeId> neighbor_ids;
  double last_grad = 0.0;
};

// neighbor_grads[m] belongs to agent.neighbor_ids[m]. Own gradient is taken at
// agent.x. Throws ArityMismatch on a length mismatch.
double gradient_step(const AgentState& agent, std::span<const double> neighbor_grads);

// Returns the agent with x <- P[x + alpha dx + gamma u_hat]. Throws
// InvalidParam unless alpha and gamma are positive.
AgentState dgp_update(const AgentState& agent, double delta_x, double u_hat, double alpha, double gamma);

// Per-edge single-slot delivery for one synchronous round. Each directed edge
// owns one slot, so concurrent senders never share memory.
class GradientMailbox {
 public:
  explicit GradientMailbox(const GraphTopology& topology);

  void begin_round() noexcept { ++round_; }
  // Delivers the sender's gradient to every neighbor.
  void broadcast(NodeId sender, double gradient);
  // Messages addressed to `receiver` in neighbor-id order. Throws ArityMismatch
  // if any neighbor has not sent in the current round.
  std::span<const GradientMessage> inbox(NodeId receiver) const;

 private:
  std::vector<std::size_t> offsets_;       // inbox start per receiver
  std::vector<std::size_t> outgoing_slot_;  // slot for the m-th neighbor of each sender
  std::vector<GradientMessage> slots_;
  std::vector<long> stamps_;
  long round_ = 0;
};

std::vector<AgentState> make_agents(std::span<const DisutilitySpec> specs, const GraphTopology& topology);

// Owns the agents and the mailbox of one network and advances them one
// synchronous round at a time.
class DgpNetwork {
 public:
  DgpNetwork(std::span<const DisutilitySpec> specs, const GraphTopology& topology);

  std::size_t size() const noexcept { return agents_.size(); }
  const std::vector<AgentState>& agents() const noexcept { return agents_; }
  std::vector<double> positions() const;
  void set_positions(std::span<const double> x);

  // All gradients are taken from the current snapshot before any agent moves.
  void tick(std::span<const double> u_hats, StepSizes steps, unsigned threads = 1);

 private:
  std::vector<AgentState> agents_;
  GradientMailbox mailbox_;
  std::vector<double> next_x_;
};

// Functional form of one round: all_agents' from all_agents.
std::vector<AgentState> tick(const std::vector<AgentState>& agents, std::span<const double> u_hats,
                             const StepSchedule& sched, long k);

}  // namespace dgpsim
