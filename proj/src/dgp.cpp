#include "dgpsim/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgpsim/error.hpp"
#include "dgpsim/parallel.hpp"

namespace dgpsim {

void StepSchedule::validate() const {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw InvalidParam("gamma0 must be > 0");
  if (!(exponent > 0.5 && exponent <= 1.0)) throw InvalidParam("step exponent must lie in (0.5, 1]");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidParam("c must be > 0");
}

StepSizes step_sizes(const StepSchedule& sched, long k) {
  if (k < 0) throw InvalidParam("tick must be >= 0");
  const double gamma = k == 0 ? sched.gamma0 : sched.gamma0 / std::pow(static_cast<double>(k), sched.exponent);
  return StepSizes{sched.c * gamma, gamma};
}

double default_gamma0(std::span<const DisutilitySpec> specs) {
  if (specs.empty()) throw InvalidParam("no loads");
  double q_min = specs.front().q;
  for (const auto& s : specs) q_min = std::min(q_min, s.q);
  return 1.5 * q_min / static_cast<double>(specs.size());
}

double gradient_step(const AgentState& agent, std::span<const double> neighbor_grads) {
  if (neighbor_grads.size() != agent.neighbor_ids.size()) {
    throw ArityMismatch("expected " + std::to_string(agent.neighbor_ids.size()) +
                        " neighbor gradients, got " + std::to_string(neighbor_grads.size()));
  }
  const double own = grad(agent.spec, agent.x);
  double dx = 0.0;
  for (double g : neighbor_grads) dx += g - own;
  return dx;
}

AgentState dgp_update(const AgentState& agent, double delta_x, double u_hat, double alpha, double gamma) {
  if (!(alpha > 0.0) || !(gamma > 0.0)) throw InvalidParam("step sizes must be positive");
  AgentState next = agent;
  next.x = project(agent.spec, agent.x + alpha * delta_x + gamma * u_hat);
  next.last_grad = grad(next.spec, next.x);
  return next;
}

GradientMailbox::GradientMailbox(const GraphTopology& topology) {
  const std::size_t n = topology.size();
  offsets_.assign(n + 1, 0);
  for (NodeId i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + topology.degree(i);
  outgoing_slot_.resize(offsets_[n]);
  for (NodeId i = 0; i < n; ++i) {
    const auto& nb = topology.neighbors(i);
    for (std::size_t m = 0; m < nb.size(); ++m) {
      const auto& back = topology.neighbors(nb[m]);
      const auto pos = static_cast<std::size_t>(std::lower_bound(back.begin(), back.end(), i) - back.begin());
      outgoing_slot_[offsets_[i] + m] = offsets_[nb[m]] + pos;
    }
  }
  slots_.assign(offsets_[n], GradientMessage{0, 0.0});
  stamps_.assign(offsets_[n], 0);
}

void GradientMailbox::broadcast(NodeId sender, double gradient) {
  for (std::size_t s = offsets_.at(sender); s < offsets_[sender + 1]; ++s) {
    const std::size_t slot = outgoing_slot_[s];
    slots_[slot] = GradientMessage{sender, gradient};
    stamps_[slot] = round_;
  }
}

std::span<const GradientMessage> GradientMailbox::inbox(NodeId receiver) const {
  const std::size_t begin = offsets_.at(receiver);
  const std::size_t end = offsets_[receiver + 1];
  for (std::size_t s = begin; s < end; ++s) {
    if (stamps_[s] != round_) {
      throw ArityMismatch("node " + std::to_string(receiver) + " is missing a gradient message");
    }
  }
  return {slots_.data() + begin, end - begin};
}

std::vector<AgentState> make_agents(std::span<const DisutilitySpec> specs, const GraphTopology& topology) {
  if (specs.size() != topology.size()) {
    throw ArityMismatch("one disutility spec per graph node is required");
  }
  std::vector<AgentState> agents;
  agents.reserve(specs.size());
  for (NodeId i = 0; i < specs.size(); ++i) {
    validate_shape(specs[i]);
    agents.push_back(AgentState{0.0, specs[i], topology.neighbors(i), grad(specs[i], 0.0)});
  }
  return agents;
}

DgpNetwork::DgpNetwork(std::span<const DisutilitySpec> specs, const GraphTopology& topology)
    : agents_(make_agents(specs, topology)),
      mailbox_(topology),
      next_x_(specs.size(), 0.0) {}

std::vector<double> DgpNetwork::positions() const {
  std::vector<double> x(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) x[i] = agents_[i].x;
  return x;
}

void DgpNetwork::set_positions(std::span<const double> x) {
  if (x.size() != agents_.size()) throw ArityMismatch("position vector has the wrong length");
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].x = project(agents_[i].spec, x[i]);
    agents_[i].last_grad = grad(agents_[i].spec, agents_[i].x);
  }
}

void DgpNetwork::tick(std::span<const double> u_hats, StepSizes steps, unsigned threads) {
  if (u_hats.size() != agents_.size()) throw ArityMismatch("one mismatch estimate per agent is required");
  if (!(steps.alpha > 0.0) || !(steps.gamma > 0.0)) throw InvalidParam("step sizes must be positive");
  mailbox_.begin_round();
  parallel_for(agents_.size(), threads, [&](std::size_t i) {
    agents_[i].last_grad = grad(agents_[i].spec, agents_[i].x);
    mailbox_.broadcast(i, agents_[i].last_grad);
  });
  parallel_for(agents_.size(), threads, [&](std::size_t i) {
    const AgentState& agent = agents_[i];
    double dx = 0.0;
    for (const GradientMessage& msg : mailbox_.inbox(i)) dx += msg.gradient - agent.last_grad;
    next_x_[i] = project(agent.spec, agent.x + steps.alpha * dx + steps.gamma * u_hats[i]);
  });
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].x = next_x_[i];
    agents_[i].last_grad = grad(agents_[i].spec, next_x_[i]);
  }
}

std::vector<AgentState> tick(const std::vector<AgentState>& agents, std::span<const double> u_hats,
                             const StepSchedule& sched, long k) {
  if (u_hats.size() != agents.size()) throw ArityMismatch("one mismatch estimate per agent is required");
  const StepSizes steps = step_sizes(sched, k);
  std::vector<double> grads(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) grads[i] = grad(agents[i].spec, agents[i].x);
  std::vector<AgentState> next;
  next.reserve(agents.size());
  std::vector<double> received;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    received.clear();
    for (NodeId j : agents[i].neighbor_ids) received.push_back(grads.at(j));
    const double dx = gradient_step(agents[i], received);
    next.push_back(dgp_update(agents[i], dx, u_hats[i], steps.alpha, steps.gamma));
  }
  return next;
}

}  // namespace dgpsim
