#include "dgpsim/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "dgpsim/error.hpp"

namespace dgpsim {

GraphTopology::GraphTopology(std::vector<std::vector<NodeId>> neighbors)
    : neighbors_(std::move(neighbors)) {
  if (neighbors_.size() <= kDenseLimit) laplacian_ = laplacian_matrix(*this);
}

GraphTopology GraphTopology::from_edges(std::size_t n, std::span<const Edge> edges,
                                        bool require_connected) {
  if (n == 0) throw InvalidParam("graph needs at least one node");
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw InvalidParam("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (i == j) throw InvalidParam("self-loop at node " + std::to_string(i));
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  GraphTopology topology(std::move(adj));
  if (require_connected && !is_connected(topology)) {
    throw InvalidParam("communication graph is not connected");
  }
  return topology;
}

std::size_t GraphTopology::edge_count() const noexcept {
  std::size_t twice = 0;
  for (const auto& list : neighbors_) twice += list.size();
  return twice / 2;
}

std::vector<Edge> GraphTopology::edges() const {
  std::vector<Edge> out;
  for (NodeId i = 0; i < neighbors_.size(); ++i) {
    for (NodeId j : neighbors_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

void GraphTopology::apply_laplacian(std::span<const double> in, std::span<double> out) const {
  if (in.size() != size() || out.size() != size()) {
    throw InvalidParam("Laplacian operand size does not match the graph");
  }
  for (NodeId i = 0; i < size(); ++i) {
    double acc = static_cast<double>(neighbors_[i].size()) * in[i];
    for (NodeId j : neighbors_[i]) acc -= in[j];
    out[i] = acc;
  }
}

GraphTopology band_graph(std::size_t n, std::size_t half_width) {
  if (n < 2) throw InvalidParam("band graph needs n >= 2");
  if (half_width < 1 || half_width > n) throw InvalidParam("band half-width must be in [1, n]");
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n && j <= i + half_width; ++j) edges.emplace_back(i, j);
  }
  return GraphTopology::from_edges(n, edges);
}

bool is_connected(const GraphTopology& topology) {
  const std::size_t n = topology.size();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : topology.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == n;
}

Eigen::MatrixXi laplacian_matrix(const GraphTopology& topology) {
  const auto n = static_cast<Eigen::Index>(topology.size());
  Eigen::MatrixXi lap = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nb = topology.neighbors(static_cast<NodeId>(i));
    lap(i, i) = static_cast<int>(nb.size());
    for (NodeId j : nb) lap(i, static_cast<Eigen::Index>(j)) = -1;
  }
  return lap;
}

std::vector<Edge> parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    if (!(fields >> i)) continue;  // blank or comment-only
    std::string rest;
    if (!(fields >> j) || (fields >> rest)) {
      throw InvalidParam("edge list line " + std::to_string(lineno) + ": expected 'i j'");
    }
    if (i < 1 || j < 1) {
      throw InvalidParam("edge list line " + std::to_string(lineno) + ": ids are 1-based");
    }
    edges.emplace_back(static_cast<NodeId>(i - 1), static_cast<NodeId>(j - 1));
  }
  return edges;
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParam("cannot open edge list '" + path.string() + "'");
  return parse_edge_list(in);
}

}  // namespace dgpsim
