#pragma once

// Undirected, unweighted communication topology between loads.
//
// Nodes are 0-based internally. Configuration files use 1-based load ids; the
// conversion happens in the scenario loader, never here.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace dgpsim {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

class GraphTopology {
 public:
  // Dense Laplacians are kept only up to this many nodes.
  static constexpr std::size_t kDenseLimit = 64;

  // Empty graph (no nodes); placeholder until a real topology is assigned.
  GraphTopology() = default;

  // Builds the topology from an undirected edge list. Duplicate edges (in
  // either orientation) are merged. Throws InvalidParam on self-loops,
  // out-of-range ids or n == 0, and when require_connected is set and the
  // graph has more than one component.
  static GraphTopology from_edges(std::size_t n, std::span<const Edge> edges,
                                  bool require_connected = true);

  std::size_t size() const noexcept { return neighbors_.size(); }
  const std::vector<NodeId>& neighbors(NodeId i) const { return neighbors_.at(i); }
  std::size_t degree(NodeId i) const { return neighbors_.at(i).size(); }
  std::size_t edge_count() const noexcept;
  std::vector<Edge> edges() const;

  // Integer Laplacian; present only when size() <= kDenseLimit.
  const std::optional<Eigen::MatrixXi>& dense_laplacian() const noexcept { return laplacian_; }

  // out = L * in, computed from adjacency lists for any size.
  void apply_laplacian(std::span<const double> in, std::span<double> out) const;

 private:
  explicit GraphTopology(std::vector<std::vector<NodeId>> neighbors);

  std::vector<std::vector<NodeId>> neighbors_;
  std::optional<Eigen::MatrixXi> laplacian_;
};

// Load i talks to every load j with |i - j| <= half_width (the 1-based rule
// max{1, i-n0}..min{n, i+n0} shifted to 0-based ids).
GraphTopology band_graph(std::size_t n, std::size_t half_width);

bool is_connected(const GraphTopology& topology);

// Integer Laplacian for any size. Intended for tests and small instances.
Eigen::MatrixXi laplacian_matrix(const GraphTopology& topology);

// Edge-list text: one "i j" pair per line, 1-based ids, '#' starts a comment.
std::vector<Edge> parse_edge_list(std::istream& in);
std::vector<Edge> read_edge_list(const std::filesystem::path& path);

}  // namespace dgpsim
