#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace corrnet {

// Undirected, connected, simple graph. Immutable after construction; the
// constructor validates edge sanity and connectivity, so every live Graph
// satisfies the full invariant set.
class Graph {
public:
    Graph(int node_count, std::vector<std::pair<int, int>> edges);

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    // unordered pairs (i,j) with i<j, ascending lexicographic
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    const std::vector<int>& degree_sequence() const { return degree_; }
    const std::vector<int>& neighbors(int node) const { return neighbors_[node]; }
    double mean_degree() const;

    // dense 0/1 adjacency, symmetric, zero diagonal
    Eigen::MatrixXd adjacency() const;

    void save_edge_list(const std::filesystem::path& path) const;
    static Graph load_edge_list(const std::filesystem::path& path);

private:
    int node_count_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<int> degree_;
};

enum class SelectionMode { HD, LD };

// Degree-ranked node subset; ties broken by ascending node index.
struct NodeSelection {
    std::vector<int> indices;
    SelectionMode mode = SelectionMode::HD;
};

// Erdos-Renyi realization: every unordered pair drawn independently with
// p = mean_degree/node_count. Disconnected draws are rejected and retried
// with derived sub-seeds, up to max_attempts.
Graph gen_er(int node_count, double mean_degree, std::uint64_t seed,
             int max_attempts = 1000);

// Barabasi-Albert growth from a seed clique of attach_count+1 nodes; each new
// node attaches to attach_count distinct nodes with probability proportional
// to current degree.
Graph gen_sf(int node_count, int attach_count, std::uint64_t seed);

NodeSelection select_nodes(const Graph& graph, int n, SelectionMode mode);

}  // namespace corrnet
