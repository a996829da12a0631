#include "corrnet/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "corrnet/rng.hpp"

namespace corrnet {

namespace {

bool connected(int n, const std::vector<std::vector<int>>& neighbors) {
    if (n <= 1) return true;
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : neighbors[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

std::vector<std::vector<int>> build_neighbors(int n,
                                              const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> nbr(n);
    for (const auto& [i, j] : edges) {
        nbr[i].push_back(j);
        nbr[j].push_back(i);
    }
    for (auto& list : nbr) std::sort(list.begin(), list.end());
    return nbr;
}

}  // namespace

Graph::Graph(int node_count, std::vector<std::pair<int, int>> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
    if (node_count_ < 1) throw std::invalid_argument("graph needs at least one node");
    for (auto& [i, j] : edges_) {
        if (i > j) std::swap(i, j);
        if (i < 0 || j >= node_count_) throw std::invalid_argument("edge index out of range");
        if (i == j) throw std::invalid_argument("self-loop rejected");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw std::invalid_argument("duplicate edge rejected");
    neighbors_ = build_neighbors(node_count_, edges_);
    degree_.resize(node_count_);
    for (int i = 0; i < node_count_; ++i) degree_[i] = static_cast<int>(neighbors_[i].size());
    if (!connected(node_count_, neighbors_))
        throw std::invalid_argument("graph not connected");
}

double Graph::mean_degree() const {
    return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(node_count_);
}

Eigen::MatrixXd Graph::adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(node_count_, node_count_);
    for (const auto& [i, j] : edges_) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

void Graph::save_edge_list(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << node_count_ << ' ' << edges_.size() << '\n';
    for (const auto& [i, j] : edges_) out << i << ' ' << j << '\n';
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

Graph Graph::load_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    int n = 0;
    std::size_t m = 0;
    if (!(in >> n >> m)) throw std::runtime_error("malformed edge list header: " + path.string());
    std::vector<std::pair<int, int>> edges;
    edges.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        int i = 0, j = 0;
        if (!(in >> i >> j))
            throw std::runtime_error("edge list truncated at edge " + std::to_string(k) +
                                     ": " + path.string());
        edges.emplace_back(i, j);
    }
    return Graph(n, std::move(edges));
}

Graph gen_er(int node_count, double mean_degree, std::uint64_t seed, int max_attempts) {
    if (node_count < 1) throw std::invalid_argument("node_count must be positive");
    if (mean_degree <= 0.0 || mean_degree > static_cast<double>(node_count))
        throw std::invalid_argument("mean_degree must lie in (0, node_count]");
    const double p = mean_degree / static_cast<double>(node_count);

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        rng::Rng gen(rng::derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < node_count; ++i)
            for (int j = i + 1; j < node_count; ++j)
                if (gen.uniform01() < p) edges.emplace_back(i, j);
        const auto nbr = build_neighbors(node_count, edges);
        if (connected(node_count, nbr)) return Graph(node_count, std::move(edges));
    }
    throw std::runtime_error("connectivity unreachable after " + std::to_string(max_attempts) +
                             " ER draws (N=" + std::to_string(node_count) +
                             ", <k>=" + std::to_string(mean_degree) + ")");
}

Graph gen_sf(int node_count, int attach_count, std::uint64_t seed) {
    if (attach_count < 1 || node_count <= attach_count)
        throw std::invalid_argument("bad BA parameters: need attach_count >= 1 and node_count > attach_count");

    rng::Rng gen(rng::derive_seed(seed, 0));
    std::vector<std::pair<int, int>> edges;
    // one bag entry per edge endpoint makes degree-proportional sampling a
    // uniform draw from the bag
    std::vector<int> endpoint_bag;

    const int clique = attach_count + 1;
    for (int i = 0; i < clique; ++i) {
        for (int j = i + 1; j < clique; ++j) {
            edges.emplace_back(i, j);
            endpoint_bag.push_back(i);
            endpoint_bag.push_back(j);
        }
    }

    std::vector<int> chosen;
    for (int v = clique; v < node_count; ++v) {
        chosen.clear();
        while (static_cast<int>(chosen.size()) < attach_count) {
            const int target = endpoint_bag[gen.below(endpoint_bag.size())];
            if (std::find(chosen.begin(), chosen.end(), target) == chosen.end())
                chosen.push_back(target);
        }
        for (int target : chosen) {
            edges.emplace_back(target, v);
            endpoint_bag.push_back(target);
            endpoint_bag.push_back(v);
        }
    }
    return Graph(node_count, std::move(edges));
}

NodeSelection select_nodes(const Graph& graph, int n, SelectionMode mode) {
    if (n < 1) throw std::invalid_argument("selection must keep at least one node");
    if (n > graph.node_count())
        throw std::invalid_argument("selection too large: n=" + std::to_string(n) + " > N=" +
                                    std::to_string(graph.node_count()));
    const auto& deg = graph.degree_sequence();
    std::vector<int> order(graph.node_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (deg[a] != deg[b])
            return mode == SelectionMode::HD ? deg[a] > deg[b] : deg[a] < deg[b];
        return a < b;
    });
    order.resize(n);
    return NodeSelection{std::move(order), mode};
}

}  // namespace corrnet
