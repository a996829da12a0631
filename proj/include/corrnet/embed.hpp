#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace corrnet {

// Simplified neighbor embedding standing in for UMAP: exact k-NN graph,
// smooth per-point bandwidths, fuzzy-union symmetrization, PCA init, and
// stochastic attraction/repulsion descent with negative sampling.
struct EmbedConfig {
    int n_neighbors = 15;
    int epochs = 300;
    double repulsion = 1.0;  // min_dist analog: strength of negative samples
    double learning_rate = 1.0;
    int negative_samples = 5;
    std::uint64_t seed = 0;
};

enum class PointKind { True, Predicted };

struct PointLabel {
    std::uint64_t source = 0;
    PointKind kind = PointKind::Predicted;
};

struct Embedding {
    Eigen::MatrixXd coords;  // P x 2
    std::vector<PointLabel> labels;
};

Embedding embed_2d(const std::vector<Eigen::VectorXd>& points,
                   const std::vector<PointLabel>& labels, const EmbedConfig& config);

struct SourceReport {
    std::uint64_t source = 0;
    Eigen::Vector2d predicted_centroid = Eigen::Vector2d::Zero();
    double dist_to_own_true = 0.0;
    double dist_to_nearest_other_true = 0.0;
    bool own_nearest = false;
};

struct ClusterReport {
    std::vector<SourceReport> per_source;
    double own_nearest_fraction = 0.0;
};

// For every source with predicted points: centroid of its predictions,
// distance to its own TRUE point and to the nearest other TRUE point.
ClusterReport cluster_report(const Embedding& embedding);

// header "source,kind,x,y"
void write_embedding_csv(const std::filesystem::path& path, const Embedding& embedding);

// scatter mirroring the diagnostic convention: one color per source,
// circles for TRUE points, dots for PREDICTED points
void write_embedding_svg(const std::filesystem::path& path, const Embedding& embedding);

}  // namespace corrnet
