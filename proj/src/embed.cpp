#include "corrnet/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "corrnet/rng.hpp"

namespace corrnet {

namespace {

struct EmbedEdge {
    int a = 0;
    int b = 0;
    double weight = 0.0;
};

Eigen::MatrixXd pairwise_distances(const std::vector<Eigen::VectorXd>& points) {
    const int count = static_cast<int>(points.size());
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(count, count);
    for (int i = 0; i < count; ++i) {
        for (int j = i + 1; j < count; ++j) {
            const double d = (points[i] - points[j]).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

// smooth-kNN bandwidth: find sigma with sum_j exp(-(d_j - rho)/sigma) = log2(k)
double bisect_bandwidth(const std::vector<double>& dists, double rho, double target) {
    auto weight_sum = [&](double sigma) {
        double s = 0.0;
        for (double d : dists) s += std::exp(-std::max(0.0, d - rho) / sigma);
        return s;
    };
    double lo = 1e-12, hi = 1.0;
    while (weight_sum(hi) < target && hi < 1e12) hi *= 2.0;
    for (int iter = 0; iter < 64; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (weight_sum(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// principal 2-D scores via the Gram-matrix route (P x P, not m x m)
Eigen::MatrixXd pca_init(const std::vector<Eigen::VectorXd>& points) {
    const int count = static_cast<int>(points.size());
    const Eigen::Index dim = points[0].size();
    Eigen::MatrixXd data(count, dim);
    for (int i = 0; i < count; ++i) data.row(i) = points[i].transpose();
    data.rowwise() -= data.colwise().mean();

    const Eigen::MatrixXd gram = data * data.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    Eigen::MatrixXd coords(count, 2);
    for (int axis = 0; axis < 2; ++axis) {
        const Eigen::Index col = count - 1 - axis;  // eigenvalues ascending
        const double value = std::max(eig.eigenvalues()[col], 0.0);
        coords.col(axis) = eig.eigenvectors().col(col) * std::sqrt(value);
    }
    const double extent = coords.array().abs().maxCoeff();
    if (extent > 0.0) coords *= 10.0 / extent;
    return coords;
}

}  // namespace

Embedding embed_2d(const std::vector<Eigen::VectorXd>& points,
                   const std::vector<PointLabel>& labels, const EmbedConfig& config) {
    const int count = static_cast<int>(points.size());
    if (labels.size() != points.size())
        throw std::invalid_argument("one label required per point");
    if (config.n_neighbors < 2) throw std::invalid_argument("n_neighbors must be >= 2");
    if (count < config.n_neighbors + 1)
        throw std::invalid_argument("too few points: need at least n_neighbors+1");
    const Eigen::Index dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw std::invalid_argument("points must share one dimension");

    const Eigen::MatrixXd dist = pairwise_distances(points);
    if (dist.maxCoeff() == 0.0) throw std::runtime_error("degenerate points: all identical");

    // k nearest neighbors per point, ties broken by index
    const int k = config.n_neighbors;
    std::vector<std::vector<int>> knn(count);
    std::vector<int> order(count);
    for (int i = 0; i < count; ++i) {
        order.clear();
        for (int j = 0; j < count; ++j)
            if (j != i) order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
            if (dist(i, a) != dist(i, b)) return dist(i, a) < dist(i, b);
            return a < b;
        });
        knn[i].assign(order.begin(), order.begin() + k);
    }

    // directed fuzzy weights, then fuzzy union w + w' - w*w'
    std::map<std::pair<int, int>, double> directed;
    const double target = std::log2(static_cast<double>(k));
    std::vector<double> neighbor_dists(k);
    for (int i = 0; i < count; ++i) {
        for (int s = 0; s < k; ++s) neighbor_dists[s] = dist(i, knn[i][s]);
        const double rho = *std::min_element(neighbor_dists.begin(), neighbor_dists.end());
        const double sigma = bisect_bandwidth(neighbor_dists, rho, target);
        for (int s = 0; s < k; ++s)
            directed[{i, knn[i][s]}] =
                std::exp(-std::max(0.0, neighbor_dists[s] - rho) / sigma);
    }
    std::vector<EmbedEdge> edges;
    for (const auto& [key, w] : directed) {
        const auto [i, j] = key;
        if (i > j) continue;
        double w_back = 0.0;
        if (auto it = directed.find({j, i}); it != directed.end()) w_back = it->second;
        edges.push_back({i, j, w + w_back - w * w_back});
    }

    Eigen::MatrixXd coords = pca_init(points);

    // attraction along graph edges, repulsion against negative samples,
    // kernel 1/(1+d^2); fixed edge order and a single RNG keep runs identical
    rng::Rng gen(config.seed);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double alpha =
            config.learning_rate * (1.0 - static_cast<double>(epoch) / config.epochs);
        for (const auto& edge : edges) {
            if (gen.uniform01() >= edge.weight) continue;
            Eigen::RowVector2d diff = coords.row(edge.a) - coords.row(edge.b);
            double d2 = diff.squaredNorm();
            const double attract = -2.0 / (1.0 + d2);
            const Eigen::RowVector2d move =
                (alpha * attract * diff).cwiseMax(-4.0).cwiseMin(4.0);
            coords.row(edge.a) += move;
            coords.row(edge.b) -= move;

            for (int neg = 0; neg < config.negative_samples; ++neg) {
                const int other = static_cast<int>(gen.below(count));
                if (other == edge.a) continue;
                diff = coords.row(edge.a) - coords.row(other);
                d2 = diff.squaredNorm();
                const double repel =
                    2.0 * config.repulsion / ((0.001 + d2) * (1.0 + d2));
                coords.row(edge.a) +=
                    (alpha * repel * diff).cwiseMax(-4.0).cwiseMin(4.0);
            }
        }
    }

    return Embedding{std::move(coords), labels};
}

ClusterReport cluster_report(const Embedding& embedding) {
    struct Accum {
        Eigen::Vector2d true_sum = Eigen::Vector2d::Zero();
        int true_count = 0;
        Eigen::Vector2d pred_sum = Eigen::Vector2d::Zero();
        int pred_count = 0;
    };
    std::map<std::uint64_t, Accum> by_source;
    for (std::size_t p = 0; p < embedding.labels.size(); ++p) {
        Accum& acc = by_source[embedding.labels[p].source];
        const Eigen::Vector2d xy = embedding.coords.row(static_cast<Eigen::Index>(p));
        if (embedding.labels[p].kind == PointKind::True) {
            acc.true_sum += xy;
            ++acc.true_count;
        } else {
            acc.pred_sum += xy;
            ++acc.pred_count;
        }
    }

    ClusterReport report;
    int own_nearest = 0;
    for (const auto& [source, acc] : by_source) {
        if (acc.pred_count == 0) continue;
        if (acc.true_count == 0)
            throw std::runtime_error("missing TRUE point for source " + std::to_string(source));
        SourceReport row;
        row.source = source;
        row.predicted_centroid = acc.pred_sum / acc.pred_count;
        row.dist_to_own_true =
            (row.predicted_centroid - acc.true_sum / acc.true_count).norm();
        row.dist_to_nearest_other_true = std::numeric_limits<double>::infinity();
        for (const auto& [other, other_acc] : by_source) {
            if (other == source || other_acc.true_count == 0) continue;
            const double d =
                (row.predicted_centroid - other_acc.true_sum / other_acc.true_count).norm();
            row.dist_to_nearest_other_true = std::min(row.dist_to_nearest_other_true, d);
        }
        row.own_nearest = row.dist_to_own_true < row.dist_to_nearest_other_true;
        own_nearest += row.own_nearest ? 1 : 0;
        report.per_source.push_back(row);
    }
    if (report.per_source.empty())
        throw std::runtime_error("no predicted points to report on");
    report.own_nearest_fraction =
        static_cast<double>(own_nearest) / static_cast<double>(report.per_source.size());
    return report;
}

void write_embedding_csv(const std::filesystem::path& path, const Embedding& embedding) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "source,kind,x,y\n";
    for (std::size_t p = 0; p < embedding.labels.size(); ++p) {
        const auto& label = embedding.labels[p];
        char buf[80];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g",
                      embedding.coords(static_cast<Eigen::Index>(p), 0),
                      embedding.coords(static_cast<Eigen::Index>(p), 1));
        out << label.source << ','
            << (label.kind == PointKind::True ? "true" : "predicted") << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

void write_embedding_svg(const std::filesystem::path& path, const Embedding& embedding) {
    const double size = 800.0, margin = 40.0;
    const double lo_x = embedding.coords.col(0).minCoeff();
    const double hi_x = embedding.coords.col(0).maxCoeff();
    const double lo_y = embedding.coords.col(1).minCoeff();
    const double hi_y = embedding.coords.col(1).maxCoeff();
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
    auto sx = [&](double x) { return margin + (x - lo_x) / span * (size - 2 * margin); };
    auto sy = [&](double y) { return size - margin - (y - lo_y) / span * (size - 2 * margin); };

    std::vector<std::uint64_t> sources;
    for (const auto& label : embedding.labels) sources.push_back(label.source);
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    auto hue_of = [&](std::uint64_t source) {
        const auto pos = std::lower_bound(sources.begin(), sources.end(), source) -
                         sources.begin();
        return 360.0 * static_cast<double>(pos) / static_cast<double>(sources.size());
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
        << size << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // predicted dots first so true circles stay visible on top
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p < embedding.labels.size(); ++p) {
            const auto& label = embedding.labels[p];
            const bool is_true = label.kind == PointKind::True;
            if ((pass == 1) != is_true) continue;
            const double x = sx(embedding.coords(static_cast<Eigen::Index>(p), 0));
            const double y = sy(embedding.coords(static_cast<Eigen::Index>(p), 1));
            const double hue = hue_of(label.source);
            if (is_true)
                out << "<circle cx=\"" << x << "\" cy=\"" << y
                    << "\" r=\"6\" fill=\"white\" stroke=\"hsl(" << hue
                    << ",70%,40%)\" stroke-width=\"2\"/>\n";
            else
                out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2\" fill=\"hsl("
                    << hue << ",70%,55%)\"/>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

}  // namespace corrnet
