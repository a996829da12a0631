#include "corrnet/corr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "corrnet/binio.hpp"

namespace corrnet {

namespace {

constexpr char kCorrMagic[4] = {'C', 'N', 'C', 'M'};
constexpr std::uint32_t kCorrVersion = 1;

double clamp_corr(double r) { return std::clamp(r, -1.0, 1.0); }

double pearson(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const double mu = u.mean();
    const double mv = v.mean();
    const Eigen::ArrayXd du = u.array() - mu;
    const Eigen::ArrayXd dv = v.array() - mv;
    const double su = (du * du).sum();
    const double sv = (dv * dv).sum();
    if (su == 0.0 || sv == 0.0) throw std::runtime_error("degenerate series: zero variance");
    return clamp_corr((du * dv).sum() / std::sqrt(su * sv));
}

}  // namespace

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values) {
    const Eigen::Index n = values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
    Eigen::VectorXd ranks(n);
    Eigen::Index pos = 0;
    while (pos < n) {
        Eigen::Index end = pos + 1;
        while (end < n && values[order[end]] == values[order[pos]]) ++end;
        const double mean_rank = 0.5 * static_cast<double>(pos + end - 1) + 1.0;
        for (Eigen::Index k = pos; k < end; ++k) ranks[order[k]] = mean_rank;
        pos = end;
    }
    return ranks;
}

int node_count_from_pairs(Eigen::Index pair_count) {
    if (pair_count < 1) throw std::invalid_argument("bad vector length: no pairs");
    const double root = (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(pair_count))) / 2.0;
    const auto n = static_cast<Eigen::Index>(std::llround(root));
    if (n * (n - 1) / 2 != pair_count)
        throw std::invalid_argument("bad vector length: " + std::to_string(pair_count) +
                                    " is not N(N-1)/2 for integer N");
    return static_cast<int>(n);
}

double corr_pair(const Eigen::VectorXd& u, const Eigen::VectorXd& v, CorrMethod method) {
    if (u.size() != v.size()) throw std::invalid_argument("series length mismatch");
    if (u.size() < 2) throw std::invalid_argument("need at least two samples");
    if (!u.allFinite() || !v.allFinite()) throw std::invalid_argument("non-finite sample");
    if (method == CorrMethod::Spearman) return pearson(average_ranks(u), average_ranks(v));
    return pearson(u, v);
}

CorrMatrix corr_matrix(const TimeSeriesMatrix& series, CorrMethod method) {
    const Eigen::Index n = series.rows();
    const Eigen::Index len = series.cols();
    if (len < 2) throw std::invalid_argument("need at least two samples per row");
    if (!series.allFinite()) throw std::invalid_argument("non-finite sample in series");

    // center rows (rank-transform first for Spearman), then normalize the Gram matrix
    TimeSeriesMatrix data = series;
    if (method == CorrMethod::Spearman)
        for (Eigen::Index i = 0; i < n; ++i) data.row(i) = average_ranks(series.row(i)).transpose();
    data.colwise() -= data.rowwise().mean();

    const Eigen::VectorXd sq = data.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i)
        if (sq[i] == 0.0)
            throw std::runtime_error("degenerate series: zero variance in row " + std::to_string(i));

    CorrMatrix result = data * data.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        result(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double r = clamp_corr(result(i, j) / std::sqrt(sq[i] * sq[j]));
            result(i, j) = r;
            result(j, i) = r;
        }
    }
    return result;
}

CorrVector upper_tri(const CorrMatrix& matrix) {
    if (matrix.rows() != matrix.cols()) throw std::invalid_argument("matrix not square");
    const Eigen::Index n = matrix.rows();
    CorrVector out;
    out.node_count = static_cast<int>(n);
    out.values.resize(n * (n - 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) out.values[k++] = matrix(i, j);
    return out;
}

CorrMatrix unflatten(const CorrVector& vec) {
    const int n = node_count_from_pairs(vec.values.size());
    CorrMatrix out = Eigen::MatrixXd::Identity(n, n);
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            out(i, j) = vec.values[k];
            out(j, i) = vec.values[k];
            ++k;
        }
    }
    return out;
}

double mse(const CorrVector& truth, const CorrVector& predicted) {
    if (truth.values.size() != predicted.values.size())
        throw std::invalid_argument("correlation vector length mismatch");
    return (truth.values - predicted.values).squaredNorm() /
           static_cast<double>(truth.values.size());
}

double avg_mse(const std::vector<double>& per_window_mses) {
    if (per_window_mses.empty()) throw std::invalid_argument("no window MSEs to average");
    return std::accumulate(per_window_mses.begin(), per_window_mses.end(), 0.0) /
           static_cast<double>(per_window_mses.size());
}

void save_corr(const std::filesystem::path& path, const CorrVector& vec) {
    io::BinWriter out(path);
    out.magic(kCorrMagic);
    out.u32(kCorrVersion);
    out.u32(static_cast<std::uint32_t>(vec.node_count));
    out.f64_array(vec.values.data(), static_cast<std::size_t>(vec.values.size()));
    out.close();
}

CorrVector load_corr(const std::filesystem::path& path) {
    io::BinReader in(path);
    in.expect_magic(kCorrMagic, "correlation");
    in.expect_version(kCorrVersion, "correlation");
    CorrVector vec;
    vec.node_count = static_cast<int>(in.u32());
    const Eigen::Index m =
        static_cast<Eigen::Index>(vec.node_count) * (vec.node_count - 1) / 2;
    vec.values.resize(m);
    in.f64_array(vec.values.data(), static_cast<std::size_t>(m));
    return vec;
}

}  // namespace corrnet
