#include "corrnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "corrnet/binio.hpp"
#include "corrnet/rng.hpp"

namespace corrnet {

namespace {

constexpr char kDatasetMagic[4] = {'C', 'N', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;

void validate_selection(const NodeSelection& sel, int node_count) {
    if (sel.indices.empty()) throw std::invalid_argument("empty node selection");
    std::vector<int> sorted = sel.indices;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0 || sorted.back() >= node_count)
        throw std::invalid_argument("node selection index out of range");
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("node selection has duplicates");
}

Eigen::VectorXd normalize_minmax(const Eigen::VectorXd& flat, int source, int window) {
    const double lo = flat.minCoeff();
    const double hi = flat.maxCoeff();
    if (hi == lo)
        throw std::runtime_error("degenerate normalization: constant window " +
                                 std::to_string(window) + " in source " +
                                 std::to_string(source));
    return (2.0 / (hi - lo)) * (flat.array() - lo) - 1.0;
}

}  // namespace

int window_count(int series_length, int w, int skip) {
    if (w < 1 || skip < 1) throw std::invalid_argument("w and skip must be >= 1");
    if (w > series_length)
        throw std::invalid_argument("window exceeds series: w=" + std::to_string(w) + " > L=" +
                                    std::to_string(series_length));
    const int span = series_length - w;
    return (span + skip - 1) / skip + 1;
}

std::vector<Window> make_windows(const TimeSeriesMatrix& series, const WindowSpec& spec) {
    const int node_count = static_cast<int>(series.rows());
    const int len = static_cast<int>(series.cols());
    validate_selection(spec.node_selection, node_count);
    const int f = window_count(len, spec.w, spec.skip);
    const int n = spec.n();

    std::vector<Window> windows;
    windows.reserve(static_cast<std::size_t>(f));
    for (int q = 0; q < f; ++q) {
        Window win;
        win.start = std::min(q * spec.skip, len - spec.w);
        win.matrix.resize(n, spec.w);
        for (int r = 0; r < n; ++r)
            win.matrix.row(r) = series.row(spec.node_selection.indices[r]).segment(win.start, spec.w);
        win.flat = flatten_window(win.matrix);
        windows.push_back(std::move(win));
    }
    return windows;
}

Eigen::VectorXd flatten_window(const Eigen::MatrixXd& matrix) {
    Eigen::VectorXd flat(matrix.size());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) flat[k++] = matrix(r, c);
    return flat;
}

Eigen::MatrixXd reshape_window(const Eigen::VectorXd& flat, int n, int w) {
    if (flat.size() != static_cast<Eigen::Index>(n) * w)
        throw std::invalid_argument("flat window length does not match n*w");
    Eigen::MatrixXd matrix(n, w);
    Eigen::Index k = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < w; ++c) matrix(r, c) = flat[k++];
    return matrix;
}

Dataset assemble(const std::vector<SourceData>& sources, const WindowSpec& spec,
                 Normalize normalize) {
    std::vector<NodeSelection> selections(sources.size(), spec.node_selection);
    return assemble(sources, selections, spec.w, spec.skip, normalize);
}

Dataset assemble(const std::vector<SourceData>& sources,
                 const std::vector<NodeSelection>& selections, int w, int skip,
                 Normalize normalize) {
    if (sources.empty()) throw std::invalid_argument("no sources to assemble");
    if (selections.size() != sources.size())
        throw std::invalid_argument("one node selection required per source");

    const int node_count = static_cast<int>(sources[0].series.rows());
    const int len = static_cast<int>(sources[0].series.cols());
    const int target_nodes = sources[0].target.node_count;
    const int n = static_cast<int>(selections[0].indices.size());
    for (std::size_t k = 0; k < sources.size(); ++k) {
        if (sources[k].series.rows() != node_count || sources[k].series.cols() != len)
            throw std::invalid_argument("source " + std::to_string(k) +
                                        " series shape differs from source 0");
        if (sources[k].target.node_count != target_nodes)
            throw std::invalid_argument("source " + std::to_string(k) +
                                        " target node count differs from source 0");
        if (static_cast<int>(selections[k].indices.size()) != n)
            throw std::invalid_argument("source " + std::to_string(k) +
                                        " selection size differs from source 0");
    }

    Dataset ds;
    ds.meta.node_count = node_count;
    ds.meta.series_length = len;
    ds.meta.n = n;
    ds.meta.w = w;
    ds.meta.skip = skip;
    ds.meta.windows_per_source = window_count(len, w, skip);
    ds.meta.normalize = normalize;

    const std::size_t total =
        sources.size() * static_cast<std::size_t>(ds.meta.windows_per_source);
    ds.inputs.reserve(total);
    ds.window_source.reserve(total);

    for (std::size_t k = 0; k < sources.size(); ++k) {
        WindowSpec per{w, skip, selections[k]};
        auto windows = make_windows(sources[k].series, per);
        for (std::size_t q = 0; q < windows.size(); ++q) {
            Eigen::VectorXd input = std::move(windows[q].flat);
            if (normalize == Normalize::MinMax)
                input = normalize_minmax(input, static_cast<int>(k), static_cast<int>(q));
            ds.inputs.push_back(std::move(input));
            ds.window_source.push_back(static_cast<int>(k));
        }
        ds.targets.push_back(sources[k].target);
        ds.source_ids.push_back(sources[k].id);
    }
    return ds;
}

std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>> split_by_source(
    const std::vector<std::uint64_t>& source_ids, double train_fraction, std::uint64_t seed) {
    if (source_ids.size() < 2) throw std::invalid_argument("need at least two sources to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0,1)");

    std::vector<std::uint64_t> order = source_ids;
    rng::Rng gen(seed);
    gen.shuffle(order);

    const auto count = static_cast<std::size_t>(std::clamp<long long>(
        std::llround(train_fraction * static_cast<double>(order.size())), 1,
        static_cast<long long>(order.size()) - 1));

    std::vector<std::uint64_t> train(order.begin(), order.begin() + static_cast<long>(count));
    std::vector<std::uint64_t> test(order.begin() + static_cast<long>(count), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    io::BinWriter out(path);
    out.magic(kDatasetMagic);
    out.u32(kDatasetVersion);
    out.u32(static_cast<std::uint32_t>(ds.targets.size()));                 // d
    out.u32(static_cast<std::uint32_t>(ds.meta.windows_per_source));        // f
    out.u32(static_cast<std::uint32_t>(ds.meta.node_count));                // N
    out.u32(static_cast<std::uint32_t>(ds.meta.series_length));             // L
    out.u32(static_cast<std::uint32_t>(ds.meta.n));
    out.u32(static_cast<std::uint32_t>(ds.meta.w));
    out.u32(static_cast<std::uint32_t>(ds.meta.skip));
    const std::uint32_t m =
        ds.targets.empty() ? 0 : static_cast<std::uint32_t>(ds.targets[0].values.size());
    out.u32(m);
    out.u32(ds.meta.normalize == Normalize::MinMax ? 1 : 0);
    for (std::uint64_t id : ds.source_ids) out.u64(id);

    const int f = ds.meta.windows_per_source;
    for (std::size_t k = 0; k < ds.targets.size(); ++k) {
        out.f64_array(ds.targets[k].values.data(),
                      static_cast<std::size_t>(ds.targets[k].values.size()));
        for (int q = 0; q < f; ++q) {
            const auto& input = ds.inputs[k * static_cast<std::size_t>(f) + q];
            out.f64_array(input.data(), static_cast<std::size_t>(input.size()));
        }
    }
    out.close();
}

Dataset load_dataset(const std::filesystem::path& path) {
    io::BinReader in(path);
    in.expect_magic(kDatasetMagic, "dataset");
    in.expect_version(kDatasetVersion, "dataset");

    const auto d = in.u32();
    Dataset ds;
    ds.meta.windows_per_source = static_cast<int>(in.u32());
    ds.meta.node_count = static_cast<int>(in.u32());
    ds.meta.series_length = static_cast<int>(in.u32());
    ds.meta.n = static_cast<int>(in.u32());
    ds.meta.w = static_cast<int>(in.u32());
    ds.meta.skip = static_cast<int>(in.u32());
    const auto m = in.u32();
    ds.meta.normalize = in.u32() == 1 ? Normalize::MinMax : Normalize::None;

    ds.source_ids.resize(d);
    for (auto& id : ds.source_ids) id = in.u64();

    const auto input_len = static_cast<std::size_t>(ds.meta.n) * ds.meta.w;
    const int target_nodes = m == 0 ? 0 : node_count_from_pairs(m);
    ds.targets.reserve(d);
    ds.inputs.reserve(static_cast<std::size_t>(d) * ds.meta.windows_per_source);
    for (std::uint32_t k = 0; k < d; ++k) {
        CorrVector target;
        target.node_count = target_nodes;
        target.values.resize(m);
        in.f64_array(target.values.data(), m);
        ds.targets.push_back(std::move(target));
        for (int q = 0; q < ds.meta.windows_per_source; ++q) {
            Eigen::VectorXd input(input_len);
            in.f64_array(input.data(), input_len);
            ds.inputs.push_back(std::move(input));
            ds.window_source.push_back(static_cast<int>(k));
        }
    }
    return ds;
}

}  // namespace corrnet
