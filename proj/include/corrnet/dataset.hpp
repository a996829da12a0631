#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "corrnet/corr.hpp"
#include "corrnet/graph.hpp"

namespace corrnet {

enum class Normalize { None, MinMax };

struct WindowSpec {
    int w = 100;
    int skip = 40;
    NodeSelection node_selection;

    int n() const { return static_cast<int>(node_selection.indices.size()); }
};

struct Window {
    Eigen::MatrixXd matrix;  // n x w slice, rows in selection order
    Eigen::VectorXd flat;    // node-major stacking of `matrix`
    int source_dataset = 0;
    int start = 0;
};

// f = ceil((L-w)/skip) + 1; the last window is clamped to start at L-w
int window_count(int series_length, int w, int skip);

std::vector<Window> make_windows(const TimeSeriesMatrix& series, const WindowSpec& spec);

// node-major: row 0's w values, then row 1's, ...
Eigen::VectorXd flatten_window(const Eigen::MatrixXd& matrix);
Eigen::MatrixXd reshape_window(const Eigen::VectorXd& flat, int n, int w);

struct SourceData {
    std::uint64_t id = 0;
    TimeSeriesMatrix series;
    CorrVector target;
};

// Windowed supervised dataset: every window of source slot k maps to the one
// target stored for k (targets are stored once per source, not per window).
struct Dataset {
    std::vector<Eigen::VectorXd> inputs;  // d*f vectors of length n*w
    std::vector<CorrVector> targets;      // one per source slot
    std::vector<int> window_source;       // input index -> source slot
    std::vector<std::uint64_t> source_ids;

    struct Meta {
        int node_count = 0;  // N of the underlying series
        int series_length = 0;
        int n = 0;
        int w = 0;
        int skip = 0;
        int windows_per_source = 0;  // f
        Normalize normalize = Normalize::None;
    } meta;

    std::size_t size() const { return inputs.size(); }
    const CorrVector& target_of(std::size_t window_index) const {
        return targets[static_cast<std::size_t>(window_source[window_index])];
    }
};

// One selection applied to every source.
Dataset assemble(const std::vector<SourceData>& sources, const WindowSpec& spec,
                 Normalize normalize);

// Per-source selections (each source's own degree ranking); all selections
// must have equal size.
Dataset assemble(const std::vector<SourceData>& sources,
                 const std::vector<NodeSelection>& selections, int w, int skip,
                 Normalize normalize);

// Source-granularity split: no window of a test source is ever seen in
// training. Returns (train_ids, test_ids), both ascending.
std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>> split_by_source(
    const std::vector<std::uint64_t>& source_ids, double train_fraction, std::uint64_t seed);

// "CNDS" container
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace corrnet
