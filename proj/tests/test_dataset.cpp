#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "corrnet/binio.hpp"
#include "corrnet/dataset.hpp"
#include "corrnet/rng.hpp"

using namespace corrnet;

namespace {

NodeSelection first_rows(int n) {
    NodeSelection sel;
    for (int i = 0; i < n; ++i) sel.indices.push_back(i);
    return sel;
}

TimeSeriesMatrix random_series(int n, int len, std::uint64_t seed) {
    rng::Rng gen(seed);
    TimeSeriesMatrix x(n, len);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < len; ++j) x(i, j) = gen.gaussian(0, 1);
    return x;
}

CorrVector random_target(int node_count, std::uint64_t seed) {
    rng::Rng gen(seed);
    CorrVector v;
    v.node_count = node_count;
    v.values.resize(node_count * (node_count - 1) / 2);
    for (Eigen::Index i = 0; i < v.values.size(); ++i) v.values[i] = gen.uniform(-1, 1);
    return v;
}

std::vector<std::uint64_t> iota_ids(int count) {
    std::vector<std::uint64_t> ids(count);
    for (int i = 0; i < count; ++i) ids[i] = static_cast<std::uint64_t>(i + 1);
    return ids;
}

}  // namespace

TEST_CASE("window counts match the protocol arithmetic") {
    CHECK(window_count(5000, 100, 40) == 124);
    CHECK(window_count(750, 50, 2) == 351);
    CHECK(window_count(10, 10, 5) == 1);
}

TEST_CASE("window_count rejects windows longer than the series") {
    CHECK_THROWS_WITH_AS(window_count(10, 11, 5), doctest::Contains("window exceeds series"),
                         std::invalid_argument);
}

TEST_CASE("window starts stay in bounds and the last window ends at L") {
    rng::Rng gen(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int len = 2 + static_cast<int>(gen.below(200));
        const int w = 1 + static_cast<int>(gen.below(len));
        const int skip = 1 + static_cast<int>(gen.below(40));
        const int f = window_count(len, w, skip);
        CHECK(f == (len - w + skip - 1) / skip + 1);

        const TimeSeriesMatrix x = random_series(2, len, 1000 + trial);
        WindowSpec spec{w, skip, first_rows(2)};
        const auto windows = make_windows(x, spec);
        REQUIRE(static_cast<int>(windows.size()) == f);
        for (const auto& win : windows) {
            CHECK(win.start >= 0);
            CHECK(win.start <= len - w);
        }
        CHECK(windows.back().start == len - w);
    }
}

TEST_CASE("windows carry the selected rows in selection order") {
    TimeSeriesMatrix x(3, 6);
    x << 0, 1, 2, 3, 4, 5, 10, 11, 12, 13, 14, 15, 20, 21, 22, 23, 24, 25;
    NodeSelection sel;
    sel.indices = {2, 0};
    WindowSpec spec{3, 2, sel};
    const auto windows = make_windows(x, spec);
    REQUIRE(windows.size() == 3);  // starts 0, 2, 3 (clamped)
    CHECK(windows[0].matrix(0, 0) == 20);
    CHECK(windows[0].matrix(1, 0) == 0);
    CHECK(windows[1].start == 2);
    CHECK(windows[2].start == 3);
    CHECK(windows[2].matrix(0, 2) == 25);
}

TEST_CASE("flatten_window stacks node-major and reshapes back") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Eigen::VectorXd flat = flatten_window(m);
    REQUIRE(flat.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(flat[i] == i + 1);
    CHECK(reshape_window(flat, 2, 3) == m);

    CHECK(flatten_window(Eigen::MatrixXd::Zero(20, 100)).size() == 2000);

    rng::Rng gen(9);
    Eigen::MatrixXd r(5, 7);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 7; ++j) r(i, j) = gen.gaussian(0, 1);
    CHECK(reshape_window(flatten_window(r), 5, 7) == r);
}

TEST_CASE("assemble pairs every window with its source target") {
    std::vector<SourceData> sources;
    for (int k = 0; k < 3; ++k)
        sources.push_back(SourceData{static_cast<std::uint64_t>(k + 1),
                                     random_series(4, 30, 100 + k), random_target(4, 200 + k)});
    WindowSpec spec{10, 5, first_rows(2)};
    const Dataset ds = assemble(sources, spec, Normalize::None);

    const int f = window_count(30, 10, 5);
    CHECK(ds.size() == static_cast<std::size_t>(3 * f));
    CHECK(ds.meta.windows_per_source == f);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int slot = ds.window_source[i];
        CHECK(ds.target_of(i).values == sources[slot].target.values);
    }
    // source-major ordering: first f windows belong to source 0
    for (int q = 0; q < f; ++q) CHECK(ds.window_source[q] == 0);
}

TEST_CASE("assemble reproduces the paper-scale window counts") {
    // 300 sources of L=5000 windows at (w=100, skip=40) -> 37200 inputs
    std::vector<SourceData> sources;
    const TimeSeriesMatrix shared = random_series(2, 5000, 5);
    const CorrVector target = random_target(2, 6);
    for (int k = 0; k < 300; ++k)
        sources.push_back(SourceData{static_cast<std::uint64_t>(k + 1), shared, target});
    const Dataset ds = assemble(sources, WindowSpec{100, 40, first_rows(1)}, Normalize::None);
    CHECK(ds.size() == 37200u);

    // 2 sources of L=750 at (w=50, skip=2) -> 702 inputs
    std::vector<SourceData> eeg;
    const TimeSeriesMatrix shared_eeg = random_series(3, 750, 7);
    for (int k = 0; k < 2; ++k)
        eeg.push_back(SourceData{static_cast<std::uint64_t>(k + 1), shared_eeg,
                                 random_target(3, 300 + k)});
    CHECK(assemble(eeg, WindowSpec{50, 2, first_rows(2)}, Normalize::None).size() == 702u);
}

TEST_CASE("assemble rejects shape mismatches naming the source") {
    std::vector<SourceData> sources;
    sources.push_back(SourceData{1, random_series(4, 30, 1), random_target(4, 2)});
    sources.push_back(SourceData{2, random_series(4, 31, 3), random_target(4, 4)});
    CHECK_THROWS_WITH_AS(assemble(sources, WindowSpec{10, 5, first_rows(2)}, Normalize::None),
                         doctest::Contains("source 1"), std::invalid_argument);
}

TEST_CASE("min-max normalization scales every window into [-1,1]") {
    std::vector<SourceData> sources{
        SourceData{1, random_series(3, 40, 11), random_target(3, 12)}};
    const Dataset ds = assemble(sources, WindowSpec{8, 4, first_rows(3)}, Normalize::MinMax);
    for (const auto& input : ds.inputs) {
        CHECK(input.minCoeff() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(input.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(ds.meta.normalize == Normalize::MinMax);
}

TEST_CASE("min-max normalization rejects constant windows") {
    std::vector<SourceData> sources{
        SourceData{1, TimeSeriesMatrix::Constant(2, 20, 3.5), random_target(2, 13)}};
    CHECK_THROWS_WITH_AS(assemble(sources, WindowSpec{5, 5, first_rows(2)}, Normalize::MinMax),
                         doctest::Contains("degenerate normalization"), std::runtime_error);
}

TEST_CASE("split_by_source reproduces the protocol splits") {
    {
        const auto [train, test] = split_by_source(iota_ids(375), 0.8, 1);
        CHECK(train.size() == 300u);
        CHECK(test.size() == 75u);
    }
    {
        const auto [train, test] = split_by_source(iota_ids(65), 63.0 / 65.0, 2);
        CHECK(train.size() == 63u);
        CHECK(test.size() == 2u);
    }
    {
        const auto [train, test] = split_by_source(iota_ids(2), 0.5, 3);
        CHECK(train.size() == 1u);
        CHECK(test.size() == 1u);
    }
}

TEST_CASE("split_by_source never leaks and is deterministic") {
    const auto ids = iota_ids(40);
    const auto [train, test] = split_by_source(ids, 0.7, 9);
    std::set<std::uint64_t> train_set(train.begin(), train.end());
    for (std::uint64_t id : test) CHECK(train_set.count(id) == 0);
    CHECK(train.size() + test.size() == ids.size());

    const auto [train2, test2] = split_by_source(ids, 0.7, 9);
    CHECK(train == train2);
    CHECK(test == test2);
    const auto [train3, test3] = split_by_source(ids, 0.7, 10);
    CHECK(train != train3);  // different seed, different shuffle (40 choose 28 ways)
}

TEST_CASE("split_by_source validates input") {
    CHECK_THROWS_AS(split_by_source({1}, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_by_source(iota_ids(4), 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_by_source(iota_ids(4), 1.0, 1), std::invalid_argument);
}

TEST_CASE("dataset files round trip bitwise") {
    std::vector<SourceData> sources;
    for (int k = 0; k < 2; ++k)
        sources.push_back(SourceData{static_cast<std::uint64_t>(k + 7),
                                     random_series(5, 24, 500 + k), random_target(5, 600 + k)});
    const Dataset ds = assemble(sources, WindowSpec{6, 4, first_rows(3)}, Normalize::None);

    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "corrnet_dataset_test.bin";
    save_dataset(path, ds);
    const Dataset back = load_dataset(path);
    CHECK(back.source_ids == ds.source_ids);
    CHECK(back.window_source == ds.window_source);
    CHECK(back.meta.n == ds.meta.n);
    CHECK(back.meta.w == ds.meta.w);
    CHECK(back.meta.skip == ds.meta.skip);
    CHECK(back.meta.series_length == ds.meta.series_length);
    CHECK(back.meta.windows_per_source == ds.meta.windows_per_source);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(back.inputs[i] == ds.inputs[i]);
    for (std::size_t k = 0; k < ds.targets.size(); ++k)
        CHECK(back.targets[k].values == ds.targets[k].values);

    // write-read-write reproduces identical bytes
    const auto path2 = fs::temp_directory_path() / "corrnet_dataset_test2.bin";
    save_dataset(path2, back);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::vector<char> bytes_a((std::istreambuf_iterator<char>(a)),
                              std::istreambuf_iterator<char>());
    std::vector<char> bytes_b((std::istreambuf_iterator<char>(b)),
                              std::istreambuf_iterator<char>());
    CHECK(bytes_a == bytes_b);
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("dataset loader reports distinct failure kinds") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path();

    std::vector<SourceData> sources{
        SourceData{1, random_series(3, 20, 21), random_target(3, 22)}};
    const Dataset ds = assemble(sources, WindowSpec{5, 5, first_rows(2)}, Normalize::None);
    const auto good = dir / "corrnet_ds_good.bin";
    save_dataset(good, ds);

    const auto bad_magic = dir / "corrnet_ds_magic.bin";
    {
        std::ofstream out(bad_magic, std::ios::binary);
        out << "NOPE this is not a dataset";
    }
    CHECK_THROWS_AS(load_dataset(bad_magic), io::bad_magic_error);

    const auto truncated = dir / "corrnet_ds_trunc.bin";
    {
        std::ifstream in(good, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        std::ofstream out(truncated, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_dataset(truncated), io::truncated_file_error);

    const auto bad_version = dir / "corrnet_ds_version.bin";
    {
        std::ifstream in(good, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes[4] = 99;  // version field follows the 4-byte magic
        std::ofstream out(bad_version, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(load_dataset(bad_version), io::bad_version_error);

    for (const auto& p : {good, bad_magic, truncated, bad_version}) fs::remove(p);
}
