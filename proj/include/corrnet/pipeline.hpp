#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "corrnet/corr.hpp"
#include "corrnet/dataset.hpp"
#include "corrnet/dynamics.hpp"
#include "corrnet/embed.hpp"
#include "corrnet/graph.hpp"
#include "corrnet/mlp.hpp"

namespace corrnet {

struct NetworkConfig {
    std::string model = "er";  // "er" | "sf"
    int nodes = 100;
    double mean_degree = 6.0;  // ER
    int attach = 1;            // SF
    int realizations = 75;
};

struct DynamicsConfig {
    OscKind kind = OscKind::Rossler;
    std::vector<double> couplings{0.012, 0.013, 0.014, 0.015, 0.016};
    SimParams sim;
};

struct WindowGridConfig {
    std::vector<int> n{20};
    std::vector<int> w{100};
    std::vector<int> skip{40};
    SelectionMode mode = SelectionMode::HD;
};

struct TrainSettings {
    std::vector<int> hidden{1225, 5041};
    int epochs = 50;
    int batch_size = 64;
    double learning_rate = 1e-3;
    bool biases = true;
    OutputActivation output_activation = OutputActivation::Tanh;
};

struct ExperimentConfig {
    NetworkConfig network;
    DynamicsConfig dynamics;
    WindowGridConfig window;
    CorrMethod method = CorrMethod::Pearson;
    Normalize normalize = Normalize::None;
    TrainSettings train;
    double split_fraction = 0.8;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// Purpose tags of the splittable seed scheme. Every random stream of a run is
// derive_seed(master, purpose, index), so any artifact can be regenerated in
// isolation.
namespace seed_purpose {
constexpr std::uint64_t kGraph = 1;
constexpr std::uint64_t kFrequencies = 2;
constexpr std::uint64_t kInitState = 3;
constexpr std::uint64_t kSplit = 4;
constexpr std::uint64_t kTrainInit = 5;
constexpr std::uint64_t kTrainShuffle = 6;
constexpr std::uint64_t kEmbed = 7;
constexpr std::uint64_t kAblation = 8;
}  // namespace seed_purpose

struct SimulatedSource {
    std::uint64_t id = 0;  // 1-based, realization-major enumeration
    int graph_index = 0;
    double coupling = 0.0;
    TimeSeriesMatrix series;
    CorrVector target;
};

struct SourceSet {
    std::vector<Graph> graphs;  // one per realization, shared across couplings
    std::vector<SimulatedSource> sources;

    const Graph& graph_of(const SimulatedSource& source) const {
        return graphs[static_cast<std::size_t>(source.graph_index)];
    }
    const SimulatedSource& by_id(std::uint64_t id) const {
        return sources[static_cast<std::size_t>(id - 1)];
    }
    std::vector<std::uint64_t> ids() const;
};

// netgen + dynamics + corr stages for every (realization, coupling) pair
SourceSet generate_sources(const ExperimentConfig& config);

// Windowed dataset over the given source ids; node selection is ranked per
// source on its own graph realization.
Dataset dataset_for_ids(const SourceSet& set, const std::vector<std::uint64_t>& ids, int n,
                        int w, int skip, SelectionMode mode, Normalize normalize);

struct EvalResult {
    double avg_mse = 0.0;
    double std_over_windows = 0.0;
    std::vector<double> per_window;
};

EvalResult evaluate_model(const MlpModel& model, const Dataset& dataset);

// window-weighted mean of training targets: the floor any trained model must beat
CorrVector mean_target(const Dataset& dataset);
EvalResult evaluate_constant(const CorrVector& constant, const Dataset& dataset);

struct PredictionRecord {
    std::uint64_t source = 0;
    std::uint32_t window_ordinal = 0;
    Eigen::VectorXd values;
};

std::vector<PredictionRecord> predict_dataset(const MlpModel& model, const Dataset& dataset);

// "CNPR" container
void save_predictions(const std::filesystem::path& path,
                      const std::vector<PredictionRecord>& records, int node_count);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

// embedding diagnostic over a test dataset: one TRUE point per source plus
// every predicted vector
std::pair<Embedding, ClusterReport> embed_predictions(
    const Dataset& dataset, const std::vector<PredictionRecord>& predictions,
    const EmbedConfig& config);

std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// manifest.json: config echo plus per-stage artifact list with content hashes
class ManifestBuilder {
public:
    explicit ManifestBuilder(const ExperimentConfig& config);
    ~ManifestBuilder();

    // path must live under the run's output dir; stored relative to it
    void add_file(const std::string& stage, const std::filesystem::path& root,
                  const std::filesystem::path& file);
    void write(const std::filesystem::path& path);

private:
    nlohmann::json* doc_;
};

// recompute every referenced hash; throws std::runtime_error on mismatch
void verify_manifest(const std::filesystem::path& manifest_path);

struct PipelineResult {
    double test_avg_mse = 0.0;
    double test_std_over_windows = 0.0;
    double baseline_avg_mse = 0.0;
    int train_sources = 0;
    int test_sources = 0;
    std::filesystem::path manifest_path;
};

// full protocol for the first window-grid cell: generate, split, window,
// train, evaluate; every artifact lands under config.output_dir with its
// hash recorded in manifest.json
PipelineResult run_pipeline(const ExperimentConfig& config);

struct SweepRow {
    int n = 0;
    int w = 0;
    int skip = 0;
    SelectionMode mode = SelectionMode::HD;
    double avg_mse = 0.0;
    double std_over_windows = 0.0;
    int train_size = 0;
};

// one trained model per (n, w, skip) cell; per-cell predictions saved so the
// reported averages can be recomputed offline
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

struct AblationRow {
    double fraction = 1.0;
    double avg_mse = 0.0;
    int train_sources = 0;
};

// nested training subsets (each smaller set is a prefix of the larger ones in
// a fixed shuffled order), fixed test set, one retraining per fraction
std::vector<AblationRow> run_ablation(const ExperimentConfig& config,
                                      const std::vector<double>& fractions);
void write_ablation_csv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows);

}  // namespace corrnet
