#include "corrnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "corrnet/binio.hpp"
#include "corrnet/rng.hpp"

namespace corrnet {

namespace {

using nlohmann::json;

constexpr char kPredictionsMagic[4] = {'C', 'N', 'P', 'R'};
constexpr std::uint32_t kPredictionsVersion = 1;

std::string mode_name(SelectionMode mode) { return mode == SelectionMode::HD ? "hd" : "ld"; }

SelectionMode mode_from_name(const std::string& name) {
    if (name == "hd") return SelectionMode::HD;
    if (name == "ld") return SelectionMode::LD;
    throw std::invalid_argument("unknown selection mode '" + name + "' (want hd|ld)");
}

std::uint64_t cell_tag(int n, int w, int skip, SelectionMode mode) {
    return (static_cast<std::uint64_t>(n) << 42) ^ (static_cast<std::uint64_t>(w) << 21) ^
           (static_cast<std::uint64_t>(skip) << 1) ^ (mode == SelectionMode::HD ? 0u : 1u);
}

TrainConfig train_config_for(const ExperimentConfig& config, std::uint64_t tag) {
    TrainConfig tc;
    tc.epochs = config.train.epochs;
    tc.batch_size = config.train.batch_size;
    tc.adam.learning_rate = config.train.learning_rate;
    tc.shuffle_seed = rng::derive_seed(config.seed, seed_purpose::kTrainShuffle, tag);
    return tc;
}

MlpModel model_for_cell(const ExperimentConfig& config, int input_dim, int output_dim,
                        std::uint64_t tag) {
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int h : config.train.hidden) dims.push_back(h);
    dims.push_back(output_dim);
    return init_model(dims, config.train.output_activation, config.train.biases,
                      rng::derive_seed(config.seed, seed_purpose::kTrainInit, tag));
}

std::vector<std::uint64_t> shuffled_train_order(const std::vector<std::uint64_t>& train_ids,
                                                std::uint64_t master) {
    std::vector<std::uint64_t> order = train_ids;
    rng::Rng gen(rng::derive_seed(master, seed_purpose::kAblation, 0));
    gen.shuffle(order);
    return order;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << header << '\n';
    for (const auto& row : rows) out << row << '\n';
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("network")) {
        const auto& n = j.at("network");
        c.network.model = n.value("model", c.network.model);
        c.network.nodes = n.value("nodes", c.network.nodes);
        c.network.mean_degree = n.value("mean_degree", c.network.mean_degree);
        c.network.attach = n.value("attach", c.network.attach);
        c.network.realizations = n.value("realizations", c.network.realizations);
        if (c.network.model != "er" && c.network.model != "sf")
            throw std::invalid_argument("network.model must be 'er' or 'sf'");
    }
    if (j.contains("dynamics")) {
        const auto& d = j.at("dynamics");
        const std::string kind = d.value("kind", std::string("rossler"));
        if (kind == "rossler")
            c.dynamics.kind = OscKind::Rossler;
        else if (kind == "fhn")
            c.dynamics.kind = OscKind::Fhn;
        else
            throw std::invalid_argument("dynamics.kind must be 'rossler' or 'fhn'");
        c.dynamics.sim = SimParams::defaults(c.dynamics.kind);
        if (d.contains("couplings"))
            c.dynamics.couplings = d.at("couplings").get<std::vector<double>>();
        c.dynamics.sim.dt = d.value("dt", c.dynamics.sim.dt);
        c.dynamics.sim.transient_time = d.value("transient_time", c.dynamics.sim.transient_time);
        c.dynamics.sim.sample_stride = d.value("sample_stride", c.dynamics.sim.sample_stride);
        c.dynamics.sim.length = d.value("length", c.dynamics.sim.length);
    }
    if (j.contains("window")) {
        const auto& w = j.at("window");
        if (w.contains("n")) c.window.n = w.at("n").get<std::vector<int>>();
        if (w.contains("w")) c.window.w = w.at("w").get<std::vector<int>>();
        if (w.contains("skip")) c.window.skip = w.at("skip").get<std::vector<int>>();
        c.window.mode = mode_from_name(w.value("mode", mode_name(c.window.mode)));
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        if (t.contains("hidden")) c.train.hidden = t.at("hidden").get<std::vector<int>>();
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
        c.train.biases = t.value("biases", c.train.biases);
        const std::string act = t.value("output_activation", std::string("tanh"));
        if (act == "tanh")
            c.train.output_activation = OutputActivation::Tanh;
        else if (act == "sigmoid")
            c.train.output_activation = OutputActivation::Sigmoid;
        else
            throw std::invalid_argument("train.output_activation must be 'tanh' or 'sigmoid'");
    }
    const std::string method = j.value("method", std::string("pearson"));
    if (method == "pearson")
        c.method = CorrMethod::Pearson;
    else if (method == "spearman")
        c.method = CorrMethod::Spearman;
    else
        throw std::invalid_argument("method must be 'pearson' or 'spearman'");
    const std::string norm = j.value("normalize", std::string("none"));
    if (norm == "none")
        c.normalize = Normalize::None;
    else if (norm == "minmax")
        c.normalize = Normalize::MinMax;
    else
        throw std::invalid_argument("normalize must be 'none' or 'minmax'");
    c.split_fraction = j.value("split_fraction", c.split_fraction);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);

    if (c.dynamics.couplings.empty()) throw std::invalid_argument("coupling grid is empty");
    if (c.window.n.empty() || c.window.w.empty() || c.window.skip.empty())
        throw std::invalid_argument("window grid is empty");
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["network"] = {{"model", c.network.model},
                    {"nodes", c.network.nodes},
                    {"mean_degree", c.network.mean_degree},
                    {"attach", c.network.attach},
                    {"realizations", c.network.realizations}};
    j["dynamics"] = {{"kind", c.dynamics.kind == OscKind::Rossler ? "rossler" : "fhn"},
                     {"couplings", c.dynamics.couplings},
                     {"dt", c.dynamics.sim.dt},
                     {"transient_time", c.dynamics.sim.transient_time},
                     {"sample_stride", c.dynamics.sim.sample_stride},
                     {"length", c.dynamics.sim.length}};
    j["window"] = {{"n", c.window.n},
                   {"w", c.window.w},
                   {"skip", c.window.skip},
                   {"mode", mode_name(c.window.mode)}};
    j["train"] = {{"hidden", c.train.hidden},
                  {"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"learning_rate", c.train.learning_rate},
                  {"biases", c.train.biases},
                  {"output_activation",
                   c.train.output_activation == OutputActivation::Tanh ? "tanh" : "sigmoid"}};
    j["method"] = c.method == CorrMethod::Pearson ? "pearson" : "spearman";
    j["normalize"] = c.normalize == Normalize::None ? "none" : "minmax";
    j["split_fraction"] = c.split_fraction;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::vector<std::uint64_t> SourceSet::ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(sources.size());
    for (const auto& s : sources) out.push_back(s.id);
    return out;
}

SourceSet generate_sources(const ExperimentConfig& config) {
    SourceSet set;
    set.graphs.reserve(static_cast<std::size_t>(config.network.realizations));
    for (int j = 0; j < config.network.realizations; ++j) {
        const std::uint64_t gseed =
            rng::derive_seed(config.seed, seed_purpose::kGraph, static_cast<std::uint64_t>(j));
        set.graphs.push_back(config.network.model == "er"
                                 ? gen_er(config.network.nodes, config.network.mean_degree, gseed)
                                 : gen_sf(config.network.nodes, config.network.attach, gseed));
    }

    std::uint64_t id = 1;
    for (int j = 0; j < config.network.realizations; ++j) {
        for (double coupling : config.dynamics.couplings) {
            OscillatorParams params;
            params.kind = config.dynamics.kind;
            params.coupling = coupling;
            const FrequencyVector omegas =
                draw_frequencies(config.dynamics.kind, config.network.nodes,
                                 rng::derive_seed(config.seed, seed_purpose::kFrequencies, id));
            auto [traj, series] =
                simulate(set.graphs[static_cast<std::size_t>(j)], params, omegas,
                         rng::derive_seed(config.seed, seed_purpose::kInitState, id),
                         config.dynamics.sim);
            SimulatedSource src;
            src.id = id;
            src.graph_index = j;
            src.coupling = coupling;
            src.target = upper_tri(corr_matrix(series, config.method));
            src.series = std::move(series);
            set.sources.push_back(std::move(src));
            ++id;
        }
    }
    return set;
}

Dataset dataset_for_ids(const SourceSet& set, const std::vector<std::uint64_t>& ids, int n,
                        int w, int skip, SelectionMode mode, Normalize normalize) {
    std::vector<SourceData> sources;
    std::vector<NodeSelection> selections;
    sources.reserve(ids.size());
    selections.reserve(ids.size());
    for (std::uint64_t id : ids) {
        const SimulatedSource& src = set.by_id(id);
        sources.push_back(SourceData{id, src.series, src.target});
        selections.push_back(select_nodes(set.graph_of(src), n, mode));
    }
    return assemble(sources, selections, w, skip, normalize);
}

EvalResult evaluate_model(const MlpModel& model, const Dataset& dataset) {
    EvalResult result;
    result.per_window.reserve(dataset.size());
    const std::size_t batch_size = 256;
    for (std::size_t begin = 0; begin < dataset.size(); begin += batch_size) {
        const std::size_t batch = std::min(batch_size, dataset.size() - begin);
        Eigen::MatrixXd inputs(model.input_dim(), batch);
        for (std::size_t b = 0; b < batch; ++b) inputs.col(b) = dataset.inputs[begin + b];
        const Eigen::MatrixXd outputs = forward(model, inputs).output();
        for (std::size_t b = 0; b < batch; ++b) {
            const Eigen::VectorXd diff =
                outputs.col(b) - dataset.target_of(begin + b).values;
            result.per_window.push_back(diff.squaredNorm() /
                                        static_cast<double>(diff.size()));
        }
    }
    result.avg_mse = avg_mse(result.per_window);
    double var = 0.0;
    for (double v : result.per_window) var += (v - result.avg_mse) * (v - result.avg_mse);
    result.std_over_windows = std::sqrt(var / static_cast<double>(result.per_window.size()));
    return result;
}

CorrVector mean_target(const Dataset& dataset) {
    if (dataset.inputs.empty()) throw std::invalid_argument("empty dataset");
    CorrVector mean;
    mean.node_count = dataset.targets[0].node_count;
    mean.values = Eigen::VectorXd::Zero(dataset.targets[0].values.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) mean.values += dataset.target_of(i).values;
    mean.values /= static_cast<double>(dataset.size());
    return mean;
}

EvalResult evaluate_constant(const CorrVector& constant, const Dataset& dataset) {
    EvalResult result;
    result.per_window.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        result.per_window.push_back(mse(constant, dataset.target_of(i)));
    result.avg_mse = avg_mse(result.per_window);
    double var = 0.0;
    for (double v : result.per_window) var += (v - result.avg_mse) * (v - result.avg_mse);
    result.std_over_windows = std::sqrt(var / static_cast<double>(result.per_window.size()));
    return result;
}

std::vector<PredictionRecord> predict_dataset(const MlpModel& model, const Dataset& dataset) {
    std::vector<PredictionRecord> records;
    records.reserve(dataset.size());
    const std::size_t batch_size = 256;
    const int f = dataset.meta.windows_per_source;
    for (std::size_t begin = 0; begin < dataset.size(); begin += batch_size) {
        const std::size_t batch = std::min(batch_size, dataset.size() - begin);
        Eigen::MatrixXd inputs(model.input_dim(), batch);
        for (std::size_t b = 0; b < batch; ++b) inputs.col(b) = dataset.inputs[begin + b];
        const Eigen::MatrixXd outputs = forward(model, inputs).output();
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t idx = begin + b;
            PredictionRecord rec;
            rec.source = dataset.source_ids[static_cast<std::size_t>(dataset.window_source[idx])];
            rec.window_ordinal = static_cast<std::uint32_t>(idx % static_cast<std::size_t>(f));
            rec.values = outputs.col(b);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

void save_predictions(const std::filesystem::path& path,
                      const std::vector<PredictionRecord>& records, int node_count) {
    io::BinWriter out(path);
    out.magic(kPredictionsMagic);
    out.u32(kPredictionsVersion);
    out.u64(records.size());
    out.u32(records.empty() ? 0 : static_cast<std::uint32_t>(records[0].values.size()));
    out.u32(static_cast<std::uint32_t>(node_count));
    for (const auto& rec : records) {
        out.u64(rec.source);
        out.u32(rec.window_ordinal);
        out.f64_array(rec.values.data(), static_cast<std::size_t>(rec.values.size()));
    }
    out.close();
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
    io::BinReader in(path);
    in.expect_magic(kPredictionsMagic, "predictions");
    in.expect_version(kPredictionsVersion, "predictions");
    const std::uint64_t count = in.u64();
    const std::uint32_t m = in.u32();
    in.u32();  // node_count, implied by m
    std::vector<PredictionRecord> records;
    records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PredictionRecord rec;
        rec.source = in.u64();
        rec.window_ordinal = in.u32();
        rec.values.resize(m);
        in.f64_array(rec.values.data(), m);
        records.push_back(std::move(rec));
    }
    return records;
}

std::pair<Embedding, ClusterReport> embed_predictions(
    const Dataset& dataset, const std::vector<PredictionRecord>& predictions,
    const EmbedConfig& config) {
    std::vector<Eigen::VectorXd> points;
    std::vector<PointLabel> labels;
    points.reserve(dataset.targets.size() + predictions.size());
    for (std::size_t k = 0; k < dataset.targets.size(); ++k) {
        points.push_back(dataset.targets[k].values);
        labels.push_back({dataset.source_ids[k], PointKind::True});
    }
    for (const auto& rec : predictions) {
        points.push_back(rec.values);
        labels.push_back({rec.source, PointKind::Predicted});
    }
    Embedding embedding = embed_2d(points, labels, config);
    ClusterReport report = cluster_report(embedding);
    return {std::move(embedding), std::move(report)};
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for hashing: " + path.string());
    std::uint64_t hash = 14695981039346656037ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

namespace {
std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}
}  // namespace

ManifestBuilder::ManifestBuilder(const ExperimentConfig& config) : doc_(new json) {
    (*doc_)["format"] = "corrnet-manifest-1";
    (*doc_)["config"] = config_to_json(config);
    (*doc_)["stages"] = json::object();
}

ManifestBuilder::~ManifestBuilder() { delete doc_; }

void ManifestBuilder::add_file(const std::string& stage, const std::filesystem::path& root,
                               const std::filesystem::path& file) {
    json entry;
    entry["path"] = std::filesystem::relative(file, root).generic_string();
    entry["bytes"] = static_cast<std::uint64_t>(std::filesystem::file_size(file));
    entry["fnv1a64"] = hex64(fnv1a64_file(file));
    (*doc_)["stages"][stage].push_back(entry);
}

void ManifestBuilder::write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << doc_->dump(2) << '\n';
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

void verify_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
    json doc;
    in >> doc;
    const auto root = manifest_path.parent_path();
    for (const auto& [stage, files] : doc.at("stages").items()) {
        for (const auto& entry : files) {
            const auto file = root / entry.at("path").get<std::string>();
            if (!std::filesystem::exists(file))
                throw std::runtime_error("manifest names missing file: " + file.string());
            const std::string have = hex64(fnv1a64_file(file));
            if (have != entry.at("fnv1a64").get<std::string>())
                throw std::runtime_error("hash mismatch for " + file.string() + " in stage " +
                                         stage);
        }
    }
}

PipelineResult run_pipeline(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    const fs::path out_dir = config.output_dir;
    fs::create_directories(out_dir / "graphs");
    fs::create_directories(out_dir / "series");
    fs::create_directories(out_dir / "corr");
    fs::create_directories(out_dir / "datasets");

    ManifestBuilder manifest(config);

    auto stage = [](const std::string& name, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            throw std::runtime_error("stage " + name + " failed: " + e.what());
        }
    };

    SourceSet set;
    stage("netgen+dynamics+corr", [&] {
        set = generate_sources(config);
        for (std::size_t j = 0; j < set.graphs.size(); ++j) {
            const fs::path p = out_dir / "graphs" / ("graph_" + std::to_string(j) + ".edges");
            set.graphs[j].save_edge_list(p);
            manifest.add_file("netgen", out_dir, p);
        }
        for (const auto& src : set.sources) {
            const fs::path sp =
                out_dir / "series" / ("source_" + std::to_string(src.id) + ".bin");
            save_series(sp, src.series);
            manifest.add_file("dynamics", out_dir, sp);
            const fs::path cp =
                out_dir / "corr" / ("source_" + std::to_string(src.id) + ".bin");
            save_corr(cp, src.target);
            manifest.add_file("corr", out_dir, cp);
        }
    });

    const int n = config.window.n.front();
    const int w = config.window.w.front();
    const int skip = config.window.skip.front();
    const std::uint64_t tag = cell_tag(n, w, skip, config.window.mode);

    Dataset train_ds, test_ds;
    std::vector<std::uint64_t> train_ids, test_ids;
    stage("dataset", [&] {
        std::tie(train_ids, test_ids) =
            split_by_source(set.ids(), config.split_fraction,
                            rng::derive_seed(config.seed, seed_purpose::kSplit, 0));
        train_ds = dataset_for_ids(set, train_ids, n, w, skip, config.window.mode,
                                   config.normalize);
        test_ds =
            dataset_for_ids(set, test_ids, n, w, skip, config.window.mode, config.normalize);
        save_dataset(out_dir / "datasets" / "train.bin", train_ds);
        save_dataset(out_dir / "datasets" / "test.bin", test_ds);
        manifest.add_file("dataset", out_dir, out_dir / "datasets" / "train.bin");
        manifest.add_file("dataset", out_dir, out_dir / "datasets" / "test.bin");
    });

    MlpModel model;
    stage("train", [&] {
        model = model_for_cell(config, n * w,
                               static_cast<int>(train_ds.targets[0].values.size()), tag);
        const auto history = train(model, train_ds, train_config_for(config, tag));
        save_model(out_dir / "model.bin", model);
        std::vector<std::string> rows;
        for (std::size_t e = 0; e < history.size(); ++e)
            rows.push_back(std::to_string(e + 1) + "," + format_double(history[e]));
        write_csv(out_dir / "history.csv", "epoch,mean_loss", rows);
        manifest.add_file("train", out_dir, out_dir / "model.bin");
        manifest.add_file("train", out_dir, out_dir / "history.csv");
    });

    PipelineResult result;
    stage("evaluate", [&] {
        const EvalResult eval = evaluate_model(model, test_ds);
        const EvalResult baseline = evaluate_constant(mean_target(train_ds), test_ds);
        const auto predictions = predict_dataset(model, test_ds);
        save_predictions(out_dir / "predictions.bin", predictions,
                         test_ds.targets[0].node_count);
        manifest.add_file("evaluate", out_dir, out_dir / "predictions.bin");

        result.test_avg_mse = eval.avg_mse;
        result.test_std_over_windows = eval.std_over_windows;
        result.baseline_avg_mse = baseline.avg_mse;
        result.train_sources = static_cast<int>(train_ids.size());
        result.test_sources = static_cast<int>(test_ids.size());

        write_csv(out_dir / "results.csv",
                  "n,w,skip,mode,avg_mse,std_over_windows,train_size,baseline_avg_mse",
                  {std::to_string(n) + "," + std::to_string(w) + "," + std::to_string(skip) +
                   "," + mode_name(config.window.mode) + "," + format_double(eval.avg_mse) +
                   "," + format_double(eval.std_over_windows) + "," +
                   std::to_string(train_ds.size()) + "," + format_double(baseline.avg_mse)});
        manifest.add_file("evaluate", out_dir, out_dir / "results.csv");
    });

    result.manifest_path = out_dir / "manifest.json";
    manifest.write(result.manifest_path);
    verify_manifest(result.manifest_path);
    return result;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    const fs::path out_dir = config.output_dir;
    fs::create_directories(out_dir);

    const SourceSet set = generate_sources(config);
    const auto [train_ids, test_ids] =
        split_by_source(set.ids(), config.split_fraction,
                        rng::derive_seed(config.seed, seed_purpose::kSplit, 0));

    std::vector<SweepRow> rows;
    for (int n : config.window.n) {
        for (int w : config.window.w) {
            for (int skip : config.window.skip) {
                const std::uint64_t tag = cell_tag(n, w, skip, config.window.mode);
                const Dataset train_ds = dataset_for_ids(set, train_ids, n, w, skip,
                                                         config.window.mode, config.normalize);
                const Dataset test_ds = dataset_for_ids(set, test_ids, n, w, skip,
                                                        config.window.mode, config.normalize);
                MlpModel model = model_for_cell(
                    config, n * w, static_cast<int>(train_ds.targets[0].values.size()), tag);
                train(model, train_ds, train_config_for(config, tag));
                const EvalResult eval = evaluate_model(model, test_ds);

                const std::string cell_name = "cell_n" + std::to_string(n) + "_w" +
                                              std::to_string(w) + "_s" + std::to_string(skip) +
                                              "_" + mode_name(config.window.mode);
                save_model(out_dir / (cell_name + "_model.bin"), model);
                save_predictions(out_dir / (cell_name + "_predictions.bin"),
                                 predict_dataset(model, test_ds),
                                 test_ds.targets[0].node_count);

                rows.push_back(SweepRow{n, w, skip, config.window.mode, eval.avg_mse,
                                        eval.std_over_windows,
                                        static_cast<int>(train_ds.size())});
            }
        }
    }
    write_sweep_csv(out_dir / "results.csv", rows);
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::vector<std::string> lines;
    lines.reserve(rows.size());
    for (const auto& r : rows)
        lines.push_back(std::to_string(r.n) + "," + std::to_string(r.w) + "," +
                        std::to_string(r.skip) + "," + mode_name(r.mode) + "," +
                        format_double(r.avg_mse) + "," + format_double(r.std_over_windows) +
                        "," + std::to_string(r.train_size));
    write_csv(path, "n,w,skip,mode,avg_mse,std_over_windows,train_size", lines);
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& config,
                                      const std::vector<double>& fractions) {
    if (fractions.empty()) throw std::invalid_argument("no ablation fractions");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0.0 && fractions[i] <= 1.0))
            throw std::invalid_argument("ablation fractions must lie in (0,1]");
        if (i > 0 && fractions[i] >= fractions[i - 1])
            throw std::invalid_argument("ablation fractions must be strictly descending");
    }

    namespace fs = std::filesystem;
    const fs::path out_dir = config.output_dir;
    fs::create_directories(out_dir);

    const SourceSet set = generate_sources(config);
    const auto [train_ids, test_ids] =
        split_by_source(set.ids(), config.split_fraction,
                        rng::derive_seed(config.seed, seed_purpose::kSplit, 0));
    const std::vector<std::uint64_t> order = shuffled_train_order(train_ids, config.seed);

    const int n = config.window.n.front();
    const int w = config.window.w.front();
    const int skip = config.window.skip.front();
    const std::uint64_t tag = cell_tag(n, w, skip, config.window.mode);
    const Dataset test_ds =
        dataset_for_ids(set, test_ids, n, w, skip, config.window.mode, config.normalize);

    std::vector<AblationRow> rows;
    for (double fraction : fractions) {
        const auto keep = static_cast<std::size_t>(std::max<long long>(
            1, std::llround(fraction * static_cast<double>(order.size()))));
        std::vector<std::uint64_t> subset(order.begin(),
                                          order.begin() + static_cast<long>(keep));
        std::sort(subset.begin(), subset.end());

        const Dataset train_ds =
            dataset_for_ids(set, subset, n, w, skip, config.window.mode, config.normalize);
        MlpModel model = model_for_cell(
            config, n * w, static_cast<int>(train_ds.targets[0].values.size()), tag);
        train(model, train_ds, train_config_for(config, tag));
        rows.push_back(AblationRow{fraction, evaluate_model(model, test_ds).avg_mse,
                                   static_cast<int>(subset.size())});
    }
    write_ablation_csv(out_dir / "ablation.csv", rows);
    return rows;
}

void write_ablation_csv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows) {
    std::vector<std::string> lines;
    lines.reserve(rows.size());
    for (const auto& r : rows)
        lines.push_back(format_double(r.fraction) + "," + format_double(r.avg_mse) + "," +
                        std::to_string(r.train_sources));
    write_csv(path, "fraction,avg_mse,train_sources", lines);
}

}  // namespace corrnet
