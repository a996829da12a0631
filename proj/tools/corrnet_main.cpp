// corrnet: simulate coupled oscillators on random networks, window the time
// series, train an MLP to predict full-system correlation matrices, and
// evaluate/diagnose the predictions.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corrnet/binio.hpp"
#include "corrnet/corr.hpp"
#include "corrnet/dataset.hpp"
#include "corrnet/dynamics.hpp"
#include "corrnet/embed.hpp"
#include "corrnet/graph.hpp"
#include "corrnet/ingest.hpp"
#include "corrnet/mlp.hpp"
#include "corrnet/pipeline.hpp"
#include "corrnet/rng.hpp"

namespace {

using namespace corrnet;

SelectionMode parse_mode(const std::string& mode) {
    if (mode == "hd") return SelectionMode::HD;
    if (mode == "ld") return SelectionMode::LD;
    throw CLI::ValidationError("--mode", "must be hd or ld");
}

CorrMethod parse_method(const std::string& method) {
    if (method == "pearson") return CorrMethod::Pearson;
    if (method == "spearman") return CorrMethod::Spearman;
    throw CLI::ValidationError("--method", "must be pearson or spearman");
}

struct GenGraphArgs {
    std::string model = "er";
    int nodes = 100;
    double mean_degree = 6.0;
    int attach = 1;
    std::uint64_t seed = 1;
    std::string out;
};

void cmd_gen_graph(const GenGraphArgs& args) {
    const Graph graph = args.model == "er" ? gen_er(args.nodes, args.mean_degree, args.seed)
                                           : gen_sf(args.nodes, args.attach, args.seed);
    graph.save_edge_list(args.out);
    std::cout << "wrote " << args.out << ": N=" << graph.node_count()
              << " M=" << graph.edge_count() << " <k>=" << graph.mean_degree() << "\n";
}

struct SimulateArgs {
    std::string graph_path;
    std::string kind = "rossler";
    double coupling = 0.0;
    std::uint64_t freq_seed = 1;
    std::uint64_t init_seed = 2;
    double dt = -1.0;
    double transient = -1.0;
    int stride = -1;
    int length = -1;
    std::string out;
};

void cmd_simulate(const SimulateArgs& args) {
    const Graph graph = Graph::load_edge_list(args.graph_path);
    OscillatorParams params;
    params.kind = args.kind == "fhn" ? OscKind::Fhn : OscKind::Rossler;
    params.coupling = args.coupling;
    SimParams sim = SimParams::defaults(params.kind);
    if (args.dt > 0) sim.dt = args.dt;
    if (args.transient >= 0) sim.transient_time = args.transient;
    if (args.stride > 0) sim.sample_stride = args.stride;
    if (args.length > 0) sim.length = args.length;

    const FrequencyVector omegas =
        draw_frequencies(params.kind, graph.node_count(), args.freq_seed);
    auto [traj, series] = simulate(graph, params, omegas, args.init_seed, sim);
    save_series(args.out, series);

    const SyncError err = sync_error(traj, 0, traj.length());
    std::cout << "wrote " << args.out << ": N=" << series.rows() << " L=" << series.cols()
              << " sync_error=" << err.global << "\n";
}

struct BuildDatasetArgs {
    std::vector<std::string> sources;  // series.bin or series.bin:graph.edges
    int n = 0;
    std::string mode = "hd";
    std::vector<int> channel_list;
    int w = 100;
    int skip = 40;
    std::string method = "pearson";
    std::string normalize = "none";
    std::string out;
};

void cmd_build_dataset(const BuildDatasetArgs& args) {
    std::vector<SourceData> sources;
    std::vector<NodeSelection> selections;
    std::uint64_t id = 1;
    for (const auto& spec : args.sources) {
        const auto colon = spec.find(':');
        const std::string series_path = spec.substr(0, colon);
        SourceData src;
        src.id = id++;
        src.series = load_series(series_path);
        src.target = upper_tri(corr_matrix(src.series, parse_method(args.method)));

        NodeSelection sel;
        if (colon != std::string::npos) {
            const Graph graph = Graph::load_edge_list(spec.substr(colon + 1));
            sel = select_nodes(graph, args.n, parse_mode(args.mode));
        } else if (!args.channel_list.empty()) {
            sel.indices = args.channel_list;
        } else {
            // graphless sources (EEG channels): first n rows in file order
            for (int i = 0; i < args.n; ++i) sel.indices.push_back(i);
        }
        selections.push_back(std::move(sel));
        sources.push_back(std::move(src));
    }
    if (sources.empty()) throw CLI::ValidationError("--sources", "none given");
    const Normalize normalize =
        args.normalize == "minmax" ? Normalize::MinMax : Normalize::None;
    const Dataset ds = assemble(sources, selections, args.w, args.skip, normalize);
    save_dataset(args.out, ds);
    std::cout << "wrote " << args.out << ": " << ds.size() << " windows from "
              << ds.targets.size() << " sources (f=" << ds.meta.windows_per_source << ")\n";
}

struct TrainArgs {
    std::string dataset;
    std::vector<int> hidden{1225, 5041};
    int epochs = 50;
    int batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    bool sigmoid_output = false;
    bool no_biases = false;
    int log_period = 10;
    std::string out;
    std::string history;
};

void cmd_train(const TrainArgs& args) {
    const Dataset ds = load_dataset(args.dataset);
    std::vector<int> dims;
    dims.push_back(static_cast<int>(ds.inputs.at(0).size()));
    for (int h : args.hidden) dims.push_back(h);
    dims.push_back(static_cast<int>(ds.targets.at(0).values.size()));

    MlpModel model = init_model(
        dims, args.sigmoid_output ? OutputActivation::Sigmoid : OutputActivation::Tanh,
        !args.no_biases, rng::derive_seed(args.seed, seed_purpose::kTrainInit, 0));
    TrainConfig tc;
    tc.epochs = args.epochs;
    tc.batch_size = args.batch;
    tc.adam.learning_rate = args.lr;
    tc.shuffle_seed = rng::derive_seed(args.seed, seed_purpose::kTrainShuffle, 0);
    tc.loss_log_period = args.log_period;

    const auto history = train(model, ds, tc);
    save_model(args.out, model);
    std::cout << "wrote " << args.out << ": final mean loss " << history.back() << "\n";
    if (!args.history.empty()) {
        std::ofstream out(args.history);
        out << "epoch,mean_loss\n";
        for (std::size_t e = 0; e < history.size(); ++e)
            out << e + 1 << ',' << history[e] << '\n';
    }
}

struct PredictArgs {
    std::string model;
    std::string dataset;
    std::string out;
};

void cmd_predict(const PredictArgs& args) {
    const MlpModel model = load_model(args.model);
    const Dataset ds = load_dataset(args.dataset);
    const auto records = predict_dataset(model, ds);
    save_predictions(args.out, records, ds.targets.at(0).node_count);
    std::cout << "wrote " << args.out << ": " << records.size() << " predictions\n";
}

struct EvaluateArgs {
    std::string model;
    std::string dataset;
    std::string baseline_dataset;
    std::string out;
};

void cmd_evaluate(const EvaluateArgs& args) {
    const MlpModel model = load_model(args.model);
    const Dataset ds = load_dataset(args.dataset);
    const EvalResult eval = evaluate_model(model, ds);
    std::cout << "avg_mse " << eval.avg_mse << "\nstd_over_windows " << eval.std_over_windows
              << "\n";
    double baseline = -1.0;
    if (!args.baseline_dataset.empty()) {
        const Dataset train_ds = load_dataset(args.baseline_dataset);
        baseline = evaluate_constant(mean_target(train_ds), ds).avg_mse;
        std::cout << "baseline_avg_mse " << baseline << "\n";
    }
    if (!args.out.empty()) {
        std::ofstream out(args.out);
        out << "avg_mse,std_over_windows,baseline_avg_mse\n"
            << eval.avg_mse << ',' << eval.std_over_windows << ',' << baseline << '\n';
    }
}

struct EmbedArgs {
    std::string dataset;
    std::string predictions;
    std::string out_csv = "embedding.csv";
    std::string out_svg;
    int neighbors = 15;
    int epochs = 300;
    double repulsion = 1.0;
    std::uint64_t seed = 7;
};

void cmd_embed(const EmbedArgs& args) {
    const Dataset ds = load_dataset(args.dataset);
    const auto predictions = load_predictions(args.predictions);
    EmbedConfig config;
    config.n_neighbors = args.neighbors;
    config.epochs = args.epochs;
    config.repulsion = args.repulsion;
    config.seed = args.seed;
    const auto [embedding, report] = embed_predictions(ds, predictions, config);
    write_embedding_csv(args.out_csv, embedding);
    if (!args.out_svg.empty()) write_embedding_svg(args.out_svg, embedding);
    std::cout << "own_nearest_fraction " << report.own_nearest_fraction << "\n";
    for (const auto& row : report.per_source)
        std::cout << "source " << row.source << ": dist_own " << row.dist_to_own_true
                  << " dist_other " << row.dist_to_nearest_other_true
                  << (row.own_nearest ? " own-nearest" : " MISPLACED") << "\n";
}

struct IngestArgs {
    std::string in;
    std::string out;
};

void cmd_ingest(const IngestArgs& args) {
    const ExternalMatrix m = load_csv_matrix(args.in);
    save_series(args.out, m.as_series());
    std::cout << "wrote " << args.out << ": " << m.channels() << " channels x " << m.samples()
              << " samples\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlation-matrix prediction from partial oscillator time series"};
    app.require_subcommand(1);

    GenGraphArgs gg;
    auto* gen_graph = app.add_subcommand("gen-graph", "generate an ER or SF network");
    gen_graph->add_option("--model", gg.model)->check(CLI::IsMember({"er", "sf"}));
    gen_graph->add_option("--nodes", gg.nodes)->required();
    gen_graph->add_option("--mean-degree", gg.mean_degree);
    gen_graph->add_option("--attach", gg.attach);
    gen_graph->add_option("--seed", gg.seed);
    gen_graph->add_option("--out", gg.out)->required();

    SimulateArgs sa;
    auto* simulate_cmd = app.add_subcommand("simulate", "integrate coupled dynamics on a graph");
    simulate_cmd->add_option("--graph", sa.graph_path)->required();
    simulate_cmd->add_option("--kind", sa.kind)->check(CLI::IsMember({"rossler", "fhn"}));
    simulate_cmd->add_option("--coupling", sa.coupling)->required();
    simulate_cmd->add_option("--freq-seed", sa.freq_seed);
    simulate_cmd->add_option("--init-seed", sa.init_seed);
    simulate_cmd->add_option("--dt", sa.dt);
    simulate_cmd->add_option("--transient", sa.transient);
    simulate_cmd->add_option("--stride", sa.stride);
    simulate_cmd->add_option("--length", sa.length);
    simulate_cmd->add_option("--out", sa.out)->required();

    BuildDatasetArgs bd;
    auto* build_dataset =
        app.add_subcommand("build-dataset", "window series files into a training dataset");
    build_dataset->add_option("--sources", bd.sources, "series.bin or series.bin:graph.edges")
        ->required();
    build_dataset->add_option("--n", bd.n, "nodes/channels per window");
    build_dataset->add_option("--mode", bd.mode)->check(CLI::IsMember({"hd", "ld"}));
    build_dataset->add_option("--channel-list", bd.channel_list)->delimiter(',');
    build_dataset->add_option("--w", bd.w)->required();
    build_dataset->add_option("--skip", bd.skip)->required();
    build_dataset->add_option("--method", bd.method)
        ->check(CLI::IsMember({"pearson", "spearman"}));
    build_dataset->add_option("--normalize", bd.normalize)
        ->check(CLI::IsMember({"none", "minmax"}));
    build_dataset->add_option("--out", bd.out)->required();

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "train the correlation predictor");
    train_cmd->add_option("--dataset", ta.dataset)->required();
    train_cmd->add_option("--hidden", ta.hidden)->delimiter(',');
    train_cmd->add_option("--epochs", ta.epochs);
    train_cmd->add_option("--batch", ta.batch);
    train_cmd->add_option("--lr", ta.lr);
    train_cmd->add_option("--seed", ta.seed);
    train_cmd->add_flag("--sigmoid-output", ta.sigmoid_output);
    train_cmd->add_flag("--no-biases", ta.no_biases);
    train_cmd->add_option("--log-period", ta.log_period);
    train_cmd->add_option("--out", ta.out)->required();
    train_cmd->add_option("--history", ta.history);

    PredictArgs pa;
    auto* predict_cmd = app.add_subcommand("predict", "predict correlation vectors for windows");
    predict_cmd->add_option("--model", pa.model)->required();
    predict_cmd->add_option("--dataset", pa.dataset)->required();
    predict_cmd->add_option("--out", pa.out)->required();

    EvaluateArgs ea;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "average MSE over a test dataset");
    evaluate_cmd->add_option("--model", ea.model)->required();
    evaluate_cmd->add_option("--dataset", ea.dataset)->required();
    evaluate_cmd->add_option("--baseline-dataset", ea.baseline_dataset,
                             "training dataset for the mean-target baseline");
    evaluate_cmd->add_option("--out", ea.out);

    EmbedArgs em;
    auto* embed_cmd =
        app.add_subcommand("embed", "2-D diagnostic embedding of true and predicted vectors");
    embed_cmd->add_option("--dataset", em.dataset)->required();
    embed_cmd->add_option("--predictions", em.predictions)->required();
    embed_cmd->add_option("--out-csv", em.out_csv);
    embed_cmd->add_option("--out-svg", em.out_svg);
    embed_cmd->add_option("--neighbors", em.neighbors);
    embed_cmd->add_option("--epochs", em.epochs);
    embed_cmd->add_option("--repulsion", em.repulsion);
    embed_cmd->add_option("--seed", em.seed);

    IngestArgs ia;
    auto* ingest_cmd = app.add_subcommand("ingest-csv", "convert a channel x time CSV to series form");
    ingest_cmd->add_option("--in", ia.in)->required();
    ingest_cmd->add_option("--out", ia.out)->required();

    std::string config_path;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "full protocol: generate, window, train, evaluate");
    pipeline_cmd->add_option("--config", config_path)->required();

    std::string sweep_config;
    auto* sweep_cmd = app.add_subcommand("sweep", "train/evaluate over the (n,w,skip) grid");
    sweep_cmd->add_option("--config", sweep_config)->required();

    std::string ablate_config;
    std::vector<double> fractions{1.0, 0.5, 0.25};
    auto* ablate_cmd =
        app.add_subcommand("ablate", "retrain on nested training subsets of shrinking size");
    ablate_cmd->add_option("--config", ablate_config)->required();
    ablate_cmd->add_option("--fractions", fractions)->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_graph->parsed()) cmd_gen_graph(gg);
        if (simulate_cmd->parsed()) cmd_simulate(sa);
        if (build_dataset->parsed()) cmd_build_dataset(bd);
        if (train_cmd->parsed()) cmd_train(ta);
        if (predict_cmd->parsed()) cmd_predict(pa);
        if (evaluate_cmd->parsed()) cmd_evaluate(ea);
        if (embed_cmd->parsed()) cmd_embed(em);
        if (ingest_cmd->parsed()) cmd_ingest(ia);
        if (pipeline_cmd->parsed()) {
            const PipelineResult result = run_pipeline(load_config(config_path));
            std::cout << "test avg_mse " << result.test_avg_mse << " (std "
                      << result.test_std_over_windows << ")\nbaseline avg_mse "
                      << result.baseline_avg_mse << "\nmanifest " << result.manifest_path
                      << "\n";
        }
        if (sweep_cmd->parsed()) {
            const auto rows = run_sweep(load_config(sweep_config));
            for (const auto& r : rows)
                std::cout << "n=" << r.n << " w=" << r.w << " skip=" << r.skip
                          << " avg_mse=" << r.avg_mse << " (std " << r.std_over_windows
                          << ")\n";
        }
        if (ablate_cmd->parsed()) {
            const auto rows = run_ablation(load_config(ablate_config), fractions);
            for (const auto& r : rows)
                std::cout << "fraction " << r.fraction << ": avg_mse " << r.avg_mse << " ("
                          << r.train_sources << " sources)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
