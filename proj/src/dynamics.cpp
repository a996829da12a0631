#include "corrnet/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "corrnet/binio.hpp"
#include "corrnet/rng.hpp"

namespace corrnet {

namespace {

constexpr char kSeriesMagic[4] = {'C', 'N', 'T', 'S'};
constexpr std::uint32_t kSeriesVersion = 1;

void check_shape(const OscillatorParams& params, const Graph& graph,
                 const FrequencyVector& omegas, const Eigen::MatrixXd& state) {
    if (state.rows() != graph.node_count() || state.cols() != params.dim())
        throw std::invalid_argument("state shape error: expected " +
                                    std::to_string(graph.node_count()) + "x" +
                                    std::to_string(params.dim()));
    if (omegas.omegas.size() != graph.node_count())
        throw std::invalid_argument("state shape error: frequency vector length mismatch");
}

// sum over neighbors of (x_j - x_i) for every node
Eigen::VectorXd coupling_term(const Graph& graph, const Eigen::VectorXd& x) {
    Eigen::VectorXd acc(graph.node_count());
    for (int i = 0; i < graph.node_count(); ++i) {
        double s = 0.0;
        for (int j : graph.neighbors(i)) s += x[j] - x[i];
        acc[i] = s;
    }
    return acc;
}

Eigen::MatrixXd field_unchecked(const OscillatorParams& params, const Graph& graph,
                                const FrequencyVector& omegas, const Eigen::MatrixXd& state,
                                double t) {
    const int n = graph.node_count();
    Eigen::MatrixXd deriv(n, params.dim());
    const Eigen::VectorXd diffusion = params.coupling * coupling_term(graph, state.col(0));

    if (params.kind == OscKind::Rossler) {
        const auto& p = params.rossler;
        for (int i = 0; i < n; ++i) {
            const double x = state(i, 0), y = state(i, 1), z = state(i, 2);
            deriv(i, 0) = -omegas.omegas[i] * y - z + diffusion[i];
            deriv(i, 1) = omegas.omegas[i] * x + p.a * y;
            deriv(i, 2) = p.b + z * (x - p.c);
        }
    } else {
        const auto& p = params.fhn;
        const double inv_delta = 1.0 / p.delta;
        for (int i = 0; i < n; ++i) {
            const double x = state(i, 0), y = state(i, 1);
            deriv(i, 0) = inv_delta * (x * (x - p.a) * (1.0 - x) - y) + diffusion[i];
            deriv(i, 1) = x - y - p.b + p.drive_amp * std::sin(omegas.omegas[i] * t);
        }
    }
    return deriv;
}

Eigen::MatrixXd rk4_step(const OscillatorParams& params, const Graph& graph,
                         const FrequencyVector& omegas, const Eigen::MatrixXd& state,
                         double t, double dt) {
    const Eigen::MatrixXd k1 = field_unchecked(params, graph, omegas, state, t);
    const Eigen::MatrixXd k2 =
        field_unchecked(params, graph, omegas, state + 0.5 * dt * k1, t + 0.5 * dt);
    const Eigen::MatrixXd k3 =
        field_unchecked(params, graph, omegas, state + 0.5 * dt * k2, t + 0.5 * dt);
    const Eigen::MatrixXd k4 = field_unchecked(params, graph, omegas, state + dt * k3, t + dt);
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

FrequencyVector draw_frequencies(OscKind kind, int node_count, std::uint64_t seed) {
    if (node_count < 1) throw std::invalid_argument("node_count must be positive");
    const double mean = kind == OscKind::Rossler ? 1.0 : 15.0;
    const double stddev = std::sqrt(kind == OscKind::Rossler ? 0.03 : 0.001);
    rng::Rng gen(seed);
    FrequencyVector f;
    f.omegas.resize(node_count);
    for (int i = 0; i < node_count; ++i) f.omegas[i] = gen.gaussian(mean, stddev);
    return f;
}

Eigen::MatrixXd draw_initial_state(OscKind kind, int node_count, std::uint64_t seed) {
    rng::Rng gen(seed);
    const int dim = kind == OscKind::Rossler ? 3 : 2;
    Eigen::MatrixXd state(node_count, dim);
    for (int i = 0; i < node_count; ++i) {
        if (kind == OscKind::Rossler) {
            state(i, 0) = gen.uniform(-1.0, 1.0);
            state(i, 1) = gen.uniform(-1.0, 1.0);
            state(i, 2) = gen.uniform(0.0, 1.0);
        } else {
            state(i, 0) = gen.uniform(0.0, 1.0);
            state(i, 1) = gen.uniform(0.0, 1.0);
        }
    }
    return state;
}

Eigen::MatrixXd vector_field(const OscillatorParams& params, const Graph& graph,
                             const FrequencyVector& omegas, const Eigen::MatrixXd& state,
                             double t) {
    check_shape(params, graph, omegas, state);
    return field_unchecked(params, graph, omegas, state, t);
}

std::pair<StateTrajectory, TimeSeriesMatrix> simulate_from(const Graph& graph,
                                                           const OscillatorParams& params,
                                                           const FrequencyVector& omegas,
                                                           const Eigen::MatrixXd& init_state,
                                                           const SimParams& sim) {
    check_shape(params, graph, omegas, init_state);
    if (sim.dt <= 0.0) throw std::invalid_argument("dt must be positive");
    if (sim.length < 1) throw std::invalid_argument("length must be at least 1");
    if (sim.transient_time < 0.0) throw std::invalid_argument("transient_time must be >= 0");
    if (sim.sample_stride < 1) throw std::invalid_argument("sample_stride must be >= 1");

    const long transient_steps = std::lround(sim.transient_time / sim.dt);
    const long total_steps =
        transient_steps + static_cast<long>(sim.length - 1) * sim.sample_stride;

    StateTrajectory traj;
    traj.node_count = graph.node_count();
    traj.dim = params.dim();
    traj.dt_sample = sim.dt * sim.sample_stride;
    traj.states.reserve(static_cast<std::size_t>(sim.length));

    Eigen::MatrixXd state = init_state;
    for (long step = 0; step <= total_steps; ++step) {
        if (step >= transient_steps && (step - transient_steps) % sim.sample_stride == 0)
            traj.states.push_back(state);
        if (step == total_steps) break;
        state = rk4_step(params, graph, omegas, state, sim.dt * static_cast<double>(step),
                         sim.dt);
        if (!state.allFinite())
            throw std::runtime_error("divergence at step " + std::to_string(step + 1));
    }

    TimeSeriesMatrix series(graph.node_count(), sim.length);
    for (int k = 0; k < sim.length; ++k) series.col(k) = traj.states[k].col(0);
    return {std::move(traj), std::move(series)};
}

std::pair<StateTrajectory, TimeSeriesMatrix> simulate(const Graph& graph,
                                                      const OscillatorParams& params,
                                                      const FrequencyVector& omegas,
                                                      std::uint64_t init_seed,
                                                      const SimParams& sim) {
    return simulate_from(graph, params, omegas,
                         draw_initial_state(params.kind, graph.node_count(), init_seed), sim);
}

SyncError sync_error(const StateTrajectory& traj, int t_start_index, int length) {
    if (length < 1) throw std::invalid_argument("empty evaluation window");
    if (t_start_index < 0 || t_start_index + length > traj.length())
        throw std::invalid_argument("evaluation window out of trajectory bounds");

    const int n = traj.node_count;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int k = t_start_index; k < t_start_index + length; ++k) {
        const Eigen::MatrixXd& s = traj.states[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double d = (s.row(i) - s.row(j)).norm();
                acc[i] += d;
                acc[j] += d;
            }
        }
    }
    SyncError err;
    err.per_node = acc / (static_cast<double>(length) * static_cast<double>(n));
    err.global = err.per_node.mean();
    return err;
}

void save_series(const std::filesystem::path& path, const TimeSeriesMatrix& series) {
    io::BinWriter out(path);
    out.magic(kSeriesMagic);
    out.u32(kSeriesVersion);
    out.u32(static_cast<std::uint32_t>(series.rows()));
    out.u32(static_cast<std::uint32_t>(series.cols()));
    // row-major on disk
    for (Eigen::Index i = 0; i < series.rows(); ++i) {
        const Eigen::VectorXd row = series.row(i);
        out.f64_array(row.data(), static_cast<std::size_t>(row.size()));
    }
    out.close();
}

TimeSeriesMatrix load_series(const std::filesystem::path& path) {
    io::BinReader in(path);
    in.expect_magic(kSeriesMagic, "time-series");
    in.expect_version(kSeriesVersion, "time-series");
    const auto rows = static_cast<Eigen::Index>(in.u32());
    const auto cols = static_cast<Eigen::Index>(in.u32());
    TimeSeriesMatrix series(rows, cols);
    Eigen::VectorXd row(cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        in.f64_array(row.data(), static_cast<std::size_t>(cols));
        series.row(i) = row;
    }
    return series;
}

}  // namespace corrnet
