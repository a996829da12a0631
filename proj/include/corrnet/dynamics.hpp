#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "corrnet/corr.hpp"
#include "corrnet/graph.hpp"

namespace corrnet {

enum class OscKind { Rossler, Fhn };

struct RosslerParams {
    double a = 0.15;
    double b = 0.2;
    double c = 10.0;
};

struct FhnParams {
    double a = 0.42;
    double b = 0.15;
    double delta = 0.005;
    double drive_amp = 0.2;  // amplitude r of the periodic drive r*sin(w_i t)
};

struct OscillatorParams {
    OscKind kind = OscKind::Rossler;
    double coupling = 0.0;
    RosslerParams rossler;
    FhnParams fhn;

    int dim() const { return kind == OscKind::Rossler ? 3 : 2; }
};

// natural frequencies w_i; Rossler ~ N(1, 0.03), FHN drive ~ N(15, 0.001)
// (second moment given as variance)
struct FrequencyVector {
    Eigen::VectorXd omegas;
};

// full state at every retained sample; states[k] is node_count x dim
struct StateTrajectory {
    int node_count = 0;
    int dim = 0;
    double dt_sample = 0.0;
    std::vector<Eigen::MatrixXd> states;

    int length() const { return static_cast<int>(states.size()); }
};

struct SyncError {
    Eigen::VectorXd per_node;
    double global = 0.0;
};

struct SimParams {
    double dt = 0.01;
    double transient_time = 200.0;
    int sample_stride = 5;
    int length = 5000;

    static SimParams defaults(OscKind kind) {
        SimParams p;
        if (kind == OscKind::Fhn) {
            p.dt = 0.001;  // delta = 0.005 makes the x-equation fast
            p.sample_stride = 50;
        }
        return p;
    }
};

FrequencyVector draw_frequencies(OscKind kind, int node_count, std::uint64_t seed);

// Rossler: x,y ~ U(-1,1), z ~ U(0,1); FHN: x,y ~ U(0,1)
Eigen::MatrixXd draw_initial_state(OscKind kind, int node_count, std::uint64_t seed);

// Right-hand side of the coupled ODEs; state and result are node_count x dim.
// Coupling acts on the x-equation only, through sum_j A_ij (x_j - x_i).
Eigen::MatrixXd vector_field(const OscillatorParams& params, const Graph& graph,
                             const FrequencyVector& omegas, const Eigen::MatrixXd& state,
                             double t);

// Fixed-step RK4 from explicit initial conditions. Discards
// round(transient_time/dt) steps, then stores every sample_stride-th state
// until `length` samples exist. Throws on non-finite state.
std::pair<StateTrajectory, TimeSeriesMatrix> simulate_from(const Graph& graph,
                                                           const OscillatorParams& params,
                                                           const FrequencyVector& omegas,
                                                           const Eigen::MatrixXd& init_state,
                                                           const SimParams& sim);

// Seeded convenience wrapper drawing initial conditions from init_seed.
std::pair<StateTrajectory, TimeSeriesMatrix> simulate(const Graph& graph,
                                                      const OscillatorParams& params,
                                                      const FrequencyVector& omegas,
                                                      std::uint64_t init_seed,
                                                      const SimParams& sim);

// Global synchronization error over samples [t_start_index, t_start_index+length):
// per_node[i] = mean over samples and partner nodes of the Euclidean distance
// between full state vectors; global = mean over nodes.
SyncError sync_error(const StateTrajectory& traj, int t_start_index, int length);

// "CNTS" container: N x L float64, row-major
void save_series(const std::filesystem::path& path, const TimeSeriesMatrix& series);
TimeSeriesMatrix load_series(const std::filesystem::path& path);

}  // namespace corrnet
