#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

namespace corrnet {

// rows = nodes/channels, columns = time samples
using TimeSeriesMatrix = Eigen::MatrixXd;

// symmetric, unit diagonal, entries in [-1,1]
using CorrMatrix = Eigen::MatrixXd;

enum class CorrMethod { Pearson, Spearman };

// Strictly-upper-triangular part of a CorrMatrix in row-major pair order:
// (0,1),(0,2),...,(0,N-1),(1,2),...,(N-2,N-1).
struct CorrVector {
    Eigen::VectorXd values;
    int node_count = 0;

    Eigen::Index size() const { return values.size(); }
};

// Number of nodes N with N(N-1)/2 == pair_count; throws std::invalid_argument
// for non-triangular lengths.
int node_count_from_pairs(Eigen::Index pair_count);

double corr_pair(const Eigen::VectorXd& u, const Eigen::VectorXd& v, CorrMethod method);

CorrMatrix corr_matrix(const TimeSeriesMatrix& series, CorrMethod method);

CorrVector upper_tri(const CorrMatrix& matrix);
CorrMatrix unflatten(const CorrVector& vec);

double mse(const CorrVector& truth, const CorrVector& predicted);
double avg_mse(const std::vector<double>& per_window_mses);

// average ranks (ties get the mean of their rank range); exposed for tests
Eigen::VectorXd average_ranks(const Eigen::VectorXd& values);

// "CNCM" container: upper triangle only, canonical order
void save_corr(const std::filesystem::path& path, const CorrVector& vec);
CorrVector load_corr(const std::filesystem::path& path);

}  // namespace corrnet
