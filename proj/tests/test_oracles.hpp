// Brute-force oracles used by the test suites. Deliberately written from the
// definitions, independent of the library implementations they check.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "corrnet/corr.hpp"

namespace corrnet::test_oracle {

inline double naive_pearson(const std::vector<double>& u, const std::vector<double>& v) {
    const std::size_t t = u.size();
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= static_cast<double>(t);
    mv /= static_cast<double>(t);
    double num = 0.0, du = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        num += (u[i] - mu) * (v[i] - mv);
        du += (u[i] - mu) * (u[i] - mu);
        dv += (v[i] - mv) * (v[i] - mv);
    }
    return num / (std::sqrt(du) * std::sqrt(dv));
}

inline std::vector<double> naive_ranks(const std::vector<double>& u) {
    const std::size_t t = u.size();
    std::vector<double> ranks(t);
    for (std::size_t i = 0; i < t; ++i) {
        double rank = 1.0;
        int ties = 0;
        for (std::size_t j = 0; j < t; ++j) {
            if (u[j] < u[i]) rank += 1.0;
            if (u[j] == u[i] && j != i) ++ties;
        }
        ranks[i] = rank + ties / 2.0;
    }
    return ranks;
}

inline double naive_corr(const std::vector<double>& u, const std::vector<double>& v,
                         CorrMethod method) {
    if (method == CorrMethod::Spearman) return naive_pearson(naive_ranks(u), naive_ranks(v));
    return naive_pearson(u, v);
}

}  // namespace corrnet::test_oracle
