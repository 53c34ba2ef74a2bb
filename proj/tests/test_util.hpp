#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace testutil {

inline double mean(const Eigen::VectorXd& v) { return v.mean(); }

inline double variance(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

inline double sd(const Eigen::VectorXd& v) { return std::sqrt(variance(v)); }

inline double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double denom = std::sqrt(da.square().sum() * db.square().sum());
    if (denom == 0.0) return 0.0;
    return (da * db).sum() / denom;
}

inline double lag1_autocorr(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    return correlation(v.head(n - 1), v.tail(n - 1));
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double stat = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] <= b[ib]) {
            ++ia;
        } else {
            ++ib;
        }
        const double fa = static_cast<double>(ia) / static_cast<double>(a.size());
        const double fb = static_cast<double>(ib) / static_cast<double>(b.size());
        stat = std::max(stat, std::abs(fa - fb));
    }
    return stat;
}

/// Area under the ROC curve for scores with binary labels (1 = positive).
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
    double rank_sum = 0.0;
    std::size_t positives = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum += avg_rank;
                ++positives;
            }
        }
        i = j + 1;
    }
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) return 0.5;
    return (rank_sum - static_cast<double>(positives) * (static_cast<double>(positives) + 1.0) / 2.0) /
           (static_cast<double>(positives) * static_cast<double>(negatives));
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace testutil
