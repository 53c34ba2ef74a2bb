#include "causalsynth/regression.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace causalsynth {

namespace {

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;
    std::size_t n_used = 0;
};

bool spec_has_lags(const RegressionSpec& spec) {
    return std::any_of(spec.regressors.begin(), spec.regressors.end(),
                       [](const Regressor& r) { return r.lag != 0; });
}

/// Builds the design matrix. Lagged terms shift by one row, dropping the
/// leading row and any pair that would straddle a window boundary.
Design build_design(const PanelDataset& data, const RegressionSpec& spec) {
    data.validate();
    const std::size_t t_rows = data.rows();
    const bool lagged = spec_has_lags(spec);

    std::vector<bool> boundary(t_rows, false);
    for (std::size_t s : data.window_starts) boundary[s] = true;

    std::vector<std::size_t> usable;
    for (std::size_t t = lagged ? 1 : 0; t < t_rows; ++t) {
        if (lagged && boundary[t]) continue;
        usable.push_back(t);
    }
    if (usable.size() < spec.regressors.size() + (spec.intercept ? 1u : 0u) + 1u) {
        throw std::runtime_error("regression: not enough rows for the requested design");
    }

    const std::size_t p = spec.regressors.size() + (spec.intercept ? 1 : 0);
    Design d;
    d.X.resize(static_cast<Eigen::Index>(usable.size()), static_cast<Eigen::Index>(p));
    d.y.resize(static_cast<Eigen::Index>(usable.size()));
    d.n_used = usable.size();

    const std::size_t target_idx = data.column_index(spec.target);
    std::size_t col = 0;
    if (spec.intercept) {
        d.X.col(0).setOnes();
        d.names.emplace_back("(intercept)");
        col = 1;
    }
    for (const auto& r : spec.regressors) {
        const std::size_t src = data.column_index(r.variable);
        for (std::size_t i = 0; i < usable.size(); ++i) {
            const std::size_t t = usable[i];
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
                data.values(static_cast<Eigen::Index>(t - static_cast<std::size_t>(r.lag)),
                            static_cast<Eigen::Index>(src));
        }
        d.names.push_back(regressor_label(r));
        ++col;
    }
    for (std::size_t i = 0; i < usable.size(); ++i) {
        d.y(static_cast<Eigen::Index>(i)) =
            data.values(static_cast<Eigen::Index>(usable[i]), static_cast<Eigen::Index>(target_idx));
    }
    return d;
}

EstimateReport solve_least_squares(const Design& d) {
    const Eigen::Index n = d.X.rows();
    const Eigen::Index p = d.X.cols();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    const Eigen::MatrixXd r_full = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const double r_max = r_full.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < p; ++i) {
        if (std::abs(r_full(i, i)) < 1e-10 * r_max) {
            const auto offending = qr.colsPermutation().indices()(i);
            throw std::runtime_error("regression: perfect collinearity involving column '" +
                                     d.names[static_cast<std::size_t>(offending)] + "'");
        }
    }

    EstimateReport report;
    report.names = d.names;
    report.coefficients = qr.solve(d.y);
    report.n_used = static_cast<std::size_t>(n);

    const Eigen::VectorXd residuals = d.y - d.X * report.coefficients;
    const double rss = residuals.squaredNorm();
    const double dof = static_cast<double>(n - p);
    report.residual_variance = rss / dof;

    // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization.
    const Eigen::MatrixXd r_inv =
        r_full.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd xtx_inv = r_inv * r_inv.transpose();
    const auto perm = qr.colsPermutation();
    xtx_inv = perm * xtx_inv * perm.transpose();

    report.standard_errors.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        report.standard_errors(j) = std::sqrt(report.residual_variance * xtx_inv(j, j));
    }
    return report;
}

Eigen::VectorXd residuals_for(const PanelDataset& data, const RegressionSpec& spec,
                              const EstimateReport& report) {
    const Design d = build_design(data, spec);
    if (d.names != report.names) {
        throw std::runtime_error("check_assumptions: report does not match spec");
    }
    return d.y - d.X * report.coefficients;
}

double sample_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    const Eigen::VectorXd da = a.array() - ma;
    const Eigen::VectorXd db = b.array() - mb;
    const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (denom == 0.0) return 0.0;
    return da.dot(db) / denom;
}

}  // namespace

std::string regressor_label(const Regressor& r) {
    if (r.lag == 0) return r.variable;
    return r.variable + "[t-" + std::to_string(r.lag) + "]";
}

double EstimateReport::coefficient(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return coefficients(static_cast<Eigen::Index>(i));
    }
    throw std::runtime_error("EstimateReport: no coefficient named '" + name + "'");
}

double EstimateReport::standard_error(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return standard_errors(static_cast<Eigen::Index>(i));
    }
    throw std::runtime_error("EstimateReport: no standard error named '" + name + "'");
}

EstimateReport ols_fit(const PanelDataset& data, const RegressionSpec& spec) {
    for (const auto& r : spec.regressors) {
        if (r.lag == 0 && r.variable == spec.target) {
            throw std::runtime_error("ols_fit: target cannot be a lag-0 regressor");
        }
        if (r.lag != 0 && !data.time_indexed) {
            throw std::runtime_error("ols_fit: lagged regressor on non-time-indexed data");
        }
    }
    return solve_least_squares(build_design(data, spec));
}

EstimateReport ar_fit(const PanelDataset& data, const RegressionSpec& spec,
                      bool force_time_order) {
    const bool has_self_lag =
        std::any_of(spec.regressors.begin(), spec.regressors.end(), [&](const Regressor& r) {
            return r.variable == spec.target && r.lag == 1;
        });
    if (!has_self_lag) {
        throw std::runtime_error("ar_fit: spec must include the target's lag-1 term");
    }
    for (const auto& r : spec.regressors) {
        if (r.lag == 0 && r.variable == spec.target) {
            throw std::runtime_error("ar_fit: target cannot be a lag-0 regressor");
        }
    }
    if (!data.time_indexed && !force_time_order) {
        throw std::runtime_error(
            "ar_fit: data is not time-indexed; pass force_time_order to treat row order as time");
    }

    PanelDataset ordered = data;
    ordered.time_indexed = true;
    EstimateReport report = solve_least_squares(build_design(ordered, spec));
    report.diagnostics["order_forced"] = (!data.time_indexed && force_time_order) ? 1.0 : 0.0;
    return report;
}

std::map<std::string, double> check_assumptions(const PanelDataset& data,
                                                const RegressionSpec& spec,
                                                const EstimateReport& report,
                                                bool force_time_order) {
    PanelDataset ordered = data;
    if (force_time_order) ordered.time_indexed = true;
    const Eigen::VectorXd resid = residuals_for(ordered, spec, report);
    const Eigen::Index n = resid.size();

    std::map<std::string, double> diag;
    diag["residual_mean"] = resid.mean();

    // Heteroskedasticity: residual variance ratio across quantile bins of each
    // regressor; report the worst max/min ratio.
    const Design d = build_design(ordered, spec);
    double worst_ratio = 1.0;
    const int bins = 4;
    for (Eigen::Index j = spec.intercept ? 1 : 0; j < d.X.cols(); ++j) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return d.X(static_cast<Eigen::Index>(a), j) < d.X(static_cast<Eigen::Index>(b), j);
        });
        double vmin = 0.0, vmax = 0.0;
        for (int bin = 0; bin < bins; ++bin) {
            const std::size_t lo = static_cast<std::size_t>(n) * bin / bins;
            const std::size_t hi = static_cast<std::size_t>(n) * (bin + 1) / bins;
            if (hi - lo < 2) continue;
            double sum = 0.0, sumsq = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                const double e = resid(static_cast<Eigen::Index>(idx[i]));
                sum += e;
                sumsq += e * e;
            }
            const double m = sum / static_cast<double>(hi - lo);
            const double var = sumsq / static_cast<double>(hi - lo) - m * m;
            if (bin == 0) {
                vmin = vmax = var;
            } else {
                vmin = std::min(vmin, var);
                vmax = std::max(vmax, var);
            }
        }
        if (vmin > 0.0) worst_ratio = std::max(worst_ratio, vmax / vmin);
    }
    diag["heteroskedasticity_stat"] = worst_ratio;

    // Jarque-Bera from residual skewness and excess kurtosis.
    const double mean = resid.mean();
    const Eigen::ArrayXd centered = resid.array() - mean;
    const double m2 = centered.square().mean();
    const double m3 = centered.cube().mean();
    const double m4 = centered.square().square().mean();
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2) - 3.0;
    diag["normality_stat"] =
        static_cast<double>(n) / 6.0 * (skew * skew + kurt * kurt / 4.0);

    if (n >= 2) {
        diag["residual_lag1_autocorr"] = sample_corr(resid.head(n - 1), resid.tail(n - 1));
    } else {
        diag["residual_lag1_autocorr"] = 0.0;
    }
    return diag;
}

std::string report_to_json(const EstimateReport& report) {
    nlohmann::json j;
    j["names"] = report.names;
    j["coefficients"] = std::vector<double>(report.coefficients.data(),
                                            report.coefficients.data() + report.coefficients.size());
    j["standard_errors"] =
        std::vector<double>(report.standard_errors.data(),
                            report.standard_errors.data() + report.standard_errors.size());
    j["residual_variance"] = report.residual_variance;
    j["n_used"] = report.n_used;
    j["diagnostics"] = report.diagnostics;
    return j.dump(2);
}

EstimateReport report_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    EstimateReport report;
    report.names = j.at("names").get<std::vector<std::string>>();
    const auto coefs = j.at("coefficients").get<std::vector<double>>();
    const auto ses = j.at("standard_errors").get<std::vector<double>>();
    report.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(),
                                                            static_cast<Eigen::Index>(coefs.size()));
    report.standard_errors =
        Eigen::Map<const Eigen::VectorXd>(ses.data(), static_cast<Eigen::Index>(ses.size()));
    report.residual_variance = j.at("residual_variance").get<double>();
    report.n_used = j.at("n_used").get<std::size_t>();
    report.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
    return report;
}

}  // namespace causalsynth
