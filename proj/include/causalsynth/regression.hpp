#pragma once

#include "causalsynth/panel.hpp"

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace causalsynth {

struct Regressor {
    std::string variable;
    int lag = 0;
};

struct RegressionSpec {
    std::string target;
    std::vector<Regressor> regressors;
    bool intercept = true;
};

struct EstimateReport {
    std::vector<std::string> names;  // "(intercept)" first when present, then regressor labels
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    double residual_variance = 0.0;
    std::size_t n_used = 0;
    std::map<std::string, double> diagnostics;

    double coefficient(const std::string& name) const;
    double standard_error(const std::string& name) const;
};

/// Label used in EstimateReport::names for a regressor: "x1" or "y[t-1]".
std::string regressor_label(const Regressor& r);

/// Least squares via column-pivoted QR. Rank deficiency is an error naming
/// the offending column. Conventional (homoskedastic) standard errors.
EstimateReport ols_fit(const PanelDataset& data, const RegressionSpec& spec);

/// OLS on the lag-augmented design. Requires a lag-1 term on the target and
/// time ordering; `force_time_order` treats a non-time-indexed dataset as
/// ordered anyway (used deliberately on i.i.d. generator output) and records
/// the override in the diagnostics.
EstimateReport ar_fit(const PanelDataset& data, const RegressionSpec& spec,
                      bool force_time_order = false);

/// Residual-based assumption diagnostics for a fitted report:
/// residual_mean, heteroskedasticity_stat (max/min variance ratio across
/// regressor-quantile bins), normality_stat (Jarque-Bera statistic),
/// residual_lag1_autocorr.
std::map<std::string, double> check_assumptions(const PanelDataset& data,
                                                const RegressionSpec& spec,
                                                const EstimateReport& report,
                                                bool force_time_order = false);

std::string report_to_json(const EstimateReport& report);
EstimateReport report_from_json(const std::string& text);

}  // namespace causalsynth
