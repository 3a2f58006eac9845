#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace covshap {

// Balanced panel: every cluster observed at the same time points.
struct PanelData {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;              // covariates, no intercept column
    std::vector<int> cluster;       // 0..G-1
    std::vector<int> time;          // 0..T-1
    std::vector<std::string> names;  // covariate names

    int n_obs() const { return static_cast<int>(y.size()); }
    int n_clusters() const;
    int n_periods() const;
    void validate_balanced() const;
};

// Random-effects GLS fit (Swamy-Arora components, quasi-demeaning).
// Coefficient order: covariates then the intercept ("constant").
struct REFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;          // clustered (filled by clustered_se)
    Eigen::VectorXd se_conventional;
    Eigen::VectorXd p_values;    // from clustered SEs, t(G-1)
    double theta = 0.0;
    double sigma2_u = 0.0;
    double sigma2_e = 0.0;
    int n_obs = 0;
    int n_clusters = 0;
    std::vector<std::string> names;  // coefficient names incl. "constant"

    // Quasi-demeaned design/residuals retained for SEs and diagnostics.
    Eigen::MatrixXd X_qd;  // includes the (1-theta) intercept column, last
    Eigen::VectorXd resid_qd;
};

REFit fit_random_effects(const PanelData& panel);

// Cluster-robust sandwich on the quasi-demeaned data with the
// G/(G-1) * (N-1)/(N-K) small-sample factor; also fills fit.se / fit.p_values.
Eigen::VectorXd clustered_se(REFit& fit, const PanelData& panel);

struct DiagnosticResult {
    double statistic = 0.0;
    std::optional<double> p_value;
    int df = 0;
    bool reject = false;  // at alpha = 0.05
    std::string verdict;
};

// LM heteroscedasticity tests on residuals from a linear model on X
// (X without intercept; the auxiliary regressions add one).
DiagnosticResult white_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X);
DiagnosticResult breusch_pagan(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X,
                               bool koenker = true);

// Pooled panel Durbin-Watson over per-cluster, time-ordered residual series.
DiagnosticResult durbin_watson(const std::vector<std::vector<double>>& residuals_by_cluster);

// Pooled OLS on [X, 1]; returns residuals (for the pre-tests).
Eigen::VectorXd pooled_ols_residuals(const PanelData& panel);

}  // namespace covshap
