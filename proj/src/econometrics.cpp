#include "covshap/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "covshap/common.hpp"
#include "covshap/stats.hpp"

namespace covshap {

namespace {

std::string join_names(const std::vector<std::string>& names,
                       const std::vector<int>& idx) {
    std::string out;
    for (int i : idx) {
        if (!out.empty()) out += ", ";
        out += i < static_cast<int>(names.size()) ? names[i] : "col" + std::to_string(i);
    }
    return out;
}

}  // namespace

int PanelData::n_clusters() const {
    std::set<int> s(cluster.begin(), cluster.end());
    return static_cast<int>(s.size());
}

int PanelData::n_periods() const {
    std::set<int> s(time.begin(), time.end());
    return static_cast<int>(s.size());
}

void PanelData::validate_balanced() const {
    const int n = n_obs();
    if (static_cast<int>(cluster.size()) != n || static_cast<int>(time.size()) != n ||
        X.rows() != n)
        throw ValidationError("panel: column lengths differ");
    if (static_cast<int>(names.size()) != X.cols())
        throw ValidationError("panel: covariate name count mismatch");
    const int G = n_clusters(), T = n_periods();
    if (G < 2) throw ValidationError("panel: need at least 2 clusters");
    if (T < 2)
        throw ValidationError(
            "panel: need at least 2 periods (variance components unidentifiable)");
    if (n != G * T) throw ValidationError("panel: not balanced (n != G*T)");
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < n; ++i) {
        if (!seen.insert({cluster[i], time[i]}).second)
            throw ValidationError("panel: duplicate (cluster, time) cell");
    }
}

REFit fit_random_effects(const PanelData& panel) {
    panel.validate_balanced();
    const int n = panel.n_obs();
    const int G = panel.n_clusters();
    const int T = panel.n_periods();
    const int K = static_cast<int>(panel.X.cols());

    // Normalize cluster labels to 0..G-1 slots.
    std::vector<int> labels(panel.cluster.begin(), panel.cluster.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    auto slot_of = [&](int c) {
        return static_cast<int>(std::lower_bound(labels.begin(), labels.end(), c) -
                                labels.begin());
    };

    // Full-design rank check (with intercept) so collinear columns are
    // reported before any component arithmetic.
    {
        Eigen::MatrixXd Xi(n, K + 1);
        Xi.leftCols(K) = panel.X;
        Xi.col(K).setOnes();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xi);
        qr.setThreshold(1e-10);
        if (qr.rank() < K + 1) {
            OlsFit probe = ols(Xi, panel.y);
            throw ValidationError("random effects: design is rank deficient; collinear columns: " +
                                  join_names(panel.names, probe.dropped));
        }
    }

    // Cluster means.
    Eigen::MatrixXd Xbar = Eigen::MatrixXd::Zero(G, K);
    Eigen::VectorXd ybar = Eigen::VectorXd::Zero(G);
    for (int i = 0; i < n; ++i) {
        int g = slot_of(panel.cluster[i]);
        Xbar.row(g) += panel.X.row(i);
        ybar[g] += panel.y[i];
    }
    Xbar /= static_cast<double>(T);
    ybar /= static_cast<double>(T);

    // Within (fixed-effects) step on time-varying columns only.
    Eigen::MatrixXd Xw(n, K);
    Eigen::VectorXd yw(n);
    for (int i = 0; i < n; ++i) {
        int g = slot_of(panel.cluster[i]);
        Xw.row(i) = panel.X.row(i) - Xbar.row(g);
        yw[i] = panel.y[i] - ybar[g];
    }
    std::vector<int> tv_cols;
    for (int j = 0; j < K; ++j) {
        if (Xw.col(j).cwiseAbs().maxCoeff() > 1e-10) tv_cols.push_back(j);
    }
    double ssr_within;
    if (tv_cols.empty()) {
        ssr_within = yw.squaredNorm();
    } else {
        Eigen::MatrixXd Xtv(n, tv_cols.size());
        for (size_t j = 0; j < tv_cols.size(); ++j) Xtv.col(j) = Xw.col(tv_cols[j]);
        ssr_within = ols(Xtv, yw).residuals.squaredNorm();
    }
    const int df_within = G * (T - 1) - static_cast<int>(tv_cols.size());
    if (df_within <= 0) throw ValidationError("random effects: no within degrees of freedom");
    const double sigma2_e = ssr_within / df_within;

    // Between step on cluster means.
    Eigen::MatrixXd Xb(G, K + 1);
    Xb.leftCols(K) = Xbar;
    Xb.col(K).setOnes();
    const int df_between = G - (K + 1);
    if (df_between <= 0)
        throw ValidationError("random effects: too few clusters for the between regression");
    double ssr_between = ols(Xb, ybar).residuals.squaredNorm();
    double sigma2_between = ssr_between / df_between;
    double sigma2_u = sigma2_between - sigma2_e / T;
    if (sigma2_u < 0.0) {
        std::cerr << "warning: negative sigma2_u estimate clamped to 0 (pooled OLS)\n";
        sigma2_u = 0.0;
    }

    double theta = 1.0 - std::sqrt(sigma2_e / (sigma2_e + T * sigma2_u));
    theta = std::clamp(theta, 0.0, 1.0);

    // GLS via quasi-demeaning.
    REFit fit;
    fit.X_qd.resize(n, K + 1);
    Eigen::VectorXd y_qd(n);
    for (int i = 0; i < n; ++i) {
        int g = slot_of(panel.cluster[i]);
        fit.X_qd.row(i).head(K) = panel.X.row(i) - theta * Xbar.row(g);
        fit.X_qd(i, K) = 1.0 - theta;
        y_qd[i] = panel.y[i] - theta * ybar[g];
    }
    OlsFit gls = ols(fit.X_qd, y_qd);
    if (!gls.dropped.empty())
        throw ValidationError("random effects: quasi-demeaned design is rank deficient");

    fit.coef = gls.beta;
    fit.resid_qd = gls.residuals;
    fit.theta = theta;
    fit.sigma2_u = sigma2_u;
    fit.sigma2_e = sigma2_e;
    fit.n_obs = n;
    fit.n_clusters = G;
    fit.names = panel.names;
    fit.names.push_back("constant");

    // Conventional (spherical) SEs for reference.
    double s2 = fit.resid_qd.squaredNorm() / (n - (K + 1));
    Eigen::MatrixXd XtX_inv =
        (fit.X_qd.transpose() * fit.X_qd).ldlt().solve(Eigen::MatrixXd::Identity(K + 1, K + 1));
    fit.se_conventional = (s2 * XtX_inv.diagonal()).cwiseSqrt();

    clustered_se(fit, panel);
    return fit;
}

Eigen::VectorXd clustered_se(REFit& fit, const PanelData& panel) {
    const int n = fit.n_obs;
    const int G = fit.n_clusters;
    const int K = static_cast<int>(fit.X_qd.cols());
    if (G < 2) throw ValidationError("clustered_se: need at least 2 clusters");
    if (panel.n_obs() != n) throw ValidationError("clustered_se: fit/panel mismatch");

    std::vector<int> labels(panel.cluster.begin(), panel.cluster.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(K, K);
    for (int gi = 0; gi < G; ++gi) {
        Eigen::VectorXd score = Eigen::VectorXd::Zero(K);
        for (int i = 0; i < n; ++i) {
            if (panel.cluster[i] == labels[gi])
                score += fit.X_qd.row(i).transpose() * fit.resid_qd[i];
        }
        meat += score * score.transpose();
    }
    Eigen::MatrixXd bread =
        (fit.X_qd.transpose() * fit.X_qd).ldlt().solve(Eigen::MatrixXd::Identity(K, K));
    const double c = (static_cast<double>(G) / (G - 1)) *
                     (static_cast<double>(n - 1) / (n - K));
    Eigen::MatrixXd V = c * bread * meat * bread;

    fit.se = V.diagonal().cwiseSqrt();
    fit.p_values.resize(K);
    for (int j = 0; j < K; ++j) {
        double t = fit.coef[j] / fit.se[j];
        fit.p_values[j] = student_t_two_sided_p(t, G - 1);
    }
    return fit.se;
}

namespace {

DiagnosticResult lm_het_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& aux,
                             int nominal_df, const char* name) {
    const int n = static_cast<int>(residuals.size());
    DiagnosticResult res;
    Eigen::VectorXd e2 = residuals.array().square();
    double sst = (e2.array() - e2.mean()).square().sum();
    if (sst <= 1e-300) {
        // Constant squared residuals carry no heteroscedasticity signal.
        res.statistic = 0.0;
        res.df = nominal_df;
        res.p_value = 1.0;
        res.reject = false;
        res.verdict = std::string(name) + ": fail to reject homoscedasticity";
        return res;
    }
    OlsFit f = ols(aux, e2);
    int df = nominal_df - static_cast<int>(f.dropped.size());
    if (!f.dropped.empty())
        std::cerr << "warning: " << name << " auxiliary design rank deficient; "
                  << f.dropped.size() << " collinear terms dropped\n";
    res.statistic = n * f.r2;
    res.df = std::max(df, 1);
    res.p_value = chi_squared_sf(res.statistic, res.df);
    res.reject = *res.p_value < 0.05;
    res.verdict = std::string(name) +
                  (res.reject ? ": reject homoscedasticity"
                              : ": fail to reject homoscedasticity");
    return res;
}

}  // namespace

DiagnosticResult white_test(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X) {
    const int n = static_cast<int>(residuals.size());
    const int k = static_cast<int>(X.cols());
    if (n != X.rows() || n < k * (k + 3) / 2 + 2)
        throw ValidationError("white_test: too few observations");
    // [1, X, X^2, cross products]
    const int n_terms = k + k + k * (k - 1) / 2;
    Eigen::MatrixXd aux(n, n_terms + 1);
    int c = 0;
    aux.col(c++).setOnes();
    for (int j = 0; j < k; ++j) aux.col(c++) = X.col(j);
    for (int j = 0; j < k; ++j) aux.col(c++) = X.col(j).array().square();
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            aux.col(c++) = X.col(a).array() * X.col(b).array();
    return lm_het_test(residuals, aux, n_terms, "White test");
}

DiagnosticResult breusch_pagan(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X,
                               bool koenker) {
    const int n = static_cast<int>(residuals.size());
    const int k = static_cast<int>(X.cols());
    if (n != X.rows() || n < k + 2) throw ValidationError("breusch_pagan: too few observations");
    Eigen::MatrixXd aux(n, k + 1);
    aux.col(0).setOnes();
    aux.rightCols(k) = X;
    if (koenker) return lm_het_test(residuals, aux, k, "Breusch-Pagan test");

    // Plain (normality-assuming) form: LM = ESS/2 of e^2/sigma^2 on [1, X].
    DiagnosticResult res;
    Eigen::VectorXd e2 = residuals.array().square();
    double s2 = e2.mean();
    if (s2 <= 1e-300) {
        res.statistic = 0.0;
        res.df = k;
        res.p_value = 1.0;
        res.verdict = "Breusch-Pagan test: fail to reject homoscedasticity";
        return res;
    }
    Eigen::VectorXd g = e2 / s2;
    OlsFit f = ols(aux, g);
    double sst = (g.array() - g.mean()).square().sum();
    double ess = sst - f.residuals.squaredNorm();
    res.statistic = 0.5 * ess;
    res.df = k - static_cast<int>(f.dropped.size());
    res.df = std::max(res.df, 1);
    res.p_value = chi_squared_sf(res.statistic, res.df);
    res.reject = *res.p_value < 0.05;
    res.verdict = res.reject ? "Breusch-Pagan test: reject homoscedasticity"
                             : "Breusch-Pagan test: fail to reject homoscedasticity";
    return res;
}

DiagnosticResult durbin_watson(const std::vector<std::vector<double>>& residuals_by_cluster) {
    double num = 0.0, den = 0.0;
    for (const auto& e : residuals_by_cluster) {
        if (e.size() < 2) throw ValidationError("durbin_watson: each cluster needs >= 2 residuals");
        for (size_t t = 0; t < e.size(); ++t) {
            den += e[t] * e[t];
            if (t >= 1) {
                double d = e[t] - e[t - 1];
                num += d * d;
            }
        }
    }
    DiagnosticResult res;
    res.df = 0;
    if (den <= 0.0) {
        res.statistic = std::nan("");
        res.verdict = "Durbin-Watson: undefined (all residuals zero)";
        res.reject = false;
        return res;
    }
    res.statistic = num / den;
    res.reject = res.statistic < 1.0;
    res.verdict = res.reject
                      ? "Durbin-Watson: significant positive autocorrelation (DW < 1)"
                      : "Durbin-Watson: no strong positive autocorrelation";
    return res;
}

Eigen::VectorXd pooled_ols_residuals(const PanelData& panel) {
    const int n = panel.n_obs();
    const int K = static_cast<int>(panel.X.cols());
    Eigen::MatrixXd Xi(n, K + 1);
    Xi.leftCols(K) = panel.X;
    Xi.col(K).setOnes();
    return ols(Xi, panel.y).residuals;
}

}  // namespace covshap
