#include "covshap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "covshap/common.hpp"
#include "covshap/rng.hpp"
#include "covshap/stats.hpp"

namespace covshap {

ImportanceReport global_importance(const ShapleyMatrix& shap,
                                   const Eigen::MatrixXd& X,
                                   const std::vector<std::string>& names) {
    const int n = static_cast<int>(shap.values.rows());
    const int d = static_cast<int>(shap.values.cols());
    if (X.rows() != n || X.cols() != d)
        throw ValidationError("global_importance: shap and X shapes differ");
    if (static_cast<int>(names.size()) != d)
        throw ValidationError("global_importance: name count mismatch");

    ImportanceReport rep;
    rep.features.resize(d);
    for (int j = 0; j < d; ++j) {
        FeatureImportance& fi = rep.features[j];
        fi.name = names[j];
        fi.mean_abs_shap = shap.values.col(j).cwiseAbs().mean();
        double r = pearson(Eigen::VectorXd(X.col(j)), Eigen::VectorXd(shap.values.col(j)));
        if (std::isnan(r) || std::fabs(r) < 0.05) fi.sign = 0;
        else fi.sign = r > 0 ? 1 : -1;
    }
    // Descending mean |S_v|, ties by feature-universe order.
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rep.features[a].mean_abs_shap > rep.features[b].mean_abs_shap;
    });
    for (int rank = 0; rank < d; ++rank) rep.features[order[rank]].s_index = rank + 1;
    return rep;
}

RobustnessReport robustness_study(const PredictFn& f, const Eigen::MatrixXd& X,
                                  const CausalOrdering& base_ordering,
                                  int n_perms, const DistributionModel& dist,
                                  const ShapleyConfig& config, int n_threads) {
    const auto& names = base_ordering.universe();
    const int d = static_cast<int>(names.size());

    RobustnessReport rep;
    rep.features = names;
    rep.s_index.resize(n_perms, d);

    ShapleyMatrix base_shap = explain_dataset(f, X, base_ordering, dist, config, n_threads);
    ImportanceReport base_imp = global_importance(base_shap, X, names);
    rep.reference.resize(d);
    for (int j = 0; j < d; ++j) rep.reference[j] = base_imp.features[j].s_index;

    auto shuffled = shuffle_components(base_ordering, n_perms,
                                       mix_seed({config.seed, 0x0b57ULL}));
    for (int p = 0; p < n_perms; ++p) {
        ShapleyConfig cfg = config;
        cfg.seed = mix_seed({config.seed, 0x0b58ULL, static_cast<uint64_t>(p)});
        ShapleyMatrix shap = explain_dataset(f, X, shuffled[p], dist, cfg, n_threads);
        ImportanceReport imp = global_importance(shap, X, names);
        for (int j = 0; j < d; ++j) rep.s_index(p, j) = imp.features[j].s_index;
        rep.orderings.push_back(shuffled[p].print());
    }
    return rep;
}

CorrelationNetwork correlation_network(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y,
                                       const std::vector<std::string>& names,
                                       const std::string& y_label,
                                       double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw ValidationError("correlation_network: threshold must be in [0,1]");
    if (X.rows() != y.size())
        throw ValidationError("correlation_network: X and y row counts differ");
    const int d = static_cast<int>(X.cols());
    if (static_cast<int>(names.size()) != d)
        throw ValidationError("correlation_network: name count mismatch");

    CorrelationNetwork net;
    net.nodes = names;
    net.nodes.push_back(y_label);

    auto column = [&](int i) -> Eigen::VectorXd {
        return i < d ? Eigen::VectorXd(X.col(i)) : y;
    };
    std::vector<bool> degenerate(d + 1, false);
    for (int i = 0; i <= d; ++i) {
        if (sample_sd(column(i)) <= 0.0) {
            degenerate[i] = true;
            std::cerr << "warning: zero-variance column '" << net.nodes[i]
                      << "' omitted from correlation network\n";
        }
    }
    for (int a = 0; a <= d; ++a) {
        for (int b = a + 1; b <= d; ++b) {
            if (degenerate[a] || degenerate[b]) continue;
            double r = pearson(column(a), column(b));
            if (!std::isnan(r) && std::fabs(r) >= threshold)
                net.edges.push_back({a, b, r});
        }
    }
    return net;
}

}  // namespace covshap
