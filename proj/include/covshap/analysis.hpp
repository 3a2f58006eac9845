#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "covshap/shapley.hpp"

namespace covshap {

// Global importance of one feature: mean |S_v|, effect sign, and the Shapley
// Index S_I (1 = most important).
struct FeatureImportance {
    std::string name;
    double mean_abs_shap = 0.0;
    int sign = 0;  // +1 / -1 / 0 (neutral)
    int s_index = 0;
};

struct ImportanceReport {
    std::vector<FeatureImportance> features;  // in feature-universe order
    std::string region;
    std::string phase;
    std::string ordering_label;
};

// Sign is the Pearson correlation between feature values and their per-row
// Shapley values; |r| < 0.05 (or undefined) is neutral. Ranks are by
// descending mean |S_v| with ties broken by feature order.
ImportanceReport global_importance(const ShapleyMatrix& shap,
                                   const Eigen::MatrixXd& X,
                                   const std::vector<std::string>& names);

struct RobustnessReport {
    std::vector<std::string> features;
    Eigen::MatrixXi s_index;          // n_perms x n_features
    std::vector<int> reference;       // S_I under the base ordering
    std::vector<std::string> orderings;  // printed shuffled orderings
};

// Shuffle the base ordering's components n_perms times, explain the dataset
// under each, and collect every feature's S_I distribution.
RobustnessReport robustness_study(const PredictFn& f, const Eigen::MatrixXd& X,
                                  const CausalOrdering& base_ordering,
                                  int n_perms, const DistributionModel& dist,
                                  const ShapleyConfig& config,
                                  int n_threads = 0);

struct CorrelationNetwork {
    struct Edge {
        int a, b;
        double r;
    };
    std::vector<std::string> nodes;  // features then the response label
    std::vector<Edge> edges;         // a < b, |r| >= threshold
};

CorrelationNetwork correlation_network(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y,
                                       const std::vector<std::string>& names,
                                       const std::string& y_label,
                                       double threshold);

}  // namespace covshap
