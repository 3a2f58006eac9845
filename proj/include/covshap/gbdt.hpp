#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <vector>

namespace covshap {

struct GbdtParams {
    int n_trees = 200;
    int max_depth = 4;
    double learning_rate = 0.1;
    double lambda = 1.0;          // L2 on leaf weights
    double gamma = 0.0;           // split penalty
    double min_child_weight = 1.0;
    int n_learners = 50;
    double bag_fraction = 1.0;    // resample size as a fraction of the train split
    double train_fraction = 0.7;  // per-learner train/test split

    void validate() const;
};

// Flat binary tree. Internal nodes carry (feature, threshold, children);
// leaves carry the weight. Routing: x[feature] < threshold goes left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const Eigen::RowVectorXd& x) const;
};

// Second-order greedy tree fit. Split gain is
//   1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma,
// accepted only when > 0; leaf weight is -G/(H+lambda).
Tree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad,
              const Eigen::VectorXd& hess, const GbdtParams& params);

struct Booster {
    std::vector<Tree> trees;
    double learning_rate = 0.1;
    double base_score = 0.0;
    int n_features = 0;

    double predict(const Eigen::RowVectorXd& x) const;
    void predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& out) const;
};

// Squared-error boosting: grad = pred - y, hess = 1, base_score = mean(y).
Booster fit_booster(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const GbdtParams& params, uint64_t seed);

// Bag of boosters with per-learner hold-out R^2. NaN entries in r2_scores mark
// learners whose test split had constant truth; they are excluded from
// r2_mean. r2_se is the standard error over valid learners (0 when fewer than
// two, by convention).
struct TreeEnsemble {
    std::vector<Booster> learners;
    std::vector<double> r2_scores;
    double r2_mean = 0.0;
    double r2_se = 0.0;
    GbdtParams params;
    int n_features = 0;

    double predict(const Eigen::RowVectorXd& x) const;
    void predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& out) const;

    nlohmann::json to_json() const;
    static TreeEnsemble from_json(const nlohmann::json& j);
};

// Per learner: uniformly split rows train/test (train_fraction), bootstrap
// resample the train side (bag_fraction * |train| draws with replacement),
// fit a booster on the resample and score R^2 on the untouched test rows.
// Learner fits run in parallel; streams derive from (seed, learner index).
TreeEnsemble fit_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const GbdtParams& params, uint64_t seed,
                          int n_threads = 0);

// 1 - SS_res/SS_tot; NaN for constant truth.
double r_squared(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

}  // namespace covshap
