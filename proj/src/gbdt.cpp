#include "covshap/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "covshap/common.hpp"
#include "covshap/rng.hpp"
#include "covshap/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covshap {

void GbdtParams::validate() const {
    if (n_trees < 1 || max_depth < 1 || n_learners < 1)
        throw ValidationError("gbdt: counts must be positive");
    if (learning_rate <= 0.0 || learning_rate > 1.0)
        throw ValidationError("gbdt: learning_rate must be in (0,1]");
    if (lambda < 0.0 || gamma < 0.0 || min_child_weight < 0.0)
        throw ValidationError("gbdt: penalties must be nonnegative");
    if (bag_fraction <= 0.0 || train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ValidationError("gbdt: fractions out of range");
}

double Tree::predict(const Eigen::RowVectorXd& x) const {
    int node = 0;
    while (!nodes[node].is_leaf()) {
        const TreeNode& n = nodes[node];
        node = x[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[node].weight;
}

namespace {

// Grows one tree level by level. Presorted feature orders are built once per
// dataset and reused across boosting rounds.
class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const GbdtParams& params)
        : X_(X), params_(params), n_(static_cast<int>(X.rows())),
          d_(static_cast<int>(X.cols())) {
        sorted_.resize(d_);
        for (int f = 0; f < d_; ++f) {
            auto& order = sorted_[f];
            order.resize(n_);
            std::iota(order.begin(), order.end(), 0);
            const auto col = X_.col(f);
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return col[a] < col[b]; });
        }
    }

    Tree build(const Eigen::VectorXd& grad, const Eigen::VectorXd& hess) {
        Tree tree;
        struct Cand {
            double gain = 0.0;
            int feature = -1;
            double threshold = 0.0;
        };
        struct Level {
            int node_id;
            double G, H;
        };

        std::vector<int> node_of_row(n_, 0);
        double G0 = grad.sum(), H0 = hess.sum();
        tree.nodes.push_back(TreeNode{});
        std::vector<Level> level{{0, G0, H0}};

        for (int depth = 0; depth < params_.max_depth && !level.empty(); ++depth) {
            const int n_active = static_cast<int>(level.size());
            std::vector<int> slot(tree.nodes.size(), -1);
            for (int i = 0; i < n_active; ++i) slot[level[i].node_id] = i;

            std::vector<Cand> best(n_active);
            std::vector<double> GL(n_active), HL(n_active), prev_val(n_active);
            std::vector<int> seen(n_active);

            for (int f = 0; f < d_; ++f) {
                std::fill(GL.begin(), GL.end(), 0.0);
                std::fill(HL.begin(), HL.end(), 0.0);
                std::fill(seen.begin(), seen.end(), 0);
                const auto col = X_.col(f);
                for (int r : sorted_[f]) {
                    int node = node_of_row[r];
                    if (node < 0) continue;
                    int s = slot[node];
                    if (s < 0) continue;
                    double v = col[r];
                    if (seen[s] > 0 && v > prev_val[s]) {
                        double gl = GL[s], hl = HL[s];
                        double gr = level[s].G - gl, hr = level[s].H - hl;
                        if (hl >= params_.min_child_weight &&
                            hr >= params_.min_child_weight) {
                            double gain =
                                0.5 * (gl * gl / (hl + params_.lambda) +
                                       gr * gr / (hr + params_.lambda) -
                                       level[s].G * level[s].G /
                                           (level[s].H + params_.lambda)) -
                                params_.gamma;
                            // Strict > keeps the earliest (lowest feature,
                            // lowest threshold) candidate on ties.
                            if (gain > best[s].gain) {
                                best[s].gain = gain;
                                best[s].feature = f;
                                best[s].threshold = prev_val[s] + 0.5 * (v - prev_val[s]);
                            }
                        }
                    }
                    GL[s] += grad[r];
                    HL[s] += hess[r];
                    prev_val[s] = v;
                    ++seen[s];
                }
            }

            std::vector<Level> next;
            std::vector<int> left_id(n_active, -1), right_id(n_active, -1);
            for (int s = 0; s < n_active; ++s) {
                TreeNode& node = tree.nodes[level[s].node_id];
                if (best[s].gain > 0.0 && best[s].feature >= 0) {
                    node.feature = best[s].feature;
                    node.threshold = best[s].threshold;
                    node.left = static_cast<int>(tree.nodes.size());
                    tree.nodes.push_back(TreeNode{});
                    node.right = static_cast<int>(tree.nodes.size());
                    tree.nodes.push_back(TreeNode{});
                    left_id[s] = node.left;
                    right_id[s] = node.right;
                    next.push_back({node.left, 0.0, 0.0});
                    next.push_back({node.right, 0.0, 0.0});
                } else {
                    node.feature = -1;
                    node.weight = -level[s].G / (level[s].H + params_.lambda);
                }
            }

            // Route rows to children and accumulate child G/H.
            std::vector<int> next_slot(tree.nodes.size(), -1);
            for (size_t i = 0; i < next.size(); ++i) next_slot[next[i].node_id] = static_cast<int>(i);
            for (int r = 0; r < n_; ++r) {
                int node = node_of_row[r];
                if (node < 0) continue;
                int s = slot[node];
                if (s < 0 || left_id[s] < 0) {
                    node_of_row[r] = -1;  // settled in a leaf
                    continue;
                }
                const TreeNode& parent = tree.nodes[node];
                int child = X_(r, parent.feature) < parent.threshold ? left_id[s] : right_id[s];
                node_of_row[r] = child;
                Level& lv = next[next_slot[child]];
                lv.G += grad[r];
                lv.H += hess[r];
            }
            level = std::move(next);
        }

        // Depth limit reached: remaining active nodes become leaves.
        for (const Level& lv : level) {
            TreeNode& node = tree.nodes[lv.node_id];
            node.feature = -1;
            node.weight = -lv.G / (lv.H + params_.lambda);
        }
        return tree;
    }

private:
    const Eigen::MatrixXd& X_;
    const GbdtParams& params_;
    int n_, d_;
    std::vector<std::vector<int>> sorted_;
};

}  // namespace

Tree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad,
              const Eigen::VectorXd& hess, const GbdtParams& params) {
    params.validate();
    if (grad.size() != X.rows() || hess.size() != X.rows())
        throw ValidationError("fit_tree: grad/hess length must match rows(X)");
    if ((hess.array() < 0.0).any())
        throw ValidationError("fit_tree: hessian must be nonnegative");
    if (X.rows() == 0) {
        Tree t;
        t.nodes.push_back(TreeNode{});
        t.nodes[0].weight = 0.0;
        return t;
    }
    TreeBuilder builder(X, params);
    return builder.build(grad, hess);
}

double Booster::predict(const Eigen::RowVectorXd& x) const {
    if (x.size() != n_features)
        throw ValidationError("predict: feature arity mismatch");
    double acc = base_score;
    for (const Tree& t : trees) acc += learning_rate * t.predict(x);
    return acc;
}

void Booster::predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& out) const {
    if (X.cols() != n_features)
        throw ValidationError("predict: feature arity mismatch");
    out.resize(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        double acc = base_score;
        for (const Tree& t : trees) acc += learning_rate * t.predict(X.row(r));
        out[r] = acc;
    }
}

Booster fit_booster(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const GbdtParams& params, uint64_t /*seed*/) {
    params.validate();
    if (X.rows() != y.size() || X.rows() < 2)
        throw ValidationError("fit_booster: need at least 2 rows with matching y");

    Booster booster;
    booster.learning_rate = params.learning_rate;
    booster.base_score = y.mean();
    booster.n_features = static_cast<int>(X.cols());

    Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), booster.base_score);
    Eigen::VectorXd hess = Eigen::VectorXd::Ones(y.size());
    TreeBuilder builder(X, params);
    for (int round = 0; round < params.n_trees; ++round) {
        Eigen::VectorXd grad = pred - y;
        Tree tree = builder.build(grad, hess);
        for (Eigen::Index r = 0; r < X.rows(); ++r)
            pred[r] += params.learning_rate * tree.predict(X.row(r));
        booster.trees.push_back(std::move(tree));
    }
    return booster;
}

double TreeEnsemble::predict(const Eigen::RowVectorXd& x) const {
    double acc = 0.0;
    for (const Booster& b : learners) acc += b.predict(x);
    return acc / static_cast<double>(learners.size());
}

void TreeEnsemble::predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& out) const {
    out = Eigen::VectorXd::Zero(X.rows());
    Eigen::VectorXd tmp;
    for (const Booster& b : learners) {
        b.predict_batch(X, tmp);
        out += tmp;
    }
    out /= static_cast<double>(learners.size());
}

double r_squared(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size() || pred.size() < 2)
        throw ValidationError("r_squared: need equal lengths >= 2");
    double m = truth.mean();
    double ss_tot = (truth.array() - m).square().sum();
    if (ss_tot <= 0.0) return std::nan("");
    double ss_res = (truth - pred).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

TreeEnsemble fit_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const GbdtParams& params, uint64_t seed, int n_threads) {
    params.validate();
    const int n = static_cast<int>(X.rows());
    if (n < 10 || y.size() != n)
        throw ValidationError("fit_ensemble: need at least 10 rows with matching y");

    TreeEnsemble ens;
    ens.params = params;
    ens.n_features = static_cast<int>(X.cols());
    ens.learners.resize(params.n_learners);
    ens.r2_scores.assign(params.n_learners, std::nan(""));

    const int n_train = std::max(1, static_cast<int>(std::llround(params.train_fraction * n)));
    const int n_test = n - n_train;
    if (n_test < 2) throw ValidationError("fit_ensemble: test split too small");
    const int n_bag =
        std::max(2, static_cast<int>(std::llround(params.bag_fraction * n_train)));

#ifdef _OPENMP
    int threads = n_threads > 0 ? n_threads : omp_get_max_threads();
#else
    int threads = 1;
    (void)n_threads;
#endif

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int l = 0; l < params.n_learners; ++l) {
        auto gen = make_stream(seed, 0xba66e12ULL, static_cast<uint64_t>(l));
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(gen() % static_cast<uint64_t>(i + 1));
            std::swap(perm[i], perm[j]);
        }
        Eigen::MatrixXd Xb(n_bag, X.cols());
        Eigen::VectorXd yb(n_bag);
        for (int i = 0; i < n_bag; ++i) {
            int pick = perm[static_cast<int>(gen() % static_cast<uint64_t>(n_train))];
            Xb.row(i) = X.row(pick);
            yb[i] = y[pick];
        }
        Booster booster =
            fit_booster(Xb, yb, params, mix_seed({seed, 0xb005ULL, static_cast<uint64_t>(l)}));

        Eigen::MatrixXd Xt(n_test, X.cols());
        Eigen::VectorXd yt(n_test);
        for (int i = 0; i < n_test; ++i) {
            Xt.row(i) = X.row(perm[n_train + i]);
            yt[i] = y[perm[n_train + i]];
        }
        Eigen::VectorXd pt;
        booster.predict_batch(Xt, pt);
        double r2 = r_squared(pt, yt);
        ens.learners[l] = std::move(booster);
        ens.r2_scores[l] = r2;
    }

    std::vector<double> valid;
    for (int l = 0; l < params.n_learners; ++l) {
        if (std::isnan(ens.r2_scores[l])) {
            std::cerr << "warning: learner " << l
                      << " has constant test truth, R^2 undefined and excluded\n";
        } else {
            valid.push_back(ens.r2_scores[l]);
        }
    }
    if (valid.empty()) throw NumericError("fit_ensemble: no learner produced a valid R^2");
    ens.r2_mean = mean(valid);
    ens.r2_se = valid.size() >= 2
                    ? sample_sd(valid) / std::sqrt(static_cast<double>(valid.size()))
                    : 0.0;
    return ens;
}

nlohmann::json TreeEnsemble::to_json() const {
    nlohmann::json j;
    j["format"] = "covshap-ensemble";
    j["version"] = 1;
    j["n_features"] = n_features;
    j["params"] = {{"n_trees", params.n_trees},
                   {"max_depth", params.max_depth},
                   {"learning_rate", params.learning_rate},
                   {"lambda", params.lambda},
                   {"gamma", params.gamma},
                   {"min_child_weight", params.min_child_weight},
                   {"n_learners", params.n_learners},
                   {"bag_fraction", params.bag_fraction},
                   {"train_fraction", params.train_fraction}};
    j["r2_scores"] = r2_scores;
    j["r2_mean"] = r2_mean;
    j["r2_se"] = r2_se;
    nlohmann::json jl = nlohmann::json::array();
    for (const Booster& b : learners) {
        nlohmann::json jb;
        jb["base_score"] = b.base_score;
        jb["learning_rate"] = b.learning_rate;
        nlohmann::json jt = nlohmann::json::array();
        for (const Tree& t : b.trees) {
            nlohmann::json jn = nlohmann::json::array();
            for (const TreeNode& n : t.nodes)
                jn.push_back({n.feature, n.threshold, n.left, n.right, n.weight});
            jt.push_back(std::move(jn));
        }
        jb["trees"] = std::move(jt);
        jl.push_back(std::move(jb));
    }
    j["learners"] = std::move(jl);
    return j;
}

TreeEnsemble TreeEnsemble::from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j["format"] != "covshap-ensemble")
        throw DataError("model json: unrecognized format");
    TreeEnsemble ens;
    ens.n_features = j.at("n_features").get<int>();
    const auto& p = j.at("params");
    ens.params.n_trees = p.at("n_trees").get<int>();
    ens.params.max_depth = p.at("max_depth").get<int>();
    ens.params.learning_rate = p.at("learning_rate").get<double>();
    ens.params.lambda = p.at("lambda").get<double>();
    ens.params.gamma = p.at("gamma").get<double>();
    ens.params.min_child_weight = p.at("min_child_weight").get<double>();
    ens.params.n_learners = p.at("n_learners").get<int>();
    ens.params.bag_fraction = p.at("bag_fraction").get<double>();
    ens.params.train_fraction = p.at("train_fraction").get<double>();
    for (const auto& v : j.at("r2_scores"))
        ens.r2_scores.push_back(v.is_null() ? std::nan("") : v.get<double>());
    ens.r2_mean = j.at("r2_mean").get<double>();
    ens.r2_se = j.at("r2_se").get<double>();
    for (const auto& jb : j.at("learners")) {
        Booster b;
        b.base_score = jb.at("base_score").get<double>();
        b.learning_rate = jb.at("learning_rate").get<double>();
        b.n_features = ens.n_features;
        for (const auto& jt : jb.at("trees")) {
            Tree t;
            for (const auto& jn : jt) {
                TreeNode n;
                n.feature = jn.at(0).get<int>();
                n.threshold = jn.at(1).get<double>();
                n.left = jn.at(2).get<int>();
                n.right = jn.at(3).get<int>();
                n.weight = jn.at(4).get<double>();
                t.nodes.push_back(n);
            }
            b.trees.push_back(std::move(t));
        }
        ens.learners.push_back(std::move(b));
    }
    return ens;
}

}  // namespace covshap
