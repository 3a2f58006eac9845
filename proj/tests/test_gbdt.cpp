#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "covshap/common.hpp"
#include "covshap/gbdt.hpp"
#include "covshap/rng.hpp"

using namespace covshap;

namespace {

// Friedman-style nonlinear target on [0,1]^d, noiseless.
double friedman(const Eigen::RowVectorXd& x) {
    return 10.0 * std::sin(M_PI * x[0] * x[1]) + 20.0 * std::pow(x[2] - 0.5, 2) +
           10.0 * x[3] + 5.0 * x[4];
}

Eigen::MatrixXd uniform_matrix(int n, int d, uint64_t seed) {
    auto gen = make_stream(seed);
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = runif(gen);
    return X;
}

}  // namespace

TEST_CASE("zero gradients give a single zero leaf") {
    Eigen::MatrixXd X(4, 1);
    X << 0, 1, 2, 3;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd h = Eigen::VectorXd::Ones(4);
    GbdtParams p;
    Tree t = fit_tree(X, g, h, p);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].is_leaf());
    CHECK(t.nodes[0].weight == 0.0);
}

TEST_CASE("step data splits between the classes with unit leaf weights") {
    Eigen::MatrixXd X(4, 1);
    X << -2, -1, 1, 2;
    Eigen::VectorXd y(4);
    y << -1, -1, 1, 1;
    // first boosting round at base 0: grad = -y, hess = 1
    Eigen::VectorXd g = -y;
    Eigen::VectorXd h = Eigen::VectorXd::Ones(4);
    GbdtParams p;
    p.lambda = 0.0;
    p.max_depth = 3;
    Tree t = fit_tree(X, g, h, p);
    REQUIRE(!t.nodes[0].is_leaf());
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold > -1.0);
    CHECK(t.nodes[0].threshold < 1.0);
    const TreeNode& l = t.nodes[t.nodes[0].left];
    const TreeNode& r = t.nodes[t.nodes[0].right];
    REQUIRE(l.is_leaf());
    REQUIRE(r.is_leaf());
    CHECK(l.weight == doctest::Approx(-1.0));
    CHECK(r.weight == doctest::Approx(1.0));
}

TEST_CASE("a dominating split penalty yields a single leaf") {
    Eigen::MatrixXd X(4, 1);
    X << -2, -1, 1, 2;
    Eigen::VectorXd g(4);
    g << 1, 1, -1, -1;
    Eigen::VectorXd h = Eigen::VectorXd::Ones(4);
    GbdtParams p;
    p.lambda = 0.0;
    p.gamma = 100.0;
    Tree t = fit_tree(X, g, h, p);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].is_leaf());
}

TEST_CASE("constant target is predicted exactly") {
    Eigen::MatrixXd X = uniform_matrix(20, 3, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 3.25);
    GbdtParams p;
    p.n_trees = 5;
    Booster b = fit_booster(X, y, p, 0);
    CHECK(b.predict(X.row(4)) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("separable step target is fit to machine precision") {
    Eigen::MatrixXd X(4, 1);
    X << -2, -1, 1, 2;
    Eigen::VectorXd y(4);
    y << -1, -1, 1, 1;
    GbdtParams p;
    p.n_trees = 10;
    p.learning_rate = 1.0;
    p.lambda = 0.0;
    Booster b = fit_booster(X, y, p, 0);
    double mse = 0.0;
    for (int i = 0; i < 4; ++i) mse += std::pow(b.predict(X.row(i)) - y[i], 2);
    CHECK(mse / 4.0 < 1e-6);
}

TEST_CASE("monotone training loss across boosting rounds") {
    Eigen::MatrixXd X = uniform_matrix(60, 4, 2);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) y[i] = friedman(X.row(i));
    GbdtParams p;
    p.n_trees = 40;
    p.learning_rate = 0.5;
    Booster b = fit_booster(X, y, p, 0);
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(60, b.base_score);
    double prev = (pred - y).squaredNorm();
    for (const Tree& t : b.trees) {
        for (int i = 0; i < 60; ++i) pred[i] += b.learning_rate * t.predict(X.row(i));
        double cur = (pred - y).squaredNorm();
        CHECK(cur <= prev + 1e-9);
        prev = cur;
    }
}

TEST_CASE("prediction is invariant to monotone feature transforms") {
    Eigen::MatrixXd X = uniform_matrix(50, 3, 3);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) y[i] = friedman(X.row(i));
    GbdtParams p;
    p.n_trees = 20;
    Booster b1 = fit_booster(X, y, p, 0);
    Eigen::MatrixXd Xt = X;
    Xt.col(0) = X.col(0).array().exp();
    Xt.col(1) = 3.0 * X.col(1).array() - 5.0;
    Xt.col(2) = X.col(2).array().cube();
    Booster b2 = fit_booster(Xt, y, p, 0);
    for (int i = 0; i < 50; ++i) {
        CHECK(b1.predict(X.row(i)) == b2.predict(Xt.row(i)));  // bit equal
    }
}

TEST_CASE("hand-traced tree evaluation") {
    Tree t;
    t.nodes.resize(5);
    t.nodes[0] = {0, 0.5, 1, 2, 0.0};
    t.nodes[1] = {1, -1.0, 3, 4, 0.0};
    t.nodes[2] = {-1, 0, -1, -1, 7.0};
    t.nodes[3] = {-1, 0, -1, -1, -2.0};
    t.nodes[4] = {-1, 0, -1, -1, 4.0};
    Eigen::RowVectorXd a(2), bq(2), c(2);
    a << 0.9, 0.0;   // right -> 7
    bq << 0.1, -3.0;  // left, left -> -2
    c << 0.1, 0.0;   // left, right -> 4
    CHECK(t.predict(a) == 7.0);
    CHECK(t.predict(bq) == -2.0);
    CHECK(t.predict(c) == 4.0);
}

TEST_CASE("r_squared basics") {
    Eigen::VectorXd truth(4), pred(4);
    truth << 1, 2, 3, 4;
    pred = truth;
    CHECK(r_squared(pred, truth) == doctest::Approx(1.0));
    pred.setConstant(truth.mean());
    CHECK(r_squared(pred, truth) == doctest::Approx(0.0));
    Eigen::VectorXd t2(2), p2(2);
    t2 << -1, 1;
    p2 << 0, 0;
    CHECK(r_squared(p2, t2) == doctest::Approx(0.0));
    Eigen::VectorXd tc = Eigen::VectorXd::Ones(3);
    CHECK(std::isnan(r_squared(Eigen::VectorXd::Zero(3), tc)));
}

TEST_CASE("booster and ensemble prediction algebra") {
    Booster constant1;
    constant1.base_score = 1.0;
    constant1.n_features = 2;
    Booster constant3;
    constant3.base_score = 3.0;
    constant3.n_features = 2;
    TreeEnsemble ens;
    ens.learners = {constant1, constant3};
    ens.n_features = 2;
    Eigen::RowVectorXd x(2);
    x << 0, 0;
    CHECK(ens.predict(x) == doctest::Approx(2.0));

    Booster single;
    single.base_score = 0.5;
    single.learning_rate = 0.1;
    single.n_features = 1;
    Tree leaf;
    leaf.nodes.push_back({-1, 0, -1, -1, 3.0});
    single.trees.push_back(leaf);
    Eigen::RowVectorXd x1(1);
    x1 << 42.0;
    CHECK(single.predict(x1) == doctest::Approx(0.5 + 0.1 * 3.0));

    Eigen::RowVectorXd bad(3);
    CHECK_THROWS_AS((void)single.predict(bad), ValidationError);
}

TEST_CASE("ensemble mean property is exact") {
    Eigen::MatrixXd X = uniform_matrix(80, 5, 5);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) y[i] = friedman(X.row(i));
    GbdtParams p;
    p.n_trees = 10;
    p.n_learners = 7;
    TreeEnsemble ens = fit_ensemble(X, y, p, 11);
    Eigen::RowVectorXd q = X.row(3);
    double acc = 0.0;
    for (const Booster& b : ens.learners) acc += b.predict(q);
    CHECK(ens.predict(q) == acc / 7.0);
}

TEST_CASE("ensemble fit quality and R^2 bookkeeping") {
    Eigen::MatrixXd X = uniform_matrix(400, 6, 6);
    Eigen::VectorXd y(400);
    for (int i = 0; i < 400; ++i) y[i] = friedman(X.row(i));
    GbdtParams p;
    p.n_trees = 60;
    p.n_learners = 8;
    TreeEnsemble ens = fit_ensemble(X, y, p, 21);
    CHECK(ens.r2_mean > 0.85);
    CHECK(ens.r2_scores.size() == 8);
    CHECK(ens.r2_se > 0.0);

    GbdtParams p1 = p;
    p1.n_learners = 1;
    TreeEnsemble one = fit_ensemble(X, y, p1, 21);
    CHECK(one.r2_se == 0.0);  // single-learner convention
}

TEST_CASE("same seed gives a bit-identical ensemble; thread count is irrelevant") {
    Eigen::MatrixXd X = uniform_matrix(120, 4, 7);
    Eigen::VectorXd y(120);
    for (int i = 0; i < 120; ++i) y[i] = friedman(X.row(i)) + 0.1 * X(i, 3);
    GbdtParams p;
    p.n_trees = 15;
    p.n_learners = 6;
    TreeEnsemble a = fit_ensemble(X, y, p, 99, 1);
    TreeEnsemble b = fit_ensemble(X, y, p, 99, 2);
    CHECK(a.to_json().dump() == b.to_json().dump());
    TreeEnsemble c = fit_ensemble(X, y, p, 100, 1);
    CHECK(a.to_json().dump() != c.to_json().dump());
}

TEST_CASE("json round trip preserves predictions") {
    Eigen::MatrixXd X = uniform_matrix(50, 3, 8);
    Eigen::VectorXd y = X.col(0) + X.col(1).cwiseProduct(X.col(2));
    GbdtParams p;
    p.n_trees = 8;
    p.n_learners = 3;
    TreeEnsemble ens = fit_ensemble(X, y, p, 5);
    TreeEnsemble back = TreeEnsemble::from_json(ens.to_json());
    for (int i = 0; i < 10; ++i)
        CHECK(ens.predict(X.row(i)) == back.predict(X.row(i)));
    CHECK(ens.to_json().dump() == back.to_json().dump());
}

TEST_CASE("precondition violations throw") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 3, 4;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    GbdtParams p;
    CHECK_THROWS_AS(fit_ensemble(X, y, p, 0), ValidationError);  // < 10 rows
    Eigen::VectorXd bad_h = Eigen::VectorXd::Constant(4, -1.0);
    CHECK_THROWS_AS(fit_tree(X, y, bad_h, p), ValidationError);
}
