#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "covshap/distribution.hpp"
#include "covshap/ordering.hpp"

namespace covshap {

// Batch prediction: rows of X are instances.
using PredictFn = std::function<void(const Eigen::MatrixXd&, Eigen::VectorXd&)>;

struct ShapleyConfig {
    enum class Mode { automatic, exact, permutation };

    int n_mc = 256;            // Monte Carlo samples per coalition
    Mode mode = Mode::automatic;  // automatic: exact for d <= 16
    int n_permutations = 512;  // permutation mode only
    uint64_t seed = 0;

    void validate() const;
};

// Shapley kernel weight s!(d-s-1)!/d! via log-factorials.
double coalition_weight(int s, int d);

// Interventional completion of x over the chain graph: features in S stay
// fixed; each component's out-of-coalition features are drawn conditional on
// all earlier components plus (unless the component is confounded) the
// component's own in-coalition features. Returns n rows.
Eigen::MatrixXd sample_interventional(const Eigen::VectorXd& x,
                                      const std::vector<int>& S,
                                      const CausalOrdering& ordering,
                                      const DistributionModel& dist, int n,
                                      uint64_t seed, int* ridge_events = nullptr);

// v(S): mean prediction over interventional completions. v(F) is f(x) with no
// sampling; a finite-table model is integrated exactly (no sampling at all).
double char_value(const PredictFn& f, const Eigen::VectorXd& x,
                  const std::vector<int>& S, const CausalOrdering& ordering,
                  const DistributionModel& dist, const ShapleyConfig& config);

struct ShapleyResult {
    Eigen::VectorXd phi;
    double base_value = 0.0;
    double prediction = 0.0;
    double efficiency_residual = 0.0;  // |sum(phi) - (prediction - base_value)|
    double sigma_mc = 0.0;             // MC standard-error scale for that residual
    int ridge_events = 0;
};

// Exact mode enumerates all 2^d coalitions with one characteristic value per
// coalition; permutation mode averages marginal contributions over sampled
// feature permutations (coalition values memoized). sigma_mc is the standard
// error of the base-value estimate, the stochastic scale of the efficiency
// identity; exact-summation (finite) runs have sigma_mc = 0.
ShapleyResult shapley_values(const PredictFn& f, const Eigen::VectorXd& x,
                             const CausalOrdering& ordering,
                             const DistributionModel& dist,
                             const ShapleyConfig& config);

struct ShapleyMatrix {
    Eigen::MatrixXd values;  // instances x features
    double base_value = 0.0;
    double base_se = 0.0;
    Eigen::VectorXd instance_predictions;
    Eigen::VectorXd efficiency_residuals;
    double efficiency_tol = 0.0;  // 4*base_se + 1e-9 round-off floor
    int ridge_events = 0;
    int n_mc = 0;
};

// Per-row shapley_values with a shared v(empty) estimate. Deterministic given
// the seed and independent of thread count: every (instance, coalition) pair
// owns an RNG stream derived from (seed, instance index, coalition mask).
ShapleyMatrix explain_dataset(const PredictFn& f, const Eigen::MatrixXd& X,
                              const CausalOrdering& ordering,
                              const DistributionModel& dist,
                              const ShapleyConfig& config, int n_threads = 0);

}  // namespace covshap
