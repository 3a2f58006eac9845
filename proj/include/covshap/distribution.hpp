#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace covshap {

// Multivariate gaussian over the feature space with analytic conditionals.
class GaussianModel {
public:
    GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd cov);
    static GaussianModel fit(const Eigen::MatrixXd& X);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    int dim() const { return static_cast<int>(mean_.size()); }

    // p(x_out | x_cond = v) = N(b + A v, L L').
    struct Conditional {
        Eigen::MatrixXd A;  // |out| x |cond| regression matrix
        Eigen::VectorXd b;  // |out| offset
        Eigen::MatrixXd L;  // |out| x |out| lower Cholesky of conditional cov
    };
    // ridge_events counts singular (sub)covariances repaired with eps*I,
    // eps = 1e-8 * trace / dim.
    Conditional conditional(const std::vector<int>& out, const std::vector<int>& cond,
                            int* ridge_events = nullptr) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

// Conditional resampling from reference rows weighted by a scaled Mahalanobis
// distance on the conditioning coordinates: w_i ~ exp(-D_i^2 / (2 sigma^2)),
// D_i^2 = (r_i - v)' S_cc^-1 (r_i - v) / |cond|.
class EmpiricalModel {
public:
    explicit EmpiricalModel(Eigen::MatrixXd reference, double bandwidth = 0.1);

    const Eigen::MatrixXd& reference() const { return ref_; }
    double bandwidth() const { return bandwidth_; }
    int dim() const { return static_cast<int>(ref_.cols()); }

    // Draw one reference row index given conditioning values.
    int draw_row(const std::vector<int>& cond, const Eigen::VectorXd& cond_values,
                 std::mt19937_64& gen, int* ridge_events = nullptr) const;

private:
    Eigen::MatrixXd ref_;
    Eigen::MatrixXd cov_;
    double bandwidth_;
};

// Explicit finite distribution: support rows with probabilities. Drives the
// exact (no sampling) characteristic-value path.
class FiniteModel {
public:
    FiniteModel(Eigen::MatrixXd support, Eigen::VectorXd probs);

    const Eigen::MatrixXd& support() const { return support_; }
    const Eigen::VectorXd& probs() const { return probs_; }
    int dim() const { return static_cast<int>(support_.cols()); }

    // Conditional distribution of the `out` coordinates given exact matches
    // on `cond`: distinct out-tuples with probabilities.
    struct OutDistribution {
        Eigen::MatrixXd values;  // n_tuples x |out|
        Eigen::VectorXd probs;
    };
    OutDistribution conditional(const std::vector<int>& out, const std::vector<int>& cond,
                                const Eigen::VectorXd& cond_values) const;

private:
    Eigen::MatrixXd support_;
    Eigen::VectorXd probs_;
};

using DistributionModel = std::variant<GaussianModel, EmpiricalModel, FiniteModel>;

int distribution_dim(const DistributionModel& dist);

// Cholesky with the ridge fallback shared by the gaussian paths.
Eigen::MatrixXd robust_cholesky(Eigen::MatrixXd m, int* ridge_events);

}  // namespace covshap
