#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace covshap {

double mean(std::span<const double> v);
// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> v);
// Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

inline double mean(const Eigen::VectorXd& v) {
    return mean(std::span<const double>(v.data(), v.size()));
}
inline double sample_sd(const Eigen::VectorXd& v) {
    return sample_sd(std::span<const double>(v.data(), v.size()));
}
inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return pearson(std::span<const double>(a.data(), a.size()),
                   std::span<const double>(b.data(), b.size()));
}

// OLS via column-pivoted QR. Rank-deficient designs drop redundant columns
// (their coefficients are set to zero and indices reported).
struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    double r2 = 0.0;           // centered R^2
    int rank = 0;
    std::vector<int> dropped;  // column indices removed for collinearity
};

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Upper-tail probabilities.
double chi_squared_sf(double x, double df);
double student_t_two_sided_p(double t, double df);

}  // namespace covshap
