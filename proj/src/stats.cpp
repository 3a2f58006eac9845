#include "covshap/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace covshap {

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    size_t n = a.size();
    if (n != b.size() || n < 2) return std::nan("");
    double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nan("");
    return sab / std::sqrt(saa * sbb);
}

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    OlsFit fit;
    const auto n = X.rows();
    const auto k = X.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    fit.rank = static_cast<int>(qr.rank());
    if (fit.rank == k) {
        fit.beta = qr.solve(y);
    } else {
        // Keep the pivot-leading independent columns, zero the rest.
        std::vector<int> keep(qr.colsPermutation().indices().data(),
                              qr.colsPermutation().indices().data() + k);
        std::vector<char> kept(k, 0);
        for (int i = 0; i < fit.rank; ++i) kept[keep[i]] = 1;
        Eigen::MatrixXd Xr(n, fit.rank);
        std::vector<int> cols;
        for (int j = 0; j < k; ++j) {
            if (kept[j]) {
                Xr.col(static_cast<int>(cols.size())) = X.col(j);
                cols.push_back(j);
            } else {
                fit.dropped.push_back(j);
            }
        }
        Eigen::VectorXd br = Xr.colPivHouseholderQr().solve(y);
        fit.beta = Eigen::VectorXd::Zero(k);
        for (size_t j = 0; j < cols.size(); ++j) fit.beta[cols[j]] = br[j];
    }
    fit.residuals = y - X * fit.beta;
    double ym = y.mean();
    double sst = (y.array() - ym).square().sum();
    double ssr = fit.residuals.squaredNorm();
    fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    return fit;
}

double chi_squared_sf(double x, double df) {
    if (df <= 0.0) return 1.0;
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) return 1.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

}  // namespace covshap
