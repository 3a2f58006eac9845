#include "covshap/distribution.hpp"

#include <cmath>
#include <iostream>

#include "covshap/common.hpp"
#include "covshap/rng.hpp"

namespace covshap {

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

}  // namespace

Eigen::MatrixXd robust_cholesky(Eigen::MatrixXd m, int* ridge_events) {
    if (m.rows() == 0) return m;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    double eps = 1e-8 * m.trace() / static_cast<double>(m.rows());
    if (eps <= 0.0 || !std::isfinite(eps)) eps = 1e-12;
    for (int attempt = 0; attempt < 8; ++attempt) {
        if (ridge_events) ++*ridge_events;
        m.diagonal().array() += eps;
        Eigen::LLT<Eigen::MatrixXd> retry(m);
        if (retry.info() == Eigen::Success) return retry.matrixL();
        eps *= 100.0;
    }
    throw NumericError("covariance not positive definite after ridge regularization");
}

GaussianModel::GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size())
        throw ValidationError("gaussian model: dimension mismatch");
    if (!cov_.isApprox(cov_.transpose(), 1e-10))
        throw ValidationError("gaussian model: covariance must be symmetric");
}

GaussianModel GaussianModel::fit(const Eigen::MatrixXd& X) {
    if (X.rows() < 2) throw ValidationError("gaussian fit: need at least 2 rows");
    Eigen::VectorXd mu = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mu.transpose();
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(X.rows() - 1);
    // symmetrize against round-off
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianModel(std::move(mu), std::move(cov));
}

GaussianModel::Conditional GaussianModel::conditional(const std::vector<int>& out,
                                                      const std::vector<int>& cond,
                                                      int* ridge_events) const {
    Conditional c;
    const size_t no = out.size(), nc = cond.size();
    Eigen::VectorXd mu_out = subvector(mean_, out);
    if (nc == 0) {
        c.A = Eigen::MatrixXd::Zero(no, 0);
        c.b = mu_out;
        c.L = robust_cholesky(submatrix(cov_, out, out), ridge_events);
        return c;
    }
    Eigen::MatrixXd S_cc = submatrix(cov_, cond, cond);
    Eigen::MatrixXd S_oc = submatrix(cov_, out, cond);
    Eigen::MatrixXd L_cc = robust_cholesky(std::move(S_cc), ridge_events);
    // A = S_oc S_cc^-1 via the factor; solve L L' A' = S_oc'.
    Eigen::MatrixXd tmp = L_cc.triangularView<Eigen::Lower>().solve(S_oc.transpose());
    Eigen::MatrixXd At = L_cc.transpose().triangularView<Eigen::Upper>().solve(tmp);
    c.A = At.transpose();
    c.b = mu_out - c.A * subvector(mean_, cond);
    Eigen::MatrixXd cond_cov = submatrix(cov_, out, out) - c.A * S_oc.transpose();
    cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();
    c.L = robust_cholesky(std::move(cond_cov), ridge_events);
    return c;
}

EmpiricalModel::EmpiricalModel(Eigen::MatrixXd reference, double bandwidth)
    : ref_(std::move(reference)), bandwidth_(bandwidth) {
    if (ref_.rows() == 0) throw ValidationError("empirical model: reference data empty");
    if (bandwidth_ <= 0.0) throw ValidationError("empirical model: bandwidth must be > 0");
    if (ref_.rows() >= 2) {
        Eigen::VectorXd mu = ref_.colwise().mean();
        Eigen::MatrixXd centered = ref_.rowwise() - mu.transpose();
        cov_ = centered.transpose() * centered / static_cast<double>(ref_.rows() - 1);
        cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    } else {
        cov_ = Eigen::MatrixXd::Identity(ref_.cols(), ref_.cols());
    }
}

int EmpiricalModel::draw_row(const std::vector<int>& cond,
                             const Eigen::VectorXd& cond_values, std::mt19937_64& gen,
                             int* ridge_events) const {
    const int m = static_cast<int>(ref_.rows());
    Eigen::VectorXd w;
    if (cond.empty()) {
        w = Eigen::VectorXd::Constant(m, 1.0 / m);
    } else {
        Eigen::MatrixXd L =
            robust_cholesky(submatrix(cov_, cond, cond), ridge_events);
        w.resize(m);
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd diff(cond.size());
            for (size_t j = 0; j < cond.size(); ++j)
                diff[j] = ref_(i, cond[j]) - cond_values[j];
            Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(diff);
            double d2 = z.squaredNorm() / static_cast<double>(cond.size());
            w[i] = std::exp(-d2 / (2.0 * bandwidth_ * bandwidth_));
        }
        double total = w.sum();
        if (total <= 0.0 || !std::isfinite(total)) {
            w = Eigen::VectorXd::Constant(m, 1.0 / m);
        } else {
            w /= total;
        }
    }
    double u = runif(gen);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        acc += w[i];
        if (u < acc) return i;
    }
    return m - 1;
}

FiniteModel::FiniteModel(Eigen::MatrixXd support, Eigen::VectorXd probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.rows() == 0 || support_.rows() != probs_.size())
        throw ValidationError("finite model: support/probability size mismatch");
    if ((probs_.array() < 0.0).any())
        throw ValidationError("finite model: probabilities must be nonnegative");
    double total = probs_.sum();
    if (std::fabs(total - 1.0) > 1e-9)
        throw ValidationError("finite model: probabilities must sum to 1");
}

FiniteModel::OutDistribution FiniteModel::conditional(
    const std::vector<int>& out, const std::vector<int>& cond,
    const Eigen::VectorXd& cond_values) const {
    std::vector<double> tuple_probs;
    std::vector<Eigen::VectorXd> tuples;
    double denom = 0.0;
    for (Eigen::Index r = 0; r < support_.rows(); ++r) {
        bool match = true;
        for (size_t j = 0; j < cond.size(); ++j) {
            if (support_(r, cond[j]) != cond_values[j]) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        denom += probs_[r];
        Eigen::VectorXd t(out.size());
        for (size_t j = 0; j < out.size(); ++j) t[j] = support_(r, out[j]);
        bool found = false;
        for (size_t k = 0; k < tuples.size(); ++k) {
            if (tuples[k] == t) {
                tuple_probs[k] += probs_[r];
                found = true;
                break;
            }
        }
        if (!found) {
            tuples.push_back(std::move(t));
            tuple_probs.push_back(probs_[r]);
        }
    }
    if (denom <= 0.0)
        throw NumericError("finite model: zero-probability conditioning event");
    OutDistribution d;
    d.values.resize(tuples.size(), out.size());
    d.probs.resize(tuples.size());
    for (size_t k = 0; k < tuples.size(); ++k) {
        d.values.row(k) = tuples[k].transpose();
        d.probs[k] = tuple_probs[k] / denom;
    }
    return d;
}

int distribution_dim(const DistributionModel& dist) {
    return std::visit([](const auto& m) { return m.dim(); }, dist);
}

}  // namespace covshap
