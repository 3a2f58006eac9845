#include "covshap/shapley.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "covshap/common.hpp"
#include "covshap/rng.hpp"
#include "covshap/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covshap {

namespace {

constexpr uint64_t kTagBase = 0xba5e0001ULL;
constexpr uint64_t kTagCoalition = 0xc0a10002ULL;
constexpr uint64_t kTagPerm = 0x9e230003ULL;

// One sampling step: fill `out` conditional on `cond` (current values).
struct Step {
    std::vector<int> out;
    std::vector<int> cond;
};

std::vector<Step> coalition_steps(
    const std::vector<std::pair<std::vector<int>, bool>>& comps, uint64_t mask) {
    std::vector<Step> steps;
    std::vector<int> earlier;
    for (const auto& [members, confounded] : comps) {
        Step s;
        for (int i : members) {
            if (!(mask >> i & 1)) s.out.push_back(i);
        }
        if (!s.out.empty()) {
            s.cond = earlier;
            if (!confounded) {
                for (int i : members) {
                    if (mask >> i & 1) s.cond.push_back(i);
                }
            }
            std::sort(s.cond.begin(), s.cond.end());
            steps.push_back(std::move(s));
        }
        earlier.insert(earlier.end(), members.begin(), members.end());
    }
    return steps;
}

// The chain-sampled completion for a gaussian model is affine in (x_S, z):
//   x_full = C + Tx x + Tz z,   z ~ N(0, I).
// Compiled once per coalition and shared across instances.
struct AffinePlan {
    Eigen::VectorXd C;
    Eigen::MatrixXd Tx;
    Eigen::MatrixXd Tz;
    std::vector<int> out_all;  // out features in sampling order
    int z_total = 0;
};

AffinePlan compile_gaussian(const GaussianModel& g, const std::vector<Step>& steps,
                            uint64_t mask, int d, int* ridge_events) {
    AffinePlan plan;
    plan.C = Eigen::VectorXd::Zero(d);
    plan.Tx = Eigen::MatrixXd::Zero(d, d);
    plan.Tz = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        if (mask >> i & 1) plan.Tx(i, i) = 1.0;
    }
    int zc = 0;
    for (const Step& s : steps) {
        auto cnd = g.conditional(s.out, s.cond, ridge_events);
        const int no = static_cast<int>(s.out.size());
        const int nc = static_cast<int>(s.cond.size());
        Eigen::VectorXd condC(nc);
        Eigen::MatrixXd condTx(nc, d), condTz(nc, d);
        for (int j = 0; j < nc; ++j) {
            condC[j] = plan.C[s.cond[j]];
            condTx.row(j) = plan.Tx.row(s.cond[j]);
            condTz.row(j) = plan.Tz.row(s.cond[j]);
        }
        Eigen::VectorXd newC = cnd.b + cnd.A * condC;
        Eigen::MatrixXd newTx = cnd.A * condTx;
        Eigen::MatrixXd newTz = cnd.A * condTz;
        for (int j = 0; j < no; ++j) {
            int o = s.out[j];
            plan.C[o] = newC[j];
            plan.Tx.row(o) = newTx.row(j);
            plan.Tz.row(o) = newTz.row(j);
            for (int k = 0; k < no; ++k) plan.Tz(o, zc + k) += cnd.L(j, k);
            plan.out_all.push_back(o);
        }
        zc += no;
    }
    plan.z_total = zc;
    return plan;
}

struct ValueEstimate {
    double v = 0.0;
    double se = 0.0;
};

ValueEstimate estimate_from_samples(const Eigen::VectorXd& vals) {
    ValueEstimate e;
    e.v = vals.mean();
    e.se = vals.size() >= 2
               ? sample_sd(vals) / std::sqrt(static_cast<double>(vals.size()))
               : 0.0;
    return e;
}

// Shared evaluation context for one (f, ordering, dist, config) run.
class Engine {
public:
    Engine(const PredictFn& f, const CausalOrdering& ordering,
           const DistributionModel& dist, const ShapleyConfig& config)
        : f_(f), dist_(dist), config_(config),
          comps_(ordering.component_indices()),
          d_(static_cast<int>(ordering.universe().size())) {
        config_.validate();
        if (distribution_dim(dist_) != d_)
            throw ValidationError("shapley: distribution dimension != feature universe size");
        mode_ = config_.mode;
        if (mode_ == ShapleyConfig::Mode::automatic)
            mode_ = d_ <= 16 ? ShapleyConfig::Mode::exact
                             : ShapleyConfig::Mode::permutation;
        if (mode_ == ShapleyConfig::Mode::exact && d_ > 16)
            throw ValidationError(
                "shapley: exact mode limited to 16 features; use permutation mode");
        weights_.resize(d_);
        for (int s = 0; s < d_; ++s) weights_[s] = coalition_weight(s, d_);
        if (mode_ == ShapleyConfig::Mode::exact &&
            std::holds_alternative<GaussianModel>(dist_)) {
            const uint64_t n_masks = 1ULL << d_;
            plans_.resize(n_masks);
            const auto& g = std::get<GaussianModel>(dist_);
            std::atomic<int> ridge{0};
#pragma omp parallel for schedule(dynamic, 64)
            for (int64_t mask = 0; mask < static_cast<int64_t>(n_masks); ++mask) {
                int local = 0;
                plans_[mask] = compile_gaussian(
                    g, coalition_steps(comps_, static_cast<uint64_t>(mask)),
                    static_cast<uint64_t>(mask), d_, &local);
                if (local) ridge += local;
            }
            ridge_events_ += ridge.load();
        }
    }

    int dim() const { return d_; }
    uint64_t full_mask() const { return (d_ >= 64) ? ~0ULL : ((1ULL << d_) - 1); }
    ShapleyConfig::Mode mode() const { return mode_; }
    int setup_ridge_events() const { return ridge_events_; }
    bool exact_summation() const {
        return std::holds_alternative<FiniteModel>(dist_);
    }

    double predict_one(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out;
        f_(x.transpose(), out);
        return out[0];
    }

    // v(S) for one instance. The RNG stream is keyed by (seed, instance,
    // mask); the shared empty coalition uses the instance-independent base
    // stream so all rows see the same v(empty).
    ValueEstimate eval(const Eigen::VectorXd& x, uint64_t mask, int instance,
                       int* ridge_events) const {
        if (mask == full_mask()) return {predict_one(x), 0.0};
        auto gen = (mask == 0) ? make_stream(config_.seed, kTagBase)
                               : make_stream(config_.seed, kTagCoalition,
                                             static_cast<uint64_t>(instance), mask);
        if (std::holds_alternative<FiniteModel>(dist_)) return eval_finite(x, mask);
        if (std::holds_alternative<GaussianModel>(dist_))
            return eval_gaussian(x, mask, gen, ridge_events);
        return eval_empirical(x, mask, gen, ridge_events);
    }

    ShapleyResult explain_one(const Eigen::VectorXd& x, int instance,
                              ValueEstimate base) const {
        if (x.size() != d_) throw ValidationError("shapley: instance arity mismatch");
        ShapleyResult res;
        res.phi = Eigen::VectorXd::Zero(d_);
        res.base_value = base.v;
        res.prediction = predict_one(x);
        int ridge = 0;

        if (mode_ == ShapleyConfig::Mode::exact) {
            const uint64_t n_masks = 1ULL << d_;
            std::vector<double> v(n_masks);
            v[0] = base.v;
            v[n_masks - 1] = res.prediction;
            for (uint64_t mask = 1; mask + 1 < n_masks; ++mask)
                v[mask] = eval(x, mask, instance, &ridge).v;
            for (int i = 0; i < d_; ++i) {
                const uint64_t bit = 1ULL << i;
                double phi = 0.0;
                for (uint64_t mask = 0; mask < n_masks; ++mask) {
                    if (mask & bit) continue;
                    phi += weights_[std::popcount(mask)] * (v[mask | bit] - v[mask]);
                }
                res.phi[i] = phi;
            }
        } else {
            std::unordered_map<uint64_t, double> cache;
            cache.emplace(0, base.v);
            cache.emplace(full_mask(), res.prediction);
            auto value_of = [&](uint64_t mask) {
                auto it = cache.find(mask);
                if (it != cache.end()) return it->second;
                double v = eval(x, mask, instance, &ridge).v;
                cache.emplace(mask, v);
                return v;
            };
            auto pgen = make_stream(config_.seed, kTagPerm, static_cast<uint64_t>(instance));
            std::vector<int> perm(d_);
            for (int p = 0; p < config_.n_permutations; ++p) {
                for (int i = 0; i < d_; ++i) perm[i] = i;
                for (int i = d_ - 1; i > 0; --i) {
                    int j = static_cast<int>(pgen() % static_cast<uint64_t>(i + 1));
                    std::swap(perm[i], perm[j]);
                }
                uint64_t mask = 0;
                for (int i : perm) {
                    double before = value_of(mask);
                    mask |= 1ULL << i;
                    res.phi[i] += value_of(mask) - before;
                }
            }
            res.phi /= static_cast<double>(config_.n_permutations);
        }

        res.efficiency_residual =
            std::fabs(res.phi.sum() - (res.prediction - res.base_value));
        res.sigma_mc = base.se;
        res.ridge_events = ridge;
        return res;
    }

private:
    ValueEstimate eval_gaussian(const Eigen::VectorXd& x, uint64_t mask,
                                std::mt19937_64& gen, int* ridge_events) const {
        const auto& g = std::get<GaussianModel>(dist_);
        const AffinePlan* plan = nullptr;
        AffinePlan local;
        if (!plans_.empty()) {
            plan = &plans_[mask];
        } else {
            local = compile_gaussian(g, coalition_steps(comps_, mask), mask, d_,
                                     ridge_events);
            plan = &local;
        }
        const int n = config_.n_mc;
        Eigen::VectorXd mean = plan->C + plan->Tx * x;
        Eigen::MatrixXd samples = x.transpose().replicate(n, 1);
        if (plan->z_total > 0) {
            Eigen::MatrixXd Z(n, plan->z_total);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < plan->z_total; ++c) Z(r, c) = rnorm(gen);
            for (int o : plan->out_all) {
                samples.col(o) =
                    Eigen::VectorXd::Constant(n, mean[o]) +
                    Z * plan->Tz.row(o).head(plan->z_total).transpose();
            }
        }
        Eigen::VectorXd vals;
        f_(samples, vals);
        return estimate_from_samples(vals);
    }

    ValueEstimate eval_empirical(const Eigen::VectorXd& x, uint64_t mask,
                                 std::mt19937_64& gen, int* ridge_events) const {
        const auto& emp = std::get<EmpiricalModel>(dist_);
        const auto steps = coalition_steps(comps_, mask);
        const int n = config_.n_mc;
        Eigen::MatrixXd samples(n, d_);
        Eigen::VectorXd a(d_);
        for (int t = 0; t < n; ++t) {
            a = x;
            for (const Step& s : steps) {
                Eigen::VectorXd cv(s.cond.size());
                for (size_t j = 0; j < s.cond.size(); ++j) cv[j] = a[s.cond[j]];
                int row = emp.draw_row(s.cond, cv, gen, ridge_events);
                for (int o : s.out) a[o] = emp.reference()(row, o);
            }
            samples.row(t) = a.transpose();
        }
        Eigen::VectorXd vals;
        f_(samples, vals);
        return estimate_from_samples(vals);
    }

    // Full enumeration over the finite support; exact, no RNG.
    ValueEstimate eval_finite(const Eigen::VectorXd& x, uint64_t mask) const {
        const auto& fin = std::get<FiniteModel>(dist_);
        const auto steps = coalition_steps(comps_, mask);
        std::vector<std::pair<double, Eigen::VectorXd>> partials;
        partials.emplace_back(1.0, x);
        for (const Step& s : steps) {
            std::vector<std::pair<double, Eigen::VectorXd>> next;
            for (const auto& [w, a] : partials) {
                Eigen::VectorXd cv(s.cond.size());
                for (size_t j = 0; j < s.cond.size(); ++j) cv[j] = a[s.cond[j]];
                auto od = fin.conditional(s.out, s.cond, cv);
                for (Eigen::Index k = 0; k < od.probs.size(); ++k) {
                    Eigen::VectorXd a2 = a;
                    for (size_t j = 0; j < s.out.size(); ++j)
                        a2[s.out[j]] = od.values(k, static_cast<int>(j));
                    next.emplace_back(w * od.probs[k], std::move(a2));
                }
            }
            partials = std::move(next);
        }
        Eigen::MatrixXd completions(partials.size(), d_);
        for (size_t i = 0; i < partials.size(); ++i)
            completions.row(i) = partials[i].second.transpose();
        Eigen::VectorXd vals;
        f_(completions, vals);
        double v = 0.0;
        for (size_t i = 0; i < partials.size(); ++i) v += partials[i].first * vals[i];
        return {v, 0.0};
    }

    const PredictFn& f_;
    const DistributionModel& dist_;
    ShapleyConfig config_;
    std::vector<std::pair<std::vector<int>, bool>> comps_;
    int d_;
    ShapleyConfig::Mode mode_;
    std::vector<double> weights_;
    std::vector<AffinePlan> plans_;
    int ridge_events_ = 0;
};

uint64_t mask_of(const std::vector<int>& S, int d) {
    uint64_t mask = 0;
    for (int i : S) {
        if (i < 0 || i >= d) throw ValidationError("coalition index out of range");
        if (mask >> i & 1) throw ValidationError("coalition has duplicate indices");
        mask |= 1ULL << i;
    }
    return mask;
}

}  // namespace

void ShapleyConfig::validate() const {
    if (n_mc < 1) throw ValidationError("shapley config: n_mc must be >= 1");
    if (n_permutations < 1)
        throw ValidationError("shapley config: n_permutations must be >= 1");
}

double coalition_weight(int s, int d) {
    if (d < 1 || s < 0 || s >= d)
        throw ValidationError("coalition_weight: require 0 <= s <= d-1");
    return std::exp(std::lgamma(s + 1.0) + std::lgamma(d - s + 0.0) -
                    std::lgamma(d + 1.0));
}

Eigen::MatrixXd sample_interventional(const Eigen::VectorXd& x,
                                      const std::vector<int>& S,
                                      const CausalOrdering& ordering,
                                      const DistributionModel& dist, int n,
                                      uint64_t seed, int* ridge_events) {
    const int d = static_cast<int>(ordering.universe().size());
    if (x.size() != d) throw ValidationError("sample_interventional: arity mismatch");
    if (distribution_dim(dist) != d)
        throw ValidationError("sample_interventional: distribution dimension mismatch");
    if (n < 1) throw ValidationError("sample_interventional: n must be >= 1");
    const uint64_t mask = mask_of(S, d);
    const auto comps = ordering.component_indices();
    const auto steps = coalition_steps(comps, mask);
    auto gen = make_stream(seed, kTagCoalition, 0, mask);

    Eigen::MatrixXd samples = x.transpose().replicate(n, 1);
    if (steps.empty()) return samples;

    if (std::holds_alternative<GaussianModel>(dist)) {
        const auto& g = std::get<GaussianModel>(dist);
        AffinePlan plan = compile_gaussian(g, steps, mask, d, ridge_events);
        Eigen::VectorXd mean = plan.C + plan.Tx * x;
        Eigen::MatrixXd Z(n, plan.z_total);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < plan.z_total; ++c) Z(r, c) = rnorm(gen);
        for (int o : plan.out_all)
            samples.col(o) = Eigen::VectorXd::Constant(n, mean[o]) +
                             Z * plan.Tz.row(o).head(plan.z_total).transpose();
        return samples;
    }
    if (std::holds_alternative<EmpiricalModel>(dist)) {
        const auto& emp = std::get<EmpiricalModel>(dist);
        Eigen::VectorXd a(d);
        for (int t = 0; t < n; ++t) {
            a = x;
            for (const Step& s : steps) {
                Eigen::VectorXd cv(s.cond.size());
                for (size_t j = 0; j < s.cond.size(); ++j) cv[j] = a[s.cond[j]];
                int row = emp.draw_row(s.cond, cv, gen, ridge_events);
                for (int o : s.out) a[o] = emp.reference()(row, o);
            }
            samples.row(t) = a.transpose();
        }
        return samples;
    }
    const auto& fin = std::get<FiniteModel>(dist);
    Eigen::VectorXd a(d);
    for (int t = 0; t < n; ++t) {
        a = x;
        for (const Step& s : steps) {
            Eigen::VectorXd cv(s.cond.size());
            for (size_t j = 0; j < s.cond.size(); ++j) cv[j] = a[s.cond[j]];
            auto od = fin.conditional(s.out, s.cond, cv);
            double u = runif(gen);
            double acc = 0.0;
            Eigen::Index pick = od.probs.size() - 1;
            for (Eigen::Index k = 0; k < od.probs.size(); ++k) {
                acc += od.probs[k];
                if (u < acc) {
                    pick = k;
                    break;
                }
            }
            for (size_t j = 0; j < s.out.size(); ++j)
                a[s.out[j]] = od.values(pick, static_cast<int>(j));
        }
        samples.row(t) = a.transpose();
    }
    return samples;
}

double char_value(const PredictFn& f, const Eigen::VectorXd& x,
                  const std::vector<int>& S, const CausalOrdering& ordering,
                  const DistributionModel& dist, const ShapleyConfig& config) {
    Engine engine(f, ordering, dist,
                  [&] {
                      // avoid the full exact-mode plan table for one value
                      ShapleyConfig c = config;
                      if (c.mode == ShapleyConfig::Mode::automatic)
                          c.mode = ShapleyConfig::Mode::permutation;
                      return c;
                  }());
    int ridge = 0;
    return engine.eval(x, mask_of(S, engine.dim()), 0, &ridge).v;
}

ShapleyResult shapley_values(const PredictFn& f, const Eigen::VectorXd& x,
                             const CausalOrdering& ordering,
                             const DistributionModel& dist,
                             const ShapleyConfig& config) {
    Engine engine(f, ordering, dist, config);
    int ridge = 0;
    ValueEstimate base = engine.eval(x, 0, 0, &ridge);
    ShapleyResult res = engine.explain_one(x, 0, base);
    res.ridge_events += ridge + engine.setup_ridge_events();
    return res;
}

ShapleyMatrix explain_dataset(const PredictFn& f, const Eigen::MatrixXd& X,
                              const CausalOrdering& ordering,
                              const DistributionModel& dist,
                              const ShapleyConfig& config, int n_threads) {
    if (X.rows() == 0) throw ValidationError("explain_dataset: empty instance set");
    Engine engine(f, ordering, dist, config);
    const int n = static_cast<int>(X.rows());
    const int d = engine.dim();
    if (X.cols() != d) throw ValidationError("explain_dataset: instance arity mismatch");

    ShapleyMatrix m;
    m.values.resize(n, d);
    m.instance_predictions.resize(n);
    m.efficiency_residuals.resize(n);
    m.n_mc = config.n_mc;

    int base_ridge = 0;
    ValueEstimate base = engine.eval(X.row(0).transpose(), 0, 0, &base_ridge);
    m.base_value = base.v;
    m.base_se = base.se;
    m.efficiency_tol = 4.0 * base.se + 1e-9;

    std::atomic<int> ridge{engine.setup_ridge_events() + base_ridge};
#ifdef _OPENMP
    int threads = n_threads > 0 ? n_threads : omp_get_max_threads();
#else
    int threads = 1;
    (void)n_threads;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int r = 0; r < n; ++r) {
        ShapleyResult res = engine.explain_one(X.row(r).transpose(), r, base);
        m.values.row(r) = res.phi.transpose();
        m.instance_predictions[r] = res.prediction;
        m.efficiency_residuals[r] = res.efficiency_residual;
        if (res.ridge_events) ridge += res.ridge_events;
    }
    m.ridge_events = ridge.load();
    return m;
}

}  // namespace covshap
