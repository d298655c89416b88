#include "vfdet/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "vfdet/errors.hpp"
#include "vfdet/parallel.hpp"
#include "vfdet/rng.hpp"

namespace vfdet {

double rbf_kernel(std::span<const double> x, std::span<const double> x2, double gamma) {
    if (x.size() != x2.size())
        throw InputError("rbf_kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(x2.size()) + ")");
    if (gamma < 0.0) throw InputError("rbf_kernel: gamma must be >= 0");
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - x2[i];
        d += diff * diff;
    }
    return std::exp(-gamma * d);
}

namespace {

constexpr double kTau = 1e-12;
constexpr std::uint64_t kMaxIterations = 10'000'000;

// Minimizes 1/2 a'Qa - e'a subject to y'a = 0, 0 <= a <= C, where
// Q_ij = y_i y_j K(x_i, x_j). Kernel rows are kept in an LRU cache.
class SmoSolver {
public:
    SmoSolver(const Dataset& data, const SvmTrainConfig& cfg)
        : data_(data), c_(cfg.c), gamma_(cfg.gamma), tol_(cfg.tolerance), n_(data.n_rows) {
        const std::size_t row_bytes = n_ * sizeof(double);
        max_rows_ = std::max<std::size_t>(2, cfg.cache_mb * 1024 * 1024 / row_bytes);
        y_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) y_[i] = static_cast<signed char>(data.labels[i]);
        alpha_.assign(n_, 0.0);
        grad_.assign(n_, -1.0);
        qd_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) qd_[i] = rbf_kernel(data.row(i), data.row(i), gamma_);
    }

    void solve() {
        std::uint64_t iterations = 0;
        std::size_t i = 0, j = 0;
        double violation = 0.0;
        while (select_working_set(i, j, violation)) {
            if (++iterations > kMaxIterations)
                throw InternalError("svm training did not converge within " +
                                    std::to_string(kMaxIterations) +
                                    " iterations; max KKT violation " + std::to_string(violation));
            update_pair(i, j);
        }
    }

    SvmModel extract_model(std::vector<double>* alphas_out) const {
        SvmModel model;
        model.dim = data_.n_cols;
        model.gamma = gamma_;
        model.c = c_;
        model.bias = -compute_rho();
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] <= 0.0) continue;
            const auto r = data_.row(i);
            model.support_vectors.insert(model.support_vectors.end(), r.begin(), r.end());
            model.dual_coefficients.push_back(alpha_[i] * y_[i]);
            ++model.n_sv;
        }
        if (alphas_out) *alphas_out = alpha_;
        return model;
    }

private:
    const std::vector<double>& row(std::size_t i) {
        auto it = cache_.find(i);
        if (it != cache_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.first);
            return it->second.second;
        }
        std::vector<double> q(n_);
        const auto xi = data_.row(i);
        for (std::size_t t = 0; t < n_; ++t)
            q[t] = y_[i] * y_[t] * rbf_kernel(xi, data_.row(t), gamma_);
        lru_.push_front(i);
        auto& slot = cache_[i];
        slot.first = lru_.begin();
        slot.second = std::move(q);
        while (cache_.size() > max_rows_) {
            cache_.erase(lru_.back());
            lru_.pop_back();
        }
        return cache_[i].second;
    }

    bool select_working_set(std::size_t& out_i, std::size_t& out_j, double& violation) {
        constexpr double kInf = std::numeric_limits<double>::infinity();
        double gmax = -kInf, gmax2 = -kInf;
        std::ptrdiff_t gmax_idx = -1, gmin_idx = -1;

        for (std::size_t t = 0; t < n_; ++t) {
            if (y_[t] == +1 ? alpha_[t] < c_ : alpha_[t] > 0.0) {
                const double v = -y_[t] * grad_[t];
                if (v >= gmax) {
                    gmax = v;
                    gmax_idx = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
        if (gmax_idx < 0) return false;
        const auto i = static_cast<std::size_t>(gmax_idx);
        const auto& q_i = row(i);

        double obj_min = kInf;
        for (std::size_t t = 0; t < n_; ++t) {
            if (y_[t] == +1 ? alpha_[t] <= 0.0 : alpha_[t] >= c_) continue;
            const double yg = y_[t] * grad_[t];
            if (yg >= gmax2) gmax2 = yg;
            const double grad_diff = gmax + yg;
            if (grad_diff <= 0.0) continue;
            // Curvature along the (i, t) direction: K_ii + K_tt - 2 K_it.
            const double quad = qd_[i] + qd_[t] - 2.0 * y_[i] * y_[t] * q_i[t];
            const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
            if (obj <= obj_min) {
                obj_min = obj;
                gmin_idx = static_cast<std::ptrdiff_t>(t);
            }
        }

        violation = gmax + gmax2;
        if (violation < tol_ || gmin_idx < 0) return false;
        out_i = i;
        out_j = static_cast<std::size_t>(gmin_idx);
        return true;
    }

    void update_pair(std::size_t i, std::size_t j) {
        const auto& q_i = row(i);
        const auto& q_j = row(j);
        const double old_ai = alpha_[i], old_aj = alpha_[j];

        if (y_[i] != y_[j]) {
            double quad = qd_[i] + qd_[j] + 2.0 * q_i[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = alpha_[i] - alpha_[j];
            alpha_[i] += delta;
            alpha_[j] += delta;
            if (diff > 0.0) {
                if (alpha_[j] < 0.0) {
                    alpha_[j] = 0.0;
                    alpha_[i] = diff;
                }
            } else if (alpha_[i] < 0.0) {
                alpha_[i] = 0.0;
                alpha_[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha_[i] > c_) {
                    alpha_[i] = c_;
                    alpha_[j] = c_ - diff;
                }
            } else if (alpha_[j] > c_) {
                alpha_[j] = c_;
                alpha_[i] = c_ + diff;
            }
        } else {
            double quad = qd_[i] + qd_[j] - 2.0 * q_i[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = alpha_[i] + alpha_[j];
            alpha_[i] -= delta;
            alpha_[j] += delta;
            if (sum > c_) {
                if (alpha_[i] > c_) {
                    alpha_[i] = c_;
                    alpha_[j] = sum - c_;
                }
            } else if (alpha_[j] < 0.0) {
                alpha_[j] = 0.0;
                alpha_[i] = sum;
            }
            if (sum > c_) {
                if (alpha_[j] > c_) {
                    alpha_[j] = c_;
                    alpha_[i] = sum - c_;
                }
            } else if (alpha_[i] < 0.0) {
                alpha_[i] = 0.0;
                alpha_[j] = sum;
            }
        }

        const double di = alpha_[i] - old_ai;
        const double dj = alpha_[j] - old_aj;
        for (std::size_t t = 0; t < n_; ++t) grad_[t] += q_i[t] * di + q_j[t] * dj;
    }

    double compute_rho() const {
        double upper = std::numeric_limits<double>::infinity();
        double lower = -upper;
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            const double yg = y_[t] * grad_[t];
            if (alpha_[t] >= c_) {
                if (y_[t] == -1)
                    upper = std::min(upper, yg);
                else
                    lower = std::max(lower, yg);
            } else if (alpha_[t] <= 0.0) {
                if (y_[t] == +1)
                    upper = std::min(upper, yg);
                else
                    lower = std::max(lower, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        return n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (upper + lower);
    }

    const Dataset& data_;
    double c_, gamma_, tol_;
    std::size_t n_;
    std::vector<signed char> y_;
    std::vector<double> alpha_, grad_, qd_;

    std::size_t max_rows_;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t,
                       std::pair<std::list<std::size_t>::iterator, std::vector<double>>>
        cache_;
};

}  // namespace

SvmModel train_svm(const Dataset& data, const SvmTrainConfig& cfg,
                   std::vector<double>* alphas_out) {
    if (data.n_rows == 0 || data.n_cols == 0) throw InputError("train_svm: empty dataset");
    if (!(cfg.c > 0.0)) throw InputError("train_svm: C must be > 0");
    if (cfg.gamma < 0.0) throw InputError("train_svm: gamma must be >= 0");
    std::size_t pos = 0;
    for (int y : data.labels) {
        if (y != +1 && y != -1) throw InputError("train_svm: labels must be +1 or -1");
        pos += y == +1;
    }
    if (pos == 0 || pos == data.n_rows)
        throw InputError("train_svm: both classes must be present");

    SmoSolver solver(data, cfg);
    solver.solve();
    return solver.extract_model(alphas_out);
}

SvmPrediction predict(const SvmModel& model, std::span<const double> x) {
    std::vector<double> masked;
    if (x.size() != model.dim) {
        if (!model.mask.is_identity() && x.size() == model.mask.full_dim) {
            masked = model.mask.apply(x);
            x = masked;
        } else {
            throw InputError("predict: input has dimension " + std::to_string(x.size()) +
                             ", model expects " + std::to_string(model.dim));
        }
    }
    double decision = model.bias;
    for (std::size_t i = 0; i < model.n_sv; ++i)
        decision += model.dual_coefficients[i] * rbf_kernel(model.support_vector(i), x, model.gamma);
    return {decision >= 0.0 ? +1 : -1, decision};
}

double dual_objective(const Dataset& data, std::span<const double> alphas, double gamma) {
    if (alphas.size() != data.n_rows)
        throw InputError("dual_objective: alpha count does not match dataset");
    double obj = 0.0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        if (alphas[i] == 0.0) continue;
        for (std::size_t j = 0; j < data.n_rows; ++j) {
            if (alphas[j] == 0.0) continue;
            obj += 0.5 * alphas[i] * alphas[j] * data.labels[i] * data.labels[j] *
                   rbf_kernel(data.row(i), data.row(j), gamma);
        }
        obj -= alphas[i];
    }
    return obj;
}

GridSearchResult grid_search(const Dataset& train, const Dataset& validation,
                             const GridSearchSpec& spec) {
    if (spec.c_values.empty() || spec.gamma_values.empty())
        throw InputError("grid_search: empty grid");
    for (double v : spec.c_values)
        if (!(v > 0.0)) throw InputError("grid_search: C values must be > 0");
    for (double v : spec.gamma_values)
        if (!(v > 0.0)) throw InputError("grid_search: gamma values must be > 0");
    if (validation.n_rows == 0) throw InputError("grid_search: empty validation set");

    GridSearchResult result;
    result.points.resize(spec.c_values.size() * spec.gamma_values.size());

    parallel_for(result.points.size(), spec.jobs, [&](std::size_t p) {
        GridPointReport& report = result.points[p];
        report.c = spec.c_values[p / spec.gamma_values.size()];
        report.gamma = spec.gamma_values[p % spec.gamma_values.size()];

        SvmTrainConfig cfg;
        cfg.c = report.c;
        cfg.gamma = report.gamma;
        cfg.tolerance = spec.tolerance;
        cfg.cache_mb = spec.cache_mb;
        const SvmModel model = train_svm(train, cfg);

        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < validation.n_rows; ++i) {
            const int predicted = predict(model, validation.row(i)).label;
            if (validation.labels[i] == +1)
                (predicted == +1 ? tp : fn) += 1;
            else
                (predicted == -1 ? tn : fp) += 1;
        }
        report.sensitivity = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        report.specificity = tn + fp ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0;
        report.accuracy = static_cast<double>(tp + tn) / static_cast<double>(validation.n_rows);
        report.g_mean = std::sqrt(report.sensitivity * report.specificity);
        report.objective_value =
            spec.objective == GridObjective::GMean ? report.g_mean : report.accuracy;
    });

    std::size_t best = 0;
    for (std::size_t p = 1; p < result.points.size(); ++p)
        if (result.points[p].objective_value > result.points[best].objective_value) best = p;
    result.best_c = result.points[best].c;
    result.best_gamma = result.points[best].gamma;
    return result;
}

TrainValidationSplit subsample_split(std::span<const int> labels, std::size_t n_vf,
                                     std::size_t n_not_vf, std::uint64_t seed) {
    std::vector<std::size_t> vf, not_vf;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == +1 ? vf : not_vf).push_back(i);
    if (vf.size() < 2 || not_vf.size() < 2)
        throw InputError("subsample_split: need at least 2 samples of each class");

    TrainValidationSplit split;
    auto deal = [&](std::vector<std::size_t>& pool, std::size_t want, std::uint64_t stream) {
        Rng rng(mix_seed(seed, stream));
        rng.shuffle(pool);
        const std::size_t take = std::min(want, pool.size() - 1);
        split.train_indices.insert(split.train_indices.end(), pool.begin(),
                                   pool.begin() + static_cast<std::ptrdiff_t>(take));
        split.validation_indices.insert(split.validation_indices.end(),
                                        pool.begin() + static_cast<std::ptrdiff_t>(take),
                                        pool.end());
    };
    deal(vf, n_vf, 1);
    deal(not_vf, n_not_vf, 2);
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.validation_indices.begin(), split.validation_indices.end());
    return split;
}

}  // namespace vfdet
