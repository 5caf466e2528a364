#include "lapse/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <unordered_map>

#include "lapse/error.hpp"
#include "lapse/neighbors.hpp"
#include "lapse/random.hpp"

namespace lapse {

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) { sum += a[i] * b[i]; }
    return sum;
}

double resolved_gamma(const KernelSpec& kernel, std::size_t dim)
{
    return kernel.gamma.value_or(1.0 / static_cast<double>(std::max<std::size_t>(dim, 1)));
}

double kernel_unchecked(KernelKind kind, double gamma, std::span<const double> a, std::span<const double> b)
{
    if (kind == KernelKind::linear) { return dot(a, b); }
    return std::exp(-gamma * squared_distance(a, b));
}

/// Nonzero entries of each row plus its squared norm. One-hot design
/// matrices are almost entirely zeros, so kernel values are computed from
/// these lists against a dense copy of the other argument.
struct SparseRows {
    std::vector<std::size_t> start;  // rows + 1 offsets into cols/values
    std::vector<std::size_t> cols;
    std::vector<double> values;
    std::vector<double> norm2;

    explicit SparseRows(const Matrix& x)
    {
        start.reserve(x.rows() + 1);
        start.push_back(0);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            double n2 = 0.0;
            auto row = x.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (row[c] != 0.0) {
                    cols.push_back(c);
                    values.push_back(row[c]);
                    n2 += row[c] * row[c];
                }
            }
            start.push_back(cols.size());
            norm2.push_back(n2);
        }
    }

    [[nodiscard]] double dot_dense(std::size_t r, std::span<const double> dense) const noexcept
    {
        double sum = 0.0;
        for (std::size_t t = start[r]; t < start[r + 1]; ++t) { sum += values[t] * dense[cols[t]]; }
        return sum;
    }

    [[nodiscard]] double kernel(KernelKind kind, double gamma, std::size_t r, std::span<const double> dense,
                                double dense_norm2) const noexcept
    {
        const double d = dot_dense(r, dense);
        if (kind == KernelKind::linear) { return d; }
        return std::exp(-gamma * std::max(0.0, norm2[r] + dense_norm2 - 2.0 * d));
    }
};

/// LRU cache of full kernel rows K(i, .) over the training set.
class KernelCache {
public:
    KernelCache(const Matrix& x, KernelKind kind, double gamma, std::size_t budget_mb)
        : x_(x), sparse_(x), kind_(kind), gamma_(gamma)
    {
        const std::size_t row_bytes = std::max<std::size_t>(x.rows(), 1) * sizeof(double);
        capacity_ = std::max<std::size_t>(2, budget_mb * 1024 * 1024 / row_bytes);
    }

    std::span<const double> row(std::size_t i)
    {
        if (auto it = index_.find(i); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->values;
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().row);
            lru_.pop_back();
        }
        Entry entry{i, std::vector<double>(x_.rows())};
        auto xi = x_.row(i);
        for (std::size_t j = 0; j < x_.rows(); ++j) {
            entry.values[j] = sparse_.kernel(kind_, gamma_, j, xi, sparse_.norm2[i]);
        }
        lru_.push_front(std::move(entry));
        index_[i] = lru_.begin();
        return lru_.front().values;
    }

private:
    struct Entry {
        std::size_t row;
        std::vector<double> values;
    };
    const Matrix& x_;
    SparseRows sparse_;
    KernelKind kind_;
    double gamma_;
    std::size_t capacity_;
    std::list<Entry> lru_;
    std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

} // namespace

std::string_view to_string(KernelKind kind) noexcept
{
    return kind == KernelKind::linear ? "linear" : "rbf";
}

KernelKind parse_kernel(std::string_view text)
{
    if (text == "linear") { return KernelKind::linear; }
    if (text == "rbf") { return KernelKind::rbf; }
    fail(ErrorKind::parameter, "unknown kernel '" + std::string(text) + "'");
}

double kernel_eval(const KernelSpec& kernel, std::span<const double> a, std::span<const double> b)
{
    require(a.size() == b.size(), ErrorKind::shape,
            "kernel arguments have dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    return kernel_unchecked(kernel.kind, resolved_gamma(kernel, a.size()), a, b);
}

void validate(const SvrSpec& spec)
{
    require(spec.C > 0.0, ErrorKind::parameter, "SVR C must be positive");
    require(spec.epsilon >= 0.0, ErrorKind::parameter, "SVR epsilon must be non-negative");
    require(spec.tol > 0.0, ErrorKind::parameter, "SVR tol must be positive");
    require(spec.max_passes >= 1, ErrorKind::parameter, "SVR max_passes must be at least 1");
    require(!spec.kernel.gamma || *spec.kernel.gamma > 0.0, ErrorKind::parameter, "RBF gamma must be positive");
    require(!spec.max_train_rows || *spec.max_train_rows >= 2, ErrorKind::parameter,
            "SVR max_train_rows must be at least 2");
}

SvrModel::SvrModel(KernelSpec kernel, Matrix support_vectors, std::vector<double> coefficients, double bias,
                   std::size_t n_features, SvrFitInfo info)
    : kernel_(kernel), support_vectors_(std::move(support_vectors)), coefficients_(std::move(coefficients)),
      bias_(bias), n_features_(n_features), info_(std::move(info))
{
    require(support_vectors_.rows() == coefficients_.size(), ErrorKind::shape,
            "support vector count does not match coefficient count");
    require(support_vectors_.rows() == 0 || support_vectors_.cols() == n_features_, ErrorKind::shape,
            "support vector width does not match feature count");
    if (!kernel_.gamma && kernel_.kind == KernelKind::rbf) { kernel_.gamma = resolved_gamma(kernel_, n_features_); }
}

double SvrModel::predict_one(std::span<const double> query) const
{
    const double gamma = kernel_.gamma.value_or(0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        sum += coefficients_[i] * kernel_unchecked(kernel_.kind, gamma, support_vectors_.row(i), query);
    }
    return sum + bias_;
}

std::vector<double> SvrModel::predict(const Matrix& queries) const
{
    require(queries.cols() == n_features_, ErrorKind::shape,
            "query width " + std::to_string(queries.cols()) + " does not match SVR width " +
                std::to_string(n_features_));
    std::vector<double> out(queries.rows());
    if (kernel_.kind == KernelKind::linear) {
        const auto w = primal_weights();
        for (std::size_t r = 0; r < queries.rows(); ++r) { out[r] = dot(w, queries.row(r)) + bias_; }
        return out;
    }
    const SparseRows sv(support_vectors_);
    const double gamma = kernel_.gamma.value_or(0.0);
    for (std::size_t r = 0; r < queries.rows(); ++r) {
        auto q = queries.row(r);
        const double q2 = dot(q, q);
        double sum = 0.0;
        for (std::size_t i = 0; i < coefficients_.size(); ++i) {
            sum += coefficients_[i] * sv.kernel(kernel_.kind, gamma, i, q, q2);
        }
        out[r] = sum + bias_;
    }
    return out;
}

std::vector<double> SvrModel::primal_weights() const
{
    require(kernel_.kind == KernelKind::linear, ErrorKind::parameter, "primal weights exist only for linear kernels");
    std::vector<double> w(n_features_, 0.0);
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        auto sv = support_vectors_.row(i);
        for (std::size_t j = 0; j < n_features_; ++j) { w[j] += coefficients_[i] * sv[j]; }
    }
    return w;
}

SvrModel svr_fit(const SvrSpec& spec, const Matrix& train, std::span<const double> targets)
{
    validate(spec);
    require(train.rows() == targets.size(), ErrorKind::shape, "SVR training rows and targets differ in length");
    require(train.rows() >= 2, ErrorKind::insufficient_data, "SVR needs at least 2 training rows");

    Matrix x_sub;
    std::vector<double> y_sub;
    const Matrix* x = &train;
    std::span<const double> y = targets;
    if (spec.max_train_rows && train.rows() > *spec.max_train_rows) {
        std::vector<std::size_t> rows(train.rows());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        Rng rng(spec.subsample_seed);
        shuffle(std::span<std::size_t>(rows), rng);
        rows.resize(*spec.max_train_rows);
        std::sort(rows.begin(), rows.end());
        x_sub = train.select_rows(rows);
        y_sub = select(targets, rows);
        x = &x_sub;
        y = y_sub;
    }

    const std::size_t n = x->rows();
    const std::size_t l = 2 * n;
    const double C = spec.C;
    const double gamma = resolved_gamma(spec.kernel, x->cols());
    KernelCache cache(*x, spec.kernel.kind, gamma, spec.cache_mb);

    // Variable t < n is alpha_t (sign +1), t >= n is alpha*_{t-n} (sign -1).
    auto sign = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
    std::vector<double> alpha(l, 0.0);
    std::vector<double> p(l);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = spec.epsilon - y[i];
        p[i + n] = spec.epsilon + y[i];
        diag[i] = spec.kernel.kind == KernelKind::linear ? dot(x->row(i), x->row(i)) : 1.0;
    }
    std::vector<double> grad = p;  // gradient of 0.5 a'Qa + p'a at a = 0

    auto in_up = [&](std::size_t t) { return sign(t) > 0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return sign(t) > 0 ? alpha[t] > 0.0 : alpha[t] < C; };
    auto dual_objective = [&] {
        double f = 0.0;
        for (std::size_t t = 0; t < l; ++t) { f += alpha[t] * (grad[t] + p[t]); }
        return -0.5 * f;
    };

    SvrFitInfo info;
    info.train_rows = n;
    const std::size_t max_iterations = spec.max_passes * n;
    constexpr double tau = 1e-12;

    while (true) {
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        std::size_t i = l;
        std::size_t j = l;
        for (std::size_t t = 0; t < l; ++t) {
            const double v = -sign(t) * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        info.violation = (i == l || j == l) ? 0.0 : g_max - g_min;
        if (i == l || j == l || info.violation < spec.tol) {
            info.converged = true;
            break;
        }
        if (info.iterations >= max_iterations) { break; }
        ++info.iterations;

        const double si = sign(i);
        const double sj = sign(j);
        const std::size_t ri = i % n;
        const std::size_t rj = j % n;
        const auto k_i = cache.row(ri);
        const double k_ij = k_i[rj];
        const double old_i = alpha[i];
        const double old_j = alpha[j];

        // Q = s s' K, so the curvature along the pair direction is
        // K_ii + K_jj - 2 K_ij whatever the signs.
        double quad = diag[ri] + diag[rj] - 2.0 * k_ij;
        if (quad <= 0.0) { quad = tau; }
        if (si != sj) {
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double d_i = alpha[i] - old_i;
        const double d_j = alpha[j] - old_j;
        const auto row_i = cache.row(ri);
        const auto row_j = cache.row(rj);
        for (std::size_t t = 0; t < l; ++t) {
            const std::size_t r = t % n;
            const double st = sign(t);
            grad[t] += st * (si * row_i[r] * d_i + sj * row_j[r] * d_j);
        }
        if (spec.record_objective) { info.dual_objective.push_back(dual_objective()); }
    }

    // Intercept: mean of -y G over free variables, else the midpoint of the
    // feasible interval.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double v = -sign(t) * grad[t];
        const bool at_upper = alpha[t] >= C;
        const bool at_lower = alpha[t] <= 0.0;
        if (!at_upper && !at_lower) {
            free_sum += v;
            ++free_count;
        } else if ((at_lower && sign(t) > 0) || (at_upper && sign(t) < 0)) {
            // may only rise: bias is at least v
            lower = std::max(lower, v);
        } else {
            upper = std::min(upper, v);
        }
    }
    double bias = 0.0;
    if (free_count > 0) {
        bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(upper) && std::isfinite(lower)) {
        bias = 0.5 * (upper + lower);
    } else {
        bias = std::isfinite(upper) ? upper : lower;
    }

    std::vector<std::size_t> support;
    std::vector<double> coefficients;
    for (std::size_t i = 0; i < n; ++i) {
        const double beta = alpha[i] - alpha[i + n];
        if (beta != 0.0) {
            support.push_back(i);
            coefficients.push_back(beta);
        }
    }
    return SvrModel(spec.kernel, x->select_rows(support), std::move(coefficients), bias, x->cols(), std::move(info));
}

} // namespace lapse
