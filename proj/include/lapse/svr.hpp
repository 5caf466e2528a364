#ifndef LAPSE_SVR_HPP
#define LAPSE_SVR_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lapse/matrix.hpp"

namespace lapse {

enum class KernelKind { linear, rbf };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind parse_kernel(std::string_view text);

struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    /// RBF width; unset means 1 / n_features, resolved at fit time.
    std::optional<double> gamma;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// linear: dot(a, b); rbf: exp(-gamma * |a - b|^2). An unset gamma is
/// treated as 1 / dim.
double kernel_eval(const KernelSpec& kernel, std::span<const double> a, std::span<const double> b);

struct SvrSpec {
    double C = 1.0;
    KernelSpec kernel;
    /// Half-width of the insensitive tube, in target units (days here).
    double epsilon = 0.1;
    /// Stop once the maximal KKT violation falls below tol.
    double tol = 1e-3;
    /// Iteration bound in units of n pair updates.
    std::size_t max_passes = 5;
    /// Kernel row cache budget.
    std::size_t cache_mb = 256;
    /// Fit on a seeded random subset of at most this many rows.
    std::optional<std::size_t> max_train_rows;
    std::uint64_t subsample_seed = 0;
    /// Keep the dual objective after every pair update (for diagnostics).
    bool record_objective = false;

    friend bool operator==(const SvrSpec&, const SvrSpec&) = default;
};

void validate(const SvrSpec& spec);

struct SvrFitInfo {
    std::size_t train_rows = 0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Largest remaining KKT violation, max_up(-y G) - min_low(-y G).
    double violation = 0.0;
    /// Dual objective (maximisation form) after each accepted update.
    std::vector<double> dual_objective;
};

/// Fitted model: f(x) = sum_i coef_i K(sv_i, x) + bias.
class SvrModel {
public:
    SvrModel() = default;
    SvrModel(KernelSpec kernel, Matrix support_vectors, std::vector<double> coefficients, double bias,
             std::size_t n_features, SvrFitInfo info = {});

    [[nodiscard]] std::vector<double> predict(const Matrix& queries) const;
    [[nodiscard]] double predict_one(std::span<const double> query) const;

    /// w = sum_i coef_i sv_i; linear kernels only.
    [[nodiscard]] std::vector<double> primal_weights() const;

    [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
    [[nodiscard]] const Matrix& support_vectors() const noexcept { return support_vectors_; }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] double bias() const noexcept { return bias_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
    [[nodiscard]] const SvrFitInfo& info() const noexcept { return info_; }

private:
    KernelSpec kernel_;
    Matrix support_vectors_;
    std::vector<double> coefficients_;
    double bias_ = 0.0;
    std::size_t n_features_ = 0;
    SvrFitInfo info_;
};

/// Solves the epsilon-SVR dual with sequential minimal optimisation over the
/// 2n-variable form (alpha, alpha*), choosing the maximal violating pair at
/// each step. Deterministic for fixed spec and data.
SvrModel svr_fit(const SvrSpec& spec, const Matrix& train, std::span<const double> targets);

} // namespace lapse

#endif
