#include "lapse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "lapse/error.hpp"
#include "lapse/random.hpp"

namespace lapse {

namespace {

/// Cumulative Zipf weights over `n` ranks.
std::vector<double> zipf_cdf(std::size_t n, double exponent)
{
    std::vector<double> cdf(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
        cdf[r] = total;
    }
    for (auto& c : cdf) { c /= total; }
    return cdf;
}

std::size_t draw_rank(const std::vector<double>& cdf, Rng& rng)
{
    const double u = uniform01(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

/// `count` distinct integer codes from [1, max(span, count)], in random order.
std::vector<std::int64_t> draw_codes(std::size_t count, std::size_t span, Rng& rng)
{
    std::vector<std::int64_t> pool(std::max(span, count));
    std::iota(pool.begin(), pool.end(), std::int64_t{1});
    shuffle(std::span<std::int64_t>(pool), rng);
    pool.resize(count);
    return pool;
}

std::vector<std::string> labels(const char* prefix, std::size_t count, Rng& rng)
{
    std::vector<std::string> out;
    out.reserve(count);
    char buffer[32];
    for (std::size_t i = 0; i < count; ++i) {
        std::snprintf(buffer, sizeof(buffer), "%s%04zu", prefix, i + 1);
        out.emplace_back(buffer);
    }
    shuffle(std::span<std::string>(out), rng);
    return out;
}

} // namespace

void validate(const GeneratorConfig& c)
{
    require(c.n_rows >= 1, ErrorKind::empty_input, "generator n_rows must be at least 1");
    require(c.n_providers >= 1 && c.n_companies >= 1 && c.n_diagnoses >= 1 && c.n_prescriptions >= 1,
            ErrorKind::parameter, "generator category cardinalities must be at least 1");
    require(c.lapse_min >= 0, ErrorKind::parameter, "lapse_min must be non-negative");
    require(c.lapse_max >= c.lapse_min, ErrorKind::parameter, "lapse_max must be >= lapse_min");
    require(c.base_min <= c.base_max, ErrorKind::parameter, "base_min must be <= base_max");
    require(c.base_skew > 0.0, ErrorKind::parameter, "base_skew must be positive");
    require(c.noise_sigma >= 0.0 && c.charge_scale >= 0.0 && c.category_skew >= 0.0, ErrorKind::parameter,
            "noise_sigma, charge_scale and category_skew must be non-negative");
    require(c.treatment_span_days >= 1, ErrorKind::parameter, "treatment_span_days must be at least 1");
    require(c.first_treatment.ok(), ErrorKind::parameter, "first_treatment is not a valid date");
}

Dataset generate_raw(const GeneratorConfig& config)
{
    validate(config);
    Rng rng(config.seed);

    const auto companies = draw_codes(config.n_companies, 464, rng);
    const auto providers = draw_codes(config.n_providers, 1123, rng);
    const auto diagnoses = labels("DX", config.n_diagnoses, rng);
    const auto prescriptions = labels("RX", config.n_prescriptions, rng);

    std::vector<double> company_base(config.n_companies);
    std::vector<double> company_sigma(config.n_companies);
    for (std::size_t c = 0; c < config.n_companies; ++c) {
        const double u = uniform01(rng);
        company_base[c] = config.base_min + (config.base_max - config.base_min) * std::pow(u, config.base_skew);
        company_sigma[c] = config.noise_sigma * (0.5 + uniform01(rng));
    }

    const auto company_cdf = zipf_cdf(config.n_companies, config.category_skew);
    const auto provider_cdf = zipf_cdf(config.n_providers, config.category_skew);
    const auto diagnosis_cdf = zipf_cdf(config.n_diagnoses, config.category_skew);
    const auto prescription_cdf = zipf_cdf(config.n_prescriptions, config.category_skew);

    const auto first = std::chrono::sys_days{config.first_treatment};

    Dataset out;
    out.schema = insurance_schema();
    out.records.reserve(config.n_rows);
    for (std::size_t i = 0; i < config.n_rows; ++i) {
        InsuranceRecord rec;
        const auto company = draw_rank(company_cdf, rng);
        rec.company_code = companies[company];
        rec.provider_code = providers[draw_rank(provider_cdf, rng)];
        rec.diagnosis = diagnoses[draw_rank(diagnosis_cdf, rng)];
        rec.prescription = prescriptions[draw_rank(prescription_cdf, rng)];

        const auto offset = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(config.treatment_span_days)));
        const auto treated = first + std::chrono::days{offset};
        rec.treatment_date = Date{treated};

        const double charge = std::exp(config.charge_location + config.charge_scale * standard_normal(rng));
        rec.charges_spent = std::round(charge * 100.0) / 100.0;

        const double raw = company_base[company] + company_sigma[company] * standard_normal(rng);
        const auto lapse = std::clamp(static_cast<std::int64_t>(std::llround(raw)), config.lapse_min, config.lapse_max);
        rec.payment_date = Date{treated + std::chrono::days{lapse}};

        out.records.push_back(std::move(rec));
    }
    return out;
}

Dataset generate_synthetic(const GeneratorConfig& config)
{
    return derive_time_lapse(generate_raw(config));
}

} // namespace lapse
