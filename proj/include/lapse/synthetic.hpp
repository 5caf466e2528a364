#ifndef LAPSE_SYNTHETIC_HPP
#define LAPSE_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>

#include "lapse/dataset.hpp"

namespace lapse {

/// Parameters of the synthetic insurance-claims generator.
///
/// Each company gets a base lapse drawn from [base_min, base_max] with a
/// right skew (base_min + (base_max - base_min) * u^base_skew), and a spread
/// of noise_sigma scaled by a per-company factor in [0.5, 1.5). A record's
/// lapse is its company's base plus Gaussian noise, rounded to whole days and
/// clamped to [lapse_min, lapse_max]. Category frequencies follow a Zipf law
/// with exponent category_skew (0 gives uniform draws).
struct GeneratorConfig {
    std::size_t n_rows = 70'888;
    std::size_t n_providers = 150;
    std::size_t n_companies = 40;
    std::size_t n_diagnoses = 200;
    std::size_t n_prescriptions = 141;
    double category_skew = 1.0;
    /// Log-normal charges: exp(location + scale * z), rounded to cents.
    double charge_location = 8.517193191416238; // ln 5000
    double charge_scale = 1.0;
    double base_min = 10.0;
    double base_max = 350.0;
    double base_skew = 2.5;
    double noise_sigma = 15.0;
    std::int64_t lapse_min = 0;
    std::int64_t lapse_max = 400;
    /// Treatment dates are drawn uniformly from [first, first + span_days).
    Date first_treatment{std::chrono::year{2014}, std::chrono::January, std::chrono::day{1}};
    std::int64_t treatment_span_days = 546;
    std::uint64_t seed = 20'150'101;

    friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

void validate(const GeneratorConfig& config);

/// Draws a dataset with both dates filled in and the target derived (so the
/// schema no longer lists payment_date for modelling, but every record keeps
/// it). A pure function of the config.
Dataset generate_synthetic(const GeneratorConfig& config);

/// Same records, with the payment date still in the schema, ready to write
/// out as a raw CSV.
Dataset generate_raw(const GeneratorConfig& config);

} // namespace lapse

#endif
