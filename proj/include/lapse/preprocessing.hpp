#ifndef LAPSE_PREPROCESSING_HPP
#define LAPSE_PREPROCESSING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lapse/dataset.hpp"
#include "lapse/matrix.hpp"

namespace lapse {

/// Dense design matrix paired with its target vector.
struct FeatureMatrix {
    Matrix values;
    std::vector<double> target;
    std::vector<std::string> feature_names;

    [[nodiscard]] std::size_t rows() const noexcept { return values.rows(); }
    [[nodiscard]] std::size_t cols() const noexcept { return values.cols(); }
    [[nodiscard]] FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

std::string to_csv(const FeatureMatrix& matrix);

/// Category -> dense code, assigned in first-seen order.
class LabelEncoding {
public:
    LabelEncoding() = default;
    LabelEncoding(std::string column, std::vector<std::string> categories);

    [[nodiscard]] const std::string& column() const noexcept { return column_; }
    [[nodiscard]] const std::vector<std::string>& categories() const noexcept { return categories_; }
    [[nodiscard]] std::size_t size() const noexcept { return categories_.size(); }
    [[nodiscard]] std::optional<std::size_t> code(const std::string& category) const;

    friend bool operator==(const LabelEncoding& a, const LabelEncoding& b)
    {
        return a.column_ == b.column_ && a.categories_ == b.categories_;
    }

private:
    std::string column_;
    std::vector<std::string> categories_;
    std::unordered_map<std::string, std::size_t> codes_;
};

std::vector<LabelEncoding> fit_label_encoding(const Dataset& dataset, const std::vector<std::string>& columns);

enum class UnseenPolicy { error, zeros };

/// Design-matrix layout: passthrough numeric columns first, then one
/// indicator block per encoded column.
struct OneHotLayout {
    std::vector<std::string> numeric_columns;
    std::vector<LabelEncoding> encodings;
    std::vector<std::size_t> offsets;
    std::size_t width = 0;

    [[nodiscard]] std::size_t index_of(const std::string& column, const std::string& category) const;
    [[nodiscard]] std::vector<std::string> feature_names() const;

    friend bool operator==(const OneHotLayout&, const OneHotLayout&) = default;
};

OneHotLayout make_layout(std::vector<std::string> numeric_columns, std::vector<LabelEncoding> encodings);

std::vector<std::string> default_numeric_columns();
std::vector<std::string> default_categorical_columns();

OneHotLayout fit_one_hot_layout(const Dataset& dataset,
                                const std::vector<std::string>& numeric_columns = default_numeric_columns(),
                                const std::vector<std::string>& categorical_columns = default_categorical_columns());

/// Target is copied from the dataset when derived, otherwise left empty.
FeatureMatrix apply_one_hot(const Dataset& dataset, const OneHotLayout& layout,
                            UnseenPolicy policy = UnseenPolicy::error);

/// Reads back the category of each row's indicator block; rows whose block is
/// all zeros decode to an empty string.
std::vector<std::string> decode_one_hot(const Matrix& values, const OneHotLayout& layout, const std::string& column);

struct MinMaxParams {
    std::vector<double> min;
    std::vector<double> max;

    friend bool operator==(const MinMaxParams&, const MinMaxParams&) = default;
};

MinMaxParams fit_min_max(const Matrix& values);

/// x' = (x - min) / (max - min) with the given (or freshly fitted) params.
/// Constant columns map to 0. Values outside the fitted range are not
/// clipped.
std::pair<FeatureMatrix, MinMaxParams> scale_min_max(const FeatureMatrix& matrix,
                                                     const std::optional<MinMaxParams>& params = std::nullopt);

/// Inverse of the scaling for non-constant columns.
Matrix descale_min_max(const Matrix& scaled, const MinMaxParams& params);

/// Seeded permutation of [0, n): the first floor(ratio * n) positions train,
/// the rest test. Both sides are kept non-empty.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double ratio,
                                                                            std::uint64_t seed);

struct TrainTestSplit {
    FeatureMatrix train;
    FeatureMatrix test;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

TrainTestSplit split_train_test(const FeatureMatrix& matrix, double ratio, std::uint64_t seed);

/// Everything fitted on the training rows that must be replayed on new data.
struct PreprocessingState {
    OneHotLayout layout;
    MinMaxParams scaler;
    UnseenPolicy policy = UnseenPolicy::error;

    [[nodiscard]] std::uint64_t fingerprint() const;
    [[nodiscard]] FeatureMatrix transform(const Dataset& dataset) const;

    friend bool operator==(const PreprocessingState&, const PreprocessingState&) = default;
};

PreprocessingState fit_preprocessing(const Dataset& train, UnseenPolicy policy = UnseenPolicy::error);

} // namespace lapse

#endif
