#include "lapse/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lapse/csv.hpp"
#include "lapse/error.hpp"
#include "lapse/random.hpp"

namespace lapse {

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const
{
    FeatureMatrix out;
    out.values = values.select_rows(indices);
    if (!target.empty()) { out.target = select(std::span<const double>(target), indices); }
    out.feature_names = feature_names;
    return out;
}

std::string to_csv(const FeatureMatrix& matrix)
{
    std::ostringstream out;
    csv::Row header = matrix.feature_names;
    if (header.size() != matrix.cols()) {
        header.clear();
        for (std::size_t c = 0; c < matrix.cols(); ++c) { header.push_back("x" + std::to_string(c)); }
    }
    if (!matrix.target.empty()) { header.emplace_back("target"); }
    csv::write_row(out, header);
    char buffer[40];
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        csv::Row row;
        for (double v : matrix.values.row(r)) {
            std::snprintf(buffer, sizeof(buffer), "%.17g", v);
            row.emplace_back(buffer);
        }
        if (!matrix.target.empty()) {
            std::snprintf(buffer, sizeof(buffer), "%.17g", matrix.target[r]);
            row.emplace_back(buffer);
        }
        csv::write_row(out, row);
    }
    return out.str();
}

LabelEncoding::LabelEncoding(std::string column, std::vector<std::string> categories)
    : column_(std::move(column)), categories_(std::move(categories))
{
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        auto [it, inserted] = codes_.emplace(categories_[i], i);
        require(inserted, ErrorKind::category, "duplicate category '" + categories_[i] + "' in " + column_);
    }
}

std::optional<std::size_t> LabelEncoding::code(const std::string& category) const
{
    auto it = codes_.find(category);
    if (it == codes_.end()) { return std::nullopt; }
    return it->second;
}

std::vector<LabelEncoding> fit_label_encoding(const Dataset& dataset, const std::vector<std::string>& columns)
{
    std::vector<LabelEncoding> out;
    for (const auto& name : columns) {
        std::vector<std::string> seen;
        std::unordered_map<std::string, std::size_t> index;
        for (auto& value : dataset.categorical_column(name)) {
            if (index.emplace(value, seen.size()).second) { seen.push_back(std::move(value)); }
        }
        out.emplace_back(name, std::move(seen));
    }
    return out;
}

std::size_t OneHotLayout::index_of(const std::string& column, const std::string& category) const
{
    for (std::size_t b = 0; b < encodings.size(); ++b) {
        if (encodings[b].column() != column) { continue; }
        auto code = encodings[b].code(category);
        if (!code) { fail(ErrorKind::category, "unseen category '" + category + "' in column '" + column + "'"); }
        return offsets[b] + *code;
    }
    fail(ErrorKind::schema, "column '" + column + "' is not one-hot encoded");
}

std::vector<std::string> OneHotLayout::feature_names() const
{
    std::vector<std::string> names = numeric_columns;
    for (const auto& enc : encodings) {
        for (const auto& cat : enc.categories()) { names.push_back(enc.column() + "=" + cat); }
    }
    return names;
}

OneHotLayout make_layout(std::vector<std::string> numeric_columns, std::vector<LabelEncoding> encodings)
{
    OneHotLayout layout;
    layout.numeric_columns = std::move(numeric_columns);
    layout.encodings = std::move(encodings);
    std::size_t offset = layout.numeric_columns.size();
    for (const auto& enc : layout.encodings) {
        layout.offsets.push_back(offset);
        offset += enc.size();
    }
    layout.width = offset;
    return layout;
}

std::vector<std::string> default_numeric_columns()
{
    return {std::string(column::treatment_date), std::string(column::charges_spent)};
}

std::vector<std::string> default_categorical_columns()
{
    return {std::string(column::provider_code), std::string(column::company_code), std::string(column::diagnosis),
            std::string(column::prescription)};
}

OneHotLayout fit_one_hot_layout(const Dataset& dataset, const std::vector<std::string>& numeric_columns,
                                const std::vector<std::string>& categorical_columns)
{
    for (const auto& name : numeric_columns) {
        const auto* decl = dataset.find_column(name);
        require(decl != nullptr, ErrorKind::schema, "no column '" + name + "'");
        require(decl->kind != ColumnKind::categorical, ErrorKind::type,
                "column '" + name + "' is categorical and cannot pass through as numeric");
    }
    return make_layout(numeric_columns, fit_label_encoding(dataset, categorical_columns));
}

FeatureMatrix apply_one_hot(const Dataset& dataset, const OneHotLayout& layout, UnseenPolicy policy)
{
    FeatureMatrix out;
    out.values = Matrix(dataset.size(), layout.width, 0.0);
    out.feature_names = layout.feature_names();
    if (!dataset.target.empty()) { out.target = dataset.target; }

    for (std::size_t c = 0; c < layout.numeric_columns.size(); ++c) {
        const auto values = dataset.numeric_column(layout.numeric_columns[c]);
        for (std::size_t r = 0; r < values.size(); ++r) { out.values(r, c) = values[r]; }
    }
    for (std::size_t b = 0; b < layout.encodings.size(); ++b) {
        const auto& enc = layout.encodings[b];
        const auto labels = dataset.categorical_column(enc.column());
        for (std::size_t r = 0; r < labels.size(); ++r) {
            auto code = enc.code(labels[r]);
            if (!code) {
                if (policy == UnseenPolicy::zeros) { continue; }
                fail(ErrorKind::category, "unseen category '" + labels[r] + "' in column '" + enc.column() +
                                              "' (row " + std::to_string(r) + ")");
            }
            out.values(r, layout.offsets[b] + *code) = 1.0;
        }
    }
    return out;
}

std::vector<std::string> decode_one_hot(const Matrix& values, const OneHotLayout& layout, const std::string& column)
{
    for (std::size_t b = 0; b < layout.encodings.size(); ++b) {
        const auto& enc = layout.encodings[b];
        if (enc.column() != column) { continue; }
        std::vector<std::string> out(values.rows());
        for (std::size_t r = 0; r < values.rows(); ++r) {
            for (std::size_t k = 0; k < enc.size(); ++k) {
                if (values(r, layout.offsets[b] + k) != 0.0) {
                    out[r] = enc.categories()[k];
                    break;
                }
            }
        }
        return out;
    }
    fail(ErrorKind::schema, "column '" + column + "' is not one-hot encoded");
}

MinMaxParams fit_min_max(const Matrix& values)
{
    require(values.rows() >= 1, ErrorKind::empty_input, "cannot fit min-max scaling on zero rows");
    MinMaxParams p;
    auto first = values.row(0);
    p.min.assign(first.begin(), first.end());
    p.max.assign(first.begin(), first.end());
    for (std::size_t r = 1; r < values.rows(); ++r) {
        auto row = values.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            p.min[c] = std::min(p.min[c], row[c]);
            p.max[c] = std::max(p.max[c], row[c]);
        }
    }
    return p;
}

std::pair<FeatureMatrix, MinMaxParams> scale_min_max(const FeatureMatrix& matrix,
                                                     const std::optional<MinMaxParams>& params)
{
    MinMaxParams p = params ? *params : fit_min_max(matrix.values);
    require(p.min.size() == matrix.cols() && p.max.size() == matrix.cols(), ErrorKind::shape,
            "min-max params have " + std::to_string(p.min.size()) + " columns, matrix has " +
                std::to_string(matrix.cols()));

    FeatureMatrix out = matrix;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.values.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double span = p.max[c] - p.min[c];
            row[c] = span > 0.0 ? (row[c] - p.min[c]) / span : 0.0;
        }
    }
    return {std::move(out), std::move(p)};
}

Matrix descale_min_max(const Matrix& scaled, const MinMaxParams& params)
{
    require(params.min.size() == scaled.cols(), ErrorKind::shape, "min-max params do not match matrix width");
    Matrix out = scaled;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = row[c] * (params.max[c] - params.min[c]) + params.min[c];
        }
    }
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double ratio,
                                                                            std::uint64_t seed)
{
    require(ratio > 0.0 && ratio < 1.0, ErrorKind::parameter, "split ratio must lie in (0, 1)");
    require(n >= 2, ErrorKind::insufficient_data, "need at least 2 rows to split");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    shuffle(std::span<std::size_t>(order), rng);

    // The small slack keeps e.g. 0.29 * 100 from flooring to 28.
    auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return {std::move(train), std::move(test)};
}

TrainTestSplit split_train_test(const FeatureMatrix& matrix, double ratio, std::uint64_t seed)
{
    auto [train_rows, test_rows] = split_indices(matrix.rows(), ratio, seed);
    TrainTestSplit out;
    out.train = matrix.select_rows(train_rows);
    out.test = matrix.select_rows(test_rows);
    out.train_rows = std::move(train_rows);
    out.test_rows = std::move(test_rows);
    return out;
}

std::uint64_t PreprocessingState::fingerprint() const
{
    Fnv1a h;
    auto add_string = [&](const std::string& s) {
        h.add(s.size());
        h.add_bytes(s.data(), s.size());
    };
    for (const auto& name : layout.numeric_columns) { add_string(name); }
    for (const auto& enc : layout.encodings) {
        add_string(enc.column());
        for (const auto& cat : enc.categories()) { add_string(cat); }
    }
    h.add(layout.width);
    for (double v : scaler.min) { h.add(v); }
    for (double v : scaler.max) { h.add(v); }
    h.add(static_cast<int>(policy));
    return h.value();
}

FeatureMatrix PreprocessingState::transform(const Dataset& dataset) const
{
    return scale_min_max(apply_one_hot(dataset, layout, policy), scaler).first;
}

PreprocessingState fit_preprocessing(const Dataset& train, UnseenPolicy policy)
{
    PreprocessingState state;
    state.layout = fit_one_hot_layout(train);
    state.policy = policy;
    state.scaler = fit_min_max(apply_one_hot(train, state.layout, policy).values);
    return state;
}

} // namespace lapse
