#include "lapse/serialization.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lapse/error.hpp"

namespace lapse {

namespace {

template <typename T>
T get_as(const Json& doc, const char* key, const std::string& where)
{
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, where + "." + key + ": " + e.what());
    }
}

template <typename T>
void read_opt(const Json& doc, const char* key, T& out, const std::string& where)
{
    if (doc.contains(key)) { out = get_as<T>(doc, key, where); }
}

void reject_unknown(const Json& doc, std::initializer_list<const char*> known, const std::string& where)
{
    require(doc.is_object(), ErrorKind::parse, where + " must be a JSON object");
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& item : doc.items()) {
        require(allowed.contains(item.key()), ErrorKind::parse, where + ": unknown key '" + item.key() + "'");
    }
}

Json matrix_to_json(const Matrix& m)
{
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

Matrix matrix_from_json(const Json& rows, std::size_t cols, const std::string& where)
{
    require(rows.is_array(), ErrorKind::parse, where + " must be an array of rows");
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        const auto values = row.get<std::vector<double>>();
        require(values.size() == cols, ErrorKind::shape, where + ": row width does not match n_features");
        data.insert(data.end(), values.begin(), values.end());
    }
    return Matrix(rows.size(), cols, std::move(data));
}

Json tree_to_json(const TreeModel& tree)
{
    Json nodes = Json::array();
    for (const auto& n : tree.nodes()) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"weight", n.weight}});
    }
    return {{"algorithm", "tree"}, {"n_features", tree.n_features()}, {"nodes", nodes}};
}

TreeModel tree_from_json(const Json& doc)
{
    std::vector<TreeModel::Node> nodes;
    for (const auto& n : doc.at("nodes")) {
        TreeModel::Node node;
        node.feature = n.at("feature").get<std::int32_t>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<std::int32_t>();
        node.right = n.at("right").get<std::int32_t>();
        node.value = n.at("value").get<double>();
        node.weight = n.at("weight").get<double>();
        nodes.push_back(node);
    }
    return TreeModel(std::move(nodes), doc.at("n_features").get<std::size_t>());
}

Json kernel_to_json(const KernelSpec& k)
{
    Json doc{{"kind", std::string(to_string(k.kind))}};
    if (k.gamma) { doc["gamma"] = *k.gamma; }
    return doc;
}

KernelSpec kernel_from_json(const Json& doc)
{
    KernelSpec k;
    k.kind = parse_kernel(doc.at("kind").get<std::string>());
    if (doc.contains("gamma") && !doc.at("gamma").is_null()) { k.gamma = doc.at("gamma").get<double>(); }
    return k;
}

} // namespace

GeneratorConfig generator_config_from_json(const Json& doc)
{
    const std::string where = "generator";
    reject_unknown(doc,
                   {"n_rows", "n_providers", "n_companies", "n_diagnoses", "n_prescriptions", "category_skew",
                    "charge_location", "charge_scale", "base_min", "base_max", "base_skew", "noise_sigma",
                    "lapse_min", "lapse_max", "first_treatment", "treatment_span_days", "seed"},
                   where);
    GeneratorConfig c;
    read_opt(doc, "n_rows", c.n_rows, where);
    read_opt(doc, "n_providers", c.n_providers, where);
    read_opt(doc, "n_companies", c.n_companies, where);
    read_opt(doc, "n_diagnoses", c.n_diagnoses, where);
    read_opt(doc, "n_prescriptions", c.n_prescriptions, where);
    read_opt(doc, "category_skew", c.category_skew, where);
    read_opt(doc, "charge_location", c.charge_location, where);
    read_opt(doc, "charge_scale", c.charge_scale, where);
    read_opt(doc, "base_min", c.base_min, where);
    read_opt(doc, "base_max", c.base_max, where);
    read_opt(doc, "base_skew", c.base_skew, where);
    read_opt(doc, "noise_sigma", c.noise_sigma, where);
    read_opt(doc, "lapse_min", c.lapse_min, where);
    read_opt(doc, "lapse_max", c.lapse_max, where);
    read_opt(doc, "treatment_span_days", c.treatment_span_days, where);
    read_opt(doc, "seed", c.seed, where);
    if (doc.contains("first_treatment")) {
        auto d = parse_date(get_as<std::string>(doc, "first_treatment", where));
        require(d.has_value(), ErrorKind::parse, "generator.first_treatment must be YYYY-MM-DD");
        c.first_treatment = *d;
    }
    return c;
}

Json to_json(const GeneratorConfig& c)
{
    return {{"n_rows", c.n_rows},
            {"n_providers", c.n_providers},
            {"n_companies", c.n_companies},
            {"n_diagnoses", c.n_diagnoses},
            {"n_prescriptions", c.n_prescriptions},
            {"category_skew", c.category_skew},
            {"charge_location", c.charge_location},
            {"charge_scale", c.charge_scale},
            {"base_min", c.base_min},
            {"base_max", c.base_max},
            {"base_skew", c.base_skew},
            {"noise_sigma", c.noise_sigma},
            {"lapse_min", c.lapse_min},
            {"lapse_max", c.lapse_max},
            {"first_treatment", format_date(c.first_treatment)},
            {"treatment_span_days", c.treatment_span_days},
            {"seed", c.seed}};
}

Json to_json(const PreprocessingState& state)
{
    Json encodings = Json::array();
    for (const auto& enc : state.layout.encodings) {
        encodings.push_back({{"column", enc.column()}, {"categories", enc.categories()}});
    }
    return {{"numeric_columns", state.layout.numeric_columns},
            {"encodings", encodings},
            {"width", state.layout.width},
            {"scaler", {{"min", state.scaler.min}, {"max", state.scaler.max}}},
            {"unseen_category", state.policy == UnseenPolicy::error ? "error" : "zeros"}};
}

PreprocessingState preprocessing_state_from_json(const Json& doc)
{
    try {
        std::vector<LabelEncoding> encodings;
        for (const auto& e : doc.at("encodings")) {
            encodings.emplace_back(e.at("column").get<std::string>(), e.at("categories").get<std::vector<std::string>>());
        }
        PreprocessingState state;
        state.layout = make_layout(doc.at("numeric_columns").get<std::vector<std::string>>(), std::move(encodings));
        require(state.layout.width == doc.at("width").get<std::size_t>(), ErrorKind::shape,
                "preprocessing width does not match its encodings");
        state.scaler.min = doc.at("scaler").at("min").get<std::vector<double>>();
        state.scaler.max = doc.at("scaler").at("max").get<std::vector<double>>();
        require(state.scaler.min.size() == state.layout.width && state.scaler.max.size() == state.layout.width,
                ErrorKind::shape, "scaler width does not match layout width");
        const auto policy = doc.at("unseen_category").get<std::string>();
        require(policy == "error" || policy == "zeros", ErrorKind::parse, "unseen_category must be error or zeros");
        state.policy = policy == "error" ? UnseenPolicy::error : UnseenPolicy::zeros;
        return state;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, std::string("preprocessing state: ") + e.what());
    }
}

Json to_json(const RegressorSpec& spec)
{
    return std::visit(
        [](const auto& s) -> Json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, KnnSpec>) {
                return {{"algorithm", "knn"}, {"k", s.k}, {"backend", std::string(to_string(s.backend))}, {"leaf_size", s.leaf_size}};
            } else if constexpr (std::is_same_v<T, SvrSpec>) {
                Json doc{{"algorithm", "svr"},       {"C", s.C},
                         {"kernel", kernel_to_json(s.kernel)}, {"epsilon", s.epsilon},
                         {"tol", s.tol},             {"max_passes", s.max_passes},
                         {"cache_mb", s.cache_mb},   {"subsample_seed", s.subsample_seed}};
                doc["max_train_rows"] = s.max_train_rows ? Json(*s.max_train_rows) : Json(nullptr);
                return doc;
            } else if constexpr (std::is_same_v<T, TreeSpec>) {
                return {{"algorithm", "tree"}, {"max_depth", s.max_depth}, {"min_samples_leaf", s.min_samples_leaf}};
            } else if constexpr (std::is_same_v<T, ForestSpec>) {
                Json doc{{"algorithm", "forest"},
                         {"n_trees", s.n_trees},
                         {"max_depth", s.tree.max_depth},
                         {"min_samples_leaf", s.tree.min_samples_leaf},
                         {"bootstrap", s.bootstrap},
                         {"seed", s.seed}};
                doc["m_features"] = s.m_features ? Json(*s.m_features) : Json(nullptr);
                return doc;
            } else {
                return {{"algorithm", "baseline"}};
            }
        },
        spec);
}

RegressorSpec regressor_spec_from_json(const Json& doc)
{
    try {
        const auto algorithm = doc.at("algorithm").get<std::string>();
        if (algorithm == "knn") {
            KnnSpec s;
            s.k = doc.value("k", s.k);
            if (doc.contains("backend")) { s.backend = parse_backend(doc.at("backend").get<std::string>()); }
            s.leaf_size = doc.value("leaf_size", s.leaf_size);
            return s;
        }
        if (algorithm == "svr") {
            SvrSpec s;
            s.C = doc.value("C", s.C);
            if (doc.contains("kernel")) { s.kernel = kernel_from_json(doc.at("kernel")); }
            s.epsilon = doc.value("epsilon", s.epsilon);
            s.tol = doc.value("tol", s.tol);
            s.max_passes = doc.value("max_passes", s.max_passes);
            s.cache_mb = doc.value("cache_mb", s.cache_mb);
            s.subsample_seed = doc.value("subsample_seed", s.subsample_seed);
            if (doc.contains("max_train_rows") && !doc.at("max_train_rows").is_null()) {
                s.max_train_rows = doc.at("max_train_rows").get<std::size_t>();
            }
            return s;
        }
        if (algorithm == "tree") {
            TreeSpec s;
            s.max_depth = doc.value("max_depth", s.max_depth);
            s.min_samples_leaf = doc.value("min_samples_leaf", s.min_samples_leaf);
            return s;
        }
        if (algorithm == "forest") {
            ForestSpec s;
            s.n_trees = doc.value("n_trees", s.n_trees);
            s.tree.max_depth = doc.value("max_depth", s.tree.max_depth);
            s.tree.min_samples_leaf = doc.value("min_samples_leaf", s.tree.min_samples_leaf);
            s.bootstrap = doc.value("bootstrap", s.bootstrap);
            s.seed = doc.value("seed", s.seed);
            if (doc.contains("m_features") && !doc.at("m_features").is_null()) {
                s.m_features = doc.at("m_features").get<std::size_t>();
            }
            return s;
        }
        if (algorithm == "baseline") { return BaselineSpec{}; }
        fail(ErrorKind::parse, "unknown algorithm '" + algorithm + "'");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, std::string("regressor spec: ") + e.what());
    }
}

Json to_json(const FittedModel& model)
{
    return std::visit(
        [](const auto& m) -> Json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KnnModel>) {
                return {{"algorithm", "knn"},
                        {"k", m.spec().k},
                        {"backend", std::string(to_string(m.spec().backend))},
                        {"leaf_size", m.spec().leaf_size},
                        {"n_features", m.index().dims()},
                        {"points", matrix_to_json(m.index().points())},
                        {"targets", m.targets()}};
            } else if constexpr (std::is_same_v<T, SvrModel>) {
                return {{"algorithm", "svr"},
                        {"kernel", kernel_to_json(m.kernel())},
                        {"n_features", m.n_features()},
                        {"bias", m.bias()},
                        {"coefficients", m.coefficients()},
                        {"support_vectors", matrix_to_json(m.support_vectors())}};
            } else if constexpr (std::is_same_v<T, TreeModel>) {
                return tree_to_json(m);
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                Json trees = Json::array();
                for (const auto& t : m.trees()) { trees.push_back(tree_to_json(t)); }
                return {{"algorithm", "forest"}, {"trees", trees}};
            } else {
                return {{"algorithm", "baseline"}, {"value", m.value()}};
            }
        },
        model);
}

FittedModel fitted_model_from_json(const Json& doc)
{
    try {
        const auto algorithm = doc.at("algorithm").get<std::string>();
        if (algorithm == "knn") {
            KnnSpec spec{doc.at("k").get<std::size_t>(), parse_backend(doc.at("backend").get<std::string>()),
                         doc.at("leaf_size").get<std::size_t>()};
            const auto d = doc.at("n_features").get<std::size_t>();
            return KnnModel(spec, matrix_from_json(doc.at("points"), d, "knn.points"),
                            doc.at("targets").get<std::vector<double>>());
        }
        if (algorithm == "svr") {
            const auto d = doc.at("n_features").get<std::size_t>();
            return SvrModel(kernel_from_json(doc.at("kernel")), matrix_from_json(doc.at("support_vectors"), d, "svr.support_vectors"),
                            doc.at("coefficients").get<std::vector<double>>(), doc.at("bias").get<double>(), d);
        }
        if (algorithm == "tree") { return tree_from_json(doc); }
        if (algorithm == "forest") {
            std::vector<TreeModel> trees;
            for (const auto& t : doc.at("trees")) { trees.push_back(tree_from_json(t)); }
            return ForestModel(std::move(trees));
        }
        if (algorithm == "baseline") { return BaselineModel(doc.at("value").get<double>()); }
        fail(ErrorKind::parse, "unknown algorithm '" + algorithm + "'");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, std::string("model document: ") + e.what());
    }
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) { fail(ErrorKind::io, "cannot open '" + path + "' for reading"); }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, "'" + path + "': " + e.what());
    }
}

void write_text_atomic(const std::string& path, const std::string& contents)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path temp = target.parent_path() / ("." + target.filename().string() + ".tmp");
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) { fail(ErrorKind::io, "cannot open '" + temp.string() + "' for writing"); }
        out << contents;
        out.flush();
        if (!out) { fail(ErrorKind::io, "failed writing '" + temp.string() + "'"); }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) { fail(ErrorKind::io, "cannot move '" + temp.string() + "' to '" + path + "': " + ec.message()); }
}

} // namespace lapse
