#ifndef LAPSE_SERIALIZATION_HPP
#define LAPSE_SERIALIZATION_HPP

#include <json.hpp>
#include <string>

#include "lapse/model_selection.hpp"
#include "lapse/preprocessing.hpp"
#include "lapse/synthetic.hpp"

namespace lapse {

using Json = nlohmann::json;

/// Missing keys keep their defaults; unknown keys are rejected.
GeneratorConfig generator_config_from_json(const Json& doc);
Json to_json(const GeneratorConfig& config);

Json to_json(const PreprocessingState& state);
PreprocessingState preprocessing_state_from_json(const Json& doc);

Json to_json(const RegressorSpec& spec);
RegressorSpec regressor_spec_from_json(const Json& doc);

/// Fitted models carry an "algorithm" tag; KNN stores its points and
/// rebuilds the index on load.
Json to_json(const FittedModel& model);
FittedModel fitted_model_from_json(const Json& doc);

Json read_json_file(const std::string& path);
/// Writes to a sibling temporary file and renames it into place.
void write_text_atomic(const std::string& path, const std::string& contents);

} // namespace lapse

#endif
