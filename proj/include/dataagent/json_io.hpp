#pragma once

#include <json.hpp>

#include "dataagent/checker.hpp"
#include "dataagent/executor.hpp"
#include "dataagent/value.hpp"

namespace dataagent {

/// {"kind": "number"|"text"|"text_list"|"number_list"|"multi_part"|"none"|"error",
///  "value": ..., "margin": number?}. Throws ManifestError on shape errors.
GroundTruth truth_from_json(const nlohmann::json& j);
nlohmann::json truth_to_json(const GroundTruth& truth);

/// Numbers, strings, arrays and objects map to Number, Text, lists and
/// KeyNumberMap; TableRef, Model and NoneOutcome map to tagged objects.
nlohmann::json value_to_json(const Value& value);
/// Inverse of value_to_json for the plain shapes (null -> NoneOutcome).
Value value_from_json(const nlohmann::json& j);

nlohmann::json verdict_to_json(const Verdict& verdict);

}  // namespace dataagent
