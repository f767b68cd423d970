#pragma once

#include <optional>
#include <string>

#include "json.hpp"

namespace debater::schema {

// The JSON Schema subset the published request schemas use: type, enum,
// const, properties, required, additionalProperties (bool), items,
// minItems/maxItems, minLength, minimum/maximum, anyOf, and local
// "#/$defs/<name>" references. Returns the first violation as
// "<json pointer>: <reason>", or nullopt.
std::optional<std::string> check(const nlohmann::json& schema, const nlohmann::json& instance);

// Bundled schema for a request or response document, e.g. "wikify.request".
// Throws "schema.unknown".
const nlohmann::json& bundled(const std::string& name);

}  // namespace debater::schema
