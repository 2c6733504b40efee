#ifndef LATRANS_JSON_SCHEMA_H_
#define LATRANS_JSON_SCHEMA_H_

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace latrans {

// Validates `doc` against a JSON Schema using the keywords type, enum,
// properties, required, additionalProperties (boolean), items (single
// schema), minItems, maxItems, minLength, minimum, maximum,
// exclusiveMinimum and exclusiveMaximum. Other keywords are ignored.
// Returns one "<json pointer>: <problem>" message per violation.
std::vector<std::string> ValidateAgainstSchema(const nlohmann::json& schema,
                                               const nlohmann::json& doc);

}  // namespace latrans

#endif  // LATRANS_JSON_SCHEMA_H_
