#include "latrans/json_schema.h"

#include <nlohmann/json.hpp>

namespace latrans {

using nlohmann::json;

namespace {

bool HasType(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "number") return value.is_number();
  if (type == "integer") {
    if (value.is_number_integer()) return true;
    return value.is_number_float() &&
           value.get<double>() == static_cast<double>(static_cast<long long>(value.get<double>()));
  }
  return false;
}

std::string EscapeKey(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string PointerOrRoot(const std::string& pointer) { return pointer.empty() ? "/" : pointer; }

void Validate(const json& schema, const json& doc, const std::string& pointer,
              std::vector<std::string>& errors) {
  auto fail = [&](const std::string& what) {
    errors.push_back(PointerOrRoot(pointer) + ": " + what);
  };
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = HasType(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || HasType(doc, alt.get<std::string>());
    }
    if (!ok) {
      fail("expected " + t.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& option : schema["enum"]) found = found || option == doc;
    if (!found) fail("must be one of " + schema["enum"].dump());
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) {
      fail("must be >= " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) {
      fail("must be <= " + schema["maximum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>()) {
      fail("must be > " + schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("exclusiveMaximum") && v >= schema["exclusiveMaximum"].get<double>()) {
      fail("must be < " + schema["exclusiveMaximum"].dump());
    }
  }
  if (doc.is_string() && schema.contains("minLength") &&
      doc.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
    fail("string is too short");
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
      fail("needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>()) {
      fail("allows at most " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        Validate(schema["items"], doc[i], pointer + "/" + std::to_string(i), errors);
      }
    }
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) {
          fail("missing required property \"" + key.get<std::string>() + "\"");
        }
      }
    }
    const json* properties = schema.contains("properties") ? &schema["properties"] : nullptr;
    const bool closed = schema.value("additionalProperties", true) == false;
    for (const auto& [key, value] : doc.items()) {
      const std::string child = pointer + "/" + EscapeKey(key);
      if (properties && properties->contains(key)) {
        Validate((*properties)[key], value, child, errors);
      } else if (closed) {
        errors.push_back(child + ": unknown property");
      }
    }
  }
}

}  // namespace

std::vector<std::string> ValidateAgainstSchema(const json& schema, const json& doc) {
  std::vector<std::string> errors;
  Validate(schema, doc, "", errors);
  return errors;
}

}  // namespace latrans
