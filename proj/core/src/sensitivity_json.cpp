#include <stdexcept>

#include <json.hpp>

#include "poolplan/sensitivity.hpp"

namespace poolplan {

namespace {

using nlohmann::json;

void reject_unknown_fields(const json& object, std::initializer_list<const char*> allowed) {
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* name : allowed)
      if (item.key() == name) known = true;
    if (!known)
      throw std::invalid_argument("unknown field \"" + item.key() + "\" in curve description");
  }
}

}  // namespace

FamilySpec family_from_json(const std::string& text) {
  json object;
  try {
    object = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed curve JSON: ") + e.what());
  }
  if (!object.is_object() || !object.contains("family") || !object["family"].is_string())
    throw std::invalid_argument("curve description must be an object with a \"family\" string");

  const std::string family = object["family"].get<std::string>();
  if (family == "perfect") {
    reject_unknown_fields(object, {"family"});
    return FamilySpec::perfect();
  }
  if (family == "hwang") {
    reject_unknown_fields(object, {"family", "d"});
    if (!object.contains("d") || !object["d"].is_number())
      throw std::invalid_argument("hwang curve needs a numeric \"d\"");
    return FamilySpec::hwang(object["d"].get<double>());
  }
  if (family == "linear") {
    reject_unknown_fields(object, {"family", "slope"});
    double slope = 0.02;
    if (object.contains("slope")) {
      if (!object["slope"].is_number())
        throw std::invalid_argument("linear \"slope\" must be numeric");
      slope = object["slope"].get<double>();
    }
    return FamilySpec::linear(slope);
  }
  if (family == "exp_step") {
    reject_unknown_fields(object, {"family"});
    return FamilySpec::exp_step();
  }
  if (family == "tabulated") {
    reject_unknown_fields(object, {"family", "values"});
    if (!object.contains("values") || !object["values"].is_array())
      throw std::invalid_argument("tabulated curve needs a \"values\" array");
    std::vector<double> values;
    for (const auto& v : object["values"]) {
      if (!v.is_number())
        throw std::invalid_argument("tabulated \"values\" must all be numeric");
      values.push_back(v.get<double>());
    }
    return FamilySpec::tabulated(std::move(values));
  }
  throw std::invalid_argument("unknown curve family \"" + family + "\"");
}

std::string family_to_json(const FamilySpec& family) {
  json object;
  switch (family.kind) {
    case Family::perfect:
      object = {{"family", "perfect"}};
      break;
    case Family::hwang:
      object = {{"family", "hwang"}, {"d", family.dilution}};
      break;
    case Family::linear:
      object = {{"family", "linear"}, {"slope", family.slope}};
      break;
    case Family::exp_step:
      object = {{"family", "exp_step"}};
      break;
    case Family::tabulated:
      object = {{"family", "tabulated"}, {"values", family.values}};
      break;
  }
  return object.dump();
}

}  // namespace poolplan
