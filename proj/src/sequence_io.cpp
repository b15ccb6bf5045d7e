#include "declab/sequence_io.hpp"

#include <cstdio>

#include "declab/error.hpp"

namespace declab {

namespace {

template <class F>
auto parse_field(const Json& j, const char* key, F&& read) {
  require(j.contains(key), std::string("missing field '") + key + "'", ErrorCode::parse);
  try {
    return read(j.at(key));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("field '") + key + "': " + e.what());
  }
}

Json vec_list_to_json(const std::vector<std::vector<Vec>>& lists) {
  Json out = Json::array();
  for (const auto& list : lists) {
    Json level = Json::array();
    for (const auto& v : list) level.push_back(vec_to_json(v));
    out.push_back(std::move(level));
  }
  return out;
}

std::vector<std::vector<Vec>> vec_list_from_json(const Json& j) {
  std::vector<std::vector<Vec>> out;
  for (const auto& level : j) {
    std::vector<Vec> list;
    for (const auto& v : level) list.push_back(vec_from_json(v));
    out.push_back(std::move(list));
  }
  return out;
}

}  // namespace

Json vec_to_json(const Vec& v) { return Json(v.coords()); }

Vec vec_from_json(const Json& j) {
  require(j.is_array(), "vector must be a JSON array", ErrorCode::parse);
  return Vec(j.get<std::vector<double>>());
}

Json spec_to_json(const SequenceSpec& spec) {
  Json j;
  j["space"] = spec.space;
  Json levels = Json::array();
  for (const auto& level : spec.levels) {
    Json values = Json::array();
    for (const auto& v : level.values) values.push_back(vec_to_json(v));
    levels.push_back({{"values", values}, {"probs", level.probs}});
  }
  j["tree"] = {{"levels", levels}};
  j["increment"] = to_string(spec.increment);
  Json predictable = {{"rule", to_string(spec.predictable)}};
  switch (spec.predictable) {
    case PredictableRule::constant:
    case PredictableRule::table:
      predictable["labels"] = vec_list_to_json(spec.labels);
      break;
    case PredictableRule::previous_increment:
    case PredictableRule::partial_sum:
      predictable["initial"] = vec_to_json(spec.initial);
      predictable["scale"] = spec.scale;
      break;
    case PredictableRule::none:
      break;
  }
  j["predictable"] = predictable;
  if (spec.increment == IncrementRule::table) j["increments"] = vec_list_to_json(spec.increments);
  j["conditionally_symmetric"] = spec.conditionally_symmetric;
  j["family"] = spec.family;
  return j;
}

SequenceSpec spec_from_json(const Json& j) {
  require(j.is_object(), "sequence spec must be a JSON object", ErrorCode::parse);
  SequenceSpec spec;
  spec.space = parse_field(j, "space", [](const Json& v) { return v.get<std::string>(); });
  spec.levels = parse_field(j, "tree", [](const Json& tree) {
    std::vector<Level> levels;
    for (const auto& level : tree.at("levels")) {
      Level out;
      for (const auto& v : level.at("values")) out.values.push_back(vec_from_json(v));
      out.probs = level.at("probs").get<std::vector<double>>();
      levels.push_back(std::move(out));
    }
    return levels;
  });
  spec.increment = increment_rule_from_string(
      parse_field(j, "increment", [](const Json& v) { return v.get<std::string>(); }));
  if (j.contains("predictable")) {
    const auto& pred = j.at("predictable");
    spec.predictable = predictable_rule_from_string(parse_field(pred, "rule", [](const Json& v) { return v.get<std::string>(); }));
    if (pred.contains("labels")) spec.labels = vec_list_from_json(pred.at("labels"));
    if (pred.contains("initial")) spec.initial = vec_from_json(pred.at("initial"));
    if (pred.contains("scale")) spec.scale = parse_field(pred, "scale", [](const Json& v) { return v.get<double>(); });
  } else {
    spec.predictable = PredictableRule::none;
  }
  if (j.contains("increments")) {
    spec.increments = parse_field(j, "increments", [](const Json& v) { return vec_list_from_json(v); });
  }
  if (j.contains("conditionally_symmetric")) {
    spec.conditionally_symmetric = parse_field(j, "conditionally_symmetric", [](const Json& v) { return v.get<bool>(); });
  }
  if (j.contains("family")) spec.family = parse_field(j, "family", [](const Json& v) { return v.get<std::string>(); });
  return spec;
}

std::string spec_to_string(const SequenceSpec& spec) { return spec_to_json(spec).dump(); }

SequenceSpec spec_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("invalid JSON: ") + e.what());
  }
  return spec_from_json(j);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace declab
