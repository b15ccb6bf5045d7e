#pragma once

#include <string>

#include "json.hpp"
#include "declab/probmodel.hpp"

namespace declab {

using Json = nlohmann::ordered_json;

Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j);

// Sequence recipes as JSON documents:
// {"space", "tree": {"levels": [{"values", "probs"}]}, "increment",
//  "predictable": {"rule", ...}, "increments", "conditionally_symmetric", "family"}
Json spec_to_json(const SequenceSpec& spec);
SequenceSpec spec_from_json(const Json& j);

std::string spec_to_string(const SequenceSpec& spec);
SequenceSpec spec_from_string(const std::string& text);

// 64-bit FNV-1a of a byte string, printed as 16 hex digits.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace declab
