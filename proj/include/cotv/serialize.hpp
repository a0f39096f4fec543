#pragma once

// Verifier files. Three shapes:
//
//   {"family": "<tag>", "space": {...}, ...parameters}          concrete verifier
//   {"family": "member", "class": <instance>, "index": i, "class_hash": "..."}
//   {"family": "intersection", "class": <instance>, "members": [...], "class_hash": "..."}
//
// <instance> is a normalized config instance section; loading rebuilds the class
// from it and refuses a hash mismatch.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotv/core.hpp"
#include "cotv/learners.hpp"

namespace cotv {

using Json = nlohmann::json;

Json space_to_json(const TraceSpace& space);
/// Throws ConfigError naming the offending field.
TraceSpace space_from_json(const Json& j);

/// accept_all, reject_all, axiom_subset, interval, linear_threshold, graph_path,
/// table and tree_characteristic. Throws InvalidInput for anything else.
Json concrete_verifier_to_json(const Verifier& verifier);
/// Parses a concrete verifier; a "space" field, when present, must equal `space`.
VerifierHandle concrete_verifier_from_json(const Json& j, const TraceSpace& space);

Json member_to_json(const Json& instance, std::uint64_t index);
Json intersection_to_json(const Json& instance, const std::vector<std::uint64_t>& members);

/// Any of the three shapes.
VerifierHandle verifier_from_json(const Json& j);
VerifierHandle load_verifier_file(const std::string& path);

std::string bits_to_hex(const std::vector<std::uint64_t>& words);
std::vector<std::uint64_t> bits_from_hex(const std::string& hex);

}  // namespace cotv
