#pragma once

// Internal JSON bridge for configs; shared by the checkpoint manifest and
// the run-config loader. Not installed.

#include <json.hpp>

#include "zclassifier/backbone.hpp"

namespace zc::detail {

using Json = nlohmann::ordered_json;

Json head_to_json(const HeadKind& head);
HeadKind head_from_json(const Json& j);

Json backbone_to_json(const BackboneConfig& cfg);
BackboneConfig backbone_from_json(const Json& j);

/// Throws std::invalid_argument naming the first unknown key under `where`.
void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                         const std::string& where);

}  // namespace zc::detail
