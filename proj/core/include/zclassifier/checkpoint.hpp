#pragma once

#include <stdexcept>
#include <string>

#include "zclassifier/backbone.hpp"

namespace zc {

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_manifest, truncated_payload, shape_mismatch };

  CheckpointError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// File layout: magic "ZCLF1", uint32 little-endian manifest length, JSON
/// manifest (config, parameter names and shapes, seed), then the parameter
/// payload as little-endian float32 in manifest order.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace zc
