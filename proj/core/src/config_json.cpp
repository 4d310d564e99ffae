#include "config_json.hpp"

#include <stdexcept>

namespace zc::detail {

void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: " + where + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
  }
}

Json head_to_json(const HeadKind& head) {
  Json j;
  switch (head.variant) {
    case HeadVariant::zclassifier:
      j["kind"] = "zclassifier";
      j["lambda"] = head.lambda;
      j["latent_dim"] = head.latent_dim;
      j["samples"] = head.samples_per_forward;
      break;
    case HeadVariant::nokl:
      j["kind"] = "nokl";
      j["latent_dim"] = head.latent_dim;
      j["samples"] = head.samples_per_forward;
      break;
    case HeadVariant::softmax:
      j["kind"] = "softmax";
      break;
  }
  return j;
}

HeadKind head_from_json(const Json& j) {
  reject_unknown_keys(j, {"kind", "lambda", "latent_dim", "samples"}, "model.head");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "softmax") {
    if (j.contains("lambda") || j.contains("latent_dim") || j.contains("samples")) {
      throw std::invalid_argument("config: softmax head takes no lambda/latent_dim/samples");
    }
    return HeadKind::make_softmax();
  }
  const std::size_t latent_dim = j.value("latent_dim", std::size_t{4});
  const std::size_t samples = j.value("samples", std::size_t{1});
  if (kind == "zclassifier") {
    return HeadKind::make_zclassifier(j.value("lambda", 10.0), latent_dim, samples);
  }
  if (kind == "nokl") {
    if (j.contains("lambda") && j.at("lambda").get<double>() != 0.0) {
      throw std::invalid_argument("config: nokl head forces lambda = 0");
    }
    return HeadKind::make_nokl(latent_dim, samples);
  }
  throw std::invalid_argument("config: unknown head kind \"" + kind + "\"");
}

Json backbone_to_json(const BackboneConfig& cfg) {
  Json j;
  j["kind"] = cfg.kind == BackboneKind::mlp ? "mlp" : "conv";
  if (cfg.kind == BackboneKind::mlp)
    j["widths"] = cfg.widths;
  else
    j["channels"] = cfg.channels;
  j["residual"] = cfg.residual;
  j["input_shape"] = cfg.input_shape;
  j["num_classes"] = cfg.num_classes;
  j["head"] = head_to_json(cfg.head);
  return j;
}

BackboneConfig backbone_from_json(const Json& j) {
  reject_unknown_keys(j, {"kind", "widths", "channels", "residual", "input_shape", "num_classes", "head"},
                      "model");
  BackboneConfig cfg;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "mlp") {
    cfg.kind = BackboneKind::mlp;
    cfg.widths = j.at("widths").get<std::vector<std::size_t>>();
    if (j.contains("channels")) throw std::invalid_argument("config: mlp takes widths, not channels");
  } else if (kind == "conv") {
    cfg.kind = BackboneKind::conv;
    cfg.channels = j.at("channels").get<std::vector<std::size_t>>();
    if (j.contains("widths")) throw std::invalid_argument("config: conv takes channels, not widths");
  } else {
    throw std::invalid_argument("config: unknown backbone kind \"" + kind + "\"");
  }
  cfg.residual = j.value("residual", true);
  cfg.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
  cfg.num_classes = j.at("num_classes").get<std::size_t>();
  cfg.head = head_from_json(j.at("head"));
  cfg.validate();
  return cfg;
}

}  // namespace zc::detail
