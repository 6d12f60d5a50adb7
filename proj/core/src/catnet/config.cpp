#include "ctxrec/catnet/config.hpp"

#include <stdexcept>

namespace ctxrec::catnet {

using nlohmann::json;

BackboneSpec BackboneSpec::toy(int width, int depth_out) {
  BackboneSpec spec;
  spec.name = "toy";
  spec.layers = {
      {LayerKind::Conv, width, 5, 2, 2},          {LayerKind::Relu, 0, 0, 0, 0},
      {LayerKind::Conv, 2 * width, 3, 2, 1},      {LayerKind::Relu, 0, 0, 0, 0},
      {LayerKind::Conv, depth_out, 3, 2, 1},      {LayerKind::Relu, 0, 0, 0, 0},
  };
  return spec;
}

BackboneSpec BackboneSpec::vgg16() {
  BackboneSpec spec;
  spec.name = "vgg16";
  const int blocks[5][2] = {{64, 2}, {128, 2}, {256, 3}, {512, 3}, {512, 3}};
  for (int b = 0; b < 5; ++b) {
    for (int i = 0; i < blocks[b][1]; ++i) {
      spec.layers.push_back({LayerKind::Conv, blocks[b][0], 3, 1, 1});
      spec.layers.push_back({LayerKind::Relu, 0, 0, 0, 0});
    }
    if (b < 4) spec.layers.push_back({LayerKind::MaxPool, 0, 2, 2, 0});
  }
  return spec;
}

void ModelConfig::resolve() {
  if (input_size <= 0) throw std::invalid_argument("input_size must be positive");
  if (steps < 1) throw std::invalid_argument("steps (T_m) must be >= 1");
  if (ms_per_step != 25) throw std::invalid_argument("ms_per_step must be 25");
  if (classes.size() < 2) throw std::invalid_argument("at least two classes are required");
  if (hidden < 1) throw std::invalid_argument("hidden size must be >= 1");
  if (ablation.single_stream && ablation.binary_mask_input) {
    throw std::invalid_argument("single_stream and binary_mask_input are exclusive");
  }
  int size_w = input_size;
  int size_h = input_size;
  int channels = input_channels();
  for (const auto& layer : backbone.layers) {
    switch (layer.kind) {
      case LayerKind::Conv:
        if (layer.out_channels <= 0 || layer.kernel <= 0 || layer.stride <= 0 || layer.pad < 0) {
          throw std::invalid_argument("invalid conv layer");
        }
        size_w = (size_w + 2 * layer.pad - layer.kernel) / layer.stride + 1;
        size_h = (size_h + 2 * layer.pad - layer.kernel) / layer.stride + 1;
        channels = layer.out_channels;
        break;
      case LayerKind::MaxPool:
        size_w = (size_w - layer.kernel) / layer.stride + 1;
        size_h = (size_h - layer.kernel) / layer.stride + 1;
        break;
      case LayerKind::Relu:
        break;
    }
    if (size_w <= 0 || size_h <= 0) throw std::invalid_argument("backbone reduces the input to nothing");
  }
  feature_channels = channels;
  feature_width = size_w;
  feature_height = size_h;
}

namespace {

std::string_view kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Relu: return "relu";
    case LayerKind::MaxPool: return "maxpool";
  }
  return "conv";
}

LayerKind parse_kind(const std::string& s) {
  if (s == "conv") return LayerKind::Conv;
  if (s == "relu") return LayerKind::Relu;
  if (s == "maxpool") return LayerKind::MaxPool;
  throw std::invalid_argument("unknown layer kind: " + s);
}

}  // namespace

json to_json(const ModelConfig& c) {
  json layers = json::array();
  for (const auto& l : c.backbone.layers) {
    layers.push_back({{"kind", kind_name(l.kind)}, {"out_channels", l.out_channels}, {"kernel", l.kernel},
                      {"stride", l.stride}, {"pad", l.pad}});
  }
  return json{{"input_size", c.input_size},
              {"backbone", {{"name", c.backbone.name}, {"layers", layers}}},
              {"hidden", c.hidden},
              {"classes", c.classes},
              {"steps", c.steps},
              {"ms_per_step", c.ms_per_step},
              {"box_line_width", c.box_line_width},
              {"ablation",
               {{"single_stream", c.ablation.single_stream},
                {"binary_mask_input", c.ablation.binary_mask_input},
                {"no_attention", c.ablation.no_attention},
                {"no_recurrence", c.ablation.no_recurrence}}}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.input_size = j.value("input_size", c.input_size);
  if (j.contains("backbone")) {
    const auto& b = j.at("backbone");
    if (b.is_string()) {
      const auto name = b.get<std::string>();
      if (name == "toy") {
        c.backbone = BackboneSpec::toy();
      } else if (name == "vgg16") {
        c.backbone = BackboneSpec::vgg16();
      } else {
        throw std::invalid_argument("unknown backbone preset: " + name);
      }
    } else {
      c.backbone.name = b.value("name", std::string("custom"));
      c.backbone.layers.clear();
      for (const auto& l : b.at("layers")) {
        c.backbone.layers.push_back({parse_kind(l.at("kind").get<std::string>()), l.value("out_channels", 0),
                                     l.value("kernel", 3), l.value("stride", 1), l.value("pad", 0)});
      }
    }
  }
  c.hidden = j.value("hidden", c.hidden);
  c.classes = j.value("classes", c.classes);
  c.steps = j.value("steps", c.steps);
  c.ms_per_step = j.value("ms_per_step", c.ms_per_step);
  c.box_line_width = j.value("box_line_width", c.box_line_width);
  if (j.contains("ablation")) {
    const auto& a = j.at("ablation");
    c.ablation.single_stream = a.value("single_stream", false);
    c.ablation.binary_mask_input = a.value("binary_mask_input", false);
    c.ablation.no_attention = a.value("no_attention", false);
    c.ablation.no_recurrence = a.value("no_recurrence", false);
  }
  c.resolve();
  return c;
}

}  // namespace ctxrec::catnet
