#include "ctxrec/stimulus/annotation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ctxrec/digest.hpp"
#include "ctxrec/image_io.hpp"

namespace ctxrec::stimulus {

using nlohmann::json;

std::string_view to_string(SizeBin bin) {
  switch (bin) {
    case SizeBin::S1: return "S1";
    case SizeBin::S2: return "S2";
    case SizeBin::S4: return "S4";
    case SizeBin::S8: return "S8";
    case SizeBin::Unbinned: return "Unbinned";
  }
  return "Unbinned";
}

SizeBin parse_size_bin(std::string_view text) {
  for (auto bin : {SizeBin::S1, SizeBin::S2, SizeBin::S4, SizeBin::S8, SizeBin::Unbinned}) {
    if (text == to_string(bin)) return bin;
  }
  throw std::invalid_argument("unknown size bin: " + std::string(text));
}

std::string_view to_string(ExtentMetric metric) {
  return metric == ExtentMetric::GeometricMean ? "geometric_mean" : "longest_side";
}

ExtentMetric parse_extent_metric(std::string_view text) {
  if (text == "geometric_mean") return ExtentMetric::GeometricMean;
  if (text == "longest_side") return ExtentMetric::LongestSide;
  throw std::invalid_argument("unknown extent metric: " + std::string(text));
}

double object_extent(const Rect& bbox, ExtentMetric metric) {
  if (metric == ExtentMetric::LongestSide) return std::max(bbox.width, bbox.height);
  return std::sqrt(static_cast<double>(bbox.width) * static_cast<double>(bbox.height));
}

SizeBin classify_extent(double extent) {
  struct Range {
    double lo, hi;
    SizeBin bin;
  };
  static constexpr Range kBins[] = {
      {16, 32, SizeBin::S1}, {56, 72, SizeBin::S2}, {112, 144, SizeBin::S4}, {224, 288, SizeBin::S8}};
  for (const auto& r : kBins) {
    if (extent >= r.lo && extent <= r.hi) return r.bin;
  }
  return SizeBin::Unbinned;
}

TargetAnnotation make_target(std::int64_t image_id, std::string file_name, int image_width,
                             int image_height, Rect bbox, std::string category, ExtentMetric metric) {
  TargetAnnotation t;
  t.image_id = image_id;
  t.file_name = std::move(file_name);
  t.image_width = image_width;
  t.image_height = image_height;
  t.bbox = bbox;
  t.category = std::move(category);
  t.extent = object_extent(bbox, metric);
  t.size_bin = classify_extent(t.extent);
  t.touches_border = bbox.x == 0 || bbox.y == 0 || bbox.right() == image_width ||
                     bbox.bottom() == image_height;
  return t;
}

namespace {

Rect round_bbox(const json& box) {
  if (!box.is_array() || box.size() != 4) throw AnnotationParseError("bbox must be [x, y, w, h]");
  const double x = box[0].get<double>();
  const double y = box[1].get<double>();
  const double w = box[2].get<double>();
  const double h = box[3].get<double>();
  const auto x0 = static_cast<int>(std::lround(x));
  const auto y0 = static_cast<int>(std::lround(y));
  const auto x1 = static_cast<int>(std::lround(x + w));
  const auto y1 = static_cast<int>(std::lround(y + h));
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

IngestResult ingest_annotations_text(std::string_view json_text, const std::filesystem::path& image_root,
                                     const IngestOptions& options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw AnnotationParseError(std::string("annotation file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc.contains("annotations") ||
      !doc.contains("categories")) {
    throw AnnotationParseError("annotation file lacks images/annotations/categories arrays");
  }

  IngestResult result;
  std::unordered_map<std::int64_t, std::string> category_names;
  try {
    for (const auto& cat : doc.at("categories")) {
      category_names[cat.at("id").get<std::int64_t>()] = cat.at("name").get<std::string>();
    }

    std::set<std::string> allowed(options.categories.begin(), options.categories.end());
    if (allowed.empty()) {
      for (const auto& [id, name] : category_names) allowed.insert(name);
    }
    result.label_set.assign(allowed.begin(), allowed.end());

    std::unordered_map<std::int64_t, bool> readable;
    for (const auto& img : doc.at("images")) {
      SourceImage info;
      info.image_id = img.at("id").get<std::int64_t>();
      info.file_name = img.at("file_name").get<std::string>();
      const auto path = image_root / info.file_name;
      bool ok = std::filesystem::exists(path);
      if (ok && img.contains("width") && img.contains("height")) {
        info.width = img.at("width").get<int>();
        info.height = img.at("height").get<int>();
      } else if (ok) {
        try {
          const Image loaded = load_image(path);
          info.width = loaded.width();
          info.height = loaded.height();
        } catch (const std::exception&) {
          ok = false;
        }
      }
      readable[info.image_id] = ok;
      result.images.emplace(info.image_id, std::move(info));
    }

    for (const auto& ann : doc.at("annotations")) {
      const auto image_id = ann.at("image_id").get<std::int64_t>();
      const auto ann_id = ann.value("id", std::int64_t{0});
      if (options.skip_crowd && ann.value("iscrowd", 0) != 0) continue;
      const auto cat_it = category_names.find(ann.at("category_id").get<std::int64_t>());
      if (cat_it == category_names.end()) {
        throw AnnotationParseError("annotation " + std::to_string(ann_id) + " has unknown category_id");
      }
      auto img_it = result.images.find(image_id);
      if (img_it == result.images.end()) {
        result.errors.push_back({image_id, ann_id, "annotation refers to unknown image"});
        continue;
      }
      img_it->second.categories.insert(cat_it->second);
      if (!allowed.contains(cat_it->second)) continue;
      if (!readable[image_id]) {
        result.errors.push_back({image_id, ann_id, "image file missing or unreadable: " + img_it->second.file_name});
        continue;
      }
      const Rect bbox = round_bbox(ann.at("bbox"));
      const SourceImage& info = img_it->second;
      if (bbox.empty() || !Rect{0, 0, info.width, info.height}.contains(bbox)) {
        result.errors.push_back({image_id, ann_id, "bbox empty or outside image bounds"});
        continue;
      }
      auto target = make_target(image_id, info.file_name, info.width, info.height, bbox, cat_it->second,
                                options.metric);
      target.annotation_id = ann_id;
      result.targets.push_back(std::move(target));
    }
  } catch (const json::exception& e) {
    throw AnnotationParseError(std::string("malformed annotation file: ") + e.what());
  }
  return result;
}

IngestResult ingest_annotations(const std::filesystem::path& annotation_file,
                                const std::filesystem::path& image_root, const IngestOptions& options) {
  std::string text;
  try {
    text = read_file(annotation_file);
  } catch (const std::exception& e) {
    throw AnnotationParseError(e.what());
  }
  return ingest_annotations_text(text, image_root, options);
}

}  // namespace ctxrec::stimulus
