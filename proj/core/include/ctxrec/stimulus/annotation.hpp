#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxrec/image.hpp"

namespace ctxrec::stimulus {

enum class SizeBin { S1, S2, S4, S8, Unbinned };

[[nodiscard]] std::string_view to_string(SizeBin bin);
[[nodiscard]] SizeBin parse_size_bin(std::string_view text);

/// How a bounding box is reduced to a single object extent in pixels.
enum class ExtentMetric {
  GeometricMean,  // sqrt(w * h)
  LongestSide,    // max(w, h)
};

[[nodiscard]] std::string_view to_string(ExtentMetric metric);
[[nodiscard]] ExtentMetric parse_extent_metric(std::string_view text);

[[nodiscard]] double object_extent(const Rect& bbox, ExtentMetric metric);

/// S1 [16,32], S2 [56,72], S4 [112,144], S8 [224,288], inclusive.
[[nodiscard]] SizeBin classify_extent(double extent);

/// One target object in one source image.
struct TargetAnnotation {
  std::int64_t image_id = 0;
  std::int64_t annotation_id = 0;
  std::string file_name;  // relative to the image root
  int image_width = 0;
  int image_height = 0;
  Rect bbox;
  std::string category;
  SizeBin size_bin = SizeBin::Unbinned;
  double extent = 0.0;
  bool touches_border = false;

  friend bool operator==(const TargetAnnotation&, const TargetAnnotation&) = default;
};

/// Builds a TargetAnnotation from raw geometry, filling extent, bin and border flag.
[[nodiscard]] TargetAnnotation make_target(std::int64_t image_id, std::string file_name,
                                           int image_width, int image_height, Rect bbox,
                                           std::string category,
                                           ExtentMetric metric = ExtentMetric::GeometricMean);

struct SourceImage {
  std::int64_t image_id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::set<std::string> categories;  // every category annotated in the image
};

struct IngestError {
  std::int64_t image_id = 0;
  std::int64_t annotation_id = 0;
  std::string reason;
};

struct IngestOptions {
  ExtentMetric metric = ExtentMetric::GeometricMean;
  /// Restricts the label set. Empty means every category in the file.
  std::vector<std::string> categories;
  bool skip_crowd = true;
};

struct IngestResult {
  std::vector<TargetAnnotation> targets;
  std::map<std::int64_t, SourceImage> images;
  std::vector<std::string> label_set;
  std::vector<IngestError> errors;
};

class AnnotationParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads COCO instance annotations. A malformed file throws AnnotationParseError;
/// missing images or bad boxes become per-entry IngestError records.
[[nodiscard]] IngestResult ingest_annotations(const std::filesystem::path& annotation_file,
                                              const std::filesystem::path& image_root,
                                              const IngestOptions& options = {});

/// Same as above over an in-memory JSON document.
[[nodiscard]] IngestResult ingest_annotations_text(std::string_view json_text,
                                                   const std::filesystem::path& image_root,
                                                   const IngestOptions& options = {});

}  // namespace ctxrec::stimulus
