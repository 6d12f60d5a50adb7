#include "ctxrec/catnet/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctxrec::catnet {

namespace {

int scale_coord(int v, int src, int size) {
  return static_cast<int>(std::lround(static_cast<double>(v) * size / src));
}

}  // namespace

Rect rescale_box(const Rect& bbox, int src_width, int src_height, int size) {
  int x0 = std::clamp(scale_coord(bbox.x, src_width, size), 0, size - 1);
  int y0 = std::clamp(scale_coord(bbox.y, src_height, size), 0, size - 1);
  int x1 = std::clamp(scale_coord(bbox.right(), src_width, size), x0 + 1, size);
  int y1 = std::clamp(scale_coord(bbox.bottom(), src_height, size), y0 + 1, size);
  return {x0, y0, x1 - x0, y1 - y0};
}

StreamImages render_streams(const Image& image, const Rect& bbox, const ModelConfig& config) {
  if (bbox.empty()) throw std::invalid_argument("preprocess_streams: zero-area bbox");
  if (!image.bounds().contains(bbox)) throw std::invalid_argument("preprocess_streams: bbox outside image");
  const int size = config.input_size;
  StreamImages out;
  out.context = resize_bilinear(image, size, size);
  const Rect box = rescale_box(bbox, image.width(), image.height(), size);
  if (config.ablation.binary_mask_input) {
    out.mask = Image(size, size, 1, 0);
    fill_rect(out.mask, box, 255);
  } else {
    draw_rect_outline(out.context, box, config.box_line_width, 255);
  }
  if (config.two_streams()) out.object = resample_region(image, bbox, size, size);
  return out;
}

StreamInput to_stream_input(const StreamImages& images, const ModelConfig& config) {
  StreamInput in;
  in.context = image_to_tensor(images.context);
  if (config.ablation.binary_mask_input) {
    Tensor mask(1, images.mask.height(), images.mask.width());
    for (int y = 0; y < mask.height; ++y) {
      for (int x = 0; x < mask.width; ++x) mask.at(0, y, x) = images.mask.at(x, y, 0) > 0 ? 0.5 : -0.5;
    }
    in.context = concat_channels(in.context, mask);
  }
  if (config.two_streams()) in.object = image_to_tensor(images.object);
  return in;
}

StreamInput preprocess_streams(const Image& image, const Rect& bbox, const ModelConfig& config) {
  return to_stream_input(render_streams(image, bbox, config), config);
}

}  // namespace ctxrec::catnet
