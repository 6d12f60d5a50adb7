#pragma once

#include "ctxrec/catnet/config.hpp"
#include "ctxrec/catnet/tensor.hpp"
#include "ctxrec/image.hpp"

namespace ctxrec::catnet {

/// Rendered stream images before tensor conversion; useful for inspection.
struct StreamImages {
  Image context;  // full stimulus at input_size with the target box drawn
  Image object;   // bbox region resampled to input_size; empty for one-stream models
  Image mask;     // 1-channel 0/255 location mask; only for binary_mask_input
};

/// Network-ready inputs for one frame. `context` has 4 channels under
/// binary_mask_input; `object` is empty unless the model has two streams.
struct StreamInput {
  Tensor context;
  Tensor object;
};

/// Maps bbox into input_size x input_size coordinates (at least 1 px wide).
[[nodiscard]] Rect rescale_box(const Rect& bbox, int src_width, int src_height, int size);

[[nodiscard]] StreamImages render_streams(const Image& image, const Rect& bbox, const ModelConfig& config);

[[nodiscard]] StreamInput to_stream_input(const StreamImages& images, const ModelConfig& config);

[[nodiscard]] StreamInput preprocess_streams(const Image& image, const Rect& bbox, const ModelConfig& config);

}  // namespace ctxrec::catnet
