#include "ctxrec/catnet/tensor.hpp"

#include <stdexcept>

namespace ctxrec::catnet {

Tensor image_to_tensor(const Image& image) {
  Tensor t(image.channels(), image.height(), image.width());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) t.at(c, y, x) = image.at(x, y, c) / 255.0 - 0.5;
    }
  }
  return t;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.height != b.height || a.width != b.width) throw std::invalid_argument("concat_channels: spatial mismatch");
  Tensor out(a.channels + b.channels, a.height, a.width);
  out.data.topRows(a.channels) = a.data;
  out.data.bottomRows(b.channels) = b.data;
  return out;
}

}  // namespace ctxrec::catnet
