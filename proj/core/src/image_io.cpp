#include "ctxrec/image_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <stdexcept>
#include <string>

namespace ctxrec {

Image load_image(const std::filesystem::path& path, bool keep_gray) {
  cv::Mat mat = cv::imread(path.string(), keep_gray ? cv::IMREAD_UNCHANGED : cv::IMREAD_COLOR);
  if (mat.empty()) {
    throw std::runtime_error("cannot read image: " + path.string());
  }
  if (mat.depth() != CV_8U) {
    throw std::runtime_error("unsupported bit depth in " + path.string());
  }
  if (mat.channels() == 4) cv::cvtColor(mat, mat, cv::COLOR_BGRA2BGR);
  if (mat.channels() == 3) cv::cvtColor(mat, mat, cv::COLOR_BGR2RGB);
  if (!mat.isContinuous()) mat = mat.clone();

  Image out(mat.cols, mat.rows, mat.channels());
  std::copy(mat.data, mat.data + out.data().size(), out.data().begin());
  return out;
}

void save_png(const std::filesystem::path& path, const Image& img) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const int type = img.channels() == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat mat(img.height(), img.width(), type, const_cast<std::uint8_t*>(img.data().data()));
  cv::Mat bgr;
  if (img.channels() == 3) {
    cv::cvtColor(mat, bgr, cv::COLOR_RGB2BGR);
  } else {
    bgr = mat;
  }
  const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imwrite(path.string(), bgr, params)) {
    throw std::runtime_error("cannot write image: " + path.string());
  }
}

}  // namespace ctxrec
