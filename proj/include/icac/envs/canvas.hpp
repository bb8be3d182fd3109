#pragma once

#include <array>
#include <string>
#include <vector>

#include "icac/tensor.hpp"

namespace icac {

using Color = std::array<float, 3>;

// Minimal software rasterizer: HxWx3 float image in [0,1], anti-aliased
// primitives via signed-distance coverage. Pure function of the draw calls.
class Canvas {
 public:
  Canvas(int h, int w, Color background);

  void disc(float cx, float cy, float radius, Color c);
  // thick segment with round caps
  void capsule(float x0, float y0, float x1, float y1, float half_width, Color c);
  void rect(float x0, float y0, float x1, float y1, Color c);

  Tensor to_tensor() const;  // shape {h, w, 3}
  int height() const { return h_; }
  int width() const { return w_; }

  static void write_ppm(const Tensor& image, const std::string& path);

 private:
  void blend(int x, int y, float coverage, Color c);

  int h_, w_;
  std::vector<float> rgb_;
};

}  // namespace icac
