#include "icac/envs/canvas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace icac {

Canvas::Canvas(int h, int w, Color background) : h_(h), w_(w) {
  rgb_.resize(static_cast<std::size_t>(h) * w * 3);
  for (int i = 0; i < h * w; ++i)
    for (int c = 0; c < 3; ++c) rgb_[static_cast<std::size_t>(i) * 3 + c] = background[c];
}

void Canvas::blend(int x, int y, float coverage, Color c) {
  if (x < 0 || x >= w_ || y < 0 || y >= h_ || coverage <= 0.0f) return;
  const float a = std::min(coverage, 1.0f);
  float* px = &rgb_[(static_cast<std::size_t>(y) * w_ + x) * 3];
  for (int i = 0; i < 3; ++i) px[i] = px[i] * (1.0f - a) + c[i] * a;
}

void Canvas::disc(float cx, float cy, float radius, Color c) {
  if (radius <= 0.0f) return;
  const int x0 = static_cast<int>(std::floor(cx - radius - 1.0f));
  const int x1 = static_cast<int>(std::ceil(cx + radius + 1.0f));
  const int y0 = static_cast<int>(std::floor(cy - radius - 1.0f));
  const int y1 = static_cast<int>(std::ceil(cy + radius + 1.0f));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const float dx = static_cast<float>(x) + 0.5f - cx;
      const float dy = static_cast<float>(y) + 0.5f - cy;
      const float d = std::sqrt(dx * dx + dy * dy);
      blend(x, y, radius - d + 0.5f, c);  // 1px falloff
    }
}

void Canvas::capsule(float x0f, float y0f, float x1f, float y1f, float half_width, Color c) {
  const float lo_x = std::min(x0f, x1f) - half_width - 1.0f;
  const float hi_x = std::max(x0f, x1f) + half_width + 1.0f;
  const float lo_y = std::min(y0f, y1f) - half_width - 1.0f;
  const float hi_y = std::max(y0f, y1f) + half_width + 1.0f;
  const float vx = x1f - x0f, vy = y1f - y0f;
  const float len2 = vx * vx + vy * vy;
  for (int y = static_cast<int>(std::floor(lo_y)); y <= static_cast<int>(std::ceil(hi_y)); ++y)
    for (int x = static_cast<int>(std::floor(lo_x)); x <= static_cast<int>(std::ceil(hi_x)); ++x) {
      const float px = static_cast<float>(x) + 0.5f - x0f;
      const float py = static_cast<float>(y) + 0.5f - y0f;
      float t = len2 > 0.0f ? (px * vx + py * vy) / len2 : 0.0f;
      t = std::clamp(t, 0.0f, 1.0f);
      const float dx = px - t * vx, dy = py - t * vy;
      const float d = std::sqrt(dx * dx + dy * dy);
      blend(x, y, half_width - d + 0.5f, c);
    }
}

void Canvas::rect(float x0, float y0, float x1, float y1, Color c) {
  for (int y = static_cast<int>(std::floor(y0)); y <= static_cast<int>(std::ceil(y1)); ++y)
    for (int x = static_cast<int>(std::floor(x0)); x <= static_cast<int>(std::ceil(x1)); ++x) {
      const float cxp = static_cast<float>(x) + 0.5f, cyp = static_cast<float>(y) + 0.5f;
      const float covx = std::clamp(std::min(cxp - x0, x1 - cxp) + 0.5f, 0.0f, 1.0f);
      const float covy = std::clamp(std::min(cyp - y0, y1 - cyp) + 0.5f, 0.0f, 1.0f);
      blend(x, y, covx * covy, c);
    }
}

Tensor Canvas::to_tensor() const { return Tensor({h_, w_, 3}, rgb_); }

void Canvas::write_ppm(const Tensor& image, const std::string& path) {
  if (image.shape.size() != 3 || image.shape[2] != 3)
    throw std::invalid_argument("write_ppm: image must be HxWx3");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_ppm: cannot open '" + path + "'");
  f << "P6\n" << image.shape[1] << " " << image.shape[0] << "\n255\n";
  for (float v : image.data) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    f.put(static_cast<char>(static_cast<int>(std::lround(c * 255.0f))));
  }
  if (!f) throw std::runtime_error("write_ppm: write failed for '" + path + "'");
}

}  // namespace icac
