// vgkws/plot.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vgkws/common.hpp"

namespace vgkws {

namespace {

struct Rgb {
  unsigned char r, g, b;
};

constexpr Rgb kBackground{255, 255, 255};
constexpr Rgb kWaveColor{160, 180, 220};
constexpr Rgb kAttentionColor{200, 60, 40};
constexpr Rgb kMarkerColor{20, 120, 40};

class Canvas {
 public:
  Canvas(int width, int height) : width_(width), height_(height),
                                  pixels_(static_cast<std::size_t>(width) * height,
                                          kBackground) {}

  void set(int x, int y, Rgb c) {
    if (x >= 0 && x < width_ && y >= 0 && y < height_) {
      pixels_[static_cast<std::size_t>(y) * width_ + x] = c;
    }
  }

  void vline(int x, int y0, int y1, Rgb c) {
    if (y0 > y1) std::swap(y0, y1);
    for (int y = y0; y <= y1; ++y) set(x, y, c);
  }

  void save_bmp(const std::filesystem::path& path) const {
    const int row_bytes = (width_ * 3 + 3) & ~3;
    const std::uint32_t pixel_bytes = static_cast<std::uint32_t>(row_bytes) * height_;
    std::string out;
    out.reserve(54 + pixel_bytes);

    auto u32 = [&out](std::uint32_t v) {
      char b[4];
      std::memcpy(b, &v, 4);
      out.append(b, 4);
    };
    auto u16 = [&out](std::uint16_t v) {
      char b[2];
      std::memcpy(b, &v, 2);
      out.append(b, 2);
    };

    out += "BM";
    u32(54 + pixel_bytes);
    u32(0);
    u32(54);
    u32(40);  // BITMAPINFOHEADER
    u32(static_cast<std::uint32_t>(width_));
    u32(static_cast<std::uint32_t>(height_));
    u16(1);
    u16(24);
    u32(0);
    u32(pixel_bytes);
    u32(2835);
    u32(2835);
    u32(0);
    u32(0);

    std::string row(row_bytes, '\0');
    for (int y = height_ - 1; y >= 0; --y) {  // BMP is bottom-up
      for (int x = 0; x < width_; ++x) {
        const Rgb& p = pixels_[static_cast<std::size_t>(y) * width_ + x];
        row[3 * x + 0] = static_cast<char>(p.b);
        row[3 * x + 1] = static_cast<char>(p.g);
        row[3 * x + 2] = static_cast<char>(p.r);
      }
      out += row;
    }
    write_file_atomic(path, out);
  }

 private:
  int width_, height_;
  std::vector<Rgb> pixels_;
};

}  // namespace

void plot_localisation(const std::filesystem::path& path, const Waveform& wav,
                       const FeatureSequence& features, const LocalisationResult& result,
                       int downsample_factor) {
  const int width = 800;
  const int height = 300;
  const int mid = height / 2;
  Canvas canvas(width, height);

  const double duration = wav.duration_s();
  if (duration <= 0.0) throw UsageError("plot_localisation: empty waveform");

  // Waveform envelope per pixel column.
  const std::size_t n = wav.samples.size();
  for (int x = 0; x < width; ++x) {
    std::size_t lo = n * x / width;
    std::size_t hi = std::max(lo + 1, n * (x + 1) / width);
    double peak = 0.0;
    for (std::size_t i = lo; i < hi && i < n; ++i) {
      peak = std::max(peak, std::abs(wav.samples[i]));
    }
    int extent = static_cast<int>(peak * (mid - 10));
    canvas.vline(x, mid - extent, mid + extent, kWaveColor);
  }

  // Attention curve, one encoder frame = downsample_factor feature hops.
  const Eigen::VectorXd& att = result.attention.weights;
  const double att_max = std::max(att.maxCoeff(), 1e-12);
  int prev_y = -1;
  for (int x = 0; x < width; ++x) {
    double t = duration * x / width;
    double frame = t / (features.frame_hop_s * downsample_factor);
    auto idx = std::min<Eigen::Index>(static_cast<Eigen::Index>(frame), att.size() - 1);
    int y = height - 20 - static_cast<int>(att[idx] / att_max * (height - 40));
    if (prev_y >= 0) canvas.vline(x, std::min(prev_y, y), std::max(prev_y, y), kAttentionColor);
    canvas.set(x, y, kAttentionColor);
    prev_y = y;
  }

  int marker_x = static_cast<int>(result.predicted_time_s / duration * width);
  canvas.vline(marker_x, 0, height - 1, kMarkerColor);
  canvas.vline(marker_x + 1, 0, height - 1, kMarkerColor);

  canvas.save_bmp(path);
}

void plot_heatmap(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
  const int cell = 12;
  const int width = static_cast<int>(values.cols()) * cell;
  const int height = static_cast<int>(values.rows()) * cell;
  Canvas canvas(width, height);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      double v = std::clamp(values(i, j), 0.0, 1.0);
      auto shade = static_cast<unsigned char>(255.0 * (1.0 - v));
      for (int dy = 0; dy < cell; ++dy) {
        for (int dx = 0; dx < cell; ++dx) {
          canvas.set(static_cast<int>(j) * cell + dx, static_cast<int>(i) * cell + dy,
                     Rgb{255, shade, shade});
        }
      }
    }
  }
  canvas.save_bmp(path);
}

}  // namespace vgkws
