#pragma once

#include <string>
#include <vector>

#include "pfe/cluster.hpp"

namespace pfe {

/// RGB image with channel values in [0,1], row-major.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // height*width*3

  double& at(int row, int col, int channel) {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
  double at(int row, int col, int channel) const {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
};

/// Reads a binary PPM (P6, maxval 255); values are mapped to [0,1] by v/255.
RgbImage load_image(const std::string& path);

/// Writes a binary PPM (P6, maxval 255). Round-trips load_image bit-exactly
/// for images whose values are multiples of 1/255.
void save_image(const RgbImage& img, const std::string& path);

/// factor x factor box average; trailing rows/cols that do not fill a full
/// box are dropped.
RgbImage downsample(const RgbImage& img, int factor);

enum class LabelFormat { Pgm, Csv };

/// Writes a label map. PGM is P5 with raw 16-bit big-endian samples; CSV is
/// one text row per image row. Requires an image layout on the segmentation.
void save_labels(const Segmentation& seg, const std::string& path, LabelFormat format);

/// Reads a label map written by save_labels (format detected from content).
Segmentation load_labels(const std::string& path);

}  // namespace pfe
