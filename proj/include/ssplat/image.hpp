// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace ssplat {

// Planar channel-major image: data[(c*H + y)*W + x]. Channels are 3 (RGB),
// 12 (RGB + 9 features) or 15 (concatenated observation + rendering).
class FeatureImage {
  public:
    FeatureImage() = default;
    FeatureImage(int width, int height, int channels);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }

    double& at(int c, int y, int x) { return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x]; }
    double at(int c, int y, int x) const {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // First 3 channels as an RGB image.
    FeatureImage rgb() const;

  private:
    int width_ = 0, height_ = 0, channels_ = 0;
    std::vector<double> data_;
};

// Binary P6, 8-bit, round(255*clamp(v,0,1)) per channel, no gamma.
void save_ppm(const std::string& path, const FeatureImage& img);

// Raw float image: 16-byte header (magic "FIMG", u32 LE width/height/channels)
// followed by little-endian f32 data, channel-major.
std::string fimg_to_bytes(const FeatureImage& img);
void save_fimg(const std::string& path, const FeatureImage& img);
FeatureImage load_fimg(const std::string& path);

}  // namespace ssplat
