// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ssplat {

FeatureImage::FeatureImage(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) throw std::invalid_argument("image: zero-sized image");
    if (channels != 3 && channels != 12 && channels != 15)
        throw std::invalid_argument("image: channels must be 3, 12 or 15");
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

FeatureImage FeatureImage::rgb() const {
    if (channels_ < 3) throw std::invalid_argument("image: rgb() needs >= 3 channels");
    FeatureImage out(width_, height_, 3);
    std::copy_n(data_.begin(), static_cast<std::size_t>(width_) * height_ * 3, out.data_.begin());
    return out;
}

void save_ppm(const std::string& path, const FeatureImage& img) {
    if (img.channels() < 3) throw std::invalid_argument("ppm: image needs >= 3 channels");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                row[static_cast<std::size_t>(x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(255.0 * v));
            }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

namespace {

void put_u32_le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

std::string fimg_to_bytes(const FeatureImage& img) {
    std::string out;
    out.reserve(16 + img.data().size() * 4);
    out += "FIMG";
    put_u32_le(out, static_cast<uint32_t>(img.width()));
    put_u32_le(out, static_cast<uint32_t>(img.height()));
    put_u32_le(out, static_cast<uint32_t>(img.channels()));
    for (double d : img.data()) {
        const float f = static_cast<float>(d);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32_le(out, bits);
    }
    return out;
}

void save_fimg(const std::string& path, const FeatureImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const std::string bytes = fimg_to_bytes(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FeatureImage load_fimg(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    if (bytes.size() < 16 || bytes.compare(0, 4, "FIMG") != 0)
        throw std::runtime_error("fimg: bad magic");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const uint32_t w = get_u32_le(p + 4), h = get_u32_le(p + 8), c = get_u32_le(p + 12);
    FeatureImage img(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
    const std::size_t n = static_cast<std::size_t>(w) * h * c;
    if (bytes.size() != 16 + n * 4) throw std::runtime_error("fimg: truncated file");
    for (std::size_t i = 0; i < n; ++i) {
        const uint32_t bits = get_u32_le(p + 16 + i * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        img.data()[i] = f;
    }
    return img;
}

}  // namespace ssplat
