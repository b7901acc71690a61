/* Copyright 2026 The bseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License. */
#ifndef BSEG_DATA_PNG_IO_HPP
#define BSEG_DATA_PNG_IO_HPP

#include <cmath>
#include <algorithm>
#include <cstring>
#include <fstream>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "bseg/error.hpp"
#include "bseg/tensor.hpp"

namespace bseg::data {

/// 8-bit interleaved pixels, `channels` is 1 (gray) or 3 (RGB).
struct Image8 {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<std::uint8_t> pixels;

    friend bool operator==(const Image8&, const Image8&) = default;
};

namespace detail {

struct PngHeader {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int bit_depth = 0;
    int color_type = 0;
};

inline std::uint32_t be32(const unsigned char* p)
{
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

/// The IHDR chunk always starts at byte 8 of a PNG stream.
inline PngHeader read_png_header(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    unsigned char head[26];
    if (!in.read(reinterpret_cast<char*>(head), sizeof(head)) || png_sig_cmp(head, 0, 8) != 0 ||
        std::memcmp(head + 12, "IHDR", 4) != 0)
        throw Error(path.string() + " is not a PNG file");
    return {be32(head + 16), be32(head + 20), head[24], head[25]};
}

} // namespace detail

/// Reads an 8-bit gray or RGB PNG without colour conversion.
inline Image8 read_png(const std::filesystem::path& path)
{
    const auto header = detail::read_png_header(path);
    if (header.bit_depth != 8)
        throw Error(path.string() + ": expected 8-bit samples, got " + std::to_string(header.bit_depth) + "-bit");
    std::size_t channels = 0;
    png_uint_32 format = 0;
    switch (header.color_type) {
    case PNG_COLOR_TYPE_GRAY: channels = 1, format = PNG_FORMAT_GRAY; break;
    case PNG_COLOR_TYPE_RGB: channels = 3, format = PNG_FORMAT_RGB; break;
    case PNG_COLOR_TYPE_RGB_ALPHA: throw Error(path.string() + ": RGBA images are not supported (4 channels)");
    case PNG_COLOR_TYPE_GRAY_ALPHA: throw Error(path.string() + ": gray+alpha images are not supported (2 channels)");
    default: throw Error(path.string() + ": palette PNGs are not supported");
    }

    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw Error(path.string() + ": " + image.message);
    image.format = format;
    Image8 img{image.height, image.width, channels,
               std::vector<std::uint8_t>(std::size_t{image.height} * image.width * channels)};
    if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(path.string() + ": " + msg);
    }
    return img;
}

/// Deterministic encoder: equal pixels give equal bytes.
inline void write_png(const std::filesystem::path& path, const Image8& img)
{
    if (img.channels != 1 && img.channels != 3)
        throw Error("write_png supports 1 or 3 channels");
    if (img.pixels.size() != img.height * img.width * img.channels)
        throw Error("write_png pixel buffer size mismatch");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr))
        throw Error("cannot write " + path.string() + ": " + image.message);
}

/// RGB image scaled to [0,1] as [3,H,W].
template <typename T = double>
Tensor<T> load_image(const std::filesystem::path& path)
{
    const Image8 img = read_png(path);
    if (img.channels != 3)
        throw Error(path.string() + ": expected an RGB image, got " + std::to_string(img.channels) + " channel(s)");
    const std::size_t plane = img.height * img.width;
    Tensor<T> out({3, img.height, img.width});
    for (std::size_t i = 0; i < plane; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            out[c * plane + i] = static_cast<T>(img.pixels[i * 3 + c]) / T{255};
    return out;
}

inline Mask load_mask(const std::filesystem::path& path)
{
    Image8 img = read_png(path);
    if (img.channels != 1)
        throw Error(path.string() + ": expected a single-channel mask, got " + std::to_string(img.channels) +
                    " channels");
    return Mask({img.height, img.width}, std::move(img.pixels));
}

template <typename T>
Image8 to_image8(const Tensor<T>& image)
{
    if (image.rank() != 3 || image.dim(0) != 3)
        throw Error("to_image8 expects [3,H,W]");
    const std::size_t h = image.dim(1), w = image.dim(2), plane = h * w;
    Image8 img{h, w, 3, std::vector<std::uint8_t>(plane * 3)};
    for (std::size_t i = 0; i < plane; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            const double v = std::clamp(static_cast<double>(image[c * plane + i]), 0.0, 1.0);
            img.pixels[i * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    return img;
}

template <typename T>
void save_image(const std::filesystem::path& path, const Tensor<T>& image)
{
    write_png(path, to_image8(image));
}

inline void save_mask(const std::filesystem::path& path, const Mask& mask)
{
    if (mask.rank() != 2)
        throw Error("save_mask expects [H,W]");
    write_png(path, Image8{mask.dim(0), mask.dim(1), 1, {mask.data().begin(), mask.data().end()}});
}

} // namespace bseg::data

#endif
