//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/image.hpp"

#include "edgecnn/errors.hpp"
#include "edgecnn/model_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

namespace edgecnn
{

namespace
{

constexpr std::uint8_t kPngSignature[8] = { 0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n' };

class PpmHeaderReader
{
public:
    explicit PpmHeaderReader(std::span<const std::uint8_t> bytes)
        : bytes_(bytes)
    {}

    int next_int(const char* field)
    {
        skip_space_and_comments();
        const std::size_t begin = pos_;
        long value              = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]))
        {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000)
            {
                throw FormatError(std::string("PPM ") + field + " is out of range", begin);
            }
            ++pos_;
        }
        if (pos_ == begin)
        {
            throw FormatError(std::string("PPM header: expected ") + field, pos_);
        }
        return static_cast<int>(value);
    }

    /// Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start()
    {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
        {
            throw FormatError("PPM header: expected whitespace before raster", pos_);
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size())
        {
            if (bytes_[pos_] == '#')
            {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                {
                    ++pos_;
                }
            }
            else if (std::isspace(bytes_[pos_]))
            {
                ++pos_;
            }
            else
            {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

std::uint8_t to_byte(float v)
{
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}    // namespace

Tensor decode_ppm(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    {
        throw FormatError("not a binary PPM (P6) file", 0);
    }
    PpmHeaderReader reader(bytes);
    const int width  = reader.next_int("width");
    const int height = reader.next_int("height");
    const int maxval = reader.next_int("maxval");
    if (width <= 0 || height <= 0)
    {
        throw FormatError("PPM dimensions must be positive", 2);
    }
    if (maxval != 255)
    {
        throw FormatError("PPM maxval must be 255, got " + std::to_string(maxval), 2);
    }
    const std::size_t start = reader.raster_start();
    const std::size_t need  = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    if (bytes.size() - std::min(start, bytes.size()) < need)
    {
        throw FormatError("PPM raster truncated: need " + std::to_string(need) + " bytes", bytes.size());
    }

    Tensor out(Shape::hwc(height, width, 3));
    for (std::size_t k = 0; k < need; ++k)
    {
        out[k] = static_cast<float>(bytes[start + k]);
    }
    return out;
}

Tensor decode_png(std::span<const std::uint8_t> bytes)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    {
        throw FormatError(std::string("PNG: ") + image.message);
    }
    // RGBA keeps the stored color values untouched; alpha is discarded below.
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr))
    {
        const std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("PNG: " + msg);
    }

    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);
    Tensor out(Shape::hwc(h, w, 3));
    const std::size_t pixels = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    for (std::size_t p = 0; p < pixels; ++p)
    {
        for (std::size_t c = 0; c < 3; ++c)
        {
            out[p * 3 + c] = static_cast<float>(rgba[p * 4 + c]);
        }
    }
    return out;
}

Tensor decode_image(const std::filesystem::path& path)
{
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    try
    {
        if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0)
        {
            return decode_png(bytes);
        }
        if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6')
        {
            return decode_ppm(bytes);
        }
    }
    catch (const FormatError& e)
    {
        throw FormatError(path.string() + ": " + e.what());
    }
    catch (const ShapeError& e)
    {
        throw FormatError(path.string() + ": " + e.what());
    }
    throw FormatError(path.string() + ": unrecognized image signature", 0);
}

Tensor resize_bilinear(const Tensor& image, int out_height, int out_width)
{
    const Shape& s = image.shape();
    if (s.rank() != 3)
    {
        throw ShapeError("resize_bilinear: expected rank-3 image, got " + s.str());
    }
    if (out_height <= 0 || out_width <= 0)
    {
        throw ShapeError("resize_bilinear: target size must be positive");
    }
    const int ih = s.height();
    const int iw = s.width();
    const int c  = s.channels();
    if (ih == out_height && iw == out_width)
    {
        return image;
    }

    auto source = [](int dst, int in, int out, int& lo, int& hi, float& frac) {
        const double pos     = (dst + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
        const double clamped = std::clamp(pos, 0.0, static_cast<double>(in - 1));
        lo                   = static_cast<int>(std::floor(clamped));
        hi                   = std::min(lo + 1, in - 1);
        frac                 = static_cast<float>(clamped - lo);
    };

    Tensor out(Shape::hwc(out_height, out_width, c));
    for (int y = 0; y < out_height; ++y)
    {
        int y0, y1;
        float fy;
        source(y, ih, out_height, y0, y1, fy);
        for (int x = 0; x < out_width; ++x)
        {
            int x0, x1;
            float fx;
            source(x, iw, out_width, x0, x1, fx);
            for (int ch = 0; ch < c; ++ch)
            {
                const float top    = image.at(y0, x0, ch) * (1.0f - fx) + image.at(y0, x1, ch) * fx;
                const float bottom = image.at(y1, x0, ch) * (1.0f - fx) + image.at(y1, x1, ch) * fx;
                out.at(y, x, ch)   = top * (1.0f - fy) + bottom * fy;
            }
        }
    }
    return out;
}

Tensor load_normalized_image(const std::filesystem::path& path, int height, int width)
{
    Tensor t = resize_bilinear(decode_image(path), height, width);
    for (float& v : t.data())
    {
        v = std::clamp(v / 255.0f, 0.0f, 1.0f);
    }
    return t;
}

std::vector<std::uint8_t> encode_png(const Tensor& image)
{
    const Shape& s = image.shape();
    if (s.rank() != 3 || (s.channels() != 1 && s.channels() != 3))
    {
        throw ShapeError("encode_png: expected h x w x 1 or h x w x 3, got " + s.str());
    }
    std::vector<std::uint8_t> pixels(image.size());
    std::transform(image.data().begin(), image.data().end(), pixels.begin(), to_byte);

    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width   = static_cast<png_uint_32>(s.width());
    img.height  = static_cast<png_uint_32>(s.height());
    img.format  = s.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr))
    {
        throw FormatError(std::string("PNG encode: ") + img.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr))
    {
        throw FormatError(std::string("PNG encode: ") + img.message);
    }
    out.resize(size);
    return out;
}

std::vector<std::uint8_t> encode_ppm(const Tensor& image)
{
    const Shape& s = image.shape();
    if (s.rank() != 3 || (s.channels() != 1 && s.channels() != 3))
    {
        throw ShapeError("encode_ppm: expected h x w x 1 or h x w x 3, got " + s.str());
    }
    const std::string header =
        "P6\n" + std::to_string(s.width()) + " " + std::to_string(s.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const std::size_t pixels = static_cast<std::size_t>(s.width()) * static_cast<std::size_t>(s.height());
    for (std::size_t p = 0; p < pixels; ++p)
    {
        for (int c = 0; c < 3; ++c)
        {
            const std::size_t src = s.channels() == 1 ? p : p * 3 + static_cast<std::size_t>(c);
            out.push_back(to_byte(image[src]));
        }
    }
    return out;
}

void write_image(const std::filesystem::path& path, const Tensor& image)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    write_file_bytes(path, ext == ".png" ? encode_png(image) : encode_ppm(image));
}

}    // namespace edgecnn
