#ifndef GREEDYFOOL_PNG_IO_HPP
#define GREEDYFOOL_PNG_IO_HPP

// Lossless 8-bit RGB PNG I/O on top of libpng's simplified API.
// Grayscale, alpha, palette and 16-bit inputs are rejected, not converted.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <png.h>

#include "greedyfool/errors.hpp"
#include "greedyfool/image.hpp"

namespace greedyfool::png {

namespace detail {

struct ImageGuard {
    png_image* image;
    ~ImageGuard() { png_image_free(image); }
};

inline ImageTensor finish_decode(png_image& image, const std::string& origin)
{
    ImageGuard guard{&image};
    if (image.format != PNG_FORMAT_RGB)
        throw ImageIoError(origin + ": only 8-bit RGB PNGs are supported (no alpha, palette, grayscale or 16-bit)");
    std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr))
        throw ImageIoError(origin + ": " + image.message);
    return ImageTensor(image.height, image.width, std::move(data));
}

inline png_image rgb_header(const ImageTensor& tensor)
{
    if (tensor.empty())
        throw ImageIoError("cannot encode an empty image");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(tensor.width());
    image.height = static_cast<png_uint_32>(tensor.height());
    image.format = PNG_FORMAT_RGB;
    return image;
}

} // namespace detail

inline ImageTensor decode(std::span<const std::uint8_t> bytes)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw ImageIoError(std::string("PNG decode failed: ") + image.message);
    return detail::finish_decode(image, "PNG decode");
}

inline std::vector<std::uint8_t> encode(const ImageTensor& tensor)
{
    png_image image = detail::rgb_header(tensor);
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, tensor.bytes().data(), 0, nullptr))
        throw ImageIoError(std::string("PNG encode failed: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, tensor.bytes().data(), 0, nullptr))
        throw ImageIoError(std::string("PNG encode failed: ") + image.message);
    out.resize(size);
    return out;
}

inline ImageTensor read(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ImageIoError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode(bytes);
    }
    catch (const ImageIoError& e) {
        throw ImageIoError(path.string() + ": " + e.what());
    }
}

inline void write(const std::filesystem::path& path, const ImageTensor& tensor)
{
    const auto bytes = encode(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ImageIoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw ImageIoError("short write to " + path.string());
}

} // namespace greedyfool::png

#endif // GREEDYFOOL_PNG_IO_HPP
