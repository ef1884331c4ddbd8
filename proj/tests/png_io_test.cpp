#include <filesystem>
#include <vector>

#include <gtest/gtest.h>
#include <png.h>

#include <greedyfool/png_io.hpp>

#include "test_support.hpp"

using namespace greedyfool;

namespace {

std::vector<std::uint8_t> encode_with_format(png_uint_32 format, png_uint_32 w, png_uint_32 h)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = w;
    image.height = h;
    image.format = format;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image), 77);
    png_alloc_size_t size = 0;
    png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr);
    std::vector<std::uint8_t> out(size);
    EXPECT_TRUE(png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr));
    out.resize(size);
    return out;
}

} // namespace

TEST(PngIo, RoundTripIsLossless)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto img = testing_support::random_image(3 + seed, 17 - seed, seed);
        EXPECT_EQ(png::decode(png::encode(img)), img);
    }
}

TEST(PngIo, FileRoundTrip)
{
    const auto path = std::filesystem::temp_directory_path() / "greedyfool_png_io_test.png";
    const auto img = testing_support::blocky_image(20, 12, 3);
    png::write(path, img);
    EXPECT_EQ(png::read(path), img);
    std::filesystem::remove(path);
}

TEST(PngIo, RejectsNonRgbFormats)
{
    for (png_uint_32 format : {png_uint_32(PNG_FORMAT_GRAY), png_uint_32(PNG_FORMAT_RGBA), png_uint_32(PNG_FORMAT_GA)}) {
        const auto bytes = encode_with_format(format, 5, 4);
        EXPECT_THROW(png::decode(bytes), ImageIoError) << "format " << format;
    }
}

TEST(PngIo, RejectsGarbageAndMissingFiles)
{
    const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_THROW(png::decode(junk), ImageIoError);
    auto truncated = png::encode(ImageTensor(8, 8, 40));
    truncated.resize(truncated.size() / 2);
    EXPECT_THROW(png::decode(truncated), ImageIoError);
    EXPECT_THROW(png::read("/nonexistent/dir/x.png"), ImageIoError);
    EXPECT_THROW(png::encode(ImageTensor{}), ImageIoError);
}
