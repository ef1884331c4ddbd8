#ifndef GREEDYFOOL_IMAGE_HPP
#define GREEDYFOOL_IMAGE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "greedyfool/errors.hpp"

namespace greedyfool {

enum class Channel : std::size_t { red = 0, green = 1, blue = 2 };

inline constexpr std::array<Channel, 3> kChannels{Channel::red, Channel::green, Channel::blue};

/// H x W x 3 grid of 8-bit intensities, row-major, interleaved R,G,B.
class ImageTensor {
public:
    static constexpr std::size_t kChannelCount = 3;

    ImageTensor() = default;

    ImageTensor(std::size_t height, std::size_t width, std::uint8_t fill = 0)
        : height_(height), width_(width), data_(height * width * kChannelCount, fill)
    {
    }

    ImageTensor(std::size_t height, std::size_t width, std::vector<std::uint8_t> data)
        : height_(height), width_(width), data_(std::move(data))
    {
        if (data_.size() != height_ * width_ * kChannelCount)
            throw ShapeMismatch("image data holds " + std::to_string(data_.size()) + " bytes, expected "
                                + std::to_string(height_ * width_ * kChannelCount));
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(std::size_t x, std::size_t y) const noexcept { return x < width_ && y < height_; }

    std::uint8_t at(std::size_t x, std::size_t y, Channel c) const { return data_[offset(x, y, c)]; }
    std::uint8_t& at(std::size_t x, std::size_t y, Channel c) { return data_[offset(x, y, c)]; }

    std::array<std::uint8_t, 3> pixel(std::size_t x, std::size_t y) const
    {
        const std::size_t o = offset(x, y, Channel::red);
        return {data_[o], data_[o + 1], data_[o + 2]};
    }

    std::span<const std::uint8_t> bytes() const noexcept { return data_; }
    std::span<std::uint8_t> bytes() noexcept { return data_; }

    bool same_shape(const ImageTensor& other) const noexcept
    {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    std::size_t offset(std::size_t x, std::size_t y, Channel c) const noexcept
    {
        return (y * width_ + x) * kChannelCount + static_cast<std::size_t>(c);
    }

    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::uint8_t> data_;
};

inline void require_same_shape(const ImageTensor& a, const ImageTensor& b)
{
    if (!a.same_shape(b))
        throw ShapeMismatch("image shapes differ: " + std::to_string(a.height()) + "x" + std::to_string(a.width())
                            + " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
}

inline void require_inside(const ImageTensor& image, std::size_t x, std::size_t y)
{
    if (!image.contains(x, y))
        throw InvalidArgument("pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") outside "
                              + std::to_string(image.width()) + "x" + std::to_string(image.height()) + " image");
}

/// One single-pixel perturbation: column x, row y (zero-based) and the replacement colour.
struct PerturbationUnit {
    std::size_t x = 0;
    std::size_t y = 0;
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    std::uint8_t value(Channel c) const noexcept
    {
        switch (c) {
        case Channel::red:
            return r;
        case Channel::green:
            return g;
        default:
            return b;
        }
    }

    friend bool operator==(const PerturbationUnit&, const PerturbationUnit&) = default;
};

/// True when writing `unit` would leave the image unchanged.
inline bool is_noop(const ImageTensor& image, const PerturbationUnit& unit)
{
    const auto p = image.pixel(unit.x, unit.y);
    return p[0] == unit.r && p[1] == unit.g && p[2] == unit.b;
}

inline void apply_in_place(ImageTensor& image, const PerturbationUnit& unit)
{
    require_inside(image, unit.x, unit.y);
    for (Channel c : kChannels)
        image.at(unit.x, unit.y, c) = unit.value(c);
}

inline ImageTensor apply(ImageTensor image, const PerturbationUnit& unit)
{
    apply_in_place(image, unit);
    return image;
}

} // namespace greedyfool

#endif // GREEDYFOOL_IMAGE_HPP
