#ifndef GREEDYFOOL_PERCEPTUAL_METRICS_HPP
#define GREEDYFOOL_PERCEPTUAL_METRICS_HPP

// Human-visual-system quantities and the multi-factor perceptual loss.
//
// Four effects are combined per pixel and per colour channel:
//   - luminance-dependent visibility threshold (JND curve),
//   - Weber-Fechner style perceived stimulus, tabulated as a cumulative
//     sum of 1/JND over intensity levels,
//   - texture masking through the 3x3 standard deviation of the benign image,
//   - channel sensitivity weights (RGB2GRAY coefficients by default).
//
// Every function here is pure; a PsTable is built once and may be shared
// read-only between threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "greedyfool/errors.hpp"
#include "greedyfool/image.hpp"

namespace greedyfool::metrics {

inline constexpr int kMaxIntensity = 255;
inline constexpr int kWindowRadius = 1; // 3x3 windows

namespace detail {

inline void require_intensity(double v, const char* what)
{
    if (!(v >= 0.0 && v <= kMaxIntensity))
        throw InvalidArgument(std::string(what) + " " + std::to_string(v) + " outside [0, 255]");
}

// Edge-replicated 3x3 neighbourhood of one channel.
inline std::array<std::uint8_t, 9> window3x3(const ImageTensor& image, std::size_t x, std::size_t y, Channel c)
{
    require_inside(image, x, y);
    std::array<std::uint8_t, 9> values{};
    const auto max_x = static_cast<std::ptrdiff_t>(image.width()) - 1;
    const auto max_y = static_cast<std::ptrdiff_t>(image.height()) - 1;
    std::size_t k = 0;
    for (std::ptrdiff_t dy = -kWindowRadius; dy <= kWindowRadius; ++dy) {
        for (std::ptrdiff_t dx = -kWindowRadius; dx <= kWindowRadius; ++dx) {
            const auto sx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x) + dx, 0, max_x);
            const auto sy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y) + dy, 0, max_y);
            values[k++] = image.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy), c);
        }
    }
    return values;
}

} // namespace detail

/// Visibility threshold as a function of (maximum) background luminance.
/// Minimum of 3 at luminance 127, 20 at black, 6 at white.
inline double jnd_curve(double luminance)
{
    detail::require_intensity(luminance, "luminance");
    if (luminance <= 127.0)
        return 17.0 * (1.0 - std::sqrt(luminance / 127.0)) + 3.0;
    return 3.0 / 128.0 * (luminance - 127.0) + 3.0;
}

/// JND at a pixel: the curve evaluated at the brightest value of the 3x3 window.
inline double jnd_at(const ImageTensor& image, std::size_t x, std::size_t y, Channel c)
{
    const auto window = detail::window3x3(image, x, y, c);
    return jnd_curve(*std::max_element(window.begin(), window.end()));
}

/// Population standard deviation of the 3x3 window (divides by 9).
inline double texture_sd(const ImageTensor& image, std::size_t x, std::size_t y, Channel c)
{
    const auto window = detail::window3x3(image, x, y, c);
    double mean = 0.0;
    for (auto v : window)
        mean += v;
    mean /= static_cast<double>(window.size());
    double sq = 0.0;
    for (auto v : window) {
        const double d = v - mean;
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(window.size()));
}

/// Non-negative channel sensitivities summing to one.
class ChannelWeights {
public:
    ChannelWeights() = default;

    ChannelWeights(double red, double green, double blue) : w_{red, green, blue}
    {
        if (red < 0.0 || green < 0.0 || blue < 0.0)
            throw InvalidArgument("channel weights must be non-negative");
        if (std::abs(red + green + blue - 1.0) > 1e-9)
            throw InvalidArgument("channel weights must sum to 1");
    }

    double operator[](Channel c) const noexcept { return w_[static_cast<std::size_t>(c)]; }
    double red() const noexcept { return w_[0]; }
    double green() const noexcept { return w_[1]; }
    double blue() const noexcept { return w_[2]; }

private:
    std::array<double, 3> w_{0.299, 0.587, 0.114};
};

/// Cumulative perceived-stimulus table: cumulative[v] = k * sum_{i<v} 1/jnd_curve(i).
///
/// k is chosen so that cumulative[255] == 255, with cumulative[0] == 0
/// (the offset constant vanishes).
class PsTable {
public:
    static PsTable build()
    {
        PsTable t;
        std::array<double, kMaxIntensity + 1> raw{};
        raw[0] = 0.0;
        for (int v = 1; v <= kMaxIntensity; ++v)
            raw[v] = raw[v - 1] + 1.0 / jnd_curve(v - 1);
        t.k_ = kMaxIntensity / raw[kMaxIntensity];
        for (int v = 0; v <= kMaxIntensity; ++v)
            t.cumulative_[v] = t.k_ * raw[v];
        return t;
    }

    double k() const noexcept { return k_; }
    double operator[](std::uint8_t v) const noexcept { return cumulative_[v]; }
    std::span<const double, kMaxIntensity + 1> cumulative() const noexcept { return cumulative_; }

private:
    PsTable() = default;

    double k_ = 0.0;
    std::array<double, kMaxIntensity + 1> cumulative_{};
};

inline const PsTable& default_ps_table()
{
    static const PsTable table = PsTable::build();
    return table;
}

/// Perceived stimulus of moving a channel from `original` to `perturbed`.
inline double ps_of_change(const PsTable& table, int original, int perturbed)
{
    detail::require_intensity(original, "original intensity");
    detail::require_intensity(perturbed, "perturbed intensity");
    return std::abs(table[static_cast<std::uint8_t>(perturbed)] - table[static_cast<std::uint8_t>(original)]);
}

struct PixelLossBreakdown {
    std::array<double, 3> ps{};        // perceived stimulus per channel
    std::array<double, 3> sd{};        // raw 3x3 SD on the benign image
    std::array<double, 3> weighted{};  // lambda_c * ps_c / max(sd_c, floor)
    double total = 0.0;
};

inline constexpr double kDefaultSdFloor = 1.0;

/// Weights, stimulus table and SD floor: everything the per-pixel loss needs.
struct LossModel {
    ChannelWeights weights{};
    double sd_floor = kDefaultSdFloor;
    PsTable table = default_ps_table();

    void validate() const
    {
        if (!(sd_floor > 0.0) || !std::isfinite(sd_floor))
            throw InvalidArgument("SD floor must be a positive finite number");
    }
};

/// Perceptual loss of writing `unit` into `benign`.
inline PixelLossBreakdown integ_loss(const ImageTensor& benign, const PerturbationUnit& unit,
                                     const ChannelWeights& weights, const PsTable& table,
                                     double sd_floor = kDefaultSdFloor)
{
    require_inside(benign, unit.x, unit.y);
    PixelLossBreakdown out;
    for (Channel c : kChannels) {
        const auto i = static_cast<std::size_t>(c);
        out.ps[i] = ps_of_change(table, benign.at(unit.x, unit.y, c), unit.value(c));
        out.sd[i] = texture_sd(benign, unit.x, unit.y, c);
        out.weighted[i] = weights[c] * out.ps[i] / std::max(out.sd[i], sd_floor);
        out.total += out.weighted[i];
    }
    return out;
}

inline PixelLossBreakdown integ_loss(const ImageTensor& benign, const PerturbationUnit& unit, const LossModel& model)
{
    return integ_loss(benign, unit, model.weights, model.table, model.sd_floor);
}

struct PixelLoss {
    PerturbationUnit unit;
    PixelLossBreakdown breakdown;
};

/// Per-pixel losses over exactly the pixels where the images differ, row-major.
inline std::vector<PixelLoss> pixel_losses(const ImageTensor& benign, const ImageTensor& adversarial,
                                           const ChannelWeights& weights, const PsTable& table,
                                           double sd_floor = kDefaultSdFloor)
{
    require_same_shape(benign, adversarial);
    std::vector<PixelLoss> out;
    for (std::size_t y = 0; y < benign.height(); ++y) {
        for (std::size_t x = 0; x < benign.width(); ++x) {
            if (benign.pixel(x, y) == adversarial.pixel(x, y))
                continue;
            const auto p = adversarial.pixel(x, y);
            const PerturbationUnit unit{x, y, p[0], p[1], p[2]};
            out.push_back({unit, integ_loss(benign, unit, weights, table, sd_floor)});
        }
    }
    return out;
}

inline double mul_factor_loss(const ImageTensor& benign, const ImageTensor& adversarial,
                              const ChannelWeights& weights, const PsTable& table, double sd_floor = kDefaultSdFloor)
{
    double total = 0.0;
    for (const auto& p : pixel_losses(benign, adversarial, weights, table, sd_floor))
        total += p.breakdown.total;
    return total;
}

inline double mul_factor_loss(const ImageTensor& benign, const ImageTensor& adversarial, const LossModel& model)
{
    return mul_factor_loss(benign, adversarial, model.weights, model.table, model.sd_floor);
}

struct LpNorms {
    std::size_t l0 = 0; // pixels with any channel changed
    double l2 = 0.0;
    double linf = 0.0;
};

inline LpNorms lp_norms(const ImageTensor& benign, const ImageTensor& adversarial)
{
    require_same_shape(benign, adversarial);
    LpNorms n;
    double sq = 0.0;
    for (std::size_t y = 0; y < benign.height(); ++y) {
        for (std::size_t x = 0; x < benign.width(); ++x) {
            bool changed = false;
            for (Channel c : kChannels) {
                const double d = std::abs(double(adversarial.at(x, y, c)) - double(benign.at(x, y, c)));
                if (d != 0.0)
                    changed = true;
                sq += d * d;
                n.linf = std::max(n.linf, d);
            }
            if (changed)
                ++n.l0;
        }
    }
    n.l2 = std::sqrt(sq);
    return n;
}

} // namespace greedyfool::metrics

#endif // GREEDYFOOL_PERCEPTUAL_METRICS_HPP
