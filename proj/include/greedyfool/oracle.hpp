#ifndef GREEDYFOOL_ORACLE_HPP
#define GREEDYFOOL_ORACLE_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "greedyfool/errors.hpp"
#include "greedyfool/image.hpp"

namespace greedyfool {

inline constexpr double kProbabilitySumTolerance = 1e-6;

/// Classifier confidences. Construction validates: at least two classes,
/// every entry in [0, 1], entries summing to 1 within 1e-6.
class ProbabilityVector {
public:
    explicit ProbabilityVector(std::vector<double> probabilities, std::vector<std::string> labels = {})
        : p_(std::move(probabilities)), labels_(std::move(labels))
    {
        if (p_.size() < 2)
            throw OracleProtocolError("probability vector needs at least 2 classes, got " + std::to_string(p_.size()));
        double sum = 0.0;
        for (double v : p_) {
            if (!(v >= 0.0 && v <= 1.0))
                throw OracleProtocolError("probability " + std::to_string(v) + " outside [0, 1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
            throw OracleProtocolError("probabilities sum to " + std::to_string(sum) + ", expected 1");
        if (!labels_.empty() && labels_.size() != p_.size())
            throw OracleProtocolError("label list length does not match probability count");
    }

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_.at(i); }
    const std::vector<double>& probabilities() const noexcept { return p_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// Lowest index among the maxima.
    std::size_t argmax() const noexcept
    {
        return static_cast<std::size_t>(std::max_element(p_.begin(), p_.end()) - p_.begin());
    }

    friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

private:
    std::vector<double> p_;
    std::vector<std::string> labels_;
};

struct OracleStats {
    std::uint64_t total_calls = 0; // predict() invocations
    std::uint64_t attempts = 0;    // transport attempts, >= total_calls for remote oracles
    std::uint64_t failures = 0;    // failed attempts, <= attempts
    std::chrono::nanoseconds cumulative_latency{0};
};

/// Anything that maps an image to class confidences.
template <typename O>
concept ConfidenceOracle = requires(O& oracle, const ImageTensor& image) {
    { oracle.predict(image) } -> std::convertible_to<ProbabilityVector>;
};

/// Runtime-polymorphic oracle, used where the concrete classifier is chosen at run time.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual ProbabilityVector predict(const ImageTensor& image) = 0;
    virtual OracleStats stats() const = 0;
};

struct InputShape {
    std::size_t height = 0;
    std::size_t width = 0;

    friend bool operator==(const InputShape&, const InputShape&) = default;
};

inline void require_input_shape(const ImageTensor& image, const InputShape& shape)
{
    if (image.height() != shape.height || image.width() != shape.width)
        throw ShapeMismatch("oracle expects " + std::to_string(shape.height) + "x" + std::to_string(shape.width)
                            + " input, got " + std::to_string(image.height()) + "x"
                            + std::to_string(image.width()));
}

namespace detail {

class CallRecorder {
public:
    void record(std::chrono::nanoseconds latency) noexcept
    {
        calls_.fetch_add(1, std::memory_order_relaxed);
        latency_ns_.fetch_add(latency.count(), std::memory_order_relaxed);
    }

    OracleStats snapshot() const noexcept
    {
        OracleStats s;
        s.total_calls = calls_.load();
        s.attempts = s.total_calls;
        s.cumulative_latency = std::chrono::nanoseconds(latency_ns_.load());
        return s;
    }

private:
    std::atomic<std::uint64_t> calls_{0};
    std::atomic<std::int64_t> latency_ns_{0};
};

} // namespace detail

/// Deterministic desk-scale classifier.
///
/// The image is block-averaged to an 8x8 grid of luminance values
/// (0.299 R + 0.587 G + 0.114 B, scaled to [0, 1]), multiplied by a fixed
/// seeded Gaussian matrix (no bias, rows centred to zero mean) and passed
/// through a softmax. A pixel only influences the grid cell that contains it.
class ToyClassifier final : public Oracle {
public:
    static constexpr std::size_t kGrid = 8;
    static constexpr std::size_t kFeatures = kGrid * kGrid;
    static constexpr double kDefaultWeightScale = 4.0;

    ToyClassifier(std::size_t num_classes, std::uint64_t seed, InputShape shape,
                  double weight_scale = kDefaultWeightScale)
        : num_classes_(num_classes), shape_(shape)
    {
        if (num_classes < 2)
            throw InvalidArgument("toy classifier needs at least 2 classes");
        if (shape.height < kGrid || shape.width < kGrid)
            throw InvalidArgument("toy classifier input must be at least 8x8");
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, weight_scale);
        weights_.resize(num_classes * kFeatures);
        for (auto& w : weights_)
            w = normal(rng);
        // Zero-mean rows: a uniform brightness shift leaves the logits unchanged.
        for (std::size_t k = 0; k < num_classes; ++k) {
            const auto row = weights_.begin() + static_cast<std::ptrdiff_t>(k * kFeatures);
            const double mean = std::accumulate(row, row + kFeatures, 0.0) / kFeatures;
            std::for_each(row, row + kFeatures, [mean](double& w) { w -= mean; });
        }
    }

    std::size_t num_classes() const noexcept { return num_classes_; }
    const InputShape& input_shape() const noexcept { return shape_; }

    /// Cell (row, col) covers rows [row*H/8, (row+1)*H/8) and the analogous columns.
    static std::size_t cell_of(std::size_t coord, std::size_t extent) noexcept { return coord * kGrid / extent; }

    std::array<double, kFeatures> features(const ImageTensor& image) const
    {
        require_input_shape(image, shape_);
        std::array<double, kFeatures> sum{};
        std::array<std::size_t, kFeatures> count{};
        for (std::size_t y = 0; y < image.height(); ++y) {
            const std::size_t row = cell_of(y, image.height());
            for (std::size_t x = 0; x < image.width(); ++x) {
                const std::size_t cell = row * kGrid + cell_of(x, image.width());
                const auto p = image.pixel(x, y);
                sum[cell] += 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
                ++count[cell];
            }
        }
        for (std::size_t i = 0; i < kFeatures; ++i)
            sum[i] /= 255.0 * static_cast<double>(count[i]);
        return sum;
    }

    std::vector<double> logits(const ImageTensor& image) const
    {
        const auto f = features(image);
        std::vector<double> z(num_classes_, 0.0);
        for (std::size_t k = 0; k < num_classes_; ++k)
            for (std::size_t i = 0; i < kFeatures; ++i)
                z[k] += weights_[k * kFeatures + i] * f[i];
        return z;
    }

    ProbabilityVector predict(const ImageTensor& image) override
    {
        const auto start = std::chrono::steady_clock::now();
        auto z = logits(image);
        const double top = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (auto& v : z) {
            v = std::exp(v - top);
            sum += v;
        }
        for (auto& v : z)
            v /= sum;
        recorder_.record(std::chrono::steady_clock::now() - start);
        return ProbabilityVector(std::move(z));
    }

    OracleStats stats() const override { return recorder_.snapshot(); }

private:
    std::size_t num_classes_;
    InputShape shape_;
    std::vector<double> weights_; // class-major, num_classes x 64
    detail::CallRecorder recorder_;
};

/// Wraps any oracle and counts predict() calls; thread-safe if the inner oracle is.
template <ConfidenceOracle Inner>
class CountingOracle {
public:
    explicit CountingOracle(Inner& inner) : inner_(inner) {}

    ProbabilityVector predict(const ImageTensor& image)
    {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.predict(image);
    }

    std::uint64_t calls() const noexcept { return calls_.load(); }

private:
    Inner& inner_;
    std::atomic<std::uint64_t> calls_{0};
};

} // namespace greedyfool

#endif // GREEDYFOOL_ORACLE_HPP
