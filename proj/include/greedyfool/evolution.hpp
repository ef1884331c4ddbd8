#ifndef GREEDYFOOL_EVOLUTION_HPP
#define GREEDYFOOL_EVOLUTION_HPP

// Integer differential evolution: rand/1 mutation, no crossover,
// one-to-one-spawning selection. Maximises the supplied fitness.
//
// Each generation first draws every trial vector from the run's single RNG
// stream, then evaluates the trials (optionally on several threads), then
// applies selection. Evaluation order therefore never affects the result.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "greedyfool/detail/parallel.hpp"
#include "greedyfool/errors.hpp"

namespace greedyfool::evolution {

inline constexpr std::size_t kDimensions = 5; // x, y, r, g, b

using Position = std::array<int, kDimensions>;
using Rng = std::mt19937_64;

inline std::string to_string(const Position& p)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t d = 0; d < p.size(); ++d)
        os << (d ? ", " : "") << p[d];
    os << ')';
    return os.str();
}

/// Inclusive per-dimension box.
struct SearchBounds {
    Position lower{};
    Position upper{};

    void validate() const
    {
        for (std::size_t d = 0; d < kDimensions; ++d)
            if (lower[d] > upper[d])
                throw InvalidArgument("search bounds: lower > upper in dimension " + std::to_string(d));
    }

    bool contains(const Position& p) const noexcept
    {
        for (std::size_t d = 0; d < kDimensions; ++d)
            if (p[d] < lower[d] || p[d] > upper[d])
                return false;
        return true;
    }

    /// Round half away from zero, then clamp into the box.
    Position realize(const std::array<double, kDimensions>& v) const
    {
        Position p{};
        for (std::size_t d = 0; d < kDimensions; ++d) {
            const double r = std::round(v[d]);
            p[d] = static_cast<int>(std::clamp(r, double(lower[d]), double(upper[d])));
        }
        return p;
    }

    /// 1-based pixel coordinates and 8-bit colour: x in [1, width], y in [1, height].
    static SearchBounds pixel_space(std::size_t width, std::size_t height)
    {
        if (width == 0 || height == 0)
            throw InvalidArgument("pixel search space needs a non-empty image");
        return {{1, 1, 0, 0, 0}, {int(width), int(height), 255, 255, 255}};
    }
};

struct DeConfig {
    std::size_t population_size = 200;
    std::size_t generations = 60;
    double scale_factor = 0.5;
    std::optional<std::uint64_t> rng_seed;
    std::size_t parallelism = 1; // concurrent fitness evaluations

    void validate() const
    {
        if (population_size < 4)
            throw InvalidArgument("population size must be at least 4 for rand/1");
        if (generations < 1)
            throw InvalidArgument("at least one generation is required");
        if (!(scale_factor > 0.0) || !std::isfinite(scale_factor))
            throw InvalidArgument("scale factor must be positive");
    }

    Rng make_rng() const { return Rng(rng_seed ? *rng_seed : std::random_device{}()); }
};

struct EvaluatedMember {
    Position position{};
    double fitness = 0.0;

    friend bool operator==(const EvaluatedMember&, const EvaluatedMember&) = default;
};

struct UniformSpec {
    int low = 0;
    int high = 0;
};

struct GaussianSpec {
    double mean = 128.0;
    double stddev = 127.0;
};

using DimensionSampler = std::variant<UniformSpec, GaussianSpec>;

/// Uniform over the coordinate bounds, N(128, 127) for the colour dimensions.
inline std::array<DimensionSampler, kDimensions> pixel_initialization(const SearchBounds& bounds)
{
    return {UniformSpec{bounds.lower[0], bounds.upper[0]}, UniformSpec{bounds.lower[1], bounds.upper[1]},
            GaussianSpec{}, GaussianSpec{}, GaussianSpec{}};
}

/// Draws the initial population. Gaussian draws are clamped to the bounds and
/// everything is rounded to integers.
inline std::vector<Position> initialize_population(const SearchBounds& bounds, const DeConfig& config,
                                                   const std::array<DimensionSampler, kDimensions>& samplers,
                                                   Rng& rng)
{
    bounds.validate();
    config.validate();
    for (std::size_t d = 0; d < kDimensions; ++d) {
        if (const auto* u = std::get_if<UniformSpec>(&samplers[d])) {
            if (u->low > u->high || u->low < bounds.lower[d] || u->high > bounds.upper[d])
                throw InvalidArgument("uniform initializer for dimension " + std::to_string(d)
                                      + " is inconsistent with the search bounds");
        }
        else if (!(std::get<GaussianSpec>(samplers[d]).stddev >= 0.0)) {
            throw InvalidArgument("gaussian initializer needs a non-negative stddev");
        }
    }

    std::vector<Position> population(config.population_size);
    for (auto& member : population) {
        std::array<double, kDimensions> raw{};
        for (std::size_t d = 0; d < kDimensions; ++d) {
            raw[d] = std::visit(
                [&rng](const auto& spec) -> double {
                    using T = std::decay_t<decltype(spec)>;
                    if constexpr (std::is_same_v<T, UniformSpec>)
                        return std::uniform_int_distribution<int>(spec.low, spec.high)(rng);
                    else
                        return std::normal_distribution<double>(spec.mean, spec.stddev)(rng);
                },
                samplers[d]);
        }
        member = bounds.realize(raw);
    }
    return population;
}

inline std::vector<Position> initialize_population(const SearchBounds& bounds, const DeConfig& config, Rng& rng)
{
    return initialize_population(bounds, config, pixel_initialization(bounds), rng);
}

/// base + F * (a - b), realised into the integer box.
inline Position combine_rand1(const Position& base, const Position& a, const Position& b, double scale_factor,
                              const SearchBounds& bounds)
{
    std::array<double, kDimensions> v{};
    for (std::size_t d = 0; d < kDimensions; ++d)
        v[d] = base[d] + scale_factor * (double(a[d]) - double(b[d]));
    return bounds.realize(v);
}

/// Three indices distinct from each other and from `target`.
inline std::array<std::size_t, 3> sample_donors(std::size_t population_size, std::size_t target, Rng& rng)
{
    if (population_size < 4)
        throw InvalidArgument("rand/1 needs a population of at least 4");
    std::uniform_int_distribution<std::size_t> pick(0, population_size - 1);
    std::array<std::size_t, 3> r{};
    for (std::size_t k = 0; k < 3; ++k) {
        std::size_t candidate;
        do {
            candidate = pick(rng);
        } while (candidate == target || std::find(r.begin(), r.begin() + k, candidate) != r.begin() + k);
        r[k] = candidate;
    }
    return r;
}

/// rand/1 trial for member `index`. No crossover: the mutant is the trial.
inline Position mutate_rand1(std::span<const Position> population, std::size_t index, double scale_factor,
                             const SearchBounds& bounds, Rng& rng)
{
    if (index >= population.size())
        throw InvalidArgument("mutation target index out of range");
    const auto [r1, r2, r3] = sample_donors(population.size(), index, rng);
    return combine_rand1(population[r1], population[r2], population[r3], scale_factor, bounds);
}

/// Thrown when the fitness function throws or returns a non-finite value.
class FitnessError : public Error {
public:
    FitnessError(const Position& position, std::size_t completed, const std::string& reason)
        : Error("fitness evaluation failed at " + to_string(position) + " after " + std::to_string(completed)
                + " completed evaluations: " + reason),
          position_(position), completed_(completed)
    {
    }

    const Position& position() const noexcept { return position_; }
    std::size_t completed_evaluations() const noexcept { return completed_; }

private:
    Position position_;
    std::size_t completed_;
};

template <typename F>
concept FitnessFunction = std::regular_invocable<F&, const Position&>
    && std::convertible_to<std::invoke_result_t<F&, const Position&>, double>;

struct DeResult {
    std::vector<EvaluatedMember> population;
    /// Every trial in evaluation order: generation-major, member-minor.
    std::vector<EvaluatedMember> archive;
    /// Best member fitness after initialization (index 0) and after each generation.
    std::vector<double> best_per_generation;

    const EvaluatedMember& best() const
    {
        return *std::max_element(population.begin(), population.end(),
                                 [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
    }
};

namespace detail {

template <typename F>
std::vector<double> evaluate_all(std::span<const Position> positions, F& fitness, std::size_t parallelism,
                                 std::size_t completed_before)
{
    std::vector<double> values(positions.size());
    greedyfool::detail::parallel_for(positions.size(), parallelism, [&](std::size_t i) {
        double v;
        try {
            v = static_cast<double>(fitness(positions[i]));
        }
        catch (const std::exception& e) {
            throw FitnessError(positions[i], completed_before + i, e.what());
        }
        if (!std::isfinite(v))
            throw FitnessError(positions[i], completed_before + i, "non-finite fitness");
        values[i] = v;
    });
    return values;
}

} // namespace detail

/// Full run with explicit initializers.
template <FitnessFunction F>
DeResult run(const DeConfig& config, const SearchBounds& bounds, F&& fitness,
             const std::array<DimensionSampler, kDimensions>& samplers)
{
    config.validate();
    bounds.validate();
    Rng rng = config.make_rng();

    const auto initial = initialize_population(bounds, config, samplers, rng);
    const auto initial_fitness = detail::evaluate_all<F>(initial, fitness, config.parallelism, 0);
    std::size_t completed = initial.size();

    DeResult result;
    result.population.reserve(initial.size());
    for (std::size_t i = 0; i < initial.size(); ++i)
        result.population.push_back({initial[i], initial_fitness[i]});
    result.archive.reserve(config.population_size * config.generations);
    result.best_per_generation.push_back(result.best().fitness);

    std::vector<Position> current(initial);
    std::vector<Position> trials(config.population_size);
    for (std::size_t g = 0; g < config.generations; ++g) {
        for (std::size_t i = 0; i < config.population_size; ++i)
            trials[i] = mutate_rand1(current, i, config.scale_factor, bounds, rng);

        const auto trial_fitness = detail::evaluate_all<F>(trials, fitness, config.parallelism, completed);
        completed += trials.size();

        for (std::size_t i = 0; i < config.population_size; ++i) {
            result.archive.push_back({trials[i], trial_fitness[i]});
            if (trial_fitness[i] > result.population[i].fitness) {
                result.population[i] = {trials[i], trial_fitness[i]};
                current[i] = trials[i];
            }
        }
        result.best_per_generation.push_back(result.best().fitness);
    }
    return result;
}

/// Full run with the pixel-space initializers.
template <FitnessFunction F>
DeResult run(const DeConfig& config, const SearchBounds& bounds, F&& fitness)
{
    return run(config, bounds, std::forward<F>(fitness), pixel_initialization(bounds));
}

} // namespace greedyfool::evolution

#endif // GREEDYFOOL_EVOLUTION_HPP
