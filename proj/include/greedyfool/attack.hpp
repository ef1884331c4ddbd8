#ifndef GREEDYFOOL_ATTACK_HPP
#define GREEDYFOOL_ATTACK_HPP

// GreedyFool: score single-pixel perturbations by confidence change per unit
// of perceptual loss (the perturbation priority) with differential evolution,
// then apply the best-ranked units one by one until the classifier's decision
// satisfies the goal.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <set>
#include <utility>
#include <vector>

#include "greedyfool/errors.hpp"
#include "greedyfool/evolution.hpp"
#include "greedyfool/image.hpp"
#include "greedyfool/oracle.hpp"
#include "greedyfool/perceptual_metrics.hpp"

namespace greedyfool {

enum class AttackMode { non_targeted, targeted };

inline const char* to_string(AttackMode m) noexcept
{
    return m == AttackMode::targeted ? "targeted" : "nontargeted";
}

/// Non-targeted: push the prediction away from the true label (zeta = +1,
/// probed label = true label). Targeted: pull it toward target (zeta = -1).
class AttackGoal {
public:
    static AttackGoal non_targeted(std::size_t true_label) { return AttackGoal(AttackMode::non_targeted, true_label, true_label); }

    static AttackGoal targeted(std::size_t true_label, std::size_t target_label)
    {
        if (target_label == true_label)
            throw InvalidArgument("targeted attack needs a target label different from the true label");
        return AttackGoal(AttackMode::targeted, true_label, target_label);
    }

    AttackMode mode() const noexcept { return mode_; }
    std::size_t true_label() const noexcept { return true_label_; }
    /// The label whose probability the priority tracks.
    std::size_t probed_label() const noexcept { return probed_; }
    std::optional<std::size_t> target_label() const
    {
        return mode_ == AttackMode::targeted ? std::optional(probed_) : std::nullopt;
    }
    double zeta() const noexcept { return mode_ == AttackMode::targeted ? -1.0 : 1.0; }

    bool satisfied_by(std::size_t predicted) const noexcept
    {
        return mode_ == AttackMode::targeted ? predicted == probed_ : predicted != true_label_;
    }

    void check_against(const ProbabilityVector& p) const
    {
        if (probed_ >= p.size() || true_label_ >= p.size())
            throw InvalidArgument("attack goal label out of range for a " + std::to_string(p.size()) + "-class oracle");
    }

private:
    AttackGoal(AttackMode mode, std::size_t true_label, std::size_t probed)
        : mode_(mode), true_label_(true_label), probed_(probed)
    {
    }

    AttackMode mode_;
    std::size_t true_label_;
    std::size_t probed_;
};

/// Priority given to units that leave the image unchanged; never selected greedily.
inline constexpr double kSentinelPriority = std::numeric_limits<double>::lowest();

struct CandidateRecord {
    PerturbationUnit unit;
    double priority = kSentinelPriority;
    double probe_probability = 0.0; // P_t after applying this unit alone
};

struct AttackMetrics {
    double mul_factor_loss = 0.0;
    std::size_t l0 = 0;
    double l2 = 0.0;
    double linf = 0.0;
};

struct AppliedUnit {
    PerturbationUnit unit;
    double priority = 0.0;
};

struct AttackReport {
    std::string method; // "greedyfool" or "random-baseline"
    AttackMode mode = AttackMode::non_targeted;
    std::size_t true_label = 0;
    std::optional<std::size_t> target_label;
    bool success = false;
    std::vector<AppliedUnit> applied_units;
    std::size_t final_label = 0;
    double final_confidence = 0.0;
    std::uint64_t oracle_calls = 0;
    std::size_t candidates_ranked = 0;
    AttackMetrics metrics;
    std::vector<std::string> warnings;
    std::optional<std::string> error;
    double elapsed_seconds = 0.0;
    ImageTensor adversarial;
};

/// Failure while scoring candidates; reports how far the run got.
class AttackAborted : public Error {
public:
    AttackAborted(const std::string& what, std::size_t completed) : Error(what), completed_(completed) {}
    std::size_t completed_evaluations() const noexcept { return completed_; }

private:
    std::size_t completed_;
};

/// Oracle failure while probing one candidate unit.
class CandidateProbeError : public OracleError {
public:
    CandidateProbeError(const PerturbationUnit& unit, const std::string& reason)
        : OracleError("oracle failed while probing unit (" + std::to_string(unit.x) + ", " + std::to_string(unit.y)
                      + ", " + std::to_string(unit.r) + ", " + std::to_string(unit.g) + ", "
                      + std::to_string(unit.b) + "): " + reason),
          unit_(unit)
    {
    }
    const PerturbationUnit& unit() const noexcept { return unit_; }

private:
    PerturbationUnit unit_;
};

struct AttackConfig {
    evolution::DeConfig de{};
    metrics::LossModel loss{};
    std::optional<std::size_t> max_units; // cap on greedy steps; none = whole ranking
};

/// DE position (1-based x, y, then r, g, b) to a zero-based unit.
inline PerturbationUnit decode_position(const evolution::Position& p)
{
    return {static_cast<std::size_t>(p[0] - 1), static_cast<std::size_t>(p[1] - 1), static_cast<std::uint8_t>(p[2]),
            static_cast<std::uint8_t>(p[3]), static_cast<std::uint8_t>(p[4])};
}

inline evolution::Position encode_unit(const PerturbationUnit& u)
{
    return {int(u.x) + 1, int(u.y) + 1, int(u.r), int(u.g), int(u.b)};
}

inline AttackMetrics measure(const ImageTensor& benign, const ImageTensor& adversarial,
                             const metrics::LossModel& loss)
{
    const auto lp = metrics::lp_norms(benign, adversarial);
    return {metrics::mul_factor_loss(benign, adversarial, loss), lp.l0, lp.l2, lp.linf};
}

/// Confidence change toward the goal per unit of perceptual loss, from one oracle probe.
template <ConfidenceOracle O>
CandidateRecord perturbation_priority(const ImageTensor& benign, const PerturbationUnit& unit, const AttackGoal& goal,
                                      double baseline_probability, O& oracle, const metrics::LossModel& loss)
{
    require_inside(benign, unit.x, unit.y);
    const ImageTensor probe = apply(benign, unit);
    double probed;
    try {
        const ProbabilityVector p = oracle.predict(probe);
        goal.check_against(p);
        probed = p[goal.probed_label()];
    }
    catch (const OracleError& e) {
        throw CandidateProbeError(unit, e.what());
    }

    const double cost = metrics::integ_loss(benign, unit, loss).total;
    if (cost == 0.0)
        return {unit, kSentinelPriority, probed};
    return {unit, goal.zeta() * (baseline_probability - probed) / cost, probed};
}

/// Sort descending by priority (stable), keep the best unit per coordinate, drop sentinels.
inline std::vector<CandidateRecord> rank_candidates(std::vector<CandidateRecord> records)
{
    std::stable_sort(records.begin(), records.end(),
                     [](const CandidateRecord& a, const CandidateRecord& b) { return a.priority > b.priority; });
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<CandidateRecord> ranked;
    for (auto& r : records) {
        if (r.priority == kSentinelPriority)
            continue;
        if (seen.emplace(r.unit.x, r.unit.y).second)
            ranked.push_back(r);
    }
    return ranked;
}

struct ScoredCandidates {
    std::vector<CandidateRecord> ranked;
    std::size_t archive_size = 0;
    std::size_t evaluations = 0; // initial population + archive
};

/// Runs DE with the perturbation priority as fitness and ranks the trial archive.
template <ConfidenceOracle O>
ScoredCandidates score_candidates(const ImageTensor& benign, const AttackGoal& goal, double baseline_probability,
                                  const evolution::DeConfig& de_config, O& oracle, const metrics::LossModel& loss)
{
    const auto bounds = evolution::SearchBounds::pixel_space(benign.width(), benign.height());
    std::mutex probes_mutex;
    std::map<evolution::Position, double> probes;
    auto fitness = [&](const evolution::Position& p) {
        const auto record = perturbation_priority(benign, decode_position(p), goal, baseline_probability, oracle, loss);
        std::lock_guard lock(probes_mutex);
        probes.insert_or_assign(p, record.probe_probability);
        return record.priority;
    };

    evolution::DeResult result;
    try {
        result = evolution::run(de_config, bounds, fitness);
    }
    catch (const evolution::FitnessError& e) {
        throw AttackAborted(std::string("candidate scoring aborted: ") + e.what(), e.completed_evaluations());
    }

    std::vector<CandidateRecord> records;
    records.reserve(result.archive.size());
    for (const auto& m : result.archive)
        records.push_back({decode_position(m.position), m.fitness, probes.at(m.position)});

    ScoredCandidates out;
    out.archive_size = result.archive.size();
    out.evaluations = result.archive.size() + result.population.size();
    out.ranked = rank_candidates(std::move(records));
    return out;
}

namespace detail {

template <ConfidenceOracle O>
class CallCounter {
public:
    explicit CallCounter(O& inner) : inner_(inner) {}
    ProbabilityVector predict(const ImageTensor& image)
    {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.predict(image);
    }
    std::uint64_t calls() const noexcept { return calls_.load(); }

private:
    O& inner_;
    std::atomic<std::uint64_t> calls_{0};
};

inline void finish_report(AttackReport& report, const ImageTensor& benign, ImageTensor adversarial,
                          const metrics::LossModel& loss)
{
    report.metrics = measure(benign, adversarial, loss);
    report.adversarial = std::move(adversarial);
}

} // namespace detail

/// Applies ranked units in order, probing the oracle after each, until the goal
/// holds, the ranking is exhausted or `max_units` is reached. `initial` is the
/// oracle's verdict on the untouched image.
template <ConfidenceOracle O>
AttackReport greedy_synthesize(const ImageTensor& benign, const std::vector<CandidateRecord>& ranked,
                               const AttackGoal& goal, const ProbabilityVector& initial, O& oracle,
                               std::optional<std::size_t> max_units, const metrics::LossModel& loss)
{
    goal.check_against(initial);
    AttackReport report;
    report.method = "greedyfool";
    report.mode = goal.mode();
    report.true_label = goal.true_label();
    report.target_label = goal.target_label();
    report.candidates_ranked = ranked.size();
    report.final_label = initial.argmax();
    report.final_confidence = initial[report.final_label];

    ImageTensor current = benign;
    const std::size_t limit = std::min(ranked.size(), max_units.value_or(ranked.size()));
    for (std::size_t i = 0; i < limit && !goal.satisfied_by(report.final_label); ++i) {
        apply_in_place(current, ranked[i].unit);
        report.applied_units.push_back({ranked[i].unit, ranked[i].priority});
        try {
            const auto p = oracle.predict(current);
            ++report.oracle_calls;
            report.final_label = p.argmax();
            report.final_confidence = p[report.final_label];
        }
        catch (const OracleError& e) {
            ++report.oracle_calls;
            report.error = std::string("oracle failed during greedy phase: ") + e.what();
            report.success = false;
            detail::finish_report(report, benign, std::move(current), loss);
            return report;
        }
    }
    report.success = goal.satisfied_by(report.final_label);
    detail::finish_report(report, benign, std::move(current), loss);
    return report;
}

/// Full pipeline: baseline query, DE scoring, greedy accumulation.
template <ConfidenceOracle O>
AttackReport attack(const ImageTensor& benign, const AttackGoal& goal, const AttackConfig& config, O& oracle)
{
    config.de.validate();
    config.loss.validate();
    const auto start = std::chrono::steady_clock::now();
    detail::CallCounter<O> counted(oracle);

    const ProbabilityVector initial = counted.predict(benign);
    goal.check_against(initial);
    std::vector<std::string> warnings;
    if (initial.argmax() != goal.true_label())
        warnings.push_back("oracle predicts label " + std::to_string(initial.argmax()) + " for the benign image, not "
                           + std::to_string(goal.true_label()));

    AttackReport report;
    if (goal.satisfied_by(initial.argmax())) {
        report = greedy_synthesize(benign, {}, goal, initial, counted, config.max_units, config.loss);
    }
    else {
        const double baseline = initial[goal.probed_label()];
        auto scored = score_candidates(benign, goal, baseline, config.de, counted, config.loss);
        report = greedy_synthesize(benign, scored.ranked, goal, initial, counted, config.max_units, config.loss);
    }
    report.warnings = std::move(warnings);
    report.oracle_calls = counted.calls();
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Comparison baseline: writes uniformly random colours at uniformly random
/// pixels, probing after each, until the goal holds. `budget` bounds the total
/// number of oracle calls, including the initial check of the benign image.
template <ConfidenceOracle O>
AttackReport random_baseline_attack(const ImageTensor& benign, const AttackGoal& goal, O& oracle,
                                    std::uint64_t budget, std::uint64_t seed, const metrics::LossModel& loss = {})
{
    const auto start = std::chrono::steady_clock::now();
    AttackReport report;
    report.method = "random-baseline";
    report.mode = goal.mode();
    report.true_label = goal.true_label();
    report.target_label = goal.target_label();

    auto finish = [&](ImageTensor adversarial) {
        report.success = report.oracle_calls > 0 && !report.error && goal.satisfied_by(report.final_label);
        detail::finish_report(report, benign, std::move(adversarial), loss);
        report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
    };

    if (budget == 0) {
        report.warnings.push_back("oracle budget is zero; no queries issued");
        return finish(benign);
    }

    ImageTensor current = benign;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_x(0, benign.width() - 1);
    std::uniform_int_distribution<std::size_t> pick_y(0, benign.height() - 1);
    std::uniform_int_distribution<int> pick_colour(0, 255);

    try {
        auto p = oracle.predict(current);
        ++report.oracle_calls;
        goal.check_against(p);
        report.final_label = p.argmax();
        report.final_confidence = p[report.final_label];
        if (report.final_label != goal.true_label())
            report.warnings.push_back("oracle predicts label " + std::to_string(report.final_label)
                                      + " for the benign image, not " + std::to_string(goal.true_label()));

        while (!goal.satisfied_by(report.final_label) && report.oracle_calls < budget) {
            PerturbationUnit unit;
            unit.x = pick_x(rng);
            unit.y = pick_y(rng);
            unit.r = static_cast<std::uint8_t>(pick_colour(rng));
            unit.g = static_cast<std::uint8_t>(pick_colour(rng));
            unit.b = static_cast<std::uint8_t>(pick_colour(rng));
            apply_in_place(current, unit);
            report.applied_units.push_back({unit, 0.0});
            p = oracle.predict(current);
            ++report.oracle_calls;
            report.final_label = p.argmax();
            report.final_confidence = p[report.final_label];
        }
    }
    catch (const OracleError& e) {
        if (report.oracle_calls == 0)
            throw;
        ++report.oracle_calls;
        report.error = std::string("oracle failed: ") + e.what();
    }
    return finish(std::move(current));
}

} // namespace greedyfool

#endif // GREEDYFOOL_ATTACK_HPP
