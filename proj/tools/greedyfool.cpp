// greedyfool: command-line front end.
//
//   greedyfool attack   INPUT.png [options]   GreedyFool attack, writes PNG + JSON report
//   greedyfool baseline INPUT.png [options]   random-pixel baseline, same outputs
//   greedyfool metrics  BENIGN.png ADV.png    perceptual loss and Lp norms as JSON
//
// Exit codes: 0 success, 1 attack failed, 2 usage error, 3 image I/O error,
// 4 oracle error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <greedyfool/greedyfool.hpp>

namespace fs = std::filesystem;
using namespace greedyfool;

namespace {

enum ExitCode : int { kOk = 0, kAttackFailed = 1, kUsage = 2, kIo = 3, kOracle = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleOptions {
    std::string kind = "builtin";
    std::uint64_t seed = 0;
    std::size_t num_classes = 10;
    std::string endpoint;
    int timeout_ms = 10'000;
    int retries = 3;
    std::string token;
};

struct LossOptions {
    double sd_floor = metrics::kDefaultSdFloor;
    std::vector<double> weights;

    metrics::LossModel model() const
    {
        metrics::LossModel m;
        m.sd_floor = sd_floor;
        if (!weights.empty())
            m.weights = metrics::ChannelWeights(weights.at(0), weights.at(1), weights.at(2));
        m.validate();
        return m;
    }
};

struct RunOptions {
    std::string input;
    OracleOptions oracle;
    LossOptions loss;
    std::string mode = "nontargeted";
    std::optional<std::size_t> true_label;
    std::optional<std::size_t> target_label;
    std::size_t pop_size = 200;
    std::size_t generations = 60;
    std::optional<std::size_t> max_units;
    std::optional<std::uint64_t> budget;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out = ".";
    std::string report;
};

struct MetricsOptions {
    std::string benign;
    std::string adversarial;
    LossOptions loss;
    bool breakdown = false;
    std::string report;
};

void add_oracle_flags(CLI::App& cmd, OracleOptions& o)
{
    cmd.add_option("--oracle", o.kind, "Classifier to attack")
        ->check(CLI::IsMember({"builtin", "remote"}))
        ->capture_default_str();
    cmd.add_option("--oracle-seed", o.seed, "Weight seed of the built-in classifier")->capture_default_str();
    cmd.add_option("--num-classes", o.num_classes, "Classes of the built-in classifier")->capture_default_str();
    cmd.add_option("--endpoint", o.endpoint, "Model server URL (http://host:port[/base])")->envname("GREEDYFOOL_ENDPOINT");
    cmd.add_option("--timeout-ms", o.timeout_ms, "Per-request timeout for the remote oracle")->capture_default_str();
    cmd.add_option("--retries", o.retries, "Extra attempts after a transient remote failure")->capture_default_str();
    cmd.add_option("--token", o.token, "Bearer token for the model server");
}

void add_loss_flags(CLI::App& cmd, LossOptions& l)
{
    cmd.add_option("--sd-floor", l.sd_floor, "Lower bound on the texture standard deviation")->capture_default_str();
    cmd.add_option("--weights", l.weights, "Channel weights r,g,b (sum to 1)")->delimiter(',')->expected(3);
}

void add_run_flags(CLI::App& cmd, RunOptions& r)
{
    cmd.add_option("input", r.input, "Benign RGB PNG")->required();
    add_oracle_flags(cmd, r.oracle);
    add_loss_flags(cmd, r.loss);
    cmd.add_option("--mode", r.mode, "Attack goal")
        ->check(CLI::IsMember({"nontargeted", "targeted"}))
        ->capture_default_str();
    cmd.add_option("--true-label", r.true_label, "True label (default: the oracle's prediction)");
    cmd.add_option("--target-label", r.target_label, "Target label, required with --mode targeted");
    cmd.add_option("--seed", r.seed, "Random seed")->capture_default_str();
    cmd.add_option("--out", r.out, "Output directory")->capture_default_str();
    cmd.add_option("--report", r.report, "Report path (default: next to the adversarial PNG)");
}

std::unique_ptr<Oracle> make_oracle(const OracleOptions& o, const ImageTensor& image)
{
    if (o.kind == "builtin")
        return std::make_unique<ToyClassifier>(o.num_classes, o.seed, InputShape{image.height(), image.width()});
    RemoteOracleOptions r;
    r.endpoint = o.endpoint;
    r.timeout = std::chrono::milliseconds(o.timeout_ms);
    r.retries = o.retries;
    if (!o.token.empty())
        r.bearer_token = o.token;
    return std::make_unique<RemoteOracle>(r);
}

void check_run_options(const RunOptions& r)
{
    if (r.mode == "targeted" && !r.target_label)
        throw UsageError("--mode targeted requires --target-label");
    if (r.mode == "nontargeted" && r.target_label)
        throw UsageError("--target-label is only meaningful with --mode targeted");
    if (r.oracle.kind == "remote" && r.oracle.endpoint.empty())
        throw UsageError("--oracle remote requires --endpoint or GREEDYFOOL_ENDPOINT");
    if (r.oracle.timeout_ms <= 0)
        throw UsageError("--timeout-ms must be positive");
    if (r.threads == 0)
        throw UsageError("--threads must be at least 1");
}

AttackGoal make_goal(const RunOptions& r, Oracle& oracle, const ImageTensor& image)
{
    const std::size_t label = r.true_label ? *r.true_label : oracle.predict(image).argmax();
    if (r.mode == "targeted")
        return AttackGoal::targeted(label, *r.target_label);
    return AttackGoal::non_targeted(label);
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw ImageIoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out)
        throw ImageIoError("short write to " + path);
}

int write_outputs(const RunOptions& r, const AttackReport& report)
{
    std::error_code ec;
    fs::create_directories(r.out, ec);
    if (ec)
        throw ImageIoError("cannot create output directory " + r.out + ": " + ec.message());
    const std::string stem = fs::path(r.input).stem().string() + "." + report.method;
    const fs::path png_path = fs::path(r.out) / (stem + ".png");
    png::write(png_path, report.adversarial);
    write_json(r.report.empty() ? (fs::path(r.out) / (stem + ".json")).string() : r.report, to_json(report));

    std::cerr << report.method << ": " << (report.success ? "success" : "failure") << ", " << report.applied_units.size()
              << " pixel(s), final label " << report.final_label << ", " << report.oracle_calls << " oracle calls -> "
              << png_path.string() << '\n';
    if (report.error) {
        std::cerr << "error: " << *report.error << '\n';
        return kOracle;
    }
    return report.success ? kOk : kAttackFailed;
}

int run_attack(const RunOptions& r)
{
    check_run_options(r);
    const metrics::LossModel loss = r.loss.model();
    AttackConfig config;
    config.de.population_size = r.pop_size;
    config.de.generations = r.generations;
    config.de.rng_seed = r.seed;
    config.de.parallelism = r.threads;
    config.loss = loss;
    config.max_units = r.max_units;
    config.de.validate();

    const ImageTensor image = png::read(r.input);
    auto oracle = make_oracle(r.oracle, image);
    const AttackGoal goal = make_goal(r, *oracle, image);
    return write_outputs(r, attack(image, goal, config, *oracle));
}

int run_baseline(const RunOptions& r)
{
    check_run_options(r);
    const metrics::LossModel loss = r.loss.model();
    const ImageTensor image = png::read(r.input);
    auto oracle = make_oracle(r.oracle, image);
    const AttackGoal goal = make_goal(r, *oracle, image);
    const std::uint64_t budget = r.budget.value_or(1 + r.pop_size * (r.generations + 1));
    return write_outputs(r, random_baseline_attack(image, goal, *oracle, budget, r.seed, loss));
}

int run_metrics(const MetricsOptions& m)
{
    const metrics::LossModel loss = m.loss.model();
    const ImageTensor benign = png::read(m.benign);
    const ImageTensor adversarial = png::read(m.adversarial);
    write_json(m.report, metrics_report(benign, adversarial, loss, m.breakdown));
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Perception-aware black-box adversarial attacks on image classifiers"};
    app.require_subcommand(1);

    RunOptions attack_opts;
    auto* attack_cmd = app.add_subcommand("attack", "Run the GreedyFool attack on one image");
    add_run_flags(*attack_cmd, attack_opts);
    attack_cmd->add_option("--pop-size", attack_opts.pop_size, "DE population size")->capture_default_str();
    attack_cmd->add_option("--generations", attack_opts.generations, "DE generations")->capture_default_str();
    attack_cmd->add_option("--max-units", attack_opts.max_units, "Upper bound on perturbed pixels");
    attack_cmd->add_option("--threads", attack_opts.threads, "Parallel fitness evaluations")->capture_default_str();

    RunOptions baseline_opts;
    auto* baseline_cmd = app.add_subcommand("baseline", "Run the random-pixel baseline on one image");
    add_run_flags(*baseline_cmd, baseline_opts);
    baseline_cmd->add_option("--budget", baseline_opts.budget,
                             "Oracle call budget (default: what a DE attack with --pop-size/--generations spends)");
    baseline_cmd->add_option("--pop-size", baseline_opts.pop_size, "Sizes the default budget")->capture_default_str();
    baseline_cmd->add_option("--generations", baseline_opts.generations, "Sizes the default budget")
        ->capture_default_str();

    MetricsOptions metrics_opts;
    auto* metrics_cmd = app.add_subcommand("metrics", "Compare a benign and an adversarial PNG");
    metrics_cmd->add_option("benign", metrics_opts.benign, "Benign RGB PNG")->required();
    metrics_cmd->add_option("adversarial", metrics_opts.adversarial, "Adversarial RGB PNG")->required();
    add_loss_flags(*metrics_cmd, metrics_opts.loss);
    metrics_cmd->add_flag("--breakdown", metrics_opts.breakdown, "Include per-pixel loss terms");
    metrics_cmd->add_option("--report", metrics_opts.report, "Output path (default: stdout)");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*attack_cmd)
            return run_attack(attack_opts);
        if (*baseline_cmd)
            return run_baseline(baseline_opts);
        return run_metrics(metrics_opts);
    }
    catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kUsage;
    }
    catch (const ImageIoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    }
    catch (const ShapeMismatch& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    }
    catch (const OracleError& e) {
        std::cerr << "oracle error: " << e.what() << '\n';
        return kOracle;
    }
    catch (const AttackAborted& e) {
        std::cerr << "oracle error: " << e.what() << '\n';
        return kOracle;
    }
}
