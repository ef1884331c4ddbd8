// Any type with `ProbabilityVector predict(const ImageTensor&)` can be
// attacked. This one calls an image "bright" when its mean luminance is high.

#include <cmath>
#include <iostream>

#include <greedyfool/greedyfool.hpp>

namespace {

struct BrightnessOracle {
    greedyfool::ProbabilityVector predict(const greedyfool::ImageTensor& image) const
    {
        double sum = 0.0;
        for (auto b : image.bytes())
            sum += b;
        const double mean = sum / static_cast<double>(image.bytes().size()) / 255.0;
        const double bright = 1.0 / (1.0 + std::exp(-40.0 * (mean - 0.5)));
        return greedyfool::ProbabilityVector({1.0 - bright, bright}, {"dark", "bright"});
    }
};

} // namespace

int main()
{
    using namespace greedyfool;
    static_assert(ConfidenceOracle<BrightnessOracle>);

    ImageTensor image(16, 16, 120); // slightly dark grey
    BrightnessOracle oracle;

    AttackConfig config;
    config.de.population_size = 60;
    config.de.generations = 20;
    config.de.rng_seed = 3;
    const auto report = attack(image, AttackGoal::targeted(0, 1), config, oracle);

    std::cout << to_json(report, false).dump(2) << '\n';
    return report.success ? 0 : 1;
}
