// Attacks the built-in toy classifier on a generated 32x32 image and prints
// the pixels GreedyFool changed.
//
//   ./attack_toy [seed] [out.png]

#include <cstdlib>
#include <iostream>
#include <random>

#include <greedyfool/greedyfool.hpp>

int main(int argc, char** argv)
{
    using namespace greedyfool;
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;

    ImageTensor image(32, 32);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& b : image.bytes())
        b = static_cast<std::uint8_t>(byte(rng));

    ToyClassifier classifier(10, 7, {32, 32});
    const auto before = classifier.predict(image);
    std::cout << "benign label " << before.argmax() << " (p = " << before[before.argmax()] << ")\n";

    AttackConfig config;
    config.de.rng_seed = seed;
    const AttackReport report = attack(image, AttackGoal::non_targeted(before.argmax()), config, classifier);

    std::cout << (report.success ? "fooled" : "not fooled") << " after " << report.oracle_calls
              << " queries: label " << report.final_label << " (p = " << report.final_confidence << ")\n";
    for (const auto& [unit, priority] : report.applied_units)
        std::cout << "  pixel (" << unit.x << ", " << unit.y << ") -> rgb(" << int(unit.r) << ", " << int(unit.g)
                  << ", " << int(unit.b) << "), priority " << priority << '\n';
    std::cout << "MulFactorLoss " << report.metrics.mul_factor_loss << ", L0 " << report.metrics.l0 << ", L2 "
              << report.metrics.l2 << ", Linf " << report.metrics.linf << '\n';

    if (argc > 2)
        png::write(argv[2], report.adversarial);
    return report.success ? EXIT_SUCCESS : EXIT_FAILURE;
}
