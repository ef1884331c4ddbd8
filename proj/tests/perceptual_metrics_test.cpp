#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include <greedyfool/perceptual_metrics.hpp>

#include "reference/brute_force.hpp"
#include "test_support.hpp"

using namespace greedyfool;
using namespace greedyfool::metrics;
using testing_support::random_image;
using testing_support::to_planes;

namespace {

// Frozen from an independent summation in Python (see tests/reference for the C++ twin).
constexpr double kK = 5.3211420344108644;
constexpr double kCumulative128 = 98.960476574116967;
constexpr double kPs50to80 = 20.392297982555238;

ImageTensor five_by_five()
{
    // R = (37x^2 + 11y) mod 256, G = (200 - 13xy) mod 256, B = (5x + 60y + 90) mod 256
    ImageTensor img(5, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
            img.at(x, y, Channel::red) = static_cast<std::uint8_t>((37 * x * x + 11 * y) % 256);
            img.at(x, y, Channel::green) = static_cast<std::uint8_t>(((200 - 13 * x * y) % 256 + 256) % 256);
            img.at(x, y, Channel::blue) = static_cast<std::uint8_t>((5 * x + 60 * y + 90) % 256);
        }
    return img;
}

} // namespace

TEST(JndCurve, Anchors)
{
    EXPECT_DOUBLE_EQ(jnd_curve(127), 3.0);
    EXPECT_DOUBLE_EQ(jnd_curve(0), 20.0);
    EXPECT_DOUBLE_EQ(jnd_curve(255), 6.0);
    EXPECT_DOUBLE_EQ(jnd_curve(200), 4.7109375);
}

TEST(JndCurve, ContinuousAtKneeAndMinimumAt127)
{
    const double right_branch = 3.0 / 128.0 * (127.0 - 127.0) + 3.0;
    EXPECT_EQ(jnd_curve(127), right_branch);
    for (int l = 0; l <= 255; ++l) {
        EXPECT_GE(jnd_curve(l), 3.0);
        if (l != 127)
            EXPECT_GT(jnd_curve(l), 3.0) << l;
    }
}

TEST(JndCurve, RejectsOutOfRange)
{
    EXPECT_THROW(jnd_curve(-1), InvalidArgument);
    EXPECT_THROW(jnd_curve(256), InvalidArgument);
    EXPECT_THROW(jnd_curve(std::nan("")), InvalidArgument);
}

TEST(JndAt, UsesWindowMaximum)
{
    EXPECT_DOUBLE_EQ(jnd_at(ImageTensor(4, 4, 127), 2, 2, Channel::green), 3.0);
    EXPECT_DOUBLE_EQ(jnd_at(ImageTensor(4, 4, 0), 0, 3, Channel::red), 20.0);

    ImageTensor img(5, 5, 10);
    img.at(3, 3, Channel::blue) = 200;
    EXPECT_DOUBLE_EQ(jnd_at(img, 2, 2, Channel::blue), jnd_curve(200));
    EXPECT_DOUBLE_EQ(jnd_at(img, 1, 1, Channel::blue), jnd_curve(10)); // 200 outside this window
    EXPECT_DOUBLE_EQ(jnd_at(img, 2, 2, Channel::red), jnd_curve(10));
    EXPECT_THROW(jnd_at(img, 5, 0, Channel::red), InvalidArgument);
}

TEST(PsTable, BoundaryConditionsAndK)
{
    const auto t = PsTable::build();
    EXPECT_EQ(t[0], 0.0);
    EXPECT_NEAR(t[255], 255.0, 1e-9);
    EXPECT_NEAR(t.k(), kK, 1e-12);
    EXPECT_NEAR(t[128], kCumulative128, 1e-9);
    EXPECT_NEAR(t.k(), reference::k_constant(), 1e-12);
}

TEST(PsTable, StrictlyIncreasingAndDeterministic)
{
    const auto a = PsTable::build();
    const auto b = PsTable::build();
    for (int v = 1; v <= 255; ++v)
        EXPECT_LT(a[v - 1], a[v]);
    for (int v = 0; v <= 255; ++v)
        EXPECT_EQ(a[v], b[v]);
}

TEST(PsOfChange, Examples)
{
    const auto& t = default_ps_table();
    for (int v : {0, 17, 127, 255})
        EXPECT_EQ(ps_of_change(t, v, v), 0.0);
    EXPECT_NEAR(ps_of_change(t, 0, 255), 255.0, 1e-9);
    EXPECT_NEAR(ps_of_change(t, 50, 80), kPs50to80, 1e-9);
    EXPECT_NEAR(ps_of_change(t, 50, 80), reference::stimulus(50, 80), 1e-9);
    EXPECT_THROW(ps_of_change(t, -1, 3), InvalidArgument);
    EXPECT_THROW(ps_of_change(t, 3, 300), InvalidArgument);
}

TEST(PsOfChange, SymmetryAndAdditivity)
{
    const auto& t = default_ps_table();
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> d(0, 255);
    for (int i = 0; i < 500; ++i) {
        int v[3] = {d(rng), d(rng), d(rng)};
        std::sort(v, v + 3);
        EXPECT_EQ(ps_of_change(t, v[0], v[2]), ps_of_change(t, v[2], v[0]));
        EXPECT_NEAR(ps_of_change(t, v[0], v[2]), ps_of_change(t, v[0], v[1]) + ps_of_change(t, v[1], v[2]), 1e-9);
        EXPECT_EQ(ps_of_change(t, v[0], v[2]) == 0.0, v[0] == v[2]);
    }
}

TEST(TextureSd, Examples)
{
    EXPECT_EQ(texture_sd(ImageTensor(3, 3, 77), 1, 1, Channel::red), 0.0);

    ImageTensor one_nine(3, 3, 0);
    one_nine.at(1, 1, Channel::green) = 9;
    EXPECT_NEAR(texture_sd(one_nine, 1, 1, Channel::green), std::sqrt(8.0), 1e-12);

    ImageTensor checker(3, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            checker.at(x, y, Channel::blue) = (x + y) % 2 ? 255 : 0;
    const auto planes = to_planes(checker);
    EXPECT_NEAR(texture_sd(checker, 1, 1, Channel::blue), reference::sd3(planes[2], 1, 1), 1e-12);
    // five 0s and four 255s: mean 113.33.., population SD = 255 * sqrt(20)/9
    EXPECT_NEAR(texture_sd(checker, 1, 1, Channel::blue), 255.0 * std::sqrt(20.0) / 9.0, 1e-9);
}

TEST(TextureSd, EdgeReplicationMatchesReference)
{
    const auto img = random_image(6, 7, 3);
    const auto planes = to_planes(img);
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 7; ++x)
            for (int c = 0; c < 3; ++c)
                EXPECT_NEAR(texture_sd(img, x, y, Channel(c)), reference::sd3(planes[c], int(x), int(y)), 1e-12);
}

TEST(TextureSd, ShiftInvariant)
{
    auto img = random_image(5, 5, 9);
    for (auto& b : img.bytes())
        b = static_cast<std::uint8_t>(b / 2);
    auto shifted = img;
    for (auto& b : shifted.bytes())
        b = static_cast<std::uint8_t>(b + 60);
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 5; ++x)
            EXPECT_NEAR(texture_sd(img, x, y, Channel::red), texture_sd(shifted, x, y, Channel::red), 1e-9);
}

TEST(ChannelWeights, Validation)
{
    const ChannelWeights w;
    EXPECT_DOUBLE_EQ(w.red(), 0.299);
    EXPECT_DOUBLE_EQ(w.green(), 0.587);
    EXPECT_DOUBLE_EQ(w.blue(), 0.114);
    EXPECT_NO_THROW(ChannelWeights(1, 0, 0));
    EXPECT_THROW(ChannelWeights(0.5, 0.6, 0.0), InvalidArgument);
    EXPECT_THROW(ChannelWeights(-0.1, 0.6, 0.5), InvalidArgument);
}

TEST(IntegLoss, NoChangeIsZero)
{
    const auto img = random_image(5, 5, 1);
    const auto p = img.pixel(2, 3);
    const auto b = integ_loss(img, {2, 3, p[0], p[1], p[2]}, ChannelWeights{}, default_ps_table());
    EXPECT_EQ(b.total, 0.0);
}

TEST(IntegLoss, GreenOnlyChange)
{
    const auto img = random_image(5, 5, 2);
    auto p = img.pixel(1, 1);
    const std::uint8_t g = static_cast<std::uint8_t>(p[1] ^ 0x40);
    const auto b = integ_loss(img, {1, 1, p[0], g, p[2]}, ChannelWeights{}, default_ps_table());
    EXPECT_EQ(b.weighted[0], 0.0);
    EXPECT_EQ(b.weighted[2], 0.0);
    const double expect = 0.587 * ps_of_change(default_ps_table(), p[1], g)
        / std::max(texture_sd(img, 1, 1, Channel::green), 1.0);
    EXPECT_DOUBLE_EQ(b.total, expect);
}

TEST(IntegLoss, FiveByFiveFrozen)
{
    const auto img = five_by_five();
    const auto& t = default_ps_table();
    // Values from the independent Python evaluation.
    EXPECT_NEAR(integ_loss(img, {2, 1, 200, 30, 99}, ChannelWeights{}, t).total, 4.196043292336106, 1e-9);
    EXPECT_NEAR(integ_loss(img, {0, 4, 0, 0, 0}, ChannelWeights{}, t).total, 5.6036655163780846, 1e-9);

    auto adv = img;
    apply_in_place(adv, {2, 1, 200, 30, 99});
    apply_in_place(adv, {0, 4, 0, 0, 0});
    EXPECT_NEAR(mul_factor_loss(img, adv, ChannelWeights{}, t), 9.7997088087141897, 1e-9);
}

TEST(IntegLoss, SdFloorKeepsFlatRegionsFinite)
{
    const ImageTensor flat(4, 4, 100);
    const auto b = integ_loss(flat, {1, 1, 255, 0, 100}, ChannelWeights{}, default_ps_table(), 1.0);
    EXPECT_TRUE(std::isfinite(b.total));
    EXPECT_EQ(b.sd[0], 0.0);
    EXPECT_DOUBLE_EQ(b.weighted[0], 0.299 * b.ps[0]);
    const auto half = integ_loss(flat, {1, 1, 255, 0, 100}, ChannelWeights{}, default_ps_table(), 2.0);
    EXPECT_DOUBLE_EQ(half.total * 2.0, b.total);
}

TEST(MulFactorLoss, ZeroIffIdentical)
{
    const auto img = random_image(8, 8, 5);
    EXPECT_EQ(mul_factor_loss(img, img, ChannelWeights{}, default_ps_table()), 0.0);
    auto adv = img;
    adv.at(4, 4, Channel::red) ^= 1;
    EXPECT_GT(mul_factor_loss(img, adv, ChannelWeights{}, default_ps_table()), 0.0);
}

TEST(MulFactorLoss, SinglePixelEqualsIntegLoss)
{
    const auto img = random_image(8, 8, 6);
    const PerturbationUnit u{3, 5, 1, 2, 3};
    const auto adv = apply(img, u);
    EXPECT_EQ(mul_factor_loss(img, adv, ChannelWeights{}, default_ps_table()),
              integ_loss(img, u, ChannelWeights{}, default_ps_table()).total);
}

TEST(MulFactorLoss, AdditiveOverDisjointPixels)
{
    const auto img = random_image(8, 8, 7);
    const PerturbationUnit a{0, 0, 9, 9, 9}, b{7, 6, 250, 1, 128};
    const auto& t = default_ps_table();
    const double la = mul_factor_loss(img, apply(img, a), ChannelWeights{}, t);
    const double lb = mul_factor_loss(img, apply(img, b), ChannelWeights{}, t);
    EXPECT_NEAR(mul_factor_loss(img, apply(apply(img, a), b), ChannelWeights{}, t), la + lb, 1e-12);
}

TEST(MulFactorLoss, MatchesBruteForceOnRandomImages)
{
    std::mt19937_64 rng(2024);
    const double lambda[3] = {0.299, 0.587, 0.114};
    for (int trial = 0; trial < 30; ++trial) {
        const auto img = random_image(8, 8, 100 + trial);
        auto adv = img;
        std::uniform_int_distribution<int> coord(0, 7), colour(0, 255), count(1, 3);
        for (int k = count(rng); k > 0; --k)
            apply_in_place(adv, {std::size_t(coord(rng)), std::size_t(coord(rng)), std::uint8_t(colour(rng)),
                                 std::uint8_t(colour(rng)), std::uint8_t(colour(rng))});
        const double expect = reference::mul_factor(to_planes(img), to_planes(adv), lambda, 1.0);
        EXPECT_NEAR(mul_factor_loss(img, adv, ChannelWeights{}, default_ps_table()), expect,
                    1e-9 * std::max(1.0, expect));
    }
}

TEST(MulFactorLoss, ShapeMismatch)
{
    EXPECT_THROW(mul_factor_loss(ImageTensor(2, 2), ImageTensor(2, 3), ChannelWeights{}, default_ps_table()),
                 ShapeMismatch);
}

TEST(LpNorms, Examples)
{
    const auto img = random_image(6, 6, 8);
    const auto zero = lp_norms(img, img);
    EXPECT_EQ(zero.l0, 0u);
    EXPECT_EQ(zero.l2, 0.0);
    EXPECT_EQ(zero.linf, 0.0);

    ImageTensor base(4, 4, 100);
    auto one = base;
    one.at(2, 1, Channel::red) = 102;
    const auto n1 = lp_norms(base, one);
    EXPECT_EQ(n1.l0, 1u);
    EXPECT_DOUBLE_EQ(n1.l2, 2.0);
    EXPECT_DOUBLE_EQ(n1.linf, 2.0);

    auto two = one;
    two.at(0, 3, Channel::green) = 90;
    two.at(0, 3, Channel::blue) = 103;
    const auto n2 = lp_norms(base, two);
    EXPECT_EQ(n2.l0, 2u);
    EXPECT_DOUBLE_EQ(n2.l2, std::sqrt(4.0 + 100.0 + 9.0));
    EXPECT_DOUBLE_EQ(n2.linf, 10.0);

    EXPECT_THROW(lp_norms(ImageTensor(1, 2), ImageTensor(2, 1)), ShapeMismatch);
}

TEST(Metrics, PureAndBitReproducible)
{
    const auto img = random_image(8, 8, 12);
    const auto adv = apply(apply(img, {1, 1, 0, 0, 0}), {6, 2, 255, 255, 255});
    const double a = mul_factor_loss(img, adv, ChannelWeights{}, PsTable::build());
    const double b = mul_factor_loss(img, adv, ChannelWeights{}, PsTable::build());
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}
