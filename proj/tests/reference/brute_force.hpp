#ifndef GREEDYFOOL_TESTS_BRUTE_FORCE_HPP
#define GREEDYFOOL_TESTS_BRUTE_FORCE_HPP

// Scalar reference evaluator for the perceptual metrics. Deliberately shares
// no code with include/greedyfool: everything is recomputed from the raw
// formulas on plain nested vectors, one query at a time.

#include <algorithm>
#include <cmath>
#include <vector>

namespace reference {

// plane[c][y][x]
using Planes = std::vector<std::vector<std::vector<int>>>;

inline double jnd(int level)
{
    const double l = level;
    if (l <= 127)
        return 17 * (1 - std::sqrt(l / 127)) + 3;
    return 3.0 / 128 * (l - 127) + 3;
}

inline double k_constant()
{
    double s = 0;
    for (int v = 0; v <= 254; ++v)
        s += 1 / jnd(v);
    return 255 / s;
}

// k * sum_{i=lo}^{hi-1} 1/jnd(i) for lo <= hi
inline double stimulus(int a, int b)
{
    const int lo = std::min(a, b), hi = std::max(a, b);
    double s = 0;
    for (int i = lo; i < hi; ++i)
        s += 1 / jnd(i);
    return k_constant() * s;
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double sd3(const std::vector<std::vector<int>>& plane, int x, int y)
{
    const int h = int(plane.size()), w = int(plane[0].size());
    double vals[9];
    int n = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            vals[n++] = plane[clampi(y + dy, 0, h - 1)][clampi(x + dx, 0, w - 1)];
    double mu = 0;
    for (double v : vals)
        mu += v;
    mu /= 9;
    double acc = 0;
    for (double v : vals)
        acc += (v - mu) * (v - mu);
    return std::sqrt(acc / 9);
}

inline double pixel_loss(const Planes& benign, int x, int y, const int replacement[3], const double lambda[3],
                         double floor_sd)
{
    double total = 0;
    for (int c = 0; c < 3; ++c) {
        const double ps = stimulus(benign[c][y][x], replacement[c]);
        const double sd = sd3(benign[c], x, y);
        total += lambda[c] * ps / (sd < floor_sd ? floor_sd : sd);
    }
    return total;
}

inline double mul_factor(const Planes& benign, const Planes& adv, const double lambda[3], double floor_sd)
{
    double total = 0;
    const int h = int(benign[0].size()), w = int(benign[0][0].size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int rep[3] = {adv[0][y][x], adv[1][y][x], adv[2][y][x]};
            if (rep[0] == benign[0][y][x] && rep[1] == benign[1][y][x] && rep[2] == benign[2][y][x])
                continue;
            total += pixel_loss(benign, x, y, rep, lambda, floor_sd);
        }
    }
    return total;
}

} // namespace reference

#endif // GREEDYFOOL_TESTS_BRUTE_FORCE_HPP
