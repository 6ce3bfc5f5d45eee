#include "sitsq/rng.hpp"

#include <cmath>

namespace sitsq {
namespace {

// Ziggurat tables (Doornik's ZIGNOR layout, 128 layers).
constexpr int kLayers = 128;
constexpr double kR = 3.442619855899;           // rightmost layer edge
constexpr double kV = 9.91256303526217e-3;      // area per layer

struct ZigTables {
    double x[kLayers + 1];   // layer x-coordinates, x[kLayers] = 0
    double f[kLayers + 1];   // exp(-x^2/2) at the layer edges
    double ratio[kLayers];   // x[i+1]/x[i] acceptance threshold
    ZigTables() {
        double fr = std::exp(-0.5 * kR * kR);
        x[0] = kV / fr;      // pseudo-edge of the base strip
        x[1] = kR;
        x[kLayers] = 0.0;
        for (int i = 2; i < kLayers; ++i) {
            const double xj = x[i - 1];
            x[i] = std::sqrt(-2.0 * std::log(kV / xj + std::exp(-0.5 * xj * xj)));
        }
        for (int i = 0; i <= kLayers; ++i) f[i] = std::exp(-0.5 * x[i] * x[i]);
        for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
    }
};

const ZigTables zig;

} // namespace

double RngStream::normal_from_tail(bool negative) {
    // Marsaglia tail method beyond x = kR
    for (;;) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double xx = -std::log(u1 + 0x1.0p-60) / kR;
        const double yy = -std::log(u2 + 0x1.0p-60);
        if (yy + yy > xx * xx) {
            const double r = kR + xx;
            return negative ? -r : r;
        }
    }
}

double RngStream::normal() {
    for (;;) {
        const std::uint64_t bits = next_u64();
        const int layer = static_cast<int>(bits & 0x7f);
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        if (std::fabs(u) < zig.ratio[layer]) return u * zig.x[layer];
        if (layer == 0) return normal_from_tail(u < 0.0);
        // wedge region: accept against the true density
        const double xcand = u * zig.x[layer];
        const double y = uniform();
        if (zig.f[layer + 1] + y * (zig.f[layer] - zig.f[layer + 1]) <
            std::exp(-0.5 * xcand * xcand))
            return xcand;
    }
}

} // namespace sitsq
