#pragma once

#include <cstdint>
#include <cmath>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fraclap {

// Neumaier compensated accumulator. Reductions that must be bit-stable
// across thread counts and node relabelings go through this.
class kahan_sum {
public:
    void add(double x) noexcept {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(std::span<const double> xs) noexcept {
    kahan_sum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

// Deterministic RNG: mt19937_64 is fully specified by the standard, and the
// canonical double extraction avoids distribution-object variability.
class rng {
public:
    explicit rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

// Least-squares slope/intercept of y against x.
struct line_fit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline line_fit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = double(n) * sxx - sx * sx;
    line_fit f;
    f.slope = (double(n) * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / double(n);
    return f;
}

// 17 significant digits round-trips IEEE doubles exactly.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}
