#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmlab {

using Bits = std::vector<uint8_t>;

// 2-dimensional real channel symbol.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Point a) { return dot(a, a); }

// Thrown for malformed inputs on file/wire surfaces (exit code 2 territory).
struct DataFormatError : std::runtime_error {
    explicit DataFormatError(const std::string& what) : std::runtime_error(what) {}
};

inline double logsumexp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

inline double logsumexp2(double a, double b) {
    double m = std::max(a, b);
    if (!std::isfinite(m)) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline constexpr double kLog2 = 0.6931471805599453;

inline double log2_from_ln(double nats) { return nats / kLog2; }

}  // namespace cmlab
