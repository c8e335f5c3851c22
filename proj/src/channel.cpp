#include "cmlab/channel.hpp"

#include <cmath>

#include "cmlab/rng.hpp"

namespace cmlab {

std::string scheme_name(Scheme s) { return s == Scheme::ttcm ? "ttcm" : "ldpc"; }

Scheme scheme_from_name(const std::string& name) {
    if (name == "ttcm") return Scheme::ttcm;
    if (name == "ldpc") return Scheme::ldpc;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected ttcm or ldpc)");
}

Covariance sigma_from_snr(double snr_db, const Constellation& c) {
    double es = 0.0;
    for (const Point& p : c.points) es += norm2(p);
    es /= static_cast<double>(c.points.size());
    double noise_energy = es * std::pow(10.0, -snr_db / 10.0);
    return Covariance::isotropic(noise_energy / 2.0);
}

std::vector<Point> apply_awgn(std::span<const Point> symbols, const Covariance& sigma, uint64_t seed) {
    if (sigma.trace() > 0.0 && !sigma.positive_definite())
        throw std::invalid_argument("apply_awgn: covariance is not positive definite");
    Covariance::Sqrt root = sigma.sqrt();
    Rng rng(seed);
    std::vector<Point> out(symbols.size());
    for (size_t i = 0; i < symbols.size(); ++i) {
        Point u{rng.gaussian(), rng.gaussian()};
        out[i] = symbols[i] + root.apply(u);
    }
    return out;
}

Covariance estimate_covariance(const Trace& t) {
    size_t n = t.n_symbols();
    if (n < 2 || t.rx.size() != n)
        throw std::invalid_argument("estimate_covariance: need at least 2 paired symbols");
    Point mean{0.0, 0.0};
    for (size_t i = 0; i < n; ++i) mean = mean + (t.rx[i] - t.tx[i]);
    mean = {mean.x / n, mean.y / n};
    double xx = 0.0, xy = 0.0, yy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        Point z = t.rx[i] - t.tx[i] - mean;
        xx += z.x * z.x;
        xy += z.x * z.y;
        yy += z.y * z.y;
    }
    return {xx / n, xy / n, yy / n};
}

double measure_snr(const Trace& t) {
    size_t n = t.n_symbols();
    if (n == 0 || t.rx.size() != n) throw std::invalid_argument("measure_snr: empty or mismatched trace");
    double ex = 0.0, ez = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ex += norm2(t.tx[i]);
        ez += norm2(t.rx[i] - t.tx[i]);
    }
    if (ez == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ex / ez);
}

Trace rx_noise_load_one(const Trace& t, double target_snr_db, uint64_t seed) {
    size_t n = t.n_symbols();
    double current = measure_snr(t);
    if (!(target_snr_db < current))
        throw std::invalid_argument("rx_noise_load: target SNR " + std::to_string(target_snr_db) +
                                    " dB is not below the trace's " + std::to_string(current) + " dB");
    double ex = 0.0, ez = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ex += norm2(t.tx[i]);
        ez += norm2(t.rx[i] - t.tx[i]);
    }
    double target_ez = ex * std::pow(10.0, -target_snr_db / 10.0);

    Rng rng(seed);
    std::vector<Point> w(n);
    double eww = 0.0, ezw = 0.0;
    for (size_t i = 0; i < n; ++i) {
        w[i] = {rng.gaussian(), rng.gaussian()};
        eww += norm2(w[i]);
        ezw += dot(t.rx[i] - t.tx[i], w[i]);
    }
    // Scale a of the added noise solves ||z + a*w||^2 = target exactly:
    // a^2*eww + 2a*ezw + ez = target_ez, positive root.
    double disc = ezw * ezw + eww * (target_ez - ez);
    double a = (-ezw + std::sqrt(std::max(disc, 0.0))) / eww;

    Trace out = t;
    out.seed = seed;
    out.nominal_snr_db = target_snr_db;
    for (size_t i = 0; i < n; ++i) out.rx[i] = out.rx[i] + Point{a * w[i].x, a * w[i].y};
    return out;
}

std::vector<Trace> rx_noise_load(const Trace& t, double target_snr_db, int n_realizations,
                                 uint64_t master_seed) {
    if (n_realizations < 1) throw std::invalid_argument("rx_noise_load: n_realizations must be >= 1");
    std::vector<Trace> out;
    out.reserve(static_cast<size_t>(n_realizations));
    for (int r = 0; r < n_realizations; ++r)
        out.push_back(rx_noise_load_one(t, target_snr_db, derive_seed(master_seed, 0x6e6c, r)));
    return out;
}

}  // namespace cmlab
