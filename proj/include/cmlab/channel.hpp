#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmlab/common.hpp"
#include "cmlab/covariance.hpp"
#include "cmlab/modulation.hpp"

namespace cmlab {

enum class Scheme { ttcm, ldpc };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// One codeword's worth of paired transmitted/received symbols with the
// data bits that produced it. tx symbols are exact constellation points,
// so the noise sequence z = rx - tx is recoverable.
struct Trace {
    std::vector<Point> tx;
    std::vector<Point> rx;
    Bits data_bits;  // 2 per symbol
    Scheme scheme = Scheme::ttcm;
    uint64_t seed = 0;
    double nominal_snr_db = 0.0;

    size_t n_symbols() const { return tx.size(); }
};

// SNR is total signal energy over total noise energy across dimensions,
// so sigma^2 per dimension = E||X||^2 / (N_D * 10^(snr/10)).
Covariance sigma_from_snr(double snr_db, const Constellation& c);

std::vector<Point> apply_awgn(std::span<const Point> symbols, const Covariance& sigma, uint64_t seed);

// Data-aided sample covariance of rx - tx, mean removed, 1/N normalization.
// A zero-noise trace yields the zero matrix (not positive definite).
Covariance estimate_covariance(const Trace& t);

// 10*log10(mean ||tx||^2 / mean ||rx - tx||^2); +inf when noise is zero.
double measure_snr(const Trace& t);

// Adds circular AWGN scaled so the combined measured SNR hits the target
// exactly. Rejects targets at or above the trace's current SNR.
Trace rx_noise_load_one(const Trace& t, double target_snr_db, uint64_t seed);

std::vector<Trace> rx_noise_load(const Trace& t, double target_snr_db, int n_realizations,
                                 uint64_t master_seed);

}  // namespace cmlab
