#pragma once

#include <cstdint>
#include <vector>

#include "cmlab/channel.hpp"
#include "cmlab/modulation.hpp"

namespace cmlab {

// 8-state rate-2/3 recursive systematic convolutional circuit. Registers
// (s1,s2,s3) left to right; the feedback tap runs from after the third
// register back into the first, b2 enters the adder ahead of the second
// register and b1 the adder ahead of the third. Parity is the third
// register's current content.
struct RscState {
    uint8_t s1 = 0, s2 = 0, s3 = 0;

    uint8_t index() const { return static_cast<uint8_t>(s1 << 2 | s2 << 1 | s3); }
    static RscState from_index(uint8_t i) {
        return {static_cast<uint8_t>((i >> 2) & 1), static_cast<uint8_t>((i >> 1) & 1),
                static_cast<uint8_t>(i & 1)};
    }
};

struct RscStepResult {
    RscState next;
    uint8_t parity;
};

RscStepResult rsc_step(RscState state, uint8_t b1, uint8_t b2);

// Parity-preserving s-random symbol permutation: pi[i] % 2 == i % 2 and any
// two inputs within spread S map at least S+1 apart. 0-based; even 0-based
// slots are the odd 1-based positions that carry the first encoder's parity.
struct OddEvenInterleaver {
    std::vector<uint32_t> pi;
    uint32_t spread = 0;
    uint64_t seed = 0;

    size_t size() const { return pi.size(); }
};

OddEvenInterleaver build_interleaver(uint32_t n_s, uint32_t spread, uint64_t seed);

uint32_t default_spread(uint32_t n_s);

// Encoded 3-bit labels, one per symbol (mostly for tests and pre-FEC BER).
std::vector<uint8_t> ttcm_encode_labels(const Bits& data, const OddEvenInterleaver& il);

std::vector<Point> ttcm_encode(const Bits& data, const OddEvenInterleaver& il, const Constellation& c);

// Log-probability belief over the data pair (c1,c2), indexed c1*2+c2,
// normalized to logsumexp 0.
using PairBelief = std::array<double, 4>;

enum class FirstIterMetric {
    marginalize,  // probability-domain sum over the parity bit
    log_sum       // plain log-domain addition of the two LLs
};

std::vector<PairBelief> first_iteration_a_priori(const std::vector<SymbolLL>& lls,
                                                 FirstIterMetric metric = FirstIterMetric::marginalize);

// Exact log-domain forward-backward over the 8-state symbol trellis.
// lls[t] must already be zeroed at slots the calling decoder does not own.
// Starts in state 0; the final state is free (no termination).
std::vector<PairBelief> bcjr(const std::vector<SymbolLL>& lls, const std::vector<PairBelief>& a_priori);

struct TtcmDecodeOutput {
    Bits data_bits;              // 2 per symbol
    std::vector<double> lambda;  // 2 per symbol, log P(0)/P(1)
};

TtcmDecodeOutput ttcm_decode(std::span<const Point> y, const Covariance& sigma,
                             const OddEvenInterleaver& il, const Constellation& c, int iterations = 10,
                             FirstIterMetric metric = FirstIterMetric::marginalize);

}  // namespace cmlab
