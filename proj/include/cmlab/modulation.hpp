#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmlab/common.hpp"
#include "cmlab/covariance.hpp"

namespace cmlab {

enum class Labeling { natural, brgc };

// 8PSK with unit average energy. Point k sits at angle 2*pi*k/8,
// counter-clockwise from angle 0; labels are (b1,b2,b3) with b1 the MSB.
struct Constellation {
    static constexpr int m = 3;
    static constexpr int M = 8;

    std::vector<Point> points;                       // size M
    std::vector<std::array<uint8_t, 3>> labels;      // size M
    std::array<uint8_t, 8> index_of_label{};         // label value b1b2b3 -> point index
    Labeling labeling = Labeling::natural;

    uint8_t label_value(int point_index) const {
        const auto& l = labels[static_cast<size_t>(point_index)];
        return static_cast<uint8_t>(l[0] << 2 | l[1] << 1 | l[2]);
    }
};

// Per-symbol log-likelihoods over the M candidate points, shifted so the
// maximum entry is 0 and floored at -300 nats. The dropped density constant
// cancels in every downstream ratio.
using SymbolLL = std::array<double, 8>;

// Per-bit LLRs, log P(b_k=0 | y) / P(b_k=1 | y): positive favours bit 0.
using BitLlr = std::array<double, 3>;

Constellation build_8psk(Labeling labeling);

std::vector<Point> map_bits(const Bits& bits, const Constellation& c);

SymbolLL symbol_log_likelihoods(Point y, const Constellation& c, const Covariance::InverseForm& inv);
SymbolLL symbol_log_likelihoods(Point y, const Constellation& c, const Covariance& sigma);

BitLlr bitwise_llrs(const SymbolLL& ll, const Constellation& c);

struct HardDecision {
    int index;
    std::array<uint8_t, 3> bits;
};

HardDecision hard_demap(Point y, const Constellation& c);

}  // namespace cmlab
