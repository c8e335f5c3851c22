#include "cmlab/modulation.hpp"

#include <cmath>

namespace cmlab {

Constellation build_8psk(Labeling labeling) {
    Constellation c;
    c.labeling = labeling;
    c.points.resize(Constellation::M);
    c.labels.resize(Constellation::M);
    for (int k = 0; k < Constellation::M; ++k) {
        double angle = 2.0 * M_PI * k / Constellation::M;
        c.points[k] = {std::cos(angle), std::sin(angle)};
        int v = (labeling == Labeling::brgc) ? (k ^ (k >> 1)) : k;
        c.labels[k] = {static_cast<uint8_t>((v >> 2) & 1), static_cast<uint8_t>((v >> 1) & 1),
                       static_cast<uint8_t>(v & 1)};
        c.index_of_label[v] = static_cast<uint8_t>(k);
    }
    return c;
}

std::vector<Point> map_bits(const Bits& bits, const Constellation& c) {
    if (bits.size() % 3 != 0)
        throw std::invalid_argument("map_bits: bit count " + std::to_string(bits.size()) +
                                    " is not a multiple of 3");
    std::vector<Point> out(bits.size() / 3);
    for (size_t s = 0; s < out.size(); ++s) {
        int v = bits[3 * s] << 2 | bits[3 * s + 1] << 1 | bits[3 * s + 2];
        out[s] = c.points[c.index_of_label[v]];
    }
    return out;
}

SymbolLL symbol_log_likelihoods(Point y, const Constellation& c, const Covariance::InverseForm& inv) {
    SymbolLL ll;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < Constellation::M; ++i) {
        ll[i] = -0.5 * inv.quad(y - c.points[i]);
        best = std::max(best, ll[i]);
    }
    for (double& v : ll) v = std::max(v - best, -300.0);
    return ll;
}

SymbolLL symbol_log_likelihoods(Point y, const Constellation& c, const Covariance& sigma) {
    return symbol_log_likelihoods(y, c, sigma.inverse());
}

BitLlr bitwise_llrs(const SymbolLL& ll, const Constellation& c) {
    BitLlr out;
    for (int k = 0; k < Constellation::m; ++k) {
        double zero[4], one[4];
        int nz = 0, no = 0;
        for (int i = 0; i < Constellation::M; ++i) {
            if (c.labels[i][k] == 0)
                zero[nz++] = ll[i];
            else
                one[no++] = ll[i];
        }
        out[k] = logsumexp(std::span<const double>(zero, 4)) - logsumexp(std::span<const double>(one, 4));
    }
    return out;
}

HardDecision hard_demap(Point y, const Constellation& c) {
    int best = 0;
    double best_d = norm2(y - c.points[0]);
    for (int i = 1; i < Constellation::M; ++i) {
        double d = norm2(y - c.points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return {best, c.labels[best]};
}

}  // namespace cmlab
