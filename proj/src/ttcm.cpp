#include "cmlab/ttcm.hpp"

#include <cmath>

#include "cmlab/rng.hpp"

namespace cmlab {

RscStepResult rsc_step(RscState st, uint8_t b1, uint8_t b2) {
    RscStepResult r;
    r.parity = st.s3;
    r.next.s1 = st.s3;
    r.next.s2 = static_cast<uint8_t>(st.s1 ^ (b2 & 1));
    r.next.s3 = static_cast<uint8_t>(st.s2 ^ (b1 & 1));
    return r;
}

namespace {

struct Trellis {
    uint8_t next[8][4];    // next[state][pair]
    uint8_t parity[8][4];  // parity emitted on that transition
    uint8_t prev[8][4];    // prev[state][pair]: unique source per pair

    Trellis() {
        for (uint8_t s = 0; s < 8; ++s) {
            for (uint8_t p = 0; p < 4; ++p) {
                RscStepResult r = rsc_step(RscState::from_index(s), (p >> 1) & 1, p & 1);
                next[s][p] = r.next.index();
                parity[s][p] = r.parity;
            }
        }
        for (uint8_t s = 0; s < 8; ++s)
            for (uint8_t p = 0; p < 4; ++p) prev[next[s][p]][p] = s;
    }
};

const Trellis& trellis() {
    static const Trellis t;
    return t;
}

constexpr double kBeliefClip = 50.0;

void normalize4(PairBelief& b) {
    double lse = logsumexp(std::span<const double>(b.data(), 4));
    for (double& v : b) v = std::clamp(v - lse, -kBeliefClip, kBeliefClip);
}

}  // namespace

uint32_t default_spread(uint32_t n_s) {
    return static_cast<uint32_t>(std::floor(std::sqrt(n_s / 2.0)));
}

OddEvenInterleaver build_interleaver(uint32_t n_s, uint32_t spread, uint64_t seed) {
    if (n_s < 2 || n_s % 2 != 0) throw std::invalid_argument("build_interleaver: n_s must be even");
    if (spread > default_spread(n_s))
        throw std::invalid_argument("build_interleaver: spread " + std::to_string(spread) +
                                    " exceeds feasibility guard " + std::to_string(default_spread(n_s)));

    const uint32_t S = spread;
    const int max_restarts = 50;
    std::vector<uint32_t> pool[2];
    std::vector<uint32_t> pi(n_s);

    // Sequential randomized fill. A stuck tail slot is repaired by swapping
    // a pooled value into a far-earlier slot of the same parity whose old
    // value fits here; both windows are rechecked, so the constraint holds.
    auto clear_left = [&](uint32_t i, uint32_t v) {  // v against slots [i-S, i-1]
        uint32_t lo = i > S ? i - S : 0;
        for (uint32_t j = lo; j < i; ++j)
            if (static_cast<uint32_t>(std::abs(static_cast<int>(v) - static_cast<int>(pi[j]))) <= S)
                return false;
        return true;
    };
    auto clear_around = [&](uint32_t j, uint32_t v, uint32_t assigned_up_to) {
        uint32_t lo = j > S ? j - S : 0;
        uint32_t hi = std::min(j + S, assigned_up_to - 1);
        for (uint32_t l = lo; l <= hi; ++l) {
            if (l == j) continue;
            if (static_cast<uint32_t>(std::abs(static_cast<int>(v) - static_cast<int>(pi[l]))) <= S)
                return false;
        }
        return true;
    };

    for (int attempt = 0; attempt < max_restarts; ++attempt) {
        Rng rng(derive_seed(seed, 0x5172, attempt));
        pool[0].clear();
        pool[1].clear();
        for (uint32_t v = 0; v < n_s; v += 2) pool[0].push_back(v);
        for (uint32_t v = 1; v < n_s; v += 2) pool[1].push_back(v);

        bool ok = true;
        for (uint32_t i = 0; i < n_s && ok; ++i) {
            auto& cand = pool[i & 1];
            uint32_t chosen = n_s;  // sentinel
            for (int t = 0; t < 64 && !cand.empty(); ++t) {
                size_t j = rng.below(cand.size());
                if (clear_left(i, cand[j])) {
                    chosen = cand[j];
                    cand[j] = cand.back();
                    cand.pop_back();
                    break;
                }
            }
            if (chosen == n_s) {
                std::vector<size_t> feasible;
                for (size_t j = 0; j < cand.size(); ++j)
                    if (clear_left(i, cand[j])) feasible.push_back(j);
                if (!feasible.empty()) {
                    size_t j = feasible[rng.below(feasible.size())];
                    chosen = cand[j];
                    cand[j] = cand.back();
                    cand.pop_back();
                }
            }
            if (chosen == n_s && i > 2 * S + 2) {
                for (int t = 0; t < 50000 && chosen == n_s; ++t) {
                    size_t vj = rng.below(cand.size());
                    uint32_t v = cand[vj];
                    uint32_t jmax = (i - S - 1) / 2;  // same-parity slots strictly below i-S
                    if (jmax == 0) break;
                    uint32_t j = 2 * static_cast<uint32_t>(rng.below(jmax)) + (i & 1);
                    uint32_t w = pi[j];
                    if (!clear_left(i, w)) continue;
                    if (!clear_around(j, v, i)) continue;
                    pi[j] = v;
                    cand[vj] = cand.back();
                    cand.pop_back();
                    chosen = w;
                }
            }
            if (chosen == n_s) {
                ok = false;
                break;
            }
            pi[i] = chosen;
        }
        if (ok) {
            OddEvenInterleaver il;
            il.pi = pi;
            il.spread = S;
            il.seed = seed;
            return il;
        }
    }
    throw std::runtime_error("build_interleaver: construction failed after " +
                             std::to_string(max_restarts) + " restarts; use a smaller spread");
}

std::vector<uint8_t> ttcm_encode_labels(const Bits& data, const OddEvenInterleaver& il) {
    const size_t n = il.size();
    if (data.size() != 2 * n)
        throw std::invalid_argument("ttcm_encode: expected " + std::to_string(2 * n) + " data bits, got " +
                                    std::to_string(data.size()));
    const Trellis& tr = trellis();

    std::vector<uint8_t> pairs(n);
    for (size_t i = 0; i < n; ++i)
        pairs[i] = static_cast<uint8_t>(data[2 * i] << 1 | data[2 * i + 1]);

    std::vector<uint8_t> parity1(n), parity2(n);
    uint8_t st = 0;
    for (size_t i = 0; i < n; ++i) {
        parity1[i] = tr.parity[st][pairs[i]];
        st = tr.next[st][pairs[i]];
    }
    st = 0;
    for (size_t t = 0; t < n; ++t) {
        uint32_t src = il.pi[t];
        parity2[src] = tr.parity[st][pairs[src]];  // output realigned with the original pairs
        st = tr.next[st][pairs[src]];
    }

    std::vector<uint8_t> labels(n);
    for (size_t i = 0; i < n; ++i) {
        uint8_t p = (i % 2 == 0) ? parity1[i] : parity2[i];
        labels[i] = static_cast<uint8_t>(pairs[i] << 1 | p);
    }
    return labels;
}

std::vector<Point> ttcm_encode(const Bits& data, const OddEvenInterleaver& il, const Constellation& c) {
    std::vector<uint8_t> labels = ttcm_encode_labels(data, il);
    std::vector<Point> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) out[i] = c.points[c.index_of_label[labels[i]]];
    return out;
}

std::vector<PairBelief> first_iteration_a_priori(const std::vector<SymbolLL>& lls, FirstIterMetric metric) {
    std::vector<PairBelief> out(lls.size());
    for (size_t i = 0; i < lls.size(); ++i) {
        PairBelief b{0.0, 0.0, 0.0, 0.0};
        if (i % 2 == 1) {  // slots carrying the second encoder's parity
            for (int p = 0; p < 4; ++p) {
                double a = lls[i][p << 1];
                double c = lls[i][(p << 1) | 1];
                b[p] = (metric == FirstIterMetric::marginalize) ? logsumexp2(a, c) : a + c;
            }
        }
        normalize4(b);
        out[i] = b;
    }
    return out;
}

std::vector<PairBelief> bcjr(const std::vector<SymbolLL>& lls, const std::vector<PairBelief>& a_priori) {
    const size_t n = lls.size();
    if (a_priori.size() != n) throw std::invalid_argument("bcjr: lls and a_priori length mismatch");
    const Trellis& tr = trellis();
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    auto gamma = [&](size_t t, uint8_t s, uint8_t p) {
        return a_priori[t][p] + lls[t][(p << 1) | tr.parity[s][p]];
    };

    // Backward pass, stored; beta[n] uniform (free final state).
    std::vector<std::array<double, 8>> beta(n + 1);
    beta[n].fill(0.0);
    for (size_t t = n; t-- > 0;) {
        std::array<double, 8>& b = beta[t];
        double mx = kNegInf;
        for (uint8_t s = 0; s < 8; ++s) {
            double cand[4];
            for (uint8_t p = 0; p < 4; ++p) cand[p] = gamma(t, s, p) + beta[t + 1][tr.next[s][p]];
            b[s] = logsumexp(std::span<const double>(cand, 4));
            mx = std::max(mx, b[s]);
        }
        for (double& v : b) v -= mx;
    }

    // Forward pass fused with the output pass.
    std::vector<PairBelief> post(n);
    std::array<double, 8> alpha;
    alpha.fill(kNegInf);
    alpha[0] = 0.0;
    std::array<double, 8> alpha_next;
    for (size_t t = 0; t < n; ++t) {
        PairBelief& o = post[t];
        for (uint8_t p = 0; p < 4; ++p) {
            double cand[8];
            for (uint8_t s = 0; s < 8; ++s) cand[s] = alpha[s] + gamma(t, s, p) + beta[t + 1][tr.next[s][p]];
            o[p] = logsumexp(std::span<const double>(cand, 8));
        }
        normalize4(o);

        double mx = kNegInf;
        for (uint8_t s2 = 0; s2 < 8; ++s2) {
            double cand[4];
            for (uint8_t p = 0; p < 4; ++p) {
                uint8_t s = tr.prev[s2][p];
                cand[p] = alpha[s] + gamma(t, s, p);
            }
            alpha_next[s2] = logsumexp(std::span<const double>(cand, 4));
            mx = std::max(mx, alpha_next[s2]);
        }
        for (uint8_t s2 = 0; s2 < 8; ++s2) alpha[s2] = alpha_next[s2] - mx;
    }
    return post;
}

TtcmDecodeOutput ttcm_decode(std::span<const Point> y, const Covariance& sigma,
                             const OddEvenInterleaver& il, const Constellation& c, int iterations,
                             FirstIterMetric metric) {
    const size_t n = il.size();
    if (y.size() != n)
        throw std::invalid_argument("ttcm_decode: expected " + std::to_string(n) + " symbols");
    if (iterations < 1) throw std::invalid_argument("ttcm_decode: iterations must be >= 1");

    Covariance::InverseForm inv = sigma.inverse();
    std::vector<SymbolLL> lls(n);
    for (size_t i = 0; i < n; ++i) lls[i] = symbol_log_likelihoods(y[i], c, inv);

    const SymbolLL zero{};
    // Decoder 1 owns even 0-based slots, decoder 2 the odd ones; decoder 2
    // runs in interleaved time t over original slot pi[t].
    std::vector<SymbolLL> own1(n), own2(n);
    for (size_t i = 0; i < n; ++i) own1[i] = (i % 2 == 0) ? lls[i] : zero;
    for (size_t t = 0; t < n; ++t) own2[t] = (t % 2 == 1) ? lls[il.pi[t]] : zero;

    std::vector<PairBelief> la1 = first_iteration_a_priori(lls, metric);
    std::vector<PairBelief> la2(n), post1, post2;

    for (int it = 0; it < iterations; ++it) {
        post1 = bcjr(own1, la1);
        for (size_t t = 0; t < n; ++t) {
            uint32_t i = il.pi[t];
            PairBelief e;
            for (int p = 0; p < 4; ++p) e[p] = post1[i][p] - la1[i][p];
            normalize4(e);
            la2[t] = e;
        }
        post2 = bcjr(own2, la2);
        for (size_t t = 0; t < n; ++t) {
            PairBelief e;
            for (int p = 0; p < 4; ++p) e[p] = post2[t][p] - la2[t][p];
            normalize4(e);
            la1[il.pi[t]] = e;
        }
    }

    TtcmDecodeOutput out;
    out.data_bits.resize(2 * n);
    out.lambda.resize(2 * n);
    for (size_t t = 0; t < n; ++t) {
        const PairBelief& b = post2[t];
        size_t i = il.pi[t];
        double l1 = logsumexp2(b[0], b[1]) - logsumexp2(b[2], b[3]);
        double l2 = logsumexp2(b[0], b[2]) - logsumexp2(b[1], b[3]);
        out.lambda[2 * i] = l1;
        out.lambda[2 * i + 1] = l2;
        out.data_bits[2 * i] = l1 < 0.0 ? 1 : 0;
        out.data_bits[2 * i + 1] = l2 < 0.0 ? 1 : 0;
    }
    return out;
}

}  // namespace cmlab
