#include "cmlab/ldpc.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cmlab/rng.hpp"
#include "cmlab/sha256.hpp"

namespace cmlab {

namespace {

constexpr int kN = 64800;
constexpr int kK = 43200;
constexpr int kGroup = 360;
constexpr const char* kTableSha256 =
    "668352cdb872e54380c434b90868ce3002971b88d240663dec511172744d198c";

constexpr double kMsgClip = 40.0;

}  // namespace

std::string default_dvbs2_table_path() {
    if (const char* env = std::getenv("CMLAB_DVBS2_TABLE")) return env;
#ifdef CMLAB_DATA_DIR
    return std::string(CMLAB_DATA_DIR) + "/dvbs2_r23_n64800.txt";
#else
    return "data/dvbs2_r23_n64800.txt";
#endif
}

LdpcCode build_dvbs2_r23(const std::string& table_path) {
    std::ifstream f(table_path, std::ios::binary);
    if (!f) throw DataFormatError("cannot open LDPC table file: " + table_path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::string digest = sha256_hex(content.data(), content.size());
    if (digest != kTableSha256)
        throw DataFormatError("LDPC table checksum mismatch for " + table_path + ": sha256 " + digest +
                              ", expected " + kTableSha256);

    LdpcCode code;
    code.n = kN;
    code.k = kK;
    code.q = (kN - kK) / kGroup;  // 60

    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<uint32_t> row;
        long v;
        while (ls >> v) {
            if (v < 0 || v >= kN - kK)
                throw DataFormatError("LDPC table address " + std::to_string(v) + " out of range");
            row.push_back(static_cast<uint32_t>(v));
        }
        if (!row.empty()) code.table.push_back(std::move(row));
    }
    if (code.table.size() != static_cast<size_t>(kK / kGroup))
        throw DataFormatError("LDPC table has " + std::to_string(code.table.size()) +
                              " groups, expected " + std::to_string(kK / kGroup));

    // Expand the group structure into a check-major CSR.
    const size_t n_chk = code.n_checks();
    std::vector<uint32_t> deg(n_chk, 0);
    code.var_degree.assign(kN, 0);

    auto for_each_info_edge = [&](auto&& fn) {
        for (size_t g = 0; g < code.table.size(); ++g) {
            for (int mcol = 0; mcol < kGroup; ++mcol) {
                uint32_t var = static_cast<uint32_t>(g * kGroup + mcol);
                for (uint32_t base : code.table[g]) {
                    uint32_t chk = (base + static_cast<uint32_t>(mcol) * code.q) % (kN - kK);
                    fn(chk, var);
                }
            }
        }
        for (uint32_t j = 0; j < n_chk; ++j) {
            fn(j, kK + j);
            if (j > 0) fn(j, kK + j - 1);  // accumulator chain
        }
    };

    for_each_info_edge([&](uint32_t chk, uint32_t var) {
        ++deg[chk];
        ++code.var_degree[var];
    });
    code.chk_ptr.assign(n_chk + 1, 0);
    for (size_t j = 0; j < n_chk; ++j) code.chk_ptr[j + 1] = code.chk_ptr[j] + deg[j];
    code.chk_var.resize(code.chk_ptr.back());
    std::vector<uint32_t> fill(code.chk_ptr.begin(), code.chk_ptr.end() - 1);
    for_each_info_edge([&](uint32_t chk, uint32_t var) { code.chk_var[fill[chk]++] = var; });
    return code;
}

Bits ldpc_encode(const Bits& info, const LdpcCode& code) {
    if (info.size() != static_cast<size_t>(code.k))
        throw std::invalid_argument("ldpc_encode: expected " + std::to_string(code.k) + " info bits, got " +
                                    std::to_string(info.size()));
    const int n_par = code.n - code.k;
    Bits parity(n_par, 0);
    for (size_t g = 0; g < code.table.size(); ++g) {
        for (int mcol = 0; mcol < kGroup; ++mcol) {
            uint8_t bit = info[g * kGroup + mcol];
            if (!bit) continue;
            for (uint32_t base : code.table[g]) {
                uint32_t addr = (base + static_cast<uint32_t>(mcol) * code.q) % n_par;
                parity[addr] ^= 1;
            }
        }
    }
    for (int j = 1; j < n_par; ++j) parity[j] ^= parity[j - 1];

    Bits cw(code.n);
    std::copy(info.begin(), info.end(), cw.begin());
    std::copy(parity.begin(), parity.end(), cw.begin() + code.k);
    return cw;
}

bool syndrome_ok(const Bits& bits, const LdpcCode& code) {
    for (size_t j = 0; j < code.n_checks(); ++j) {
        uint8_t s = 0;
        for (uint32_t e = code.chk_ptr[j]; e < code.chk_ptr[j + 1]; ++e) s ^= bits[code.chk_var[e]];
        if (s) return false;
    }
    return true;
}

BpResult bp_decode(std::span<const double> llrs, const LdpcCode& code, int max_iter, bool early_term) {
    if (llrs.size() != static_cast<size_t>(code.n))
        throw std::invalid_argument("bp_decode: expected " + std::to_string(code.n) + " LLRs");
    for (double l : llrs)
        if (!std::isfinite(l)) throw std::invalid_argument("bp_decode: non-finite channel LLR");

    const size_t n_chk = code.n_checks();
    std::vector<double> c2v(code.n_edges(), 0.0);
    std::vector<double> lq(llrs.begin(), llrs.end());
    std::vector<double> lacc(code.n);

    BpResult res;
    res.bits.assign(code.n, 0);

    // A bit with an exactly-zero posterior is undecided, so a syndrome hit
    // on the tie-broken word does not count as convergence.
    bool has_tie = false;
    auto harden = [&]() {
        has_tie = false;
        for (int v = 0; v < code.n; ++v) {
            res.bits[v] = lq[v] < 0.0 ? 1 : 0;
            has_tie |= lq[v] == 0.0;
        }
    };

    harden();
    double t[32];
    for (int it = 1; it <= max_iter; ++it) {
        std::copy(llrs.begin(), llrs.end(), lacc.begin());
        for (size_t j = 0; j < n_chk; ++j) {
            const uint32_t lo = code.chk_ptr[j], hi = code.chk_ptr[j + 1];
            const int d = static_cast<int>(hi - lo);
            double prod = 1.0;
            int zeros = 0;
            int zero_at = -1;
            for (int e = 0; e < d; ++e) {
                double v2c = lq[code.chk_var[lo + e]] - c2v[lo + e];
                v2c = std::clamp(v2c, -kMsgClip, kMsgClip);
                double th = std::tanh(0.5 * v2c);
                t[e] = th;
                if (th == 0.0) {
                    ++zeros;
                    zero_at = e;
                } else {
                    prod *= th;
                }
            }
            for (int e = 0; e < d; ++e) {
                double out;
                if (zeros == 0) {
                    double r = prod / t[e];
                    r = std::clamp(r, -0.9999999999999998, 0.9999999999999998);
                    out = 2.0 * std::atanh(r);
                } else if (zeros == 1 && e == zero_at) {
                    double r = std::clamp(prod, -0.9999999999999998, 0.9999999999999998);
                    out = 2.0 * std::atanh(r);
                } else {
                    out = 0.0;
                }
                out = std::clamp(out, -kMsgClip, kMsgClip);
                c2v[lo + e] = out;
                lacc[code.chk_var[lo + e]] += out;
            }
        }
        lq.swap(lacc);
        res.iterations = it;
        harden();
        if (early_term && !has_tie && syndrome_ok(res.bits, code)) {
            res.converged = true;
            break;
        }
    }
    if (!early_term) res.converged = !has_tie && syndrome_ok(res.bits, code);
    res.posterior = std::move(lq);
    return res;
}

BitInterleaver build_bit_interleaver(size_t n_bits, uint64_t seed) {
    BitInterleaver il;
    il.seed = seed;
    il.perm.resize(n_bits);
    for (size_t i = 0; i < n_bits; ++i) il.perm[i] = static_cast<uint32_t>(i);
    Rng rng(derive_seed(seed, 0xb17));
    for (size_t i = n_bits; i > 1; --i) {  // Fisher-Yates
        size_t j = rng.below(i);
        std::swap(il.perm[i - 1], il.perm[j]);
    }
    return il;
}

namespace {

// Lane deserialization: data bit d -> lane (d%6)/2, lane-info slot 2*(d/6) + d%2.
inline size_t lane_of(size_t d) { return (d % 6) / 2; }
inline size_t lane_slot(size_t d) { return 2 * (d / 6) + d % 2; }

std::vector<uint8_t> labels_from_stream(const Bits& stream) {
    std::vector<uint8_t> labels(stream.size() / 3);
    for (size_t s = 0; s < labels.size(); ++s)
        labels[s] = static_cast<uint8_t>(stream[3 * s] << 2 | stream[3 * s + 1] << 1 | stream[3 * s + 2]);
    return labels;
}

std::vector<Point> points_from_labels(const std::vector<uint8_t>& labels, const Constellation& c) {
    std::vector<Point> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) out[i] = c.points[c.index_of_label[labels[i]]];
    return out;
}

}  // namespace

std::vector<uint8_t> bicm_encode_labels(const Bits& data, const LdpcCode& code, const BitInterleaver& il) {
    const size_t n_lanes = 3;
    if (data.size() != n_lanes * static_cast<size_t>(code.k))
        throw std::invalid_argument("bicm_encode: expected " + std::to_string(n_lanes * code.k) +
                                    " data bits, got " + std::to_string(data.size()));
    std::vector<Bits> lane_info(n_lanes, Bits(code.k));
    for (size_t d = 0; d < data.size(); ++d) lane_info[lane_of(d)][lane_slot(d)] = data[d];

    std::vector<Bits> cw(n_lanes);
    for (size_t j = 0; j < n_lanes; ++j) cw[j] = ldpc_encode(lane_info[j], code);

    // Parallel-to-serial, 3 bits per lane per clock, lanes top to bottom.
    const size_t n_serial = n_lanes * static_cast<size_t>(code.n);
    if (il.perm.size() != n_serial)
        throw std::invalid_argument("bicm_encode: interleaver covers " + std::to_string(il.perm.size()) +
                                    " bits, expected " + std::to_string(n_serial));
    Bits serial(n_serial);
    for (size_t t = 0; t < static_cast<size_t>(code.n) / 3; ++t)
        for (size_t j = 0; j < n_lanes; ++j)
            for (size_t u = 0; u < 3; ++u) serial[9 * t + 3 * j + u] = cw[j][3 * t + u];

    Bits interleaved(n_serial);
    for (size_t p = 0; p < n_serial; ++p) interleaved[p] = serial[il.perm[p]];
    return labels_from_stream(interleaved);
}

std::vector<Point> bicm_encode(const Bits& data, const LdpcCode& code, const BitInterleaver& il,
                               const Constellation& c) {
    return points_from_labels(bicm_encode_labels(data, code, il), c);
}

BicmDecodeOutput bicm_decode(std::span<const Point> y, const Covariance& sigma, const LdpcCode& code,
                             const BitInterleaver& il, const Constellation& c, int max_iter,
                             bool early_term) {
    const size_t n_lanes = 3;
    const size_t n_serial = n_lanes * static_cast<size_t>(code.n);
    if (3 * y.size() != n_serial)
        throw std::invalid_argument("bicm_decode: expected " + std::to_string(n_serial / 3) + " symbols");

    Covariance::InverseForm inv = sigma.inverse();
    std::vector<double> llr_serial(n_serial);
    for (size_t s = 0; s < y.size(); ++s) {
        BitLlr l = bitwise_llrs(symbol_log_likelihoods(y[s], c, inv), c);
        for (size_t k = 0; k < 3; ++k) llr_serial[il.perm[3 * s + k]] = l[k];
    }

    BicmDecodeOutput out;
    out.data_bits.assign(2 * y.size(), 0);
    out.lambda.assign(2 * y.size(), 0.0);
    for (size_t j = 0; j < n_lanes; ++j) {
        std::vector<double> lane_llr(code.n);
        for (size_t t = 0; t < static_cast<size_t>(code.n) / 3; ++t)
            for (size_t u = 0; u < 3; ++u) lane_llr[3 * t + u] = llr_serial[9 * t + 3 * j + u];
        BpResult r = bp_decode(lane_llr, code, max_iter, early_term);
        if (r.converged) ++out.lanes_converged;
        for (size_t slot = 0; slot < static_cast<size_t>(code.k); ++slot) {
            size_t d = 6 * (slot / 2) + 2 * j + slot % 2;
            out.data_bits[d] = r.bits[slot];
            out.lambda[d] = r.posterior[slot];
        }
    }
    return out;
}

std::vector<uint8_t> bicm_encode_labels_single(const Bits& data, const LdpcCode& code) {
    if (data.size() != static_cast<size_t>(code.k))
        throw std::invalid_argument("bicm_encode_single: expected " + std::to_string(code.k) +
                                    " data bits, got " + std::to_string(data.size()));
    Bits cw = ldpc_encode(data, code);
    return labels_from_stream(cw);
}

std::vector<Point> bicm_encode_single(const Bits& data, const LdpcCode& code, const Constellation& c) {
    return points_from_labels(bicm_encode_labels_single(data, code), c);
}

BicmDecodeOutput bicm_decode_single(std::span<const Point> y, const Covariance& sigma,
                                    const LdpcCode& code, const Constellation& c, int max_iter,
                                    bool early_term) {
    if (3 * y.size() != static_cast<size_t>(code.n))
        throw std::invalid_argument("bicm_decode_single: expected " + std::to_string(code.n / 3) +
                                    " symbols");
    Covariance::InverseForm inv = sigma.inverse();
    std::vector<double> llr(code.n);
    for (size_t s = 0; s < y.size(); ++s) {
        BitLlr l = bitwise_llrs(symbol_log_likelihoods(y[s], c, inv), c);
        for (size_t k = 0; k < 3; ++k) llr[3 * s + k] = l[k];
    }
    BpResult r = bp_decode(llr, code, max_iter, early_term);
    BicmDecodeOutput out;
    out.lanes_converged = r.converged ? 1 : 0;
    out.data_bits.assign(r.bits.begin(), r.bits.begin() + code.k);
    out.lambda.assign(r.posterior.begin(), r.posterior.begin() + code.k);
    return out;
}

}  // namespace cmlab
