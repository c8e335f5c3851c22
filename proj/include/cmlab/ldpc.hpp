#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmlab/channel.hpp"
#include "cmlab/modulation.hpp"

namespace cmlab {

// DVB-S2 rate-2/3 long-frame code in irregular repeat-accumulate form.
// The accumulator address table is loaded from a checksummed data file,
// one 360-column group per line.
struct LdpcCode {
    int n = 0;  // 64800
    int k = 0;  // 43200
    int q = 0;  // (n - k) / 360

    std::vector<std::vector<uint32_t>> table;  // base addresses per group

    // Check-major sparse structure (info and parity connections).
    std::vector<uint32_t> chk_ptr;  // size n-k+1
    std::vector<uint32_t> chk_var;  // size chk_ptr.back()

    std::vector<uint16_t> var_degree;  // size n

    size_t n_checks() const { return static_cast<size_t>(n - k); }
    size_t n_edges() const { return chk_var.size(); }
};

// Expected file: data/dvbs2_r23_n64800.txt (SHA-256 pinned in the loader).
std::string default_dvbs2_table_path();

LdpcCode build_dvbs2_r23(const std::string& table_path = default_dvbs2_table_path());

Bits ldpc_encode(const Bits& info, const LdpcCode& code);

// Zero syndrome for the given hard bits?
bool syndrome_ok(const Bits& bits, const LdpcCode& code);

struct BpResult {
    Bits bits;                     // n hard decisions
    std::vector<double> posterior; // n LLRs, channel plus all check messages
    bool converged = false;
    int iterations = 0;
};

// Flooding-schedule sum-product (exact tanh rule). Stops early on a zero
// syndrome when early_term is set, otherwise runs max_iter iterations.
BpResult bp_decode(std::span<const double> llrs, const LdpcCode& code, int max_iter = 50,
                   bool early_term = true);

// Uniform random permutation over the serialized encoded bit stream.
struct BitInterleaver {
    std::vector<uint32_t> perm;  // interleaved[p] = serial[perm[p]]
    uint64_t seed = 0;
};

BitInterleaver build_bit_interleaver(size_t n_bits, uint64_t seed);

// Three-lane chain: round-robin 2-bit deserialization, per-lane encoding,
// 3-bit parallel-to-serial, bit interleaving, BRGC 8PSK mapping.
std::vector<uint8_t> bicm_encode_labels(const Bits& data, const LdpcCode& code, const BitInterleaver& il);
std::vector<Point> bicm_encode(const Bits& data, const LdpcCode& code, const BitInterleaver& il,
                               const Constellation& c);

struct BicmDecodeOutput {
    Bits data_bits;
    std::vector<double> lambda;  // posterior LLR per data bit
    int lanes_converged = 0;
};

BicmDecodeOutput bicm_decode(std::span<const Point> y, const Covariance& sigma, const LdpcCode& code,
                             const BitInterleaver& il, const Constellation& c, int max_iter = 50,
                             bool early_term = true);

// Single-lane short mode (one codeword, no bit interleaver, 21600 symbols).
std::vector<uint8_t> bicm_encode_labels_single(const Bits& data, const LdpcCode& code);
std::vector<Point> bicm_encode_single(const Bits& data, const LdpcCode& code, const Constellation& c);
BicmDecodeOutput bicm_decode_single(std::span<const Point> y, const Covariance& sigma,
                                    const LdpcCode& code, const Constellation& c, int max_iter = 50,
                                    bool early_term = true);

}  // namespace cmlab
