#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmlab/air.hpp"
#include "cmlab/channel.hpp"
#include "cmlab/ldpc.hpp"
#include "cmlab/ttcm.hpp"

namespace cmlab {

struct SweepConfig {
    Scheme scheme = Scheme::ttcm;
    std::vector<double> snr_grid_db;          // strictly increasing
    int n_s = 64800;                          // 64800 or 21600
    int codewords = 100;                      // budget per SNR point
    int iterations = 0;                       // 0 -> scheme default (10 TTCM / 50 LDPC)
    uint64_t master_seed = 1;
    uint64_t interleaver_seed = 1;
    std::string out_path;                     // empty -> no CSV
    int threads = 0;                          // 0 -> hardware concurrency
    bool early_term = true;                   // LDPC early stop on zero syndrome
    int min_bit_errors = 100;                 // BER confidence rule (ber sweeps)
    FirstIterMetric first_iter = FirstIterMetric::marginalize;

    static std::vector<double> grid(double start, double stop, double step);
    void validate() const;
    int effective_iterations() const;
};

struct ResultRow {
    std::string scheme;
    double snr_db = 0.0;  // measured
    int n_s = 0;
    int n_codewords = 0;
    double pre_fec_ber = 0.0;
    double post_fec_ber = 0.0;
    double mi = 0.0;
    double gmi = 0.0;
    double i_sd = 0.0;
    double i_hd = 0.0;
    double awgn_cap = 0.0;
    double min_ber_mi = 0.0;
    double min_ber_gmi = 0.0;
    int censored = 0;
    uint64_t seed = 0;
    size_t post_fec_bit_errors = 0;  // not serialized; for confidence checks
};

std::string csv_header();
std::string csv_row(const ResultRow& r);

// BER-focused sweep: per SNR point codewords run until >= min_bit_errors
// post-FEC bit errors or the budget is exhausted (flagged censored).
std::vector<ResultRow> run_ber_sweep(const SweepConfig& cfg);

// AIR-focused sweep: always decodes exactly cfg.codewords per point.
std::vector<ResultRow> run_air_sweep(const SweepConfig& cfg);

// Generate synthetic traces the way the sweeps do (one per codeword).
std::vector<Trace> generate_traces(const SweepConfig& cfg, double snr_db, int count);

// Decode traces from a file; with realizations > 0 each trace is first
// noise-loaded to target_snr_db that many times. One row per (trace,
// realization-batch): realizations == 0 gives one row per trace.
struct DecodeTraceConfig {
    Scheme scheme = Scheme::ttcm;
    int iterations = 0;
    int realizations = 0;
    std::optional<double> target_snr_db;
    uint64_t master_seed = 1;
    uint64_t interleaver_seed = 1;
    int threads = 0;
    bool early_term = true;
    FirstIterMetric first_iter = FirstIterMetric::marginalize;
    std::string out_path;
};

std::vector<ResultRow> decode_trace_file(const std::string& path, const DecodeTraceConfig& cfg);

}  // namespace cmlab
