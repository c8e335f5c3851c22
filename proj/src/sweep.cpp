#include "cmlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>

#include "cmlab/rng.hpp"
#include "cmlab/trace_io.hpp"

namespace cmlab {

std::vector<double> SweepConfig::grid(double start, double stop, double step) {
    if (step <= 0.0) throw std::invalid_argument("snr step must be positive");
    std::vector<double> g;
    for (int i = 0;; ++i) {
        double v = start + i * step;
        if (v > stop + 1e-9) break;
        g.push_back(v);
    }
    return g;
}

void SweepConfig::validate() const {
    if (snr_grid_db.empty()) throw std::invalid_argument("sweep: empty SNR grid");
    for (size_t i = 1; i < snr_grid_db.size(); ++i)
        if (snr_grid_db[i] <= snr_grid_db[i - 1])
            throw std::invalid_argument("sweep: SNR grid must be strictly increasing");
    if (n_s != 64800 && n_s != 21600)
        throw std::invalid_argument("sweep: n_s must be 64800 or 21600");
    if (codewords < 1) throw std::invalid_argument("sweep: codewords must be >= 1");
}

int SweepConfig::effective_iterations() const {
    if (iterations > 0) return iterations;
    return scheme == Scheme::ttcm ? 10 : 50;
}

std::string csv_header() {
    return "scheme,snr_db,n_s,n_codewords,pre_fec_ber,post_fec_ber,mi,gmi,i_sd,i_hd,"
           "awgn_capacity,min_ber_mi,min_ber_gmi,censored,seed";
}

std::string csv_row(const ResultRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s,%.6f,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%llu",
                  r.scheme.c_str(), r.snr_db, r.n_s, r.n_codewords, r.pre_fec_ber, r.post_fec_ber,
                  r.mi, r.gmi, r.i_sd, r.i_hd, r.awgn_cap, r.min_ber_mi, r.min_ber_gmi, r.censored,
                  static_cast<unsigned long long>(r.seed));
    return buf;
}

namespace {

int effective_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Deterministic parallel map: runs fn(i) for i in [begin, end) on a pool;
// results land by index, so schedules cannot affect anything downstream.
template <typename Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
    int count = end - begin;
    if (count <= 0) return;
    int n_workers = std::min(threads, count);
    if (n_workers <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<int> next{begin};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < end; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct Codecs {
    const Constellation* natural = nullptr;
    const Constellation* brgc = nullptr;
    const OddEvenInterleaver* symbol_il = nullptr;  // TTCM
    const LdpcCode* code = nullptr;                 // LDPC
    const BitInterleaver* bit_il = nullptr;         // LDPC 3-lane mode
};

struct CwOutcome {
    std::unique_ptr<AirAccumulator> air;
    PostFecAccumulator pf;
    size_t pre_errors = 0;
    size_t pre_bits = 0;
    double ex = 0.0, ez = 0.0;
};

Trace make_trace(Scheme scheme, int n_s, const Codecs& cx, uint64_t cw_seed, const Covariance& sigma) {
    Trace t;
    t.scheme = scheme;
    t.seed = cw_seed;
    Rng data_rng(derive_seed(cw_seed, 1));
    t.data_bits = data_rng.bits(2 * static_cast<size_t>(n_s));
    if (scheme == Scheme::ttcm) {
        t.tx = ttcm_encode(t.data_bits, *cx.symbol_il, *cx.natural);
    } else if (n_s == 64800) {
        t.tx = bicm_encode(t.data_bits, *cx.code, *cx.bit_il, *cx.brgc);
    } else {
        t.tx = bicm_encode_single(t.data_bits, *cx.code, *cx.brgc);
    }
    t.rx = apply_awgn(t.tx, sigma, derive_seed(cw_seed, 2));
    return t;
}

CwOutcome process_trace(const Trace& t, Scheme scheme, const Codecs& cx, const Covariance& sigma,
                        int iterations, bool early_term, FirstIterMetric fim) {
    const Constellation& c = scheme == Scheme::ttcm ? *cx.natural : *cx.brgc;
    const size_t n_s = t.n_symbols();

    CwOutcome out;
    out.air = std::make_unique<AirAccumulator>(c, sigma);
    out.air->add(t);

    for (size_t i = 0; i < n_s; ++i) {
        out.ex += norm2(t.tx[i]);
        out.ez += norm2(t.rx[i] - t.tx[i]);
        HardDecision tx_hd = hard_demap(t.tx[i], c);
        HardDecision rx_hd = hard_demap(t.rx[i], c);
        for (int k = 0; k < 3; ++k) out.pre_errors += tx_hd.bits[k] != rx_hd.bits[k];
    }
    out.pre_bits = 3 * n_s;

    Bits decoded;
    std::vector<double> lambda;
    if (scheme == Scheme::ttcm) {
        TtcmDecodeOutput d = ttcm_decode(t.rx, sigma, *cx.symbol_il, c, iterations, fim);
        decoded = std::move(d.data_bits);
        lambda = std::move(d.lambda);
    } else {
        BicmDecodeOutput d = (n_s == 64800)
                                 ? bicm_decode(t.rx, sigma, *cx.code, *cx.bit_il, c, iterations, early_term)
                                 : bicm_decode_single(t.rx, sigma, *cx.code, c, iterations, early_term);
        decoded = std::move(d.data_bits);
        lambda = std::move(d.lambda);
    }
    out.pf.add(t.data_bits, lambda, decoded);
    return out;
}

std::vector<ResultRow> run_sweep_impl(const SweepConfig& cfg, bool stop_on_errors) {
    cfg.validate();
    const int threads = effective_threads(cfg.threads);
    const int iterations = cfg.effective_iterations();

    Constellation natural = build_8psk(Labeling::natural);
    Constellation brgc = build_8psk(Labeling::brgc);
    Codecs cx;
    cx.natural = &natural;
    cx.brgc = &brgc;

    OddEvenInterleaver symbol_il;
    LdpcCode code;
    BitInterleaver bit_il;
    if (cfg.scheme == Scheme::ttcm) {
        symbol_il = build_interleaver(static_cast<uint32_t>(cfg.n_s),
                                      default_spread(static_cast<uint32_t>(cfg.n_s)),
                                      cfg.interleaver_seed);
        cx.symbol_il = &symbol_il;
    } else {
        code = build_dvbs2_r23();
        cx.code = &code;
        if (cfg.n_s == 64800) {
            bit_il = build_bit_interleaver(3 * static_cast<size_t>(code.n), cfg.interleaver_seed);
            cx.bit_il = &bit_il;
        }
    }

    std::ofstream csv;
    if (!cfg.out_path.empty()) {
        csv.open(cfg.out_path, std::ios::trunc);
        if (!csv) throw std::invalid_argument("sweep: cannot open output path " + cfg.out_path);
        csv << csv_header() << "\n" << std::flush;
    }

    std::vector<ResultRow> rows;
    for (size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
        const double snr_db = cfg.snr_grid_db[si];
        const Covariance sigma = sigma_from_snr(snr_db, cfg.scheme == Scheme::ttcm ? natural : brgc);
        const uint64_t point_seed = derive_seed(cfg.master_seed, si);

        std::vector<std::unique_ptr<CwOutcome>> outcomes(static_cast<size_t>(cfg.codewords));
        // Fixed chunk schedule (2,2,4,8,16,16,...) keeps the early-stop rule
        // independent of thread count.
        int processed = 0;
        size_t errors_so_far = 0;
        int chunk = 2;
        while (processed < cfg.codewords) {
            int hi = std::min(cfg.codewords, processed + chunk);
            parallel_for(processed, hi, threads, [&](int cw) {
                uint64_t cw_seed = derive_seed(cfg.master_seed, si, static_cast<uint64_t>(cw));
                Trace t = make_trace(cfg.scheme, cfg.n_s, cx, cw_seed, sigma);
                outcomes[static_cast<size_t>(cw)] = std::make_unique<CwOutcome>(
                    process_trace(t, cfg.scheme, cx, sigma, iterations, cfg.early_term, cfg.first_iter));
            });
            for (int cw = processed; cw < hi; ++cw)
                errors_so_far += outcomes[static_cast<size_t>(cw)]->pf.bit_errors();
            processed = hi;
            chunk = std::min(chunk * 2, 16);
            if (stop_on_errors && errors_so_far >= static_cast<size_t>(cfg.min_bit_errors)) break;
        }

        AirAccumulator air(cfg.scheme == Scheme::ttcm ? natural : brgc, sigma);
        PostFecAccumulator pf;
        size_t pre_errors = 0, pre_bits = 0;
        double ex = 0.0, ez = 0.0;
        for (int cw = 0; cw < processed; ++cw) {
            CwOutcome& o = *outcomes[static_cast<size_t>(cw)];
            air.merge(*o.air);
            pf.merge(o.pf);
            pre_errors += o.pre_errors;
            pre_bits += o.pre_bits;
            ex += o.ex;
            ez += o.ez;
        }

        ResultRow r;
        r.scheme = scheme_name(cfg.scheme);
        r.snr_db = 10.0 * std::log10(ex / ez);
        r.n_s = cfg.n_s;
        r.n_codewords = processed;
        r.pre_fec_ber = static_cast<double>(pre_errors) / static_cast<double>(pre_bits);
        r.post_fec_ber = pf.ber();
        r.mi = air.mi();
        r.gmi = air.gmi();
        r.i_sd = pf.i_sd();
        r.i_hd = pf.i_hd();
        r.awgn_cap = awgn_capacity(r.snr_db);
        r.min_ber_mi = min_ber_bound(std::clamp(r.mi, 0.0, 2.0));
        r.min_ber_gmi = min_ber_bound(std::clamp(r.gmi, 0.0, 2.0));
        r.censored = pf.bit_errors() < static_cast<size_t>(cfg.min_bit_errors) ? 1 : 0;
        r.post_fec_bit_errors = pf.bit_errors();
        r.seed = point_seed;
        rows.push_back(r);
        if (csv.is_open()) csv << csv_row(r) << "\n" << std::flush;
    }
    return rows;
}

}  // namespace

std::vector<ResultRow> run_ber_sweep(const SweepConfig& cfg) { return run_sweep_impl(cfg, true); }

std::vector<ResultRow> run_air_sweep(const SweepConfig& cfg) { return run_sweep_impl(cfg, false); }

std::vector<Trace> generate_traces(const SweepConfig& cfg, double snr_db, int count) {
    if (count < 1) throw std::invalid_argument("generate_traces: count must be >= 1");
    if (cfg.n_s != 64800 && cfg.n_s != 21600)
        throw std::invalid_argument("generate_traces: n_s must be 64800 or 21600");

    Constellation natural = build_8psk(Labeling::natural);
    Constellation brgc = build_8psk(Labeling::brgc);
    Codecs cx;
    cx.natural = &natural;
    cx.brgc = &brgc;
    OddEvenInterleaver symbol_il;
    LdpcCode code;
    BitInterleaver bit_il;
    if (cfg.scheme == Scheme::ttcm) {
        symbol_il = build_interleaver(static_cast<uint32_t>(cfg.n_s),
                                      default_spread(static_cast<uint32_t>(cfg.n_s)),
                                      cfg.interleaver_seed);
        cx.symbol_il = &symbol_il;
    } else {
        code = build_dvbs2_r23();
        cx.code = &code;
        if (cfg.n_s == 64800) {
            bit_il = build_bit_interleaver(3 * static_cast<size_t>(code.n), cfg.interleaver_seed);
            cx.bit_il = &bit_il;
        }
    }
    Covariance sigma = sigma_from_snr(snr_db, cfg.scheme == Scheme::ttcm ? natural : brgc);

    std::vector<Trace> traces(static_cast<size_t>(count));
    parallel_for(0, count, effective_threads(cfg.threads), [&](int i) {
        uint64_t seed = derive_seed(cfg.master_seed, 0x7217, static_cast<uint64_t>(i));
        traces[static_cast<size_t>(i)] = make_trace(cfg.scheme, cfg.n_s, cx, seed, sigma);
        traces[static_cast<size_t>(i)].nominal_snr_db = snr_db;
    });
    return traces;
}

std::vector<ResultRow> decode_trace_file(const std::string& path, const DecodeTraceConfig& cfg) {
    std::vector<Trace> traces = load_trace(path);
    if (traces.empty()) throw DataFormatError("decode_trace: no traces in " + path);
    if (traces[0].scheme != cfg.scheme)
        throw std::invalid_argument("decode_trace: file carries scheme '" +
                                    scheme_name(traces[0].scheme) + "' but '" +
                                    scheme_name(cfg.scheme) + "' was requested");
    const int n_s = static_cast<int>(traces[0].n_symbols());
    if (n_s != 64800 && n_s != 21600)
        throw DataFormatError("decode_trace: unsupported n_s " + std::to_string(n_s));
    const int threads = effective_threads(cfg.threads);
    const int iterations =
        cfg.iterations > 0 ? cfg.iterations : (cfg.scheme == Scheme::ttcm ? 10 : 50);

    Constellation natural = build_8psk(Labeling::natural);
    Constellation brgc = build_8psk(Labeling::brgc);
    Codecs cx;
    cx.natural = &natural;
    cx.brgc = &brgc;
    OddEvenInterleaver symbol_il;
    LdpcCode code;
    BitInterleaver bit_il;
    if (cfg.scheme == Scheme::ttcm) {
        symbol_il = build_interleaver(static_cast<uint32_t>(n_s),
                                      default_spread(static_cast<uint32_t>(n_s)),
                                      cfg.interleaver_seed);
        cx.symbol_il = &symbol_il;
    } else {
        code = build_dvbs2_r23();
        cx.code = &code;
        if (n_s == 64800) {
            bit_il = build_bit_interleaver(3 * static_cast<size_t>(code.n), cfg.interleaver_seed);
            cx.bit_il = &bit_il;
        }
    }

    std::vector<ResultRow> rows;
    for (size_t ti = 0; ti < traces.size(); ++ti) {
        const Trace& base = traces[ti];
        int realizations = std::max(cfg.realizations, 0);
        std::vector<std::unique_ptr<CwOutcome>> outcomes(
            static_cast<size_t>(std::max(realizations, 1)));

        if (realizations == 0) {
            Covariance sigma = estimate_covariance(base);
            outcomes[0] = std::make_unique<CwOutcome>(process_trace(
                base, cfg.scheme, cx, sigma, iterations, cfg.early_term, cfg.first_iter));
        } else {
            if (!cfg.target_snr_db)
                throw std::invalid_argument("decode_trace: realizations > 0 requires a target SNR");
            parallel_for(0, realizations, threads, [&](int r) {
                Trace loaded = rx_noise_load_one(
                    base, *cfg.target_snr_db,
                    derive_seed(cfg.master_seed, 0x6e6c, static_cast<uint64_t>(ti), static_cast<uint64_t>(r)));
                Covariance sigma = estimate_covariance(loaded);
                outcomes[static_cast<size_t>(r)] = std::make_unique<CwOutcome>(process_trace(
                    loaded, cfg.scheme, cx, sigma, iterations, cfg.early_term, cfg.first_iter));
            });
        }

        const Constellation& c = cfg.scheme == Scheme::ttcm ? natural : brgc;
        Covariance ref_sigma = realizations == 0 ? estimate_covariance(base)
                                                 : sigma_from_snr(*cfg.target_snr_db, c);
        AirAccumulator air(c, ref_sigma);
        PostFecAccumulator pf;
        size_t pre_errors = 0, pre_bits = 0;
        double ex = 0.0, ez = 0.0;
        for (auto& op : outcomes) {
            air.merge(*op->air);
            pf.merge(op->pf);
            pre_errors += op->pre_errors;
            pre_bits += op->pre_bits;
            ex += op->ex;
            ez += op->ez;
        }

        ResultRow r;
        r.scheme = scheme_name(cfg.scheme);
        r.snr_db = 10.0 * std::log10(ex / ez);
        r.n_s = n_s;
        r.n_codewords = static_cast<int>(outcomes.size());
        r.pre_fec_ber = static_cast<double>(pre_errors) / static_cast<double>(pre_bits);
        r.post_fec_ber = pf.ber();
        r.mi = air.mi();
        r.gmi = air.gmi();
        r.i_sd = pf.i_sd();
        r.i_hd = pf.i_hd();
        r.awgn_cap = awgn_capacity(r.snr_db);
        r.min_ber_mi = min_ber_bound(std::clamp(r.mi, 0.0, 2.0));
        r.min_ber_gmi = min_ber_bound(std::clamp(r.gmi, 0.0, 2.0));
        r.censored = pf.bit_errors() < 100 ? 1 : 0;
        r.post_fec_bit_errors = pf.bit_errors();
        r.seed = base.seed;
        rows.push_back(r);
    }

    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.scheme, a.snr_db, a.seed) < std::tie(b.scheme, b.snr_db, b.seed);
    });
    if (!cfg.out_path.empty()) {
        std::ofstream csv(cfg.out_path, std::ios::trunc);
        if (!csv) throw std::invalid_argument("decode_trace: cannot open output path " + cfg.out_path);
        csv << csv_header() << "\n";
        for (const ResultRow& r : rows) csv << csv_row(r) << "\n";
    }
    return rows;
}

}  // namespace cmlab
