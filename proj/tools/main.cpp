#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "cmlab/sweep.hpp"
#include "cmlab/trace_io.hpp"

namespace {

struct CommonFlags {
    std::string scheme = "ttcm";
    double snr_start = 5.5, snr_stop = 7.5, snr_step = 0.1;
    int ns = 64800;
    int codewords = 100;
    int iters = 0;
    uint64_t seed = 1;
    uint64_t il_seed = 1;
    int realizations = 0;
    int threads = 0;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--scheme", f.scheme, "Coding scheme: ttcm or ldpc")
        ->check(CLI::IsMember({"ttcm", "ldpc"}));
    cmd->add_option("--snr-start", f.snr_start, "First SNR in dB");
    cmd->add_option("--snr-stop", f.snr_stop, "Last SNR in dB");
    cmd->add_option("--snr-step", f.snr_step, "SNR grid step in dB");
    cmd->add_option("--ns", f.ns, "Symbols per codeword (64800 or 21600)")
        ->check(CLI::IsMember({64800, 21600}));
    cmd->add_option("--codewords", f.codewords, "Codeword budget per SNR point");
    cmd->add_option("--iters", f.iters, "Decoder iterations (0 = scheme default)");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--interleaver-seed", f.il_seed, "Interleaver construction seed");
    cmd->add_option("--realizations", f.realizations, "Rx noise-loading realizations");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = hardware)");
    cmd->add_option("--out", f.out, "Output CSV path");
    cmd->set_config("--config", "", "Flat key=value config file; flags override it");
}

cmlab::SweepConfig to_sweep_config(const CommonFlags& f) {
    cmlab::SweepConfig cfg;
    cfg.scheme = cmlab::scheme_from_name(f.scheme);
    cfg.snr_grid_db = cmlab::SweepConfig::grid(f.snr_start, f.snr_stop, f.snr_step);
    cfg.n_s = f.ns;
    cfg.codewords = f.codewords;
    cfg.iterations = f.iters;
    cfg.master_seed = f.seed;
    cfg.interleaver_seed = f.il_seed;
    cfg.out_path = f.out;
    cfg.threads = f.threads;
    return cfg;
}

void print_rows(const std::vector<cmlab::ResultRow>& rows) {
    std::cout << cmlab::csv_header() << "\n";
    for (const auto& r : rows) std::cout << cmlab::csv_row(r) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coded-modulation simulation lab: 8PSK TTCM vs BICM LDPC over correlated AWGN"};
    app.require_subcommand(1);

    CommonFlags fb, fa, fg, fd;
    double gen_snr = 7.0;
    std::string dec_in;
    double target_snr = 0.0;
    bool have_target = false;

    CLI::App* ber = app.add_subcommand("ber-sweep", "BER vs SNR sweep with post-FEC metrics");
    add_common(ber, fb);
    CLI::App* air = app.add_subcommand("air-sweep", "Information-rate sweep (MI, GMI, post-FEC)");
    add_common(air, fa);
    CLI::App* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace file");
    add_common(gen, fg);
    gen->add_option("--snr", gen_snr, "Nominal SNR in dB");
    CLI::App* dec = app.add_subcommand("decode-trace", "Decode a trace file, optional Rx noise loading");
    add_common(dec, fd);
    dec->add_option("--in", dec_in, "Input trace file")->required();
    dec->add_option("--target-snr", target_snr, "Rx noise-loading target SNR in dB")
        ->each([&](const std::string&) { have_target = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ber->parsed()) {
            print_rows(cmlab::run_ber_sweep(to_sweep_config(fb)));
        } else if (air->parsed()) {
            print_rows(cmlab::run_air_sweep(to_sweep_config(fa)));
        } else if (gen->parsed()) {
            if (fg.out.empty()) throw std::invalid_argument("gen-trace requires --out");
            cmlab::SweepConfig cfg = to_sweep_config(fg);
            auto traces = cmlab::generate_traces(cfg, gen_snr, fg.codewords);
            cmlab::save_trace(traces, fg.out, fg.seed);
            std::cout << "wrote " << traces.size() << " traces of " << fg.ns << " symbols to "
                      << fg.out << "\n";
        } else if (dec->parsed()) {
            cmlab::DecodeTraceConfig cfg;
            cfg.scheme = cmlab::scheme_from_name(fd.scheme);
            cfg.iterations = fd.iters;
            cfg.realizations = fd.realizations;
            if (have_target) cfg.target_snr_db = target_snr;
            cfg.master_seed = fd.seed;
            cfg.interleaver_seed = fd.il_seed;
            cfg.threads = fd.threads;
            cfg.out_path = fd.out;
            print_rows(cmlab::decode_trace_file(dec_in, cfg));
        }
    } catch (const cmlab::DataFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
