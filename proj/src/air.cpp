#include "cmlab/air.hpp"

#include <cmath>

namespace cmlab {

namespace {

constexpr double kSdExponentClip = 50.0;

int tx_index(const Trace& t, size_t n, const Constellation& c) {
    return hard_demap(t.tx[n], c).index;
}

// log2(1 + exp(x)) with the exponent clipped at +/-50 nats.
double log2_1p_exp(double x) {
    x = std::clamp(x, -kSdExponentClip, kSdExponentClip);
    return std::log1p(std::exp(x)) / kLog2;
}

}  // namespace

AirAccumulator::AirAccumulator(const Constellation& c, const Covariance& sigma) : c_(c) {
    inv_ = sigma.inverse();
    for (int i = 0; i < Constellation::M; ++i) {
        for (int j = 0; j < Constellation::M; ++j) {
            Point d = c.points[i] - c.points[j];
            a_[i][j] = -0.5 * inv_.quad(d);
            w_[i][j] = inv_.apply(d);
        }
    }
}

void AirAccumulator::add(const Trace& t) {
    const size_t n = t.n_symbols();
    for (size_t s = 0; s < n; ++s) {
        int i = tx_index(t, s, c_);
        Point z = t.rx[s] - t.tx[s];
        double term[8];
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < Constellation::M; ++j) {
            term[j] = a_[i][j] - dot(w_[i][j], z);
            mx = std::max(mx, term[j]);
        }
        double sum_all = 0.0;
        for (int j = 0; j < Constellation::M; ++j) sum_all += std::exp(term[j] - mx);
        double lse_all = mx + std::log(sum_all);
        mi_sum_[i] += lse_all / kLog2;

        for (int k = 0; k < Constellation::m; ++k) {
            uint8_t l = c_.labels[i][k];
            double smx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < Constellation::M; ++j)
                if (c_.labels[j][k] == l) smx = std::max(smx, term[j]);
            double ssum = 0.0;
            for (int j = 0; j < Constellation::M; ++j)
                if (c_.labels[j][k] == l) ssum += std::exp(term[j] - smx);
            double lse_sub = smx + std::log(ssum);
            gmi_sum_[i] += (lse_all - lse_sub) / kLog2;
        }
        ++count_[i];
    }
}

void AirAccumulator::merge(const AirAccumulator& other) {
    for (int i = 0; i < Constellation::M; ++i) {
        mi_sum_[i] += other.mi_sum_[i];
        gmi_sum_[i] += other.gmi_sum_[i];
        count_[i] += other.count_[i];
    }
}

size_t AirAccumulator::min_count() const {
    size_t m = count_[0];
    for (size_t c : count_) m = std::min(m, c);
    return m;
}

double AirAccumulator::mi() const {
    double acc = 0.0;
    for (int i = 0; i < Constellation::M; ++i) {
        if (count_[i] == 0)
            throw std::invalid_argument("MI estimator: constellation point " + std::to_string(i) +
                                        " never appears in the trace");
        acc += mi_sum_[i] / static_cast<double>(count_[i]);
    }
    return Constellation::m - acc / Constellation::M;
}

double AirAccumulator::gmi() const {
    double acc = 0.0;
    for (int i = 0; i < Constellation::M; ++i) {
        if (count_[i] == 0)
            throw std::invalid_argument("GMI estimator: constellation point " + std::to_string(i) +
                                        " never appears in the trace");
        acc += gmi_sum_[i] / static_cast<double>(count_[i]);
    }
    return Constellation::m - acc / Constellation::M;
}

double mi_closed_form(const Trace& t, const Constellation& c, const Covariance& sigma) {
    AirAccumulator acc(c, sigma);
    acc.add(t);
    return acc.mi();
}

double gmi_closed_form(const Trace& t, const Constellation& c, const Covariance& sigma) {
    AirAccumulator acc(c, sigma);
    acc.add(t);
    return acc.gmi();
}

namespace {

// Unclipped log-density up to the common constant: -1/2 (y-x_j)' Sinv (y-x_j).
void log_densities(Point y, const Constellation& c, const Covariance::InverseForm& inv, double out[8]) {
    for (int j = 0; j < Constellation::M; ++j) out[j] = -0.5 * inv.quad(y - c.points[j]);
}

}  // namespace

double mi_generic_mc(const Trace& t, const Constellation& c, const Covariance& sigma) {
    Covariance::InverseForm inv = sigma.inverse();
    std::array<double, 8> sum{};
    std::array<size_t, 8> count{};
    double logf[8];
    for (size_t s = 0; s < t.n_symbols(); ++s) {
        int i = tx_index(t, s, c);
        log_densities(t.rx[s], c, inv, logf);
        double lse = logsumexp(std::span<const double>(logf, 8));
        sum[i] += (logf[i] - lse) / kLog2;
        ++count[i];
    }
    double acc = 0.0;
    for (int i = 0; i < Constellation::M; ++i) {
        if (count[i] == 0)
            throw std::invalid_argument("MI estimator: constellation point " + std::to_string(i) +
                                        " never appears in the trace");
        acc += sum[i] / static_cast<double>(count[i]);
    }
    return Constellation::m + acc / Constellation::M;
}

double gmi_generic_mc(const Trace& t, const Constellation& c, const Covariance& sigma) {
    Covariance::InverseForm inv = sigma.inverse();
    std::array<double, 8> sum{};
    std::array<size_t, 8> count{};
    double logf[8], sub[4];
    for (size_t s = 0; s < t.n_symbols(); ++s) {
        int i = tx_index(t, s, c);
        log_densities(t.rx[s], c, inv, logf);
        double lse_all = logsumexp(std::span<const double>(logf, 8));
        for (int k = 0; k < Constellation::m; ++k) {
            uint8_t l = c.labels[i][k];
            int nsub = 0;
            for (int j = 0; j < Constellation::M; ++j)
                if (c.labels[j][k] == l) sub[nsub++] = logf[j];
            double lse_sub = logsumexp(std::span<const double>(sub, 4));
            sum[i] += (lse_sub - lse_all) / kLog2;
        }
        ++count[i];
    }
    double acc = 0.0;
    for (int i = 0; i < Constellation::M; ++i) {
        if (count[i] == 0)
            throw std::invalid_argument("GMI estimator: constellation point " + std::to_string(i) +
                                        " never appears in the trace");
        acc += sum[i] / static_cast<double>(count[i]);
    }
    return Constellation::m + acc / Constellation::M;
}

void PostFecAccumulator::add(const Bits& data_bits, std::span<const double> lambda,
                             const Bits& decoded_bits) {
    if (lambda.size() != data_bits.size() || decoded_bits.size() != data_bits.size())
        throw std::invalid_argument("post-FEC accumulator: data/lambda/decision length mismatch");
    if (data_bits.size() % 2 != 0)
        throw std::invalid_argument("post-FEC accumulator: expected 2 bits per symbol");
    for (size_t d = 0; d < data_bits.size(); ++d) {
        int q = static_cast<int>(d % 2);
        double toward_true = data_bits[d] ? -lambda[d] : lambda[d];
        sd_sum_[q] += log2_1p_exp(-toward_true);
        err_[q] += decoded_bits[d] != data_bits[d];
    }
    n_ += data_bits.size() / 2;
}

void PostFecAccumulator::merge(const PostFecAccumulator& other) {
    n_ += other.n_;
    for (int q = 0; q < 2; ++q) {
        sd_sum_[q] += other.sd_sum_[q];
        err_[q] += other.err_[q];
    }
}

double PostFecAccumulator::i_sd() const {
    double total = 0.0;
    for (int q = 0; q < 2; ++q) total += 1.0 - sd_sum_[q] / static_cast<double>(n_);
    return total;
}

double PostFecAccumulator::i_hd() const {
    return postfec_mi_hd(static_cast<double>(err_[0]) / n_, static_cast<double>(err_[1]) / n_);
}

double PostFecAccumulator::ber() const {
    return static_cast<double>(err_[0] + err_[1]) / static_cast<double>(2 * n_);
}

size_t PostFecAccumulator::bit_errors() const { return err_[0] + err_[1]; }

double postfec_mi_sd(const Bits& data_bits, std::span<const double> lambda) {
    PostFecAccumulator acc;
    if (lambda.size() != data_bits.size())
        throw std::invalid_argument("postfec_mi_sd: data and lambda length mismatch");
    acc.add(data_bits, lambda, data_bits);
    return acc.i_sd();
}

double postfec_mi_hd(double ber_1, double ber_2) {
    for (double b : {ber_1, ber_2})
        if (!(b >= 0.0 && b <= 0.5)) throw std::invalid_argument("postfec_mi_hd: BER outside [0, 0.5]");
    return (1.0 - binary_entropy(ber_1)) + (1.0 - binary_entropy(ber_2));
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p outside [0, 1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

double min_ber_bound(double air_bits) {
    if (!(air_bits >= 0.0 && air_bits <= 2.0))
        throw std::invalid_argument("min_ber_bound: rate outside [0, 2] bit/symbol");
    if (air_bits == 0.0) return 0.5;
    if (air_bits == 2.0) return 0.0;
    double target = 1.0 - air_bits / 2.0;  // Hb(ber) at the bound
    double lo = 0.0, hi = 0.5;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (binary_entropy(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double awgn_capacity(double snr_db) { return std::log2(1.0 + std::pow(10.0, snr_db / 10.0)); }

}  // namespace cmlab
