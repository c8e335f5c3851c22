#pragma once

#include <span>

#include "cmlab/channel.hpp"
#include "cmlab/modulation.hpp"

namespace cmlab {

// Monte-Carlo information-rate estimators for the correlated Gaussian
// channel, in bits per symbol. The *_closed_form variants evaluate the
// expanded quadratic-form expressions; the *_generic variants evaluate the
// generic density-ratio forms. Both pairs are algebraically identical and
// are kept as mutual cross-checks.
double mi_closed_form(const Trace& t, const Constellation& c, const Covariance& sigma);
double mi_generic_mc(const Trace& t, const Constellation& c, const Covariance& sigma);
double gmi_closed_form(const Trace& t, const Constellation& c, const Covariance& sigma);
double gmi_generic_mc(const Trace& t, const Constellation& c, const Covariance& sigma);

// Rate available to a soft-decision outer code from decoder LLRs on data
// bits (2 per symbol), assuming consistent LLRs. lambda is log P(0)/P(1).
double postfec_mi_sd(const Bits& data_bits, std::span<const double> lambda);

// Rate available to a hard-decision outer code given per-stream BERs.
double postfec_mi_hd(double ber_1, double ber_2);

double binary_entropy(double p);

// Smallest BER consistent with the given rate: solves 2*(1 - Hb(ber)) = air
// on [0, 0.5] by bisection.
double min_ber_bound(double air_bits);

double awgn_capacity(double snr_db);

// Streaming accumulators for pooling many codewords at one operating point.

class AirAccumulator {
public:
    AirAccumulator(const Constellation& c, const Covariance& sigma);
    void add(const Trace& t);
    // Pools another accumulator's sums (same constellation assumed).
    void merge(const AirAccumulator& other);
    double mi() const;
    double gmi() const;
    size_t min_count() const;

private:
    const Constellation& c_;
    Covariance::InverseForm inv_;
    // Per transmitted point i: pairwise terms  a_ij = -1/2 d_ij' Sinv d_ij
    // and w_ij = Sinv d_ij, plus the label partition per bit level.
    std::array<std::array<double, 8>, 8> a_{};
    std::array<std::array<Point, 8>, 8> w_{};
    std::array<size_t, 8> count_{};
    std::array<double, 8> mi_sum_{};
    std::array<double, 8> gmi_sum_{};
};

class PostFecAccumulator {
public:
    void add(const Bits& data_bits, std::span<const double> lambda, const Bits& decoded_bits);
    void merge(const PostFecAccumulator& other);
    double i_sd() const;
    double i_hd() const;
    double ber() const;          // pooled over both streams
    size_t bit_errors() const;
    size_t bits() const { return 2 * n_; }

private:
    size_t n_ = 0;
    double sd_sum_[2] = {0.0, 0.0};
    size_t err_[2] = {0, 0};
};

}  // namespace cmlab
