#pragma once

#include <string>
#include <vector>

#include "ddmodem/channel.hpp"
#include "ddmodem/modem.hpp"

namespace ddm {

// Gray-labeled unit-power constellation. Symbol index = bit word (MSB first);
// per-axis Gray labels so nearest-neighbor errors flip one bit.
struct Alphabet {
    std::string name;
    std::vector<cxd> points;
    int bits_per_symbol = 0;

    static Alphabet qpsk();
    static Alphabet qam16();
    static Alphabet from_name(const std::string& name);  // ArgError on unknown
};

std::vector<uint8_t> random_bits(size_t count, uint64_t seed);
Eigen::VectorXcd map_symbols(const std::vector<uint8_t>& bits, const Alphabet& a);
std::vector<uint8_t> demap_symbols(const Eigen::VectorXcd& xhat, const Alphabet& a);

// Per-sub-channel scalar correction: xhat(m) = conj(He(m,m)) * y(m) /
// (|He(m,m)|^2 + rho * row_energy(m)). A vanishing denominator erases the
// symbol.
Eigen::VectorXcd lmmse_equalize(const Eigen::VectorXcd& y, const EquivalentChannel& eq,
                                const SnrSpec& snr);

struct TrialResult {
    uint64_t errors = 0;
    uint64_t bits = 0;
};

// One frame through bits -> symbols -> mod -> channel+noise -> demod ->
// LMMSE -> hard decisions, with the receiver equalizing from the true H.
TrialResult run_ber_trial(const Modem& modem, const ChannelRealization& realization,
                          const SnrSpec& snr, const Alphabet& alphabet, uint64_t seed);

// Same chain with the channel matrix and equivalent channel precomputed.
TrialResult run_ber_trial_eq(const Modem& modem, const Eigen::MatrixXcd& H,
                             const EquivalentChannel& eq, const SnrSpec& snr,
                             const Alphabet& alphabet, uint64_t seed);

struct Wilson {
    double low = 0.0;
    double high = 1.0;
};

// 95% by default (z for the two-sided normal quantile).
Wilson wilson_interval(uint64_t successes, uint64_t n, double z = 1.959963984540054);

// Closed-form QPSK bit error rate over AWGN at linear symbol SNR.
double qpsk_awgn_ber(double snr_linear);

struct EvalRecord {
    std::string scenario;
    double snr_db = 0.0;
    std::string metric;  // "ber" | "avg_rate" | "min_rate"
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    uint64_t n_bits = 0;
    uint64_t n_errors = 0;
    std::string modem_id;
    uint64_t seed = 0;
};

struct EvalReport {
    std::vector<EvalRecord> rows;
};

void write_eval_csv(const std::string& path, const EvalReport& report);

struct BerOptions {
    int trials_per_channel = 64;     // hard cap on rounds over the test set
    uint64_t min_bits = 1'000'000;   // sample at least this many bits
    uint64_t target_errors = 400;    // and until this many errors, if possible
};

// Monte-Carlo BER per SNR point. Rounds sweep the whole test set so every
// channel contributes equally; stops once min_bits and target_errors are both
// met (or rounds are exhausted). Per-trial seeds derive from (seed, channel,
// round) so reports are reproducible.
EvalReport ber_curve(const Modem& modem, const Dataset& test_set,
                     const std::vector<double>& snr_db_list, const Alphabet& alphabet,
                     const BerOptions& opts, uint64_t seed,
                     const std::string& scenario = "default",
                     const std::string& modem_id = "modem");

struct ChannelRates {
    std::vector<double> avg;  // mean_m r_m per channel
    std::vector<double> min;  // min_m r_m per channel
};

ChannelRates per_channel_rates(const Modem& modem, const Dataset& test_set, const SnrSpec& snr);

// Deterministic rate statistics per SNR; intervals are normal 95% CIs of the
// mean across channels.
EvalReport rate_curve(const Modem& modem, const Dataset& test_set,
                      const std::vector<double>& snr_db_list,
                      const std::string& scenario = "default",
                      const std::string& modem_id = "modem", uint64_t seed = 0);

// Lower one-sided bootstrap percentile of mean(num)/mean(den) under paired
// resampling; the workhorse behind "ratio >= threshold at 95%" gates.
double bootstrap_ratio_lower(const std::vector<double>& num, const std::vector<double>& den,
                             int resamples, double percentile, uint64_t seed);

}  // namespace ddm
