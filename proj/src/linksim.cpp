#include "ddmodem/linksim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace ddm {

Alphabet Alphabet::qpsk() {
    Alphabet a;
    a.name = "QPSK";
    a.bits_per_symbol = 2;
    const double s = 1.0 / std::sqrt(2.0);
    a.points.resize(4);
    for (int idx = 0; idx < 4; ++idx) {
        double i_level = (idx & 0b10) ? -1.0 : 1.0;
        double q_level = (idx & 0b01) ? -1.0 : 1.0;
        a.points[idx] = cxd(s * i_level, s * q_level);
    }
    return a;
}

Alphabet Alphabet::qam16() {
    Alphabet a;
    a.name = "16QAM";
    a.bits_per_symbol = 4;
    const double s = 1.0 / std::sqrt(10.0);
    // 2-bit Gray code per axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
    auto level = [](int g) {
        switch (g) {
            case 0b00: return -3.0;
            case 0b01: return -1.0;
            case 0b11: return 1.0;
            default: return 3.0;
        }
    };
    a.points.resize(16);
    for (int idx = 0; idx < 16; ++idx)
        a.points[idx] = cxd(s * level(idx >> 2), s * level(idx & 0b11));
    return a;
}

Alphabet Alphabet::from_name(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::toupper(c); });
    if (n == "QPSK") return qpsk();
    if (n == "16QAM" || n == "QAM16") return qam16();
    throw ArgError("unknown alphabet: " + name + " (expected QPSK or 16QAM)");
}

std::vector<uint8_t> random_bits(size_t count, uint64_t seed) {
    std::vector<uint8_t> bits(count);
    uint64_t word = 0;
    for (size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) word = splitmix64(seed + i / 64);
        bits[i] = static_cast<uint8_t>((word >> (i % 64)) & 1u);
    }
    return bits;
}

Eigen::VectorXcd map_symbols(const std::vector<uint8_t>& bits, const Alphabet& a) {
    if (a.bits_per_symbol <= 0 || bits.size() % static_cast<size_t>(a.bits_per_symbol) != 0)
        throw ArgError("map_symbols: bit count must be a multiple of bits_per_symbol");
    const size_t n = bits.size() / static_cast<size_t>(a.bits_per_symbol);
    Eigen::VectorXcd x(static_cast<Eigen::Index>(n));
    for (size_t s = 0; s < n; ++s) {
        int idx = 0;
        for (int b = 0; b < a.bits_per_symbol; ++b)
            idx = (idx << 1) | bits[s * a.bits_per_symbol + b];
        x(static_cast<Eigen::Index>(s)) = a.points[static_cast<size_t>(idx)];
    }
    return x;
}

std::vector<uint8_t> demap_symbols(const Eigen::VectorXcd& xhat, const Alphabet& a) {
    std::vector<uint8_t> bits(static_cast<size_t>(xhat.size()) * a.bits_per_symbol);
    for (Eigen::Index s = 0; s < xhat.size(); ++s) {
        int best = 0;
        double best_d = std::norm(xhat(s) - a.points[0]);
        for (size_t p = 1; p < a.points.size(); ++p) {
            double d = std::norm(xhat(s) - a.points[p]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(p);
            }
        }
        for (int b = 0; b < a.bits_per_symbol; ++b)
            bits[static_cast<size_t>(s) * a.bits_per_symbol + b] =
                static_cast<uint8_t>((best >> (a.bits_per_symbol - 1 - b)) & 1);
    }
    return bits;
}

Eigen::VectorXcd lmmse_equalize(const Eigen::VectorXcd& y, const EquivalentChannel& eq,
                                const SnrSpec& snr) {
    if (y.size() != eq.He.rows()) throw MathError("lmmse_equalize: dimension mismatch");
    const double rho = snr.rho();
    Eigen::VectorXcd xhat(y.size());
    for (Eigen::Index m = 0; m < y.size(); ++m) {
        cxd d = eq.He(m, m);
        double den = std::norm(d) + rho * eq.row_energy(m);
        xhat(m) = den > 0.0 ? std::conj(d) * y(m) / den : cxd(0.0, 0.0);
    }
    return xhat;
}

TrialResult run_ber_trial_eq(const Modem& modem, const Eigen::MatrixXcd& H,
                             const EquivalentChannel& eq, const SnrSpec& snr,
                             const Alphabet& alphabet, uint64_t seed) {
    const int M = modem.num_subcarriers();
    auto bits = random_bits(static_cast<size_t>(M) * alphabet.bits_per_symbol,
                            mix_seed(seed, 1));
    Eigen::VectorXcd x = map_symbols(bits, alphabet);
    if (snr.signal_power != 1.0) x *= std::sqrt(snr.signal_power);
    Eigen::VectorXcd s = modem.mod * x;
    Eigen::VectorXcd r = apply_channel(H, s, snr.noise_power, mix_seed(seed, 2));
    Eigen::VectorXcd y = modem.demod * r;
    Eigen::VectorXcd xhat = lmmse_equalize(y, eq, snr);
    if (snr.signal_power != 1.0) xhat /= std::sqrt(snr.signal_power);
    auto decided = demap_symbols(xhat, alphabet);
    TrialResult t;
    t.bits = bits.size();
    for (size_t i = 0; i < bits.size(); ++i) t.errors += bits[i] != decided[i];
    return t;
}

TrialResult run_ber_trial(const Modem& modem, const ChannelRealization& realization,
                          const SnrSpec& snr, const Alphabet& alphabet, uint64_t seed) {
    Eigen::MatrixXcd H = build_channel_matrix(realization);
    return run_ber_trial_eq(modem, H, equivalent_channel(modem, H), snr, alphabet, seed);
}

Wilson wilson_interval(uint64_t successes, uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double qpsk_awgn_ber(double snr_linear) {
    return 0.5 * std::erfc(std::sqrt(snr_linear / 2.0));
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "scenario,snr_db,metric,value,ci_low,ci_high,n_bits,n_errors,modem_id,seed\n";
    char buf[3 * 32];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r.value, r.ci_low, r.ci_high);
        f << r.scenario << ',' << r.snr_db << ',' << r.metric << ',' << buf << ',' << r.n_bits
          << ',' << r.n_errors << ',' << r.modem_id << ',' << r.seed << '\n';
    }
    if (!f) throw IoError("write failed: " + path);
}

EvalReport ber_curve(const Modem& modem, const Dataset& test_set,
                     const std::vector<double>& snr_db_list, const Alphabet& alphabet,
                     const BerOptions& opts, uint64_t seed, const std::string& scenario,
                     const std::string& modem_id) {
    if (test_set.size() == 0) throw ArgError("ber_curve: empty test set");
    if (opts.trials_per_channel <= 0)
        throw ArgError("ber_curve: trials_per_channel must be positive");
    EvalReport rep;
    for (double snr_db : snr_db_list) {
        SnrSpec snr = SnrSpec::from_db(snr_db);
        uint64_t errors = 0, bits = 0;
        for (int round = 0; round < opts.trials_per_channel; ++round) {
            for (size_t c = 0; c < test_set.size(); ++c) {
                TrialResult t = run_ber_trial(
                    modem, test_set.samples[c], snr, alphabet,
                    mix_seed(seed, SeedTag::ber_trial, static_cast<uint64_t>(c),
                             static_cast<uint64_t>(round)));
                errors += t.errors;
                bits += t.bits;
            }
            if (bits >= opts.min_bits && errors >= opts.target_errors) break;
        }
        Wilson ci = wilson_interval(errors, bits);
        EvalRecord row;
        row.scenario = scenario;
        row.snr_db = snr_db;
        row.metric = "ber";
        row.value = bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
        row.ci_low = ci.low;
        row.ci_high = ci.high;
        row.n_bits = bits;
        row.n_errors = errors;
        row.modem_id = modem_id;
        row.seed = seed;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

ChannelRates per_channel_rates(const Modem& modem, const Dataset& test_set,
                               const SnrSpec& snr) {
    if (test_set.size() == 0) throw ArgError("per_channel_rates: empty test set");
    ChannelRates out;
    out.avg.reserve(test_set.size());
    out.min.reserve(test_set.size());
    for (const auto& r : test_set.samples) {
        EquivalentChannel eq = equivalent_channel(modem, build_channel_matrix(r));
        Eigen::VectorXd rates = subchannel_rates(eq, snr);
        out.avg.push_back(rates.mean());
        out.min.push_back(rates.minCoeff());
    }
    return out;
}

namespace {

void push_rate_rows(EvalReport& rep, const std::vector<double>& vals, const char* metric,
                    double snr_db, const std::string& scenario, const std::string& modem_id,
                    uint64_t seed) {
    const double n = static_cast<double>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double half = vals.size() > 1 ? 1.959963984540054 * std::sqrt(var / (n - 1.0) / n) : 0.0;
    EvalRecord row;
    row.scenario = scenario;
    row.snr_db = snr_db;
    row.metric = metric;
    row.value = mean;
    row.ci_low = mean - half;
    row.ci_high = mean + half;
    row.modem_id = modem_id;
    row.seed = seed;
    rep.rows.push_back(std::move(row));
}

}  // namespace

EvalReport rate_curve(const Modem& modem, const Dataset& test_set,
                      const std::vector<double>& snr_db_list, const std::string& scenario,
                      const std::string& modem_id, uint64_t seed) {
    if (test_set.size() == 0) throw ArgError("rate_curve: empty test set");
    EvalReport rep;
    for (double snr_db : snr_db_list) {
        ChannelRates rates = per_channel_rates(modem, test_set, SnrSpec::from_db(snr_db));
        push_rate_rows(rep, rates.avg, "avg_rate", snr_db, scenario, modem_id, seed);
        push_rate_rows(rep, rates.min, "min_rate", snr_db, scenario, modem_id, seed);
    }
    return rep;
}

double bootstrap_ratio_lower(const std::vector<double>& num, const std::vector<double>& den,
                             int resamples, double percentile, uint64_t seed) {
    if (num.size() != den.size() || num.empty())
        throw ArgError("bootstrap_ratio_lower: need equal-length nonempty samples");
    if (resamples <= 0) throw ArgError("bootstrap_ratio_lower: resamples must be positive");
    const size_t n = num.size();
    std::vector<double> ratios(static_cast<size_t>(resamples));
    for (int b = 0; b < resamples; ++b) {
        uint64_t state = mix_seed(seed, SeedTag::bootstrap, static_cast<uint64_t>(b));
        double sn = 0.0, sd = 0.0;
        for (size_t i = 0; i < n; ++i) {
            state = splitmix64(state);
            size_t j = static_cast<size_t>((static_cast<unsigned __int128>(state) * n) >> 64);
            sn += num[j];
            sd += den[j];
        }
        ratios[static_cast<size_t>(b)] = sn / sd;
    }
    std::sort(ratios.begin(), ratios.end());
    double pos = percentile / 100.0 * static_cast<double>(resamples - 1);
    auto lo = static_cast<size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= ratios.size()) return ratios.back();
    return ratios[lo] * (1.0 - frac) + ratios[lo + 1] * frac;
}

}  // namespace ddm
