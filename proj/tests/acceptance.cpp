// Release gate: runs the numbered acceptance checks end to end against the
// shipped desk-scale configuration and prints one [PASS]/[FAIL]/[SKIP] line
// per check. Exit status is nonzero if any gating check fails.
//
//   acceptance --workdir <scratch dir> [--configs <config dir>] [--only 1,5,9]
//
// The work directory holds two full pipeline runs (datasets, parameters,
// modem, CSVs). Setting DDM_ACCEPT_REUSE=1 reuses pipeline artifacts from a
// previous invocation instead of retraining; only use that when the code has
// not changed in between.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ddmodem/commands.hpp"
#include "ddmodem/config.hpp"
#include "ddmodem/rates.hpp"

namespace fs = std::filesystem;
using namespace ddm;
using clk = std::chrono::steady_clock;

namespace {

double secs_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

struct Harness {
    fs::path work = "acceptance-work";
    fs::path configs = "configs";
    std::set<int> only;  // empty = run everything
    int failed = 0;

    bool enabled(int n) const { return only.empty() || only.count(n) > 0; }

    void report(int n, bool pass, const std::string& what, const std::string& detail) {
        if (!pass) ++failed;
        std::printf("[%s] %d. %s (%s)\n", pass ? "PASS" : "FAIL", n, what.c_str(),
                    detail.c_str());
        std::fflush(stdout);
    }

    void skip(int n, const std::string& what, const std::string& why) {
        std::printf("[SKIP] %d. %s (%s)\n", n, what.c_str(), why.c_str());
        std::fflush(stdout);
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Channel matrix vs direct per-sample evaluation at full frame size
// ---------------------------------------------------------------------------

// Independent evaluation of the received frame: the output at time index
// n (row v = n + M_p) sums h_i * s(v - l_i) * exp(j2*pi*n*k_i/M), with
// delayed samples falling before the frame treated as zero.
Eigen::VectorXcd direct_apply(const ChannelRealization& r, const Eigen::VectorXcd& s) {
    const int M = r.spec.num_subcarriers, Mp = r.spec.prefix_len, ML = r.spec.frame_len();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(ML);
    for (int v = 0; v < ML; ++v) {
        const int n = v - Mp;
        for (const auto& p : r.paths) {
            int src = v - p.delay_grid;
            if (src < 0) continue;
            double ph = 2.0 * kPi * n * p.normalized_doppler / M;
            out(v) += p.gain * s(src) * cxd(std::cos(ph), std::sin(ph));
        }
    }
    return out;
}

void check1(Harness& h) {
    auto t0 = clk::now();
    ChannelSpec spec;  // defaults are the full-size frame: M=128, M_p=24
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        ChannelRealization r = sample_channel(spec, mix_seed(1001, i));
        Eigen::MatrixXcd H = build_channel_matrix(r);
        std::mt19937_64 gen(mix_seed(2002, i));
        std::normal_distribution<double> nd(0.0, 1.0);
        Eigen::VectorXcd s(spec.frame_len());
        for (int j = 0; j < 100; ++j) {
            for (int k = 0; k < s.size(); ++k) s(k) = cxd(nd(gen), nd(gen));
            worst = std::max(worst, (H * s - direct_apply(r, s)).cwiseAbs().maxCoeff());
        }
    }
    double wall = secs_since(t0);
    h.report(1, worst < 1e-10 && wall < 60.0,
             "channel matrix matches direct per-sample evaluation, 100x100 at full frame size",
             fmt("max |err| %.2e vs 1e-10; %.1f s", worst, wall));
}

// ---------------------------------------------------------------------------
// 2. OFDM closed-form gates: identity, delay phases, flat-channel rates
// ---------------------------------------------------------------------------

void check2(Harness& h) {
    double worst_id = 0.0, worst_ph = 0.0, worst_rate = 0.0;

    for (auto [M, Mp] : {std::pair{32, 8}, std::pair{128, 24}}) {
        ChannelSpec spec;
        spec.num_subcarriers = M;
        spec.prefix_len = Mp;
        spec.max_delay_grid = std::min(Mp, spec.max_delay_grid);
        Modem ofdm = make_ofdm_modem(M, Mp);

        // (a) flat channel: the equivalent channel is the identity
        Eigen::MatrixXcd Hf = build_channel_matrix(flat_channel(spec));
        EquivalentChannel eqf = equivalent_channel(ofdm, Hf);
        worst_id = std::max(
            worst_id, (eqf.He - Eigen::MatrixXcd::Identity(M, M)).cwiseAbs().maxCoeff());

        // (b) static paths within the prefix: diagonal with the DFT phases
        std::mt19937_64 gen(77);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int l = 0; l <= Mp && l <= spec.max_delay_grid; ++l) {
            cxd g(nd(gen), nd(gen));
            ChannelRealization one{spec, {PathComponent{g, l, 0.0, 0.0}}};
            EquivalentChannel eq = equivalent_channel(ofdm, build_channel_matrix(one));
            for (int m = 0; m < M; ++m) {
                double ph = -2.0 * kPi * m * l / M;
                cxd want = g * cxd(std::cos(ph), std::sin(ph));
                for (int n2 = 0; n2 < M; ++n2)
                    worst_ph = std::max(
                        worst_ph, std::abs(eq.He(m, n2) - (n2 == m ? want : cxd(0, 0))));
            }
        }
        // three static paths: still diagonal, entries sum the per-path phases
        {
            ChannelRealization multi{spec,
                                     {PathComponent{cxd(0.6, -0.2), 0, 0.0, 0.0},
                                      PathComponent{cxd(-0.3, 0.4), 2, 0.0, 0.0},
                                      PathComponent{cxd(0.1, 0.7), std::min(5, Mp), 0.0, 0.0}}};
            EquivalentChannel eq = equivalent_channel(ofdm, build_channel_matrix(multi));
            for (int m = 0; m < M; ++m) {
                cxd want(0, 0);
                for (const auto& p : multi.paths) {
                    double ph = -2.0 * kPi * m * p.delay_grid / M;
                    want += p.gain * cxd(std::cos(ph), std::sin(ph));
                }
                for (int n2 = 0; n2 < M; ++n2)
                    worst_ph = std::max(
                        worst_ph, std::abs(eq.He(m, n2) - (n2 == m ? want : cxd(0, 0))));
            }
        }

        // (c) flat channel at 20 dB: every sub-channel carries log2(101)
        Eigen::VectorXd r = subchannel_rates(eqf, SnrSpec::from_db(20.0));
        const double want = std::log2(101.0);  // 6.6582 to four decimals
        for (int m = 0; m < M; ++m) worst_rate = std::max(worst_rate, std::abs(r(m) - want));
    }

    bool pass = worst_id < 1e-10 && worst_ph < 1e-10 && worst_rate < 1e-6;
    h.report(2, pass, "OFDM closed forms: identity He, static-path phases, flat 20 dB rates",
             fmt("|He-I| %.2e, phase dev %.2e vs 1e-10; rate dev %.2e vs 1e-6 around 6.6582",
                 worst_id, worst_ph, worst_rate));
}

// ---------------------------------------------------------------------------
// 3. Monte-Carlo QPSK BER over the flat channel vs the Gaussian closed form
// ---------------------------------------------------------------------------

void check3(Harness& h) {
    auto t0 = clk::now();
    ChannelSpec spec;
    spec.num_subcarriers = 32;
    spec.prefix_len = 8;
    spec.max_delay_grid = 6;
    Modem ofdm = make_ofdm_modem(32, 8);
    Eigen::MatrixXcd H = build_channel_matrix(flat_channel(spec));
    EquivalentChannel eq = equivalent_channel(ofdm, H);
    Alphabet qpsk = Alphabet::qpsk();

    // linear SNRs where the closed form hits 1e-2 and 1e-3 exactly
    auto solve_snr = [](double target) {
        double lo = 0.1, hi = 50.0;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (qpsk_awgn_ber(mid) > target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    bool pass = true;
    std::string detail;
    for (double target : {1e-2, 1e-3}) {
        double s = solve_snr(target);
        SnrSpec snr(1.0, 1.0 / s);
        uint64_t errors = 0, bits = 0;
        for (uint64_t t = 0; bits < 10'000'000; ++t) {
            TrialResult tr = run_ber_trial_eq(ofdm, H, eq, snr, qpsk, mix_seed(3003, t));
            errors += tr.errors;
            bits += tr.bits;
        }
        double ber = double(errors) / double(bits);
        double expect = qpsk_awgn_ber(s);
        double rel = std::abs(ber / expect - 1.0);
        pass = pass && rel < 0.05;
        detail += fmt("%s%.3e vs %.3e (rel %.3f)", detail.empty() ? "" : ", ", ber, expect, rel);
    }
    double wall = secs_since(t0);
    pass = pass && wall < 300.0;
    h.report(3, pass, "flat-channel QPSK BER tracks the Gaussian closed form at 1e-2 and 1e-3",
             detail + fmt("; >=1e7 bits each; %.0f s", wall));
}

// ---------------------------------------------------------------------------
// 4. Objective gradients vs central finite differences on small instances
// ---------------------------------------------------------------------------

using CM = CMat<double>;

CM random_cmat(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CM m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cxd(nd(gen), nd(gen));
    return m;
}

// The min-rate term is non-smooth where the argmin ties; only compare
// gradients at instances whose two smallest rates are clearly separated.
bool argmin_unique(const CM& Phi, const CM& PsiH, const CM& H, double rho) {
    RVec<double> rowE = PsiH.rowwise().squaredNorm();
    CM He = PsiH * H * Phi;
    RVec<double> r = rates_from_he<double>(He, rowE, rho);
    double m1 = 1e300, m2 = 1e300;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r(i) < m1) {
            m2 = m1;
            m1 = r(i);
        } else if (r(i) < m2) {
            m2 = r(i);
        }
    }
    return m2 - m1 > 1e-4;
}

template <typename F>
double fd_worst_rel(F f, CM& target, const CM& analytic, double hstep = 1e-6) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < target.rows(); ++i)
        for (Eigen::Index j = 0; j < target.cols(); ++j)
            for (int part = 0; part < 2; ++part) {
                cxd save = target(i, j);
                cxd delta = part == 0 ? cxd(hstep, 0) : cxd(0, hstep);
                target(i, j) = save + delta;
                double fp = f();
                target(i, j) = save - delta;
                double fm = f();
                target(i, j) = save;
                double fd = (fp - fm) / (2.0 * hstep);
                double an = part == 0 ? analytic(i, j).real() : analytic(i, j).imag();
                double den = std::max({1e-8, std::abs(fd), std::abs(an)});
                worst = std::max(worst, std::abs(fd - an) / den);
            }
    return worst;
}

void check4(Harness& h) {
    auto t0 = clk::now();
    const int M = 8, ML = 10;
    const double rho = SnrSpec::from_db(20.0).rho();
    std::mt19937_64 gen(4004);
    double worst = 0.0;

    for (int inst = 0; inst < 5; ++inst) {
        CM Phi, PsiH, H;
        do {
            Phi = random_cmat(ML, M, gen);
            PsiH = random_cmat(M, ML, gen);
            H = random_cmat(ML, ML, gen);
        } while (!argmin_unique(Phi, PsiH, H, rho));
        ModemGradT<double> g;
        rate_objective_modem<double>(Phi, PsiH, H, rho, &g);
        auto f = [&] { return rate_objective_modem<double>(Phi, PsiH, H, rho); };
        worst = std::max(worst, fd_worst_rel(f, Phi, g.mod));
        worst = std::max(worst, fd_worst_rel(f, PsiH, g.demod));
    }

    for (double alpha : {0.005, 0.5}) {
        CM Phi1, PsiH1, H1, Phi2, PsiH2, H2;
        do {
            Phi1 = random_cmat(ML, M, gen);
            PsiH1 = random_cmat(M, ML, gen);
            H1 = random_cmat(ML, ML, gen);
            Phi2 = random_cmat(ML, M, gen);
            PsiH2 = random_cmat(M, ML, gen);
            H2 = random_cmat(ML, ML, gen);
        } while (!argmin_unique(Phi1, PsiH1, H1, rho) || !argmin_unique(Phi2, PsiH2, H2, rho));
        ModemGradT<double> g1, g2;
        siamese_objective<double>(Phi1, PsiH1, H1, Phi2, PsiH2, H2, rho, alpha, &g1, &g2);
        auto f = [&] {
            return siamese_objective<double>(Phi1, PsiH1, H1, Phi2, PsiH2, H2, rho, alpha);
        };
        worst = std::max(worst, fd_worst_rel(f, Phi1, g1.mod));
        worst = std::max(worst, fd_worst_rel(f, PsiH1, g1.demod));
        worst = std::max(worst, fd_worst_rel(f, Phi2, g2.mod));
        worst = std::max(worst, fd_worst_rel(f, PsiH2, g2.demod));
    }

    double wall = secs_since(t0);
    h.report(4, worst < 1e-4 && wall < 60.0,
             "rate and siamese objective gradients match central finite differences",
             fmt("worst rel err %.2e vs 1e-4; %.1f s", worst, wall));
}

// ---------------------------------------------------------------------------
// Shared desk-scale pipeline runs
// ---------------------------------------------------------------------------

struct PipelineRun {
    fs::path dir;
    double train_wall = 0.0;  // phases 1+2 only

    std::string path(const char* name) const { return (dir / name).string(); }
};

PipelineRun run_pipeline(const std::string& cfg_path, const fs::path& dir) {
    PipelineRun run{dir, 0.0};
    fs::create_directories(dir);

    const char* reuse_env = std::getenv("DDM_ACCEPT_REUSE");
    if (reuse_env && *reuse_env == '1' && fs::exists(dir / "ber.csv") &&
        fs::exists(dir / "train_wall.txt")) {
        std::ifstream f(dir / "train_wall.txt");
        f >> run.train_wall;
        std::printf("       (reusing pipeline artifacts in %s)\n", dir.string().c_str());
        std::fflush(stdout);
        return run;
    }

    cmd_generate_data({cfg_path, "train", run.path("train.ddch")});
    cmd_generate_data({cfg_path, "val", run.path("val.ddch")});
    cmd_generate_data({cfg_path, "test", run.path("test.ddch")});

    auto t0 = clk::now();
    cmd_train({cfg_path, 1, "", run.path("p1.mnet")});
    cmd_train({cfg_path, 2, run.path("p1.mnet"), run.path("p2.mnet")});
    run.train_wall = secs_since(t0);

    cmd_distill({cfg_path, run.path("p2.mnet"), run.path("val.ddch"), run.path("unified.modm")});
    cmd_evaluate({cfg_path, run.path("unified.modm"), "rate", run.path("rate.csv"), true});
    cmd_evaluate({cfg_path, run.path("unified.modm"), "ber", run.path("ber.csv"), true});

    std::ofstream f(dir / "train_wall.txt");
    f << run.train_wall << "\n";
    return run;
}

// ---------------------------------------------------------------------------
// 5. Siamese refinement shrinks the output distance on held-out pairs
// ---------------------------------------------------------------------------

void check5(Harness& h, const ExperimentConfig& cfg, const PipelineRun& a) {
    ModNetParams p1 = load_params(a.path("p1.mnet"));
    ModNetParams p2 = load_params(a.path("p2.mnet"));
    Dataset val = load_dataset(a.path("val.ddch"));
    PairedDataset pairs = pair_dataset(val, cfg.seed);  // 200 held-out -> 100 pairs

    double d1 = mean_pair_distance(p1, pairs);
    double d2 = mean_pair_distance(p2, pairs);
    bool pass = d2 <= 0.20 * d1 && a.train_wall < 1800.0;
    h.report(5, pass,
             "after refinement, mean pair distance on 100 held-out pairs drops below 20%",
             fmt("%.4f -> %.4f (%.1f%% of before); phases 1+2 took %.0f s vs 1800",
                 d1, d2, 100.0 * d2 / d1, a.train_wall));
}

// ---------------------------------------------------------------------------
// 6. Rate advantage over OFDM at 20 dB with a one-sided bootstrap
// ---------------------------------------------------------------------------

void check6(Harness& h, const ExperimentConfig& cfg, const PipelineRun& a) {
    Modem unified = load_modem(a.path("unified.modm"));
    Modem ofdm = make_ofdm_modem(cfg.channel.num_subcarriers, cfg.channel.prefix_len);
    Dataset test = load_dataset(a.path("test.ddch"));
    SnrSpec snr = SnrSpec::from_db(20.0);

    ChannelRates rm = per_channel_rates(unified, test, snr);
    ChannelRates ro = per_channel_rates(ofdm, test, snr);
    double lo_avg = bootstrap_ratio_lower(rm.avg, ro.avg, 2000, 5.0, cfg.seed);
    double lo_min = bootstrap_ratio_lower(rm.min, ro.min, 2000, 5.0, cfg.seed);

    double mean_avg_m = 0, mean_avg_o = 0;
    for (double v : rm.avg) mean_avg_m += v;
    for (double v : ro.avg) mean_avg_o += v;
    mean_avg_m /= double(rm.avg.size());
    mean_avg_o /= double(ro.avg.size());

    bool pass = lo_avg >= 1.05 && lo_min >= 0.90;
    h.report(6, pass,
             "20 dB rates vs OFDM on 2000 test channels: avg >= 1.05x, min >= 0.90x (95% "
             "bootstrap lower bound)",
             fmt("avg ratio lower %.4f (means %.3f vs %.3f), min ratio lower %.4f",
                 lo_avg, mean_avg_m, mean_avg_o, lo_min));
}

// ---------------------------------------------------------------------------
// 7./8. BER ordering against OFDM with non-overlapping Wilson intervals
// ---------------------------------------------------------------------------

struct BerComparison {
    bool pass = true;
    std::string detail;
};

BerComparison compare_ber(const Modem& unified, const Modem& ofdm, const Dataset& test,
                          const std::vector<double>& snrs, const BerOptions& opts,
                          uint64_t seed) {
    Alphabet qpsk = Alphabet::qpsk();
    EvalReport m = ber_curve(unified, test, snrs, qpsk, opts, seed);
    EvalReport o = ber_curve(ofdm, test, snrs, qpsk, opts, seed);
    BerComparison out;
    for (size_t i = 0; i < m.rows.size(); ++i) {
        const EvalRecord& a = m.rows[i];
        const EvalRecord& b = o.rows[i];
        bool ok = a.value <= b.value && a.ci_high < b.ci_low && a.n_bits >= 1'000'000 &&
                  b.n_bits >= 1'000'000;
        out.pass = out.pass && ok;
        out.detail += fmt("%s%g dB: %.3e [%.2e,%.2e] vs %.3e [%.2e,%.2e]",
                          out.detail.empty() ? "" : "; ", a.snr_db, a.value, a.ci_low,
                          a.ci_high, b.value, b.ci_low, b.ci_high);
    }
    return out;
}

void check7(Harness& h, const ExperimentConfig& cfg, const PipelineRun& a) {
    Modem unified = load_modem(a.path("unified.modm"));
    Modem ofdm = make_ofdm_modem(cfg.channel.num_subcarriers, cfg.channel.prefix_len);
    Dataset test = load_dataset(a.path("test.ddch"));
    BerComparison c = compare_ber(unified, ofdm, test, {20.0, 30.0}, cfg.ber,
                                  cfg.scenario_seed("default"));
    h.report(7, c.pass,
             "QPSK BER beats OFDM at 20 and 30 dB with non-overlapping 95% intervals",
             c.detail);
}

void check8(Harness& h, const ExperimentConfig& cfg, const PipelineRun& a) {
    const Scenario* fast = nullptr;
    for (const Scenario& sc : cfg.scenarios)
        if (sc.name == "fast") fast = &sc;
    if (!fast) {
        h.report(8, false, "BER ordering holds on the harsher mobility scenario",
                 "config has no [scenario.fast]");
        return;
    }
    Modem unified = load_modem(a.path("unified.modm"));
    Modem ofdm = make_ofdm_modem(cfg.channel.num_subcarriers, cfg.channel.prefix_len);
    Dataset test = generate_dataset(fast->spec, cfg.split_test, cfg.scenario_seed("fast"));
    BerComparison c = compare_ber(unified, ofdm, test, {30.0}, cfg.ber,
                                  cfg.scenario_seed("fast"));
    h.report(8, c.pass,
             "BER ordering holds at 30 dB under faster mobility and 12 paths (unseen in "
             "training)",
             c.detail);
}

// ---------------------------------------------------------------------------
// 9. Determinism: a second full run reproduces every artifact byte for byte
// ---------------------------------------------------------------------------

void check9(Harness& h, const std::string& cfg_path, const PipelineRun& a, const fs::path& dir_b) {
    PipelineRun b = run_pipeline(cfg_path, dir_b);

    std::string mismatches;
    auto same = [&](const char* name) {
        bool eq = read_file_bytes(a.path(name)) == read_file_bytes(b.path(name));
        if (!eq) mismatches += fmt("%s%s", mismatches.empty() ? "" : ", ", name);
        return eq;
    };
    bool files_ok = true;
    for (const char* name : {"train.ddch", "val.ddch", "test.ddch", "p1.mnet", "p2.mnet",
                             "unified.modm", "rate.csv", "ber.csv"})
        files_ok = same(name) && files_ok;

    // binary containers round-trip losslessly: load + re-save reproduces the file
    bool rt_ok = true;
    fs::path rt = dir_b / "roundtrip";
    fs::create_directories(rt);
    {
        Stamp st;
        Dataset ds = load_dataset(a.path("test.ddch"), &st);
        save_dataset((rt / "test.ddch").string(), ds, st);
        rt_ok = rt_ok && read_file_bytes((rt / "test.ddch").string()) ==
                             read_file_bytes(a.path("test.ddch"));
    }
    {
        Stamp st;
        ModNetParams p = load_params(a.path("p2.mnet"), &st);
        save_params((rt / "p2.mnet").string(), p, st);
        rt_ok = rt_ok && read_file_bytes((rt / "p2.mnet").string()) ==
                             read_file_bytes(a.path("p2.mnet"));
    }
    {
        Stamp st;
        Modem m = load_modem(a.path("unified.modm"), &st);
        save_modem((rt / "unified.modm").string(), m, st);
        rt_ok = rt_ok && read_file_bytes((rt / "unified.modm").string()) ==
                             read_file_bytes(a.path("unified.modm"));
    }

    h.report(9, files_ok && rt_ok,
             "identical seeds reproduce every artifact byte for byte; containers round-trip",
             files_ok && rt_ok
                 ? "8 artifacts identical across runs; 3 container round-trips exact"
                 : fmt("mismatched: %s%s", mismatches.empty() ? "-" : mismatches.c_str(),
                       rt_ok ? "" : "; round-trip differs"));
}

}  // namespace

int main(int argc, char** argv) {
    Harness h;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        auto need = [&](const char* what) -> std::string {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "%s needs a value\n", what);
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--workdir") {
            h.work = need("--workdir");
        } else if (arg == "--configs") {
            h.configs = need("--configs");
        } else if (arg == "--only") {
            std::stringstream ss(need("--only"));
            std::string tok;
            while (std::getline(ss, tok, ',')) h.only.insert(std::atoi(tok.c_str()));
        } else {
            std::fprintf(stderr, "unknown argument: %s\n", arg.c_str());
            return 2;
        }
    }

    try {
        fs::create_directories(h.work);
        const std::string cfg_path = (h.configs / "desk-scale.cfg").string();
        ExperimentConfig cfg = load_config(cfg_path);

        if (h.enabled(1)) check1(h);
        if (h.enabled(2)) check2(h);
        if (h.enabled(3)) check3(h);
        if (h.enabled(4)) check4(h);

        bool need_run_a = h.enabled(5) || h.enabled(6) || h.enabled(7) || h.enabled(8) ||
                          h.enabled(9);
        PipelineRun run_a;
        if (need_run_a) run_a = run_pipeline(cfg_path, h.work / "run_a");

        if (h.enabled(5)) check5(h, cfg, run_a);
        if (h.enabled(6)) check6(h, cfg, run_a);
        if (h.enabled(7)) check7(h, cfg, run_a);
        if (h.enabled(8)) check8(h, cfg, run_a);
        if (h.enabled(9)) check9(h, cfg_path, run_a, h.work / "run_b");

        if (h.enabled(10)) {
            // Full-size configuration: a single-core run takes days, so it is not
            // gated here. The config is verified to load and drives the exact same
            // command layer; see README for invoking it.
            (void)load_config((h.configs / "paper-default.cfg").string());
            h.skip(10, "full-size configuration end-to-end run",
                   "non-gating: multi-day single-core training; config parses and uses the "
                   "same pipeline");
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "acceptance: error[%s]: %s\n", e.cls().c_str(), e.what());
        return 1;
    }

    int gating = h.only.empty() ? 9 : static_cast<int>(h.only.size() - h.only.count(10));
    std::printf("acceptance: %d/%d gating checks passed\n", gating - h.failed, gating);
    return h.failed == 0 ? 0 : 1;
}
