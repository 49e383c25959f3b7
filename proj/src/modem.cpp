#include "ddmodem/modem.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace ddm {

SnrSpec::SnrSpec(double sig, double noise) : signal_power(sig), noise_power(noise) {
    if (!(signal_power > 0.0))
        throw ArgError("SnrSpec: signal power must be positive");
    if (!(noise_power >= 0.0))
        throw ArgError("SnrSpec: noise power must be non-negative");
}

SnrSpec SnrSpec::from_db(double snr_db) {
    return SnrSpec(1.0, std::pow(10.0, -snr_db / 10.0));
}

double SnrSpec::snr_db() const {
    if (noise_power <= 0.0)
        throw MathError("snr_db undefined for zero noise power");
    return 10.0 * std::log10(signal_power / noise_power);
}

Modem make_ofdm_modem(int num_subcarriers, int prefix_len) {
    if (num_subcarriers <= 0 || prefix_len < 0)
        throw ArgError("make_ofdm_modem: need M > 0 and M_p >= 0");
    const int M = num_subcarriers, Mp = prefix_len, ML = M + Mp;
    const double s = 1.0 / std::sqrt(static_cast<double>(M));
    Modem out;
    out.mod.resize(ML, M);
    out.demod.setZero(M, ML);
    for (int v = 0; v < ML; ++v) {
        // Row v carries time index n = v - M_p; the prefix rows coincide with
        // the IDFT tail because the exponential is M-periodic in n.
        const int n = v - Mp;
        for (int m = 0; m < M; ++m) {
            double ph = 2.0 * kPi * m * n / M;
            out.mod(v, m) = s * cxd(std::cos(ph), std::sin(ph));
            if (v >= Mp) out.demod(m, v) = s * cxd(std::cos(ph), -std::sin(ph));
        }
    }
    return out;
}

void normalize_modem(Modem& m) {
    const double target_mod = std::sqrt(static_cast<double>(m.mod.rows()));
    const double target_demod = std::sqrt(static_cast<double>(m.demod.rows()));
    double nm = m.mod.norm(), nd = m.demod.norm();
    if (nm == 0.0 || nd == 0.0)
        throw MathError("normalize_modem: zero-norm matrix");
    m.mod *= target_mod / nm;
    m.demod *= target_demod / nd;
}

EquivalentChannel equivalent_channel(const Modem& m, const Eigen::MatrixXcd& H) {
    if (H.rows() != m.mod.rows() || H.cols() != m.mod.rows() ||
        m.demod.cols() != H.rows() || m.demod.rows() != m.mod.cols())
        throw MathError("equivalent_channel: dimension mismatch");
    EquivalentChannel eq;
    eq.He = m.demod * H * m.mod;
    eq.row_energy = m.demod.rowwise().squaredNorm();
    return eq;
}

static void require_noisy(const SnrSpec& snr) {
    if (!(snr.noise_power > 0.0))
        throw ArgError("sub-channel rates require positive noise power");
}

Eigen::VectorXd subchannel_rates(const EquivalentChannel& eq, const SnrSpec& snr) {
    require_noisy(snr);
    return rates_from_he<double>(eq.He, eq.row_energy, snr.rho());
}

double rate_objective(const EquivalentChannel& eq, const SnrSpec& snr) {
    require_noisy(snr);
    return rate_objective_from_he<double>(eq.He, eq.row_energy, snr.rho());
}

double rate_objective_grad(const Modem& m, const Eigen::MatrixXcd& H, const SnrSpec& snr,
                           ModemGrad* grad, Eigen::MatrixXcd* He_out) {
    require_noisy(snr);
    return rate_objective_modem<double>(m.mod, m.demod, H, snr.rho(), grad, He_out);
}

static void write_cmat(BinWriter& w, const Eigen::MatrixXcd& a) {
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            w.f64(a(r, c).real());
            w.f64(a(r, c).imag());
        }
}

static void read_cmat(BinReader& r, Eigen::MatrixXcd& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            double re = r.f64();
            double im = r.f64();
            a(i, c) = cxd(re, im);
        }
}

void save_modem(const std::string& path, const Modem& m, Stamp stamp) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    BinWriter w(f);
    w.magic("MODM");
    w.u32(1);
    w.u32(static_cast<uint32_t>(m.num_subcarriers()));
    w.u32(static_cast<uint32_t>(m.frame_len()));
    write_cmat(w, m.mod);
    write_cmat(w, m.demod);
    w.u64(stamp.config_hash);
    w.u64(stamp.seed);
    if (!f) throw IoError("write failed: " + path);
}

Modem load_modem(const std::string& path, Stamp* stamp_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    BinReader r(f, path);
    r.expect_magic("MODM");
    uint32_t version = r.u32();
    if (version != 1)
        throw FormatError(path + ": unsupported MODM version " + std::to_string(version));
    uint32_t M = r.u32();
    uint32_t ML = r.u32();
    if (M == 0 || ML < M)
        throw FormatError(path + ": inconsistent modem dimensions");
    Modem m;
    m.mod.resize(ML, M);
    m.demod.resize(M, ML);
    read_cmat(r, m.mod);
    read_cmat(r, m.demod);
    Stamp stamp;
    if (r.try_bytes(&stamp.config_hash, sizeof stamp.config_hash)) stamp.seed = r.u64();
    if (stamp_out) *stamp_out = stamp;
    double e_mod = m.mod.squaredNorm(), e_demod = m.demod.squaredNorm();
    bool ok_mod = std::abs(e_mod - ML) <= 1e-4 * ML;
    bool ok_demod = std::abs(e_demod - M) <= 1e-4 * M;
    if (!ok_mod || !ok_demod) {
        std::cerr << "warning: " << path << ": modem energy off convention"
                  << " (||mod||^2 = " << e_mod << ", ||demod||^2 = " << e_demod
                  << "), renormalizing\n";
        normalize_modem(m);
    }
    return m;
}

}  // namespace ddm
