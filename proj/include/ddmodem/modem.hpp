#pragma once

#include <string>

#include "ddmodem/common.hpp"
#include "ddmodem/rates.hpp"

namespace ddm {

// Operating point of the link. signal_power is sigma_s^2 per transmitted
// symbol, noise_power is sigma_w^2 per received sample.
struct SnrSpec {
    double signal_power = 1.0;
    double noise_power = 0.0;

    SnrSpec() = default;
    SnrSpec(double sig, double noise);

    static SnrSpec from_db(double snr_db);
    double snr_db() const;
    double rho() const { return noise_power / signal_power; }
};

// A matrix modem pair: mod (Phi, M_L x M) maps M symbols onto an M_L-sample
// frame, demod (Psi^H, M x M_L) maps a received frame back to M sub-channel
// outputs. Energy convention: ||Phi||_F^2 = M_L, ||Psi^H||_F^2 = M.
struct Modem {
    Eigen::MatrixXcd mod;
    Eigen::MatrixXcd demod;

    int num_subcarriers() const { return static_cast<int>(mod.cols()); }
    int frame_len() const { return static_cast<int>(mod.rows()); }
    int prefix_len() const { return frame_len() - num_subcarriers(); }
};

// CP-OFDM pair: Phi = A_cp F^H0 (unitary IDFT plus cyclic prefix extension),
// Psi^H = [0 | F] (drop the prefix, unitary DFT). Satisfies the energy
// convention exactly.
Modem make_ofdm_modem(int num_subcarriers, int prefix_len);

// Rescale both matrices onto the energy convention. Throws MathError if a
// matrix has zero norm.
void normalize_modem(Modem& m);

struct EquivalentChannel {
    Eigen::MatrixXcd He;       // Psi^H H Phi, M x M
    Eigen::VectorXd row_energy;  // squared norms of the demodulator rows
};

EquivalentChannel equivalent_channel(const Modem& m, const Eigen::MatrixXcd& H);

// Per-sub-channel achievable rates in bit/s/Hz. Requires noise_power > 0.
Eigen::VectorXd subchannel_rates(const EquivalentChannel& eq, const SnrSpec& snr);

// loss = -(sum_m r_m + M min_m r_m); the training criterion, exposed here in
// double precision as the reference implementation.
double rate_objective(const EquivalentChannel& eq, const SnrSpec& snr);

using ModemGrad = ModemGradT<double>;

// Objective and its packed complex gradient w.r.t. the modem matrices.
double rate_objective_grad(const Modem& m, const Eigen::MatrixXcd& H, const SnrSpec& snr,
                           ModemGrad* grad, Eigen::MatrixXcd* He_out = nullptr);

// MODM container. Loading verifies the energy convention to a relative 1e-4
// and renormalizes (with a warning on stderr) if it is merely off-scale.
void save_modem(const std::string& path, const Modem& m, Stamp stamp);
Modem load_modem(const std::string& path, Stamp* stamp_out = nullptr);

}  // namespace ddm
