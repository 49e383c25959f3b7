#pragma once

#include <vector>

#include "ddmodem/common.hpp"

namespace ddm {

// Frame geometry and mobility statistics of the doubly-dispersive channel.
// All derived quantities hang off this struct so the rest of the code never
// recomputes them inconsistently.
struct ChannelSpec {
    double carrier_freq_hz = 4e9;        // f_c
    double subcarrier_spacing_hz = 15e3; // delta_f
    int num_subcarriers = 128;           // M
    int prefix_len = 24;                 // M_p
    double ue_speed_mps = 100.0;         // v
    int num_paths = 4;                   // N_p
    int max_delay_grid = 20;             // l_max, in samples

    int frame_len() const { return num_subcarriers + prefix_len; }  // M_L
    double frame_duration_s() const { return 1.0 / subcarrier_spacing_hz; }  // T
    double sample_interval_s() const { return frame_duration_s() / num_subcarriers; }
    double max_doppler_hz() const { return ue_speed_mps * carrier_freq_hz / kSpeedOfLight; }

    // Throws ConfigError; the prefix must cover the worst-case delay.
    void validate() const;

    bool operator==(const ChannelSpec&) const = default;
};

struct PathComponent {
    cxd gain;                  // h_i
    int delay_grid = 0;        // l_i, integer samples on the T/M grid
    double doppler_hz = 0.0;   // nu_i
    double normalized_doppler = 0.0;  // k_i = nu_i * T
};

struct ChannelRealization {
    ChannelSpec spec;
    std::vector<PathComponent> paths;
};

// One path with unit gain and no delay/Doppler, i.e. H = I. Used as the flat
// reference channel in tests and AWGN calibration.
ChannelRealization flat_channel(const ChannelSpec& spec);

// Draw N_p paths: gain ~ CN(0, 1/N_p), delay uniform on {0..l_max}, Doppler
// f_max*cos(theta) with theta uniform on [0, 2pi).
ChannelRealization sample_channel(const ChannelSpec& spec, uint64_t seed);

// H = sum_i h_i * Delta^{k_i} * Gamma_{l_i}, size M_L x M_L, strict
// truncation (no wrap-around): a delayed sample falling before the frame is
// zero. Row v corresponds to time index n = v - M_p.
Eigen::MatrixXcd build_channel_matrix(const ChannelRealization& r);
Eigen::MatrixXcf build_channel_matrix_f(const ChannelRealization& r);

// r = H s + w with w i.i.d. circular complex Gaussian of per-sample variance
// noise_var. noise_var == 0 returns H s exactly.
Eigen::VectorXcd apply_channel(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& s,
                               double noise_var, uint64_t seed);

struct Dataset {
    ChannelSpec spec;
    std::vector<ChannelRealization> samples;

    size_t size() const { return samples.size(); }
};

// count realizations with per-sample seeds mix(seed, sample_index); matrices
// are never materialized here.
Dataset generate_dataset(const ChannelSpec& spec, size_t count, uint64_t seed);

// DDCH container: path records only, matrices are rebuilt on load.
void save_dataset(const std::string& path, const Dataset& ds, Stamp stamp);
Dataset load_dataset(const std::string& path, Stamp* stamp_out = nullptr);

}  // namespace ddm
