#include "ddmodem/channel.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace ddm {

void ChannelSpec::validate() const {
    if (carrier_freq_hz <= 0) throw ConfigError("carrier_freq_hz must be positive");
    if (subcarrier_spacing_hz <= 0) throw ConfigError("subcarrier_spacing_hz must be positive");
    if (num_subcarriers <= 0) throw ConfigError("num_subcarriers must be positive");
    if (prefix_len < 0) throw ConfigError("prefix_len must be non-negative");
    if (ue_speed_mps < 0) throw ConfigError("ue_speed_mps must be non-negative");
    if (num_paths <= 0) throw ConfigError("num_paths must be positive");
    if (max_delay_grid < 0) throw ConfigError("max_delay_grid must be non-negative");
    if (max_delay_grid > prefix_len)
        throw ConfigError("max_delay_grid (" + std::to_string(max_delay_grid) +
                          ") exceeds prefix_len (" + std::to_string(prefix_len) +
                          "): the prefix must cover the worst-case delay");
}

ChannelRealization flat_channel(const ChannelSpec& spec) {
    spec.validate();
    ChannelRealization r{spec, {PathComponent{cxd(1.0, 0.0), 0, 0.0, 0.0}}};
    return r;
}

ChannelRealization sample_channel(const ChannelSpec& spec, uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    const double comp_std = std::sqrt(1.0 / (2.0 * spec.num_paths));
    std::normal_distribution<double> gauss(0.0, comp_std);
    std::uniform_int_distribution<int> delay(0, spec.max_delay_grid);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const double f_max = spec.max_doppler_hz();
    const double T = spec.frame_duration_s();

    ChannelRealization r;
    r.spec = spec;
    r.paths.resize(static_cast<size_t>(spec.num_paths));
    for (auto& p : r.paths) {
        double re = gauss(rng);
        double im = gauss(rng);
        p.gain = cxd(re, im);
        p.delay_grid = delay(rng);
        p.doppler_hz = f_max * std::cos(angle(rng));
        p.normalized_doppler = p.doppler_hz * T;
    }
    return r;
}

namespace {

template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>
build_matrix_impl(const ChannelRealization& r) {
    const int ML = r.spec.frame_len();
    const int M = r.spec.num_subcarriers;
    const int Mp = r.spec.prefix_len;
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> H =
        Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>::Zero(ML, ML);
    for (const auto& p : r.paths) {
        if (p.delay_grid < 0 || p.delay_grid >= ML)
            throw MathError("path delay outside frame");
        // Delta^k is diagonal with entries exp(j 2 pi n k / M), n = v - M_p;
        // Gamma_l puts the sample s(n - l) at row n, zero before the frame.
        for (int v = p.delay_grid; v < ML; ++v) {
            const double n = static_cast<double>(v - Mp);
            const double phase = 2.0 * kPi * n * p.normalized_doppler / M;
            const cxd w = p.gain * cxd(std::cos(phase), std::sin(phase));
            H(v, v - p.delay_grid) += std::complex<Scalar>(static_cast<Scalar>(w.real()),
                                                           static_cast<Scalar>(w.imag()));
        }
    }
    return H;
}

}  // namespace

Eigen::MatrixXcd build_channel_matrix(const ChannelRealization& r) {
    return build_matrix_impl<double>(r);
}

Eigen::MatrixXcf build_channel_matrix_f(const ChannelRealization& r) {
    return build_matrix_impl<float>(r);
}

Eigen::VectorXcd apply_channel(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& s,
                               double noise_var, uint64_t seed) {
    if (H.cols() != s.size()) throw MathError("apply_channel: dimension mismatch");
    if (noise_var < 0) throw ArgError("apply_channel: noise_var must be non-negative");
    Eigen::VectorXcd r = H * s;
    if (noise_var > 0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            double re = gauss(rng);
            double im = gauss(rng);
            r(i) += cxd(re, im);
        }
    }
    return r;
}

Dataset generate_dataset(const ChannelSpec& spec, size_t count, uint64_t seed) {
    if (count == 0) throw ArgError("generate_dataset: count must be positive");
    spec.validate();
    Dataset ds;
    ds.spec = spec;
    ds.samples.reserve(count);
    for (size_t i = 0; i < count; ++i)
        ds.samples.push_back(sample_channel(spec, mix_seed(seed, SeedTag::dataset_sample, i)));
    return ds;
}

// ---------------------------------------------------------------------------
// DDCH file format, version 1.
//   "DDCH" | u32 version | u32 M | u32 M_p | u32 N_p | u64 count
//   f64 carrier_freq_hz | f64 subcarrier_spacing_hz | f64 ue_speed_mps
//   f64 max_delay_grid
//   count x N_p records: f64 h_re | f64 h_im | u32 l | f64 nu
//   trailer: u64 config_hash | u64 seed
// ---------------------------------------------------------------------------

void save_dataset(const std::string& path, const Dataset& ds, Stamp stamp) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    BinWriter w(f);
    w.magic("DDCH");
    w.u32(1);
    w.u32(static_cast<uint32_t>(ds.spec.num_subcarriers));
    w.u32(static_cast<uint32_t>(ds.spec.prefix_len));
    w.u32(static_cast<uint32_t>(ds.spec.num_paths));
    w.u64(ds.samples.size());
    w.f64(ds.spec.carrier_freq_hz);
    w.f64(ds.spec.subcarrier_spacing_hz);
    w.f64(ds.spec.ue_speed_mps);
    w.f64(static_cast<double>(ds.spec.max_delay_grid));
    for (const auto& s : ds.samples) {
        if (static_cast<int>(s.paths.size()) != ds.spec.num_paths)
            throw MathError("save_dataset: sample path count differs from spec");
        for (const auto& p : s.paths) {
            w.f64(p.gain.real());
            w.f64(p.gain.imag());
            w.u32(static_cast<uint32_t>(p.delay_grid));
            w.f64(p.doppler_hz);
        }
    }
    w.u64(stamp.config_hash);
    w.u64(stamp.seed);
    f.flush();
    if (!f) throw IoError("write failed: " + path);
}

Dataset load_dataset(const std::string& path, Stamp* stamp_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    BinReader r(f, path);
    r.expect_magic("DDCH");
    uint32_t version = r.u32();
    if (version != 1) throw FormatError(path + ": unsupported DDCH version " + std::to_string(version));
    Dataset ds;
    ds.spec.num_subcarriers = static_cast<int>(r.u32());
    ds.spec.prefix_len = static_cast<int>(r.u32());
    ds.spec.num_paths = static_cast<int>(r.u32());
    uint64_t count = r.u64();
    ds.spec.carrier_freq_hz = r.f64();
    ds.spec.subcarrier_spacing_hz = r.f64();
    ds.spec.ue_speed_mps = r.f64();
    ds.spec.max_delay_grid = static_cast<int>(r.f64());
    ds.spec.validate();
    const double T = ds.spec.frame_duration_s();
    ds.samples.resize(count);
    for (auto& s : ds.samples) {
        s.spec = ds.spec;
        s.paths.resize(static_cast<size_t>(ds.spec.num_paths));
        for (auto& p : s.paths) {
            double re = r.f64();
            double im = r.f64();
            p.gain = cxd(re, im);
            p.delay_grid = static_cast<int>(r.u32());
            p.doppler_hz = r.f64();
            p.normalized_doppler = p.doppler_hz * T;
        }
    }
    Stamp stamp;
    if (r.try_bytes(&stamp.config_hash, sizeof stamp.config_hash)) stamp.seed = r.u64();
    if (stamp_out) *stamp_out = stamp;
    return ds;
}

}  // namespace ddm
