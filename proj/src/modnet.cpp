#include "ddmodem/modnet.hpp"

#include <fstream>
#include <numeric>

namespace ddm {

ModNetArch ModNetArch::make(int num_subcarriers, int prefix_len) {
    ModNetArch a;
    a.num_subcarriers = num_subcarriers;
    a.prefix_len = prefix_len;
    a.input_side = num_subcarriers + prefix_len;
    a.conv_kernel = 7;
    a.conv_channels = {16, 16, 16};
    a.output_count = 4 * a.input_side * a.num_subcarriers;
    a.fc_widths = {4 * a.input_side, 4 * a.input_side, a.output_count};
    a.validate();
    return a;
}

void ModNetArch::validate() const {
    if (num_subcarriers <= 0 || prefix_len < 0)
        throw ConfigError("ModNetArch: need M > 0 and M_p >= 0");
    if (input_side != num_subcarriers + prefix_len)
        throw ConfigError("ModNetArch: input_side must equal M + M_p");
    if (conv_kernel < 1 || conv_kernel % 2 == 0)
        throw ConfigError("ModNetArch: conv kernel must be odd for same-padding");
    if (conv_channels.empty())
        throw ConfigError("ModNetArch: at least one conv layer");
    for (int c : conv_channels)
        if (c <= 0) throw ConfigError("ModNetArch: conv widths must be positive");
    if (fc_widths.size() != 3)
        throw ConfigError("ModNetArch: exactly three FC layers");
    for (int w : fc_widths)
        if (w <= 0) throw ConfigError("ModNetArch: FC widths must be positive");
    if (output_count != 4 * input_side * num_subcarriers)
        throw ConfigError("ModNetArch: output_count must be 4*M_L*M");
    if (fc_widths.back() != output_count)
        throw ConfigError("ModNetArch: last FC width must equal output_count");
}

int ModNetArch::conv_in(int layer) const {
    int n = 2;
    for (int i = 0; i < layer; ++i) n += conv_channels[i];
    return n;
}

ModNetParams init_modnet(const ModNetArch& arch, uint64_t seed) {
    return ModNetParams::init(arch, seed);
}

Modem modnet_forward(ModNetParams& params, const Eigen::MatrixXcd& H, bool training) {
    if (H.rows() != params.arch.input_side || H.cols() != params.arch.input_side)
        throw MathError("modnet_forward: channel matrix does not match network input side");
    nn::Mat<float> x = modnet_input<float>(H);
    nn::Mat<float> out = params.forward_batch(x, training, nullptr);
    CMat<float> Phi, PsiH;
    split_output<float>(out.data(), params.arch.num_subcarriers, params.arch.input_side, Phi, PsiH);
    Modem m;
    m.mod = Phi.cast<cxd>();
    m.demod = PsiH.cast<cxd>();
    return m;
}

nn::Mat<float> inference_outputs(ModNetParams& params, const Dataset& ds, Eigen::Index chunk) {
    if (ds.size() == 0) throw ArgError("inference_outputs: empty dataset");
    const int side = params.arch.input_side;
    if (ds.spec.frame_len() != side)
        throw MathError("inference_outputs: dataset frame length does not match network");
    const Eigen::Index n = static_cast<Eigen::Index>(ds.size());
    nn::Mat<float> out(params.arch.output_count, n);
    nn::Mat<float> x(2 * side * side, std::min(chunk, n));
    for (Eigen::Index b0 = 0; b0 < n;) {
        Eigen::Index bn = std::min(chunk, n - b0);
        x.resize(Eigen::NoChange, bn);
        for (Eigen::Index j = 0; j < bn; ++j)
            x.col(j) = modnet_input<float>(build_channel_matrix(ds.samples[b0 + j]));
        out.middleCols(b0, bn) = params.forward_batch(x, false, nullptr);
        b0 += bn;
    }
    return out;
}

static void write_tensor(BinWriter& w, const nn::ParamRef<float>& t) {
    w.str(t.name);
    w.u64(t.count);
    w.bytes(t.value, t.count * sizeof(float));
}

void save_params(const std::string& path, ModNetParams& params, Stamp stamp) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    BinWriter w(f);
    w.magic("MNET");
    w.u32(1);
    w.u32(static_cast<uint32_t>(params.arch.num_subcarriers));
    w.u32(static_cast<uint32_t>(params.arch.prefix_len));
    w.u32(static_cast<uint32_t>(params.arch.conv_kernel));
    w.u32(static_cast<uint32_t>(params.arch.conv_channels.size()));
    for (int c : params.arch.conv_channels) w.u32(static_cast<uint32_t>(c));
    for (int c : params.arch.fc_widths) w.u32(static_cast<uint32_t>(c));
    w.u64(params.init_seed);
    auto ts = params.tensors();
    w.u32(static_cast<uint32_t>(ts.size()));
    for (auto& t : ts) write_tensor(w, t);
    w.u64(stamp.config_hash);
    w.u64(stamp.seed);
    if (!f) throw IoError("write failed: " + path);
}

ModNetParams load_params(const std::string& path, Stamp* stamp_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    BinReader r(f, path);
    r.expect_magic("MNET");
    uint32_t version = r.u32();
    if (version != 1)
        throw FormatError(path + ": unsupported MNET version " + std::to_string(version));
    ModNetArch arch;
    arch.num_subcarriers = static_cast<int>(r.u32());
    arch.prefix_len = static_cast<int>(r.u32());
    arch.input_side = arch.num_subcarriers + arch.prefix_len;
    arch.conv_kernel = static_cast<int>(r.u32());
    uint32_t nconv = r.u32();
    if (nconv == 0 || nconv > 64) throw FormatError(path + ": implausible conv layer count");
    arch.conv_channels.resize(nconv);
    for (auto& c : arch.conv_channels) c = static_cast<int>(r.u32());
    arch.fc_widths.resize(3);
    for (auto& c : arch.fc_widths) c = static_cast<int>(r.u32());
    arch.output_count = 4 * arch.input_side * arch.num_subcarriers;
    try {
        arch.validate();
    } catch (const ConfigError& e) {
        throw FormatError(path + ": invalid architecture header (" + e.what() + ")");
    }
    uint64_t init_seed = r.u64();
    ModNetParams params = ModNetParams::init(arch, init_seed);
    auto ts = params.tensors();
    uint32_t count = r.u32();
    if (count != ts.size())
        throw FormatError(path + ": tensor count mismatch (file " + std::to_string(count) +
                          ", architecture needs " + std::to_string(ts.size()) + ")");
    for (auto& t : ts) {
        std::string name = r.str();
        if (name != t.name)
            throw FormatError(path + ": unexpected tensor '" + name + "' (wanted '" + t.name + "')");
        uint64_t n = r.u64();
        if (n != t.count)
            throw FormatError(path + ": tensor '" + name + "' size mismatch");
        r.bytes(t.value, t.count * sizeof(float));
    }
    Stamp stamp;
    if (r.try_bytes(&stamp.config_hash, sizeof stamp.config_hash)) stamp.seed = r.u64();
    if (stamp_out) *stamp_out = stamp;
    return params;
}

}  // namespace ddm
