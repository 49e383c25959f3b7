#pragma once

#include <array>
#include <string>
#include <vector>

#include "ddmodem/channel.hpp"
#include "ddmodem/modem.hpp"
#include "ddmodem/nn.hpp"
#include "ddmodem/rates.hpp"

namespace ddm {

// Network shape, fully determined by the frame geometry. Conv layers are
// densely connected: layer i sees the 2-channel input stacked with every
// earlier conv output.
struct ModNetArch {
    int num_subcarriers = 0;  // M
    int prefix_len = 0;       // M_p
    int input_side = 0;       // M_L = M + M_p
    int conv_kernel = 7;
    std::vector<int> conv_channels;  // output widths per conv layer
    std::vector<int> fc_widths;      // three entries, last == output_count
    int output_count = 0;            // 4 * M_L * M real values

    static ModNetArch make(int num_subcarriers, int prefix_len);
    void validate() const;
    int conv_in(int layer) const;  // 2 + sum of conv_channels before `layer`
    bool operator==(const ModNetArch&) const = default;
};

// Forward cache for one batch; everything the backward pass re-reads.
template <typename S>
struct ModNetCache {
    std::vector<nn::Mat<S>> conv_in;                     // input to each conv
    std::vector<typename nn::BatchNorm<S>::Cache> bn;    // xhat + inv_std
    std::vector<nn::Mat<S>> bn_out;                      // pre-activation
    std::vector<nn::Mat<S>> act;                         // post-activation
    nn::Mat<S> z1, h1, z2, h2;                           // FC intermediates
    nn::Mat<S> out;                                      // normalized output
    nn::Mat<S> raw_norm;                                 // 2 x N: mod, demod
};

template <typename S>
struct ModNetT {
    ModNetArch arch;
    uint64_t init_seed = 0;
    std::vector<nn::Conv2d<S>> convs;
    std::vector<nn::BatchNorm<S>> bns;
    std::array<nn::Dense<S>, 3> fcs;

    static ModNetT init(const ModNetArch& arch, uint64_t seed);

    // x columns are flat 2*M_L*M_L inputs (Re plane then Im plane, row-major).
    // training toggles batch statistics (and their running update) vs frozen
    // inference statistics. cache may be null in inference.
    nn::Mat<S> forward_batch(const nn::Mat<S>& x, bool training, ModNetCache<S>* cache);

    // d_out is the gradient w.r.t. the normalized output columns; gradients
    // accumulate into the layer .g* slots.
    void backward_batch(const ModNetCache<S>& cache, const nn::Mat<S>& d_out);

    void zero_grads();
    std::vector<nn::ParamRef<S>> trainable();  // optimizer view, stable order
    std::vector<nn::ParamRef<S>> tensors();    // + running stats, for files

    size_t param_count() {
        size_t n = 0;
        for (auto& p : trainable()) n += p.count;
        return n;
    }
};

using ModNetParams = ModNetT<float>;

// Flat input column from a complex channel matrix.
template <typename S>
nn::Vec<S> modnet_input(const Eigen::MatrixXcd& H) {
    const Eigen::Index side = H.rows();
    if (H.cols() != side) throw MathError("modnet_input: square matrix required");
    nn::Vec<S> x(2 * side * side);
    for (Eigen::Index r = 0; r < side; ++r)
        for (Eigen::Index c = 0; c < side; ++c) {
            x(r * side + c) = static_cast<S>(H(r, c).real());
            x(side * side + r * side + c) = static_cast<S>(H(r, c).imag());
        }
    return x;
}

// Output column layout: [Re(Phi); Im(Phi); Re(Psi^H); Im(Psi^H)], each block
// row-major in its matrix.
template <typename S>
void split_output(const S* o, int M, int ML, CMat<S>& Phi, CMat<S>& PsiH) {
    Phi.resize(ML, M);
    PsiH.resize(M, ML);
    const Eigen::Index LM = Eigen::Index(ML) * M;
    for (int r = 0; r < ML; ++r)
        for (int c = 0; c < M; ++c) {
            Eigen::Index i = Eigen::Index(r) * M + c;
            Phi(r, c) = std::complex<S>(o[i], o[LM + i]);
        }
    const S* q = o + 2 * LM;
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < ML; ++c) {
            Eigen::Index i = Eigen::Index(r) * ML + c;
            PsiH(r, c) = std::complex<S>(q[i], q[LM + i]);
        }
}

// Packed complex modem gradient back into the flat output layout.
template <typename S>
void pack_modem_grad(const ModemGradT<S>& g, S* o) {
    const int ML = static_cast<int>(g.mod.rows()), M = static_cast<int>(g.mod.cols());
    const Eigen::Index LM = Eigen::Index(ML) * M;
    for (int r = 0; r < ML; ++r)
        for (int c = 0; c < M; ++c) {
            Eigen::Index i = Eigen::Index(r) * M + c;
            o[i] = g.mod(r, c).real();
            o[LM + i] = g.mod(r, c).imag();
        }
    S* q = o + 2 * LM;
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < ML; ++c) {
            Eigen::Index i = Eigen::Index(r) * ML + c;
            q[i] = g.demod(r, c).real();
            q[LM + i] = g.demod(r, c).imag();
        }
}

ModNetParams init_modnet(const ModNetArch& arch, uint64_t seed);

// Single-matrix convenience wrapper; training mode uses (and updates) batch
// statistics, inference mode is pure.
Modem modnet_forward(ModNetParams& params, const Eigen::MatrixXcd& H, bool training = false);

// Inference outputs for a whole dataset, chunked to bound memory; one column
// per sample in dataset order.
nn::Mat<float> inference_outputs(ModNetParams& params, const Dataset& ds,
                                 Eigen::Index chunk = 128);

void save_params(const std::string& path, ModNetParams& params, Stamp stamp);
ModNetParams load_params(const std::string& path, Stamp* stamp_out = nullptr);

// ---- template implementation ----

template <typename S>
ModNetT<S> ModNetT<S>::init(const ModNetArch& a, uint64_t seed) {
    a.validate();
    ModNetT<S> net;
    net.arch = a;
    net.init_seed = seed;
    const int L = static_cast<int>(a.conv_channels.size());
    net.convs.resize(L);
    net.bns.resize(L);
    const int hw = a.input_side * a.input_side;
    for (int i = 0; i < L; ++i) {
        net.convs[i].init(a.conv_in(i), a.conv_channels[i], a.input_side, a.conv_kernel,
                          mix_seed(seed, SeedTag::net_init, static_cast<uint64_t>(i)));
        net.bns[i].init(a.conv_channels[i], hw);
    }
    int fc_in = a.conv_channels.back() * hw;
    for (int i = 0; i < 3; ++i) {
        net.fcs[i].init(fc_in, a.fc_widths[i],
                        mix_seed(seed, SeedTag::net_init, 100 + static_cast<uint64_t>(i)));
        fc_in = a.fc_widths[i];
    }
    return net;
}

template <typename S>
nn::Mat<S> ModNetT<S>::forward_batch(const nn::Mat<S>& x, bool training, ModNetCache<S>* cache) {
    const int L = static_cast<int>(convs.size());
    const Eigen::Index n = x.cols();
    if (cache) {
        cache->conv_in.resize(L);
        cache->bn.resize(L);
        cache->bn_out.resize(L);
        cache->act.resize(L);
    }
    nn::Mat<S> concat = x;
    nn::Mat<S> act;
    for (int i = 0; i < L; ++i) {
        nn::Mat<S> c = convs[i].forward(concat);
        nn::Mat<S> b;
        if (training) {
            typename nn::BatchNorm<S>::Cache tmp;
            b = bns[i].forward_train(c, cache ? cache->bn[i] : tmp);
        } else {
            b = bns[i].forward_infer(c);
        }
        act = nn::leaky_relu(b);
        if (cache) {
            cache->conv_in[i] = concat;
            cache->bn_out[i] = b;
            cache->act[i] = act;
        }
        if (i + 1 < L) {
            nn::Mat<S> next(concat.rows() + act.rows(), n);
            next.topRows(concat.rows()) = concat;
            next.bottomRows(act.rows()) = act;
            concat = std::move(next);
        }
    }
    nn::Mat<S> z1 = fcs[0].forward(act);
    nn::Mat<S> h1 = nn::leaky_relu(z1);
    nn::Mat<S> z2 = fcs[1].forward(h1);
    nn::Mat<S> h2 = nn::leaky_relu(z2);
    nn::Mat<S> out = fcs[2].forward(h2);

    const Eigen::Index half = Eigen::Index(2) * arch.input_side * arch.num_subcarriers;
    const S s_mod = static_cast<S>(std::sqrt(static_cast<double>(arch.input_side)));
    const S s_demod = static_cast<S>(std::sqrt(static_cast<double>(arch.num_subcarriers)));
    nn::Mat<S> norms(2, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        norms(0, j) = nn::normalize_forward<S>(out.col(j).head(half), s_mod);
        norms(1, j) = nn::normalize_forward<S>(out.col(j).tail(half), s_demod);
    }
    if (cache) {
        cache->z1 = std::move(z1);
        cache->h1 = std::move(h1);
        cache->z2 = std::move(z2);
        cache->h2 = std::move(h2);
        cache->out = out;
        cache->raw_norm = std::move(norms);
    }
    return out;
}

template <typename S>
void ModNetT<S>::backward_batch(const ModNetCache<S>& cache, const nn::Mat<S>& d_out) {
    const int L = static_cast<int>(convs.size());
    const Eigen::Index n = d_out.cols();
    const Eigen::Index half = Eigen::Index(2) * arch.input_side * arch.num_subcarriers;
    const S s_mod = static_cast<S>(std::sqrt(static_cast<double>(arch.input_side)));
    const S s_demod = static_cast<S>(std::sqrt(static_cast<double>(arch.num_subcarriers)));

    nn::Mat<S> dz3 = d_out;
    for (Eigen::Index j = 0; j < n; ++j) {
        nn::normalize_backward<S>(cache.out.col(j).head(half), s_mod, cache.raw_norm(0, j),
                                  dz3.col(j).head(half));
        nn::normalize_backward<S>(cache.out.col(j).tail(half), s_demod, cache.raw_norm(1, j),
                                  dz3.col(j).tail(half));
    }
    nn::Mat<S> dh2 = fcs[2].backward(cache.h2, dz3);
    nn::Mat<S> dz2 = nn::leaky_relu_backward(cache.z2, dh2);
    nn::Mat<S> dh1 = fcs[1].backward(cache.h1, dz2);
    nn::Mat<S> dz1 = nn::leaky_relu_backward(cache.z1, dh1);
    nn::Mat<S> dfc_in = fcs[0].backward(cache.act[L - 1], dz1);

    const int hw = arch.input_side * arch.input_side;
    std::vector<nn::Mat<S>> d_act(L);
    d_act[L - 1] = std::move(dfc_in);
    for (int i = L - 1; i >= 0; --i) {
        nn::Mat<S> db = nn::leaky_relu_backward(cache.bn_out[i], d_act[i]);
        nn::Mat<S> dc = bns[i].backward(cache.bn[i], db);
        nn::Mat<S> dxi = convs[i].backward(cache.conv_in[i], dc);
        // dxi covers [input; act_0; ...; act_{i-1}]; fan the slices back out.
        Eigen::Index off = Eigen::Index(2) * hw;
        for (int j = 0; j < i; ++j) {
            Eigen::Index rows = Eigen::Index(arch.conv_channels[j]) * hw;
            if (d_act[j].size() == 0) d_act[j] = nn::Mat<S>::Zero(rows, n);
            d_act[j] += dxi.middleRows(off, rows);
            off += rows;
        }
    }
}

template <typename S>
void ModNetT<S>::zero_grads() {
    for (auto& c : convs) c.gw.setZero();
    for (auto& b : bns) {
        b.g_gamma.setZero();
        b.g_beta.setZero();
    }
    for (auto& f : fcs) {
        f.gw.setZero();
        f.gb.setZero();
    }
}

template <typename S>
std::vector<nn::ParamRef<S>> ModNetT<S>::trainable() {
    std::vector<nn::ParamRef<S>> out;
    for (size_t i = 0; i < convs.size(); ++i) {
        std::string tag = "conv" + std::to_string(i + 1);
        out.push_back({tag + ".w", convs[i].w.data(), convs[i].gw.data(),
                       static_cast<size_t>(convs[i].w.size())});
        std::string bn = "bn" + std::to_string(i + 1);
        out.push_back({bn + ".gamma", bns[i].gamma.data(), bns[i].g_gamma.data(),
                       static_cast<size_t>(bns[i].gamma.size())});
        out.push_back({bn + ".beta", bns[i].beta.data(), bns[i].g_beta.data(),
                       static_cast<size_t>(bns[i].beta.size())});
    }
    for (size_t i = 0; i < fcs.size(); ++i) {
        std::string tag = "fc" + std::to_string(i + 1);
        out.push_back({tag + ".w", fcs[i].w.data(), fcs[i].gw.data(),
                       static_cast<size_t>(fcs[i].w.size())});
        out.push_back({tag + ".b", fcs[i].b.data(), fcs[i].gb.data(),
                       static_cast<size_t>(fcs[i].b.size())});
    }
    return out;
}

template <typename S>
std::vector<nn::ParamRef<S>> ModNetT<S>::tensors() {
    auto out = trainable();
    for (size_t i = 0; i < bns.size(); ++i) {
        std::string bn = "bn" + std::to_string(i + 1);
        out.push_back({bn + ".run_mean", bns[i].run_mean.data(), nullptr,
                       static_cast<size_t>(bns[i].run_mean.size())});
        out.push_back({bn + ".run_var", bns[i].run_var.data(), nullptr,
                       static_cast<size_t>(bns[i].run_var.size())});
    }
    return out;
}

}  // namespace ddm
