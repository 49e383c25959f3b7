#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "ddmodem/common.hpp"

// Real-valued layer primitives for the modem network. Everything is
// templated on the scalar so the 32-bit training path and the 64-bit
// finite-difference checks run the same code.
//
// Activation layout: one column per sample. Convolutional features are flat
// C*H*W vectors, channel-major, row-major inside a channel.

namespace ddm::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
void fill_uniform(S* p, size_t n, double bound, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-bound, bound);
    for (size_t i = 0; i < n; ++i) p[i] = static_cast<S>(d(gen));
}

// View of one named parameter tensor and its gradient slot.
template <typename S>
struct ParamRef {
    std::string name;
    S* value = nullptr;
    S* grad = nullptr;
    size_t count = 0;
};

// 2-D convolution, square input, same-padding, no bias (batch norm follows
// immediately, which would cancel any bias). Weights are stored as a
// (cin*k*k) x cout matrix so forward is one GEMM against im2row patches.
template <typename S>
struct Conv2d {
    int cin = 0, cout = 0, side = 0, kernel = 0;
    Mat<S> w, gw;

    void init(int cin_, int cout_, int side_, int kernel_, uint64_t seed) {
        cin = cin_;
        cout = cout_;
        side = side_;
        kernel = kernel_;
        w.resize(cin * kernel * kernel, cout);
        gw.setZero(cin * kernel * kernel, cout);
        fill_uniform(w.data(), static_cast<size_t>(w.size()),
                     1.0 / std::sqrt(static_cast<double>(w.rows())), seed);
    }

    int spatial() const { return side * side; }

    // Patch matrix for samples [b0, b0+bn) of x: (bn*side*side) x (cin*k*k).
    void im2row(const Mat<S>& x, Eigen::Index b0, Eigen::Index bn, Mat<S>& patches) const {
        const int hw = spatial(), kk = kernel * kernel, pad = kernel / 2, W = side;
        patches.resize(bn * hw, cin * kk);
        for (Eigen::Index b = 0; b < bn; ++b) {
            const S* xp = x.col(b0 + b).data();
            for (int ci = 0; ci < cin; ++ci) {
                const S* plane = xp + ci * hw;
                for (int dr = 0; dr < kernel; ++dr) {
                    for (int dc = 0; dc < kernel; ++dc) {
                        S* dst = patches.col(ci * kk + dr * kernel + dc).data() + b * hw;
                        int off = dc - pad;
                        int c_lo = std::max(0, -off), c_hi = std::min(W, W - off);
                        for (int r = 0; r < W; ++r) {
                            S* row = dst + r * W;
                            int sr = r + dr - pad;
                            if (sr < 0 || sr >= W) {
                                std::fill(row, row + W, S(0));
                                continue;
                            }
                            const S* src = plane + sr * W + off;
                            std::fill(row, row + c_lo, S(0));
                            std::copy(src + c_lo, src + c_hi, row + c_lo);
                            std::fill(row + c_hi, row + W, S(0));
                        }
                    }
                }
            }
        }
    }

    Eigen::Index chunk_samples(Eigen::Index n) const {
        // Keep the patch scratch near 64 MiB; below that GEMMs stop gaining.
        const size_t budget = size_t(64) << 20;
        size_t per = size_t(spatial()) * cin * kernel * kernel * sizeof(S);
        Eigen::Index c = static_cast<Eigen::Index>(std::max<size_t>(1, budget / std::max<size_t>(per, 1)));
        return std::min(n, c);
    }

    Mat<S> forward(const Mat<S>& x) const {
        if (x.rows() != Eigen::Index(cin) * spatial())
            throw MathError("Conv2d: input feature size mismatch");
        const Eigen::Index n = x.cols();
        const int hw = spatial();
        Mat<S> y(Eigen::Index(cout) * hw, n);
        Mat<S> patches, prod;
        for (Eigen::Index b0 = 0; b0 < n;) {
            Eigen::Index bn = std::min(chunk_samples(n), n - b0);
            im2row(x, b0, bn, patches);
            prod.noalias() = patches * w;  // (bn*hw) x cout
            for (Eigen::Index b = 0; b < bn; ++b)
                for (int co = 0; co < cout; ++co)
                    y.col(b0 + b).segment(Eigen::Index(co) * hw, hw) =
                        prod.col(co).segment(b * hw, hw);
            b0 += bn;
        }
        return y;
    }

    // Accumulates into gw; returns the gradient w.r.t. x.
    Mat<S> backward(const Mat<S>& x, const Mat<S>& dy) {
        const Eigen::Index n = x.cols();
        const int hw = spatial(), kk = kernel * kernel, pad = kernel / 2, W = side;
        Mat<S> dx = Mat<S>::Zero(x.rows(), n);
        Mat<S> patches, dprod(0, 0), dpatches;
        for (Eigen::Index b0 = 0; b0 < n;) {
            Eigen::Index bn = std::min(chunk_samples(n), n - b0);
            dprod.resize(bn * hw, cout);
            for (Eigen::Index b = 0; b < bn; ++b)
                for (int co = 0; co < cout; ++co)
                    dprod.col(co).segment(b * hw, hw) =
                        dy.col(b0 + b).segment(Eigen::Index(co) * hw, hw);
            im2row(x, b0, bn, patches);
            gw.noalias() += patches.transpose() * dprod;
            dpatches.noalias() = dprod * w.transpose();
            for (Eigen::Index b = 0; b < bn; ++b) {
                S* xp = dx.col(b0 + b).data();
                for (int ci = 0; ci < cin; ++ci) {
                    S* plane = xp + ci * hw;
                    for (int dr = 0; dr < kernel; ++dr) {
                        for (int dc = 0; dc < kernel; ++dc) {
                            const S* src = dpatches.col(ci * kk + dr * kernel + dc).data() + b * hw;
                            int off = dc - pad;
                            int c_lo = std::max(0, -off), c_hi = std::min(W, W - off);
                            for (int r = 0; r < W; ++r) {
                                int sr = r + dr - pad;
                                if (sr < 0 || sr >= W) continue;
                                S* drow = plane + sr * W + off;
                                const S* srow = src + r * W;
                                for (int c = c_lo; c < c_hi; ++c) drow[c] += srow[c];
                            }
                        }
                    }
                }
            }
            b0 += bn;
        }
        return dx;
    }
};

// Per-channel batch normalization over batch x spatial positions. Running
// statistics use the biased variance and momentum-style updates; inference
// mode reads the frozen running statistics only.
template <typename S>
struct BatchNorm {
    int channels = 0, spatial = 1;
    Vec<S> gamma, beta, run_mean, run_var;
    Vec<S> g_gamma, g_beta;
    S eps = S(1e-5);
    S momentum = S(0.1);

    void init(int channels_, int spatial_) {
        channels = channels_;
        spatial = spatial_;
        gamma = Vec<S>::Ones(channels);
        beta = Vec<S>::Zero(channels);
        run_mean = Vec<S>::Zero(channels);
        run_var = Vec<S>::Ones(channels);
        g_gamma = Vec<S>::Zero(channels);
        g_beta = Vec<S>::Zero(channels);
    }

    struct Cache {
        Mat<S> xhat;
        Vec<S> inv_std;
    };

    Mat<S> forward_train(const Mat<S>& x, Cache& cache) {
        if (x.rows() != Eigen::Index(channels) * spatial)
            throw MathError("BatchNorm: feature size mismatch");
        const Eigen::Index n = x.cols();
        const S count = S(spatial) * S(n);
        Mat<S> y(x.rows(), n);
        cache.xhat.resize(x.rows(), n);
        cache.inv_std.resize(channels);
        for (int c = 0; c < channels; ++c) {
            auto xb = x.middleRows(Eigen::Index(c) * spatial, spatial);
            S mean = xb.sum() / count;
            S var = (xb.array() - mean).square().sum() / count;
            S inv = S(1) / std::sqrt(var + eps);
            cache.inv_std(c) = inv;
            auto xhb = cache.xhat.middleRows(Eigen::Index(c) * spatial, spatial);
            xhb = (xb.array() - mean).matrix() * inv;
            y.middleRows(Eigen::Index(c) * spatial, spatial) =
                (xhb.array() * gamma(c) + beta(c)).matrix();
            run_mean(c) = (S(1) - momentum) * run_mean(c) + momentum * mean;
            run_var(c) = (S(1) - momentum) * run_var(c) + momentum * var;
        }
        return y;
    }

    Mat<S> forward_infer(const Mat<S>& x) const {
        if (x.rows() != Eigen::Index(channels) * spatial)
            throw MathError("BatchNorm: feature size mismatch");
        Mat<S> y(x.rows(), x.cols());
        for (int c = 0; c < channels; ++c) {
            S inv = S(1) / std::sqrt(run_var(c) + eps);
            y.middleRows(Eigen::Index(c) * spatial, spatial) =
                ((x.middleRows(Eigen::Index(c) * spatial, spatial).array() - run_mean(c)) * inv *
                 gamma(c) + beta(c))
                    .matrix();
        }
        return y;
    }

    Mat<S> backward(const Cache& cache, const Mat<S>& dy) {
        const Eigen::Index n = dy.cols();
        const S count = S(spatial) * S(n);
        Mat<S> dx(dy.rows(), n);
        for (int c = 0; c < channels; ++c) {
            auto dyb = dy.middleRows(Eigen::Index(c) * spatial, spatial);
            auto xhb = cache.xhat.middleRows(Eigen::Index(c) * spatial, spatial);
            S sum_dy = dyb.sum();
            S sum_dy_xh = (dyb.array() * xhb.array()).sum();
            g_beta(c) += sum_dy;
            g_gamma(c) += sum_dy_xh;
            S k = gamma(c) * cache.inv_std(c);
            dx.middleRows(Eigen::Index(c) * spatial, spatial) =
                (k * (dyb.array() - sum_dy / count - xhb.array() * (sum_dy_xh / count))).matrix();
        }
        return dx;
    }
};

// Fully connected layer with bias; y = W x + b.
template <typename S>
struct Dense {
    Mat<S> w, gw;
    Vec<S> b, gb;

    void init(int in, int out, uint64_t seed) {
        double bound = 1.0 / std::sqrt(static_cast<double>(in));
        w.resize(out, in);
        b.resize(out);
        fill_uniform(w.data(), static_cast<size_t>(w.size()), bound, mix_seed(seed, 0));
        fill_uniform(b.data(), static_cast<size_t>(b.size()), bound, mix_seed(seed, 1));
        gw.setZero(out, in);
        gb.setZero(out);
    }

    Mat<S> forward(const Mat<S>& x) const {
        if (x.rows() != w.cols()) throw MathError("Dense: input feature size mismatch");
        return (w * x).colwise() + b;
    }

    Mat<S> backward(const Mat<S>& x, const Mat<S>& dy) {
        gw.noalias() += dy * x.transpose();
        gb.noalias() += dy.rowwise().sum();
        return w.transpose() * dy;
    }
};

template <typename S>
Mat<S> leaky_relu(const Mat<S>& x, S slope = S(0.01)) {
    return x.array().max(x.array() * slope).matrix();
}

template <typename S>
Mat<S> leaky_relu_backward(const Mat<S>& x, const Mat<S>& dy, S slope = S(0.01)) {
    return (x.array() > S(0)).select(dy, dy * slope);
}

// In-place x <- scale * x / ||x||; returns the pre-normalization norm, which
// the backward pass needs. ||x|| == 0 cannot be normalized.
template <typename S>
S normalize_forward(Eigen::Ref<Vec<S>> x, S scale) {
    S r = x.norm();
    if (!(r > S(0))) throw MathError("normalize_forward: zero-norm vector");
    x *= scale / r;
    return r;
}

// Gradient of the normalization, given the *output* y (= scale * xhat), the
// cached input norm r, and the upstream gradient g (replaced in place).
template <typename S>
void normalize_backward(const Eigen::Ref<const Vec<S>>& y, S scale, S r, Eigen::Ref<Vec<S>> g) {
    Vec<S> xhat = y / scale;
    S dot = g.dot(xhat);
    g = (scale / r) * (g - dot * xhat);
}

}  // namespace ddm::nn
