#include "ddmodem/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace ddm {

void TrainConfig::validate(size_t dataset_size) const {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("TrainConfig: Adam betas must lie in [0, 1)");
    if (!(lr > 0.0)) throw ConfigError("TrainConfig: learning rate must be positive");
    if (!(adam_eps > 0.0)) throw ConfigError("TrainConfig: Adam epsilon must be positive");
    if (epochs <= 0) throw ConfigError("TrainConfig: epochs must be positive");
    if (batch_size <= 0) throw ConfigError("TrainConfig: batch size must be positive");
    if (static_cast<size_t>(batch_size) > dataset_size)
        throw ConfigError("TrainConfig: batch size exceeds dataset size");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("TrainConfig: alpha must lie strictly between 0 and 1");
    if (checkpoint_every < 0) throw ConfigError("TrainConfig: checkpoint interval must be >= 0");
    if (checkpoint_every > 0 && checkpoint_prefix.empty())
        throw ConfigError("TrainConfig: checkpointing needs a file prefix");
}

Adam::Adam(std::vector<nn::ParamRef<float>> refs, const TrainConfig& cfg)
    : refs_(std::move(refs)), beta1_(cfg.beta1), beta2_(cfg.beta2), lr_(cfg.lr),
      eps_(cfg.adam_eps) {
    m_.reserve(refs_.size());
    v_.reserve(refs_.size());
    for (auto& r : refs_) {
        m_.push_back(Eigen::ArrayXf::Zero(static_cast<Eigen::Index>(r.count)));
        v_.push_back(Eigen::ArrayXf::Zero(static_cast<Eigen::Index>(r.count)));
    }
}

void Adam::step() {
    ++t_;
    const float bc1 = static_cast<float>(1.0 - std::pow(beta1_, static_cast<double>(t_)));
    const float bc2 = static_cast<float>(1.0 - std::pow(beta2_, static_cast<double>(t_)));
    const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
    const float lr = static_cast<float>(lr_), eps = static_cast<float>(eps_);
    for (size_t i = 0; i < refs_.size(); ++i) {
        auto n = static_cast<Eigen::Index>(refs_[i].count);
        Eigen::Map<Eigen::ArrayXf> g(refs_[i].grad, n);
        Eigen::Map<Eigen::ArrayXf> p(refs_[i].value, n);
        m_[i] = b1 * m_[i] + (1.0f - b1) * g;
        v_[i] = b2 * v_[i] + (1.0f - b2) * g.square();
        p -= lr * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + eps);
    }
}

double clip_gradients(const std::vector<nn::ParamRef<float>>& refs, double max_norm) {
    double ss = 0.0;
    for (auto& r : refs) {
        Eigen::Map<const Eigen::VectorXf> g(r.grad, static_cast<Eigen::Index>(r.count));
        ss += static_cast<double>(g.squaredNorm());
    }
    double norm = std::sqrt(ss);
    if (max_norm > 0.0 && norm > max_norm) {
        const float s = static_cast<float>(max_norm / norm);
        for (auto& r : refs) {
            Eigen::Map<Eigen::VectorXf> g(r.grad, static_cast<Eigen::Index>(r.count));
            g *= s;
        }
    }
    return norm;
}

std::vector<size_t> shuffled_indices(size_t n, uint64_t seed) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    uint64_t state = seed;
    for (size_t i = n; i > 1; --i) {
        // Bounded draw via 128-bit multiply; bias is negligible for n << 2^64
        // and the mapping is fixed, which is what determinism needs.
        state = splitmix64(state);
        size_t j = static_cast<size_t>((static_cast<unsigned __int128>(state) * i) >> 64);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

PairedDataset pair_dataset(const Dataset& ds, uint64_t seed) {
    const size_t n = ds.size();
    if (n < 2) throw ArgError("pair_dataset: need at least 2 samples");
    auto order = shuffled_indices(n, mix_seed(seed, SeedTag::pairing));
    PairedDataset out;
    out.spec = ds.spec;
    out.pairs.reserve((n + 1) / 2);
    for (size_t i = 0; i + 1 < n; i += 2)
        out.pairs.emplace_back(ds.samples[order[i]], ds.samples[order[i + 1]]);
    if (n % 2 == 1) {
        uint64_t draw = splitmix64(mix_seed(seed, SeedTag::pairing, 1));
        size_t j = static_cast<size_t>((static_cast<unsigned __int128>(draw) * (n - 1)) >> 64);
        out.pairs.emplace_back(ds.samples[order[n - 1]], ds.samples[order[j]]);
    }
    return out;
}

namespace {

struct MetricsLog {
    std::ofstream f;

    explicit MetricsLog(const std::string& path) {
        if (path.empty()) return;
        f.open(path);
        if (!f) throw IoError("cannot open metrics log: " + path);
        f << "# epoch mean_loss rate_term dist_term wall_s\n";
    }

    void row(const EpochMetrics& m) {
        if (!f.is_open()) return;
        f << m.epoch << ' ' << std::setprecision(10) << m.loss << ' ' << m.rate_term << ' '
          << m.dist_term << ' ' << std::setprecision(4) << m.wall_s << '\n';
        f.flush();
    }
};

void maybe_checkpoint(ModNetParams& params, const TrainConfig& cfg, int epoch) {
    if (cfg.checkpoint_every <= 0) return;
    if ((epoch + 1) % cfg.checkpoint_every != 0) return;
    std::string path = cfg.checkpoint_prefix + "-e" + std::to_string(epoch + 1) + ".mnet";
    save_params(path, params, Stamp{0, cfg.seed});
}

// Precomputed per-sample network input and 32-bit channel matrix.
struct SampleCache {
    nn::Mat<float> inputs;         // 2*ML*ML x n
    std::vector<CMat<float>> H;    // n matrices, ML x ML

    SampleCache(const std::vector<ChannelRealization>& samples, int side) {
        const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
        inputs.resize(Eigen::Index(2) * side * side, n);
        H.reserve(samples.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::MatrixXcd Hd = build_channel_matrix(samples[i]);
            if (Hd.rows() != side)
                throw MathError("training: channel matrix does not match network input side");
            inputs.col(i) = modnet_input<float>(Hd);
            H.push_back(Hd.cast<cxf>());
        }
    }
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

[[noreturn]] void abort_nonfinite(const char* phase, int epoch, int batch, double loss,
                                  double rate, double dist, double gnorm) {
    throw TrainError(std::string(phase) + ": non-finite loss at epoch " +
                     std::to_string(epoch + 1) + ", batch " + std::to_string(batch + 1) +
                     " (loss=" + std::to_string(loss) + ", rate_term=" + std::to_string(rate) +
                     ", dist_term=" + std::to_string(dist) +
                     ", grad_norm=" + std::to_string(gnorm) + ")");
}

// A numerically collapsed batch (overflow to inf, NaN activations, vanished
// normalization input) surfaces as a MathError deep in the layer stack; report
// it as a training failure with its location instead.
[[noreturn]] void abort_math(const char* phase, int epoch, int batch, const MathError& e) {
    throw TrainError(std::string(phase) + ": numerical failure at epoch " +
                     std::to_string(epoch + 1) + ", batch " + std::to_string(batch + 1) + ": " +
                     e.what());
}

}  // namespace

TrainResult train_phase1(ModNetParams& params, const Dataset& train_set, const TrainConfig& cfg) {
    cfg.validate(train_set.size());
    const int side = params.arch.input_side;
    if (train_set.spec.frame_len() != side)
        throw ConfigError("train_phase1: dataset frame length does not match network");
    const float rho = static_cast<float>(SnrSpec::from_db(cfg.train_snr_db).rho());
    const int M = params.arch.num_subcarriers;

    SampleCache cache(train_set.samples, side);
    Adam adam(params.trainable(), cfg);
    MetricsLog log(cfg.metrics_path);
    TrainResult result;

    const size_t n = train_set.size();
    const auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = shuffled_indices(
            n, mix_seed(cfg.seed, SeedTag::phase1_order, static_cast<uint64_t>(epoch)));
        double epoch_loss = 0.0;
        int batches = 0;
        for (size_t b0 = 0; b0 < n; b0 += static_cast<size_t>(cfg.batch_size), ++batches) {
            const auto bn = static_cast<Eigen::Index>(
                std::min<size_t>(cfg.batch_size, n - b0));
            nn::Mat<float> x(cache.inputs.rows(), bn);
            for (Eigen::Index j = 0; j < bn; ++j) x.col(j) = cache.inputs.col(order[b0 + j]);

            try {
                ModNetCache<float> fwd;
                nn::Mat<float> out = params.forward_batch(x, true, &fwd);
                nn::Mat<float> dout(out.rows(), bn);
                double batch_loss = 0.0;
                for (Eigen::Index j = 0; j < bn; ++j) {
                    CMat<float> Phi, PsiH;
                    split_output<float>(out.col(j).data(), M, side, Phi, PsiH);
                    ModemGradT<float> g;
                    batch_loss += rate_objective_modem<float>(Phi, PsiH, cache.H[order[b0 + j]],
                                                              rho, &g);
                    pack_modem_grad<float>(g, dout.col(j).data());
                }
                batch_loss /= static_cast<double>(bn);
                dout *= 1.0f / static_cast<float>(bn);

                params.zero_grads();
                params.backward_batch(fwd, dout);
                auto refs = params.trainable();
                double gnorm = clip_gradients(refs, cfg.grad_clip);
                if (!std::isfinite(batch_loss) || !std::isfinite(gnorm))
                    abort_nonfinite("phase 1", epoch, batches, batch_loss, batch_loss, 0.0,
                                    gnorm);
                adam.step();
                epoch_loss += batch_loss;
            } catch (const MathError& e) {
                abort_math("phase 1", epoch, batches, e);
            }
        }
        EpochMetrics m;
        m.epoch = epoch + 1;
        m.loss = epoch_loss / batches;
        m.rate_term = m.loss;
        m.dist_term = 0.0;
        m.wall_s = elapsed_s(t0);
        result.history.push_back(m);
        log.row(m);
        maybe_checkpoint(params, cfg, epoch);
    }
    return result;
}

TrainResult train_phase2(ModNetParams& params, const PairedDataset& pairs,
                         const TrainConfig& cfg) {
    cfg.validate(pairs.size());
    const int side = params.arch.input_side;
    if (pairs.spec.frame_len() != side)
        throw ConfigError("train_phase2: dataset frame length does not match network");
    const float rho = static_cast<float>(SnrSpec::from_db(cfg.train_snr_db).rho());
    const float alpha = static_cast<float>(cfg.alpha);
    const int M = params.arch.num_subcarriers;

    std::vector<ChannelRealization> first, second;
    first.reserve(pairs.size());
    second.reserve(pairs.size());
    for (auto& p : pairs.pairs) {
        first.push_back(p.first);
        second.push_back(p.second);
    }
    SampleCache cache_a(first, side), cache_b(second, side);
    Adam adam(params.trainable(), cfg);
    MetricsLog log(cfg.metrics_path);
    TrainResult result;

    const size_t n = pairs.size();
    const auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = shuffled_indices(
            n, mix_seed(cfg.seed, SeedTag::phase2_order, static_cast<uint64_t>(epoch)));
        double epoch_loss = 0.0, epoch_rate = 0.0, epoch_dist = 0.0;
        int batches = 0;
        for (size_t b0 = 0; b0 < n; b0 += static_cast<size_t>(cfg.batch_size), ++batches) {
            const auto bn = static_cast<Eigen::Index>(
                std::min<size_t>(cfg.batch_size, n - b0));
            nn::Mat<float> xa(cache_a.inputs.rows(), bn), xb(cache_b.inputs.rows(), bn);
            for (Eigen::Index j = 0; j < bn; ++j) {
                xa.col(j) = cache_a.inputs.col(order[b0 + j]);
                xb.col(j) = cache_b.inputs.col(order[b0 + j]);
            }

            try {
                // Two forward passes through the one shared parameter set.
                ModNetCache<float> fwd_a, fwd_b;
                nn::Mat<float> out_a = params.forward_batch(xa, true, &fwd_a);
                nn::Mat<float> out_b = params.forward_batch(xb, true, &fwd_b);
                nn::Mat<float> dout_a(out_a.rows(), bn), dout_b(out_b.rows(), bn);
                double batch_loss = 0.0, batch_rate = 0.0, batch_dist = 0.0;
                for (Eigen::Index j = 0; j < bn; ++j) {
                    CMat<float> Phi1, PsiH1, Phi2, PsiH2;
                    split_output<float>(out_a.col(j).data(), M, side, Phi1, PsiH1);
                    split_output<float>(out_b.col(j).data(), M, side, Phi2, PsiH2);
                    ModemGradT<float> g1, g2;
                    float rate = 0.0f, dist = 0.0f;
                    batch_loss += siamese_objective<float>(
                        Phi1, PsiH1, cache_a.H[order[b0 + j]], Phi2, PsiH2,
                        cache_b.H[order[b0 + j]], rho, alpha, &g1, &g2, &rate, &dist);
                    batch_rate += rate;
                    batch_dist += dist;
                    pack_modem_grad<float>(g1, dout_a.col(j).data());
                    pack_modem_grad<float>(g2, dout_b.col(j).data());
                }
                batch_loss /= static_cast<double>(bn);
                batch_rate /= static_cast<double>(bn);
                batch_dist /= static_cast<double>(bn);
                dout_a *= 1.0f / static_cast<float>(bn);
                dout_b *= 1.0f / static_cast<float>(bn);

                params.zero_grads();
                params.backward_batch(fwd_a, dout_a);
                params.backward_batch(fwd_b, dout_b);
                auto refs = params.trainable();
                double gnorm = clip_gradients(refs, cfg.grad_clip);
                if (!std::isfinite(batch_loss) || !std::isfinite(gnorm))
                    abort_nonfinite("phase 2", epoch, batches, batch_loss, batch_rate,
                                    batch_dist, gnorm);
                adam.step();
                epoch_loss += batch_loss;
                epoch_rate += batch_rate;
                epoch_dist += batch_dist;
            } catch (const MathError& e) {
                abort_math("phase 2", epoch, batches, e);
            }
        }
        EpochMetrics m;
        m.epoch = epoch + 1;
        m.loss = epoch_loss / batches;
        m.rate_term = epoch_rate / batches;
        m.dist_term = epoch_dist / batches;
        m.wall_s = elapsed_s(t0);
        result.history.push_back(m);
        log.row(m);
        maybe_checkpoint(params, cfg, epoch);
    }
    return result;
}

Modem distill_phase3(ModNetParams& params, const Dataset& validation_set) {
    if (validation_set.size() == 0)
        throw ArgError("distill_phase3: empty validation set");
    nn::Mat<float> outs = inference_outputs(params, validation_set);
    const Eigen::Index n = outs.cols();
    nn::Vec<float> median(outs.rows());
    std::vector<float> row(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < outs.rows(); ++i) {
        for (Eigen::Index j = 0; j < n; ++j) row[static_cast<size_t>(j)] = outs(i, j);
        auto mid = row.begin() + n / 2;
        std::nth_element(row.begin(), mid, row.end());
        if (n % 2 == 1) {
            median(i) = *mid;
        } else {
            float hi = *mid;
            float lo = *std::max_element(row.begin(), mid);
            median(i) = (lo + hi) / 2.0f;
        }
    }
    CMat<float> Phi, PsiH;
    split_output<float>(median.data(), params.arch.num_subcarriers, params.arch.input_side,
                        Phi, PsiH);
    Modem m;
    m.mod = Phi.cast<cxd>();
    m.demod = PsiH.cast<cxd>();
    normalize_modem(m);
    return m;
}

double mean_loss1_batchstats(ModNetParams params, const Dataset& ds, double snr_db,
                             Eigen::Index batch) {
    if (ds.size() == 0) throw ArgError("mean_loss1_batchstats: empty dataset");
    const int side = params.arch.input_side;
    const int M = params.arch.num_subcarriers;
    const float rho = static_cast<float>(SnrSpec::from_db(snr_db).rho());
    SampleCache cache(ds.samples, side);
    const Eigen::Index n = static_cast<Eigen::Index>(ds.size());
    double total = 0.0;
    for (Eigen::Index b0 = 0; b0 < n;) {
        Eigen::Index bn = std::min(batch, n - b0);
        nn::Mat<float> x = cache.inputs.middleCols(b0, bn);
        nn::Mat<float> out = params.forward_batch(x, true, nullptr);
        for (Eigen::Index j = 0; j < bn; ++j) {
            CMat<float> Phi, PsiH;
            split_output<float>(out.col(j).data(), M, side, Phi, PsiH);
            total += rate_objective_modem<float>(Phi, PsiH, cache.H[b0 + j], rho);
        }
        b0 += bn;
    }
    return total / static_cast<double>(n);
}

double mean_pair_distance(ModNetParams& params, const PairedDataset& pairs) {
    if (pairs.size() == 0) throw ArgError("mean_pair_distance: no pairs");
    double total = 0.0;
    for (auto& p : pairs.pairs) {
        nn::Mat<float> xa = modnet_input<float>(build_channel_matrix(p.first));
        nn::Mat<float> xb = modnet_input<float>(build_channel_matrix(p.second));
        nn::Mat<float> oa = params.forward_batch(xa, false, nullptr);
        nn::Mat<float> ob = params.forward_batch(xb, false, nullptr);
        total += (oa - ob).cast<double>().squaredNorm();
    }
    return total / static_cast<double>(pairs.size());
}

}  // namespace ddm
