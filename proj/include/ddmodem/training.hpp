#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ddmodem/modnet.hpp"

namespace ddm {

struct TrainConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lr = 1e-3;
    double adam_eps = 1e-8;
    int epochs = 500;
    int batch_size = 200;
    double train_snr_db = 20.0;
    double alpha = 0.005;      // rate-vs-distance weight of the phase-II loss
    double grad_clip = 10.0;   // global norm; <= 0 disables
    uint64_t seed = 0;
    int checkpoint_every = 0;            // epochs between checkpoints; 0 = off
    std::string checkpoint_prefix;       // file prefix for checkpoints
    std::string metrics_path;            // per-epoch plain-text log; "" = off

    void validate(size_t dataset_size) const;
};

struct EpochMetrics {
    int epoch = 0;
    double loss = 0.0;       // mean batch loss
    double rate_term = 0.0;  // rate component (equals loss in phase I)
    double dist_term = 0.0;  // distance component (0 in phase I)
    double wall_s = 0.0;
};

struct TrainResult {
    std::vector<EpochMetrics> history;
};

// Adam over the float parameter set; one optimizer instance per phase.
class Adam {
  public:
    Adam(std::vector<nn::ParamRef<float>> refs, const TrainConfig& cfg);
    void step();
    int64_t steps() const { return t_; }

  private:
    std::vector<nn::ParamRef<float>> refs_;
    std::vector<Eigen::ArrayXf> m_, v_;
    double beta1_, beta2_, lr_, eps_;
    int64_t t_ = 0;
};

// Global gradient norm; scales every gradient down when it exceeds max_norm
// (no-op for max_norm <= 0). Returns the pre-clip norm.
double clip_gradients(const std::vector<nn::ParamRef<float>>& refs, double max_norm);

// Deterministic Fisher-Yates permutation of 0..n-1 (independent of any
// standard-library distribution implementation).
std::vector<size_t> shuffled_indices(size_t n, uint64_t seed);

struct PairedDataset {
    ChannelSpec spec;
    std::vector<std::pair<ChannelRealization, ChannelRealization>> pairs;

    size_t size() const { return pairs.size(); }
};

// Random perfect matching of the dataset; with an odd count the leftover
// sample is paired with a uniformly drawn earlier one. Members of a pair are
// always distinct samples.
PairedDataset pair_dataset(const Dataset& ds, uint64_t seed);

TrainResult train_phase1(ModNetParams& params, const Dataset& train_set, const TrainConfig& cfg);
TrainResult train_phase2(ModNetParams& params, const PairedDataset& pairs, const TrainConfig& cfg);
Modem distill_phase3(ModNetParams& params, const Dataset& validation_set);

// Mean rate objective over a dataset using batch statistics (the quantity
// phase I minimizes). Takes params by value: evaluating with batch
// statistics touches running stats, and the caller's network must not move.
double mean_loss1_batchstats(ModNetParams params, const Dataset& ds, double snr_db,
                             Eigen::Index batch = 200);

// Mean ||Phi1-Phi2||_F^2 + ||Psi1^H-Psi2^H||_F^2 over pairs, inference mode.
double mean_pair_distance(ModNetParams& params, const PairedDataset& pairs);

}  // namespace ddm
