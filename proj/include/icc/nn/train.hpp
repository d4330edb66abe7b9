#pragma once

#include "icc/airmodel.hpp"
#include "icc/nn/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace icc::nn {

/// Stream-id blocks, one purpose per block so no draw is ever shared:
/// dataset slots, weight init, per-epoch shuffles, per-batch channels.
constexpr uint64_t kDatasetStreamBase = 1ull << 40;
constexpr uint64_t kInitStreamId = 2ull << 40;
constexpr uint64_t kShuffleStreamBase = 3ull << 40;
constexpr uint64_t kChannelStreamBase = 4ull << 40;

struct TrainConfig {
    int epochs = 300;
    int batch_size = 512;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    long long dataset_size = 10240;
    double train_snr_sense_db = -15.0;
    double train_snr_report_db = -10.0;
    bool aircomp = true;  // false trains for orthogonal reporting (averaged at the FC)
    uint64_t seed = 1;

    void validate() const;
    std::string to_json_string() const;
    static TrainConfig from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static TrainConfig load(const std::string& path);
};

/// Mean binary cross entropy (natural log), probabilities clipped to
/// [1e-7, 1 - 1e-7].
double bce_loss(const std::vector<double>& probs, const std::vector<int>& labels);

/// One optimization-ready pass over a mini batch: encode every sensor's
/// covariance with the shared encoder, push the symbol blocks through
/// the reporting channel (aggregating, or orthogonal with the receiver
/// averaging the K vectors), decode, and backpropagate the
/// cross-entropy loss into the model's gradient slabs. The realized
/// channel draws act as constants in the reverse pass and the additive
/// receiver noise merely shifts the aggregate, so both modes share the
/// conj(gain)/K adjoint. Returns the batch loss.
double forward_backward(Model& model, const std::vector<const CovarianceSample*>& batch,
                        const ScenarioConfig& cfg, RngStream& channel_stream,
                        bool aircomp = true);

struct TrainResult {
    std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Generates dataset_size labeled slots (labels equiprobable) at the
/// training SNRs, then runs shuffled mini-batch Adam. Fresh reporting
/// channel realizations are drawn for every batch. Single-threaded and
/// bitwise reproducible for a fixed seed. on_epoch, when set, is called
/// after each epoch with (epoch index, mean loss).
TrainResult train(Model& model, const TrainConfig& tcfg, const ScenarioConfig& scfg,
                  const std::function<void(int, double)>& on_epoch = {});

} // namespace icc::nn
