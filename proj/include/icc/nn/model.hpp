#pragma once

#include "icc/complex_matrix.hpp"
#include "icc/nn/layers.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace icc::nn {

/// Network shape. One encoder is shared by all sensors; its input is a
/// sample covariance matrix split into real and imaginary planes, its
/// output a block of d complex symbols stored as interleaved re/im pairs.
/// The decoder maps the aggregated symbol block to a probability.
struct ArchConfig {
    int m = 28;                                    // covariance size
    std::vector<int> channels{4, 8, 16};           // inception stages
    std::vector<int> kernels{3, 5, 7};             // tower kernel sizes
    std::vector<int> widths{32, 64, 128, 64, 32, 16};  // decoder stages
    int d = 8;                                     // symbols per sensor

    void validate() const;
    std::string to_json_string() const;
    static ArchConfig from_json_string(const std::string& text);
};

class Model {
public:
    explicit Model(ArchConfig cfg);

    const ArchConfig& arch() const { return cfg_; }
    void init(RngStream& s);

    /// Stable traversal: encoder blocks, encoder head, power norm,
    /// decoder blocks, decoder head. Checkpoints and the optimizer both
    /// rely on this order.
    std::vector<NamedTensor> named();
    int64_t param_count();

    Batch2 encode_train(const Batch4& x);
    Batch4 encode_backward(const Batch2& gy);
    Batch2 encode_infer(const Batch4& x) const;

    Batch2 decode_train(const Batch2& z);
    Batch2 decode_backward(const Batch2& gy);
    Batch2 decode_infer(const Batch2& z) const;

    /// Stack per-sensor covariance matrices into encoder input planes
    /// (channel 0 real part, channel 1 imaginary part).
    static Batch4 covariance_input(const std::vector<ComplexMatrix>& r);
    static void covariance_input_into(const ComplexMatrix& r, Batch4& dst, int slot);

private:
    ArchConfig cfg_;
    std::vector<InceptionBlock> enc_;
    GlobalAvgPool gap_;
    Linear enc_fc_;
    PowerNorm pnorm_;
    std::vector<ResidualBlock> dec_;
    Linear dec_fc_;
    Batch2 prob_;  // cached sigmoid output for the backward pass
};

} // namespace icc::nn
