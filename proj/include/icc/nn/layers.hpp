#pragma once

#include "icc/nn/tensor.hpp"
#include "icc/rng.hpp"

#include <optional>
#include <vector>

namespace icc::nn {

/// Every layer offers the same three entry points: forward(x) runs the
/// training path and caches whatever backward(g) needs; backward also
/// accumulates parameter gradients. infer(x) is const, allocation-local
/// and safe to call concurrently from evaluation workers.

/// Per-channel spatial convolution, stride 1, zero padding that preserves
/// the spatial size. No bias; the pointwise stage that follows carries it.
class DepthwiseConv2d {
public:
    DepthwiseConv2d(int channels, int ksize);
    void init(RngStream& s);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    Batch4 forward(const Batch4& x);
    Batch4 backward(const Batch4& gy);
    Batch4 infer(const Batch4& x) const;

private:
    Batch4 run(const Batch4& x) const;
    int channels_, ksize_, pad_;
    Tensor w_;  // [C, k, k]
    Batch4 x_;
};

/// Standard cross-correlation with bias. Output spatial size is
/// ceil(in / stride); padding follows the usual "same" split with the
/// extra cell on the bottom/right.
class Conv2d {
public:
    Conv2d(int cin, int cout, int ksize, int stride);
    void init(RngStream& s);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    static int out_size(int in, int stride) { return (in + stride - 1) / stride; }

    Batch4 forward(const Batch4& x);
    Batch4 backward(const Batch4& gy);
    Batch4 infer(const Batch4& x) const;

private:
    Batch4 run(const Batch4& x) const;
    void pads(int in_h, int in_w, int& pt, int& pl) const;
    int cin_, cout_, ksize_, stride_;
    Tensor w_;  // [Cout, Cin, k, k]
    Tensor b_;  // [Cout]
    Batch4 x_;
};

class Elu4 {
public:
    Batch4 forward(const Batch4& x);
    Batch4 backward(const Batch4& gy) const;
    static Batch4 infer(const Batch4& x);

private:
    Batch4 y_;
};

class Elu2 {
public:
    Batch2 forward(const Batch2& x);
    Batch2 backward(const Batch2& gy) const;
    static Batch2 infer(const Batch2& x);

private:
    Batch2 y_;
};

class BatchNorm2d {
public:
    explicit BatchNorm2d(int channels, double momentum = 0.99, double eps = 1e-5);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    Batch4 forward(const Batch4& x);
    Batch4 backward(const Batch4& gy);
    Batch4 infer(const Batch4& x) const;

private:
    int channels_;
    double momentum_, eps_;
    Tensor gamma_, beta_;
    Tensor run_mean_, run_var_;
    Batch4 xhat_;
    std::vector<double> invstd_;
};

class BatchNorm1d {
public:
    explicit BatchNorm1d(int features, double momentum = 0.99, double eps = 1e-5);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    Batch2 forward(const Batch2& x);
    Batch2 backward(const Batch2& gy);
    Batch2 infer(const Batch2& x) const;

private:
    int features_;
    double momentum_, eps_;
    Tensor gamma_, beta_;
    Tensor run_mean_, run_var_;
    Batch2 xhat_;
    std::vector<double> invstd_;
};

class GlobalAvgPool {
public:
    Batch2 forward(const Batch4& x);
    Batch4 backward(const Batch2& gy) const;
    static Batch2 infer(const Batch4& x);

private:
    int h_ = 0, w_ = 0, b_ = 0, c_ = 0;
};

/// Scales the whole batch so the mean per-symbol power (pairs of reals
/// form one complex symbol) is exactly one. Tracks a running scale for
/// inference, where the layer is a fixed division.
class PowerNorm {
public:
    explicit PowerNorm(double momentum = 0.99);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    Batch2 forward(const Batch2& x);
    Batch2 backward(const Batch2& gy) const;
    Batch2 infer(const Batch2& x) const;

private:
    double momentum_;
    Tensor run_scale_;  // [1]
    Batch2 y_;
    double s_ = 1.0;
};

class Linear {
public:
    Linear(int in, int out, bool bias = true);
    void init(RngStream& s);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    Batch2 forward(const Batch2& x);
    Batch2 backward(const Batch2& gy);
    Batch2 infer(const Batch2& x) const;

private:
    Batch2 run(const Batch2& x) const;
    int in_, out_;
    bool bias_;
    Tensor w_;  // [out, in]
    Tensor b_;  // [out]
    Batch2 x_;
};

/// Three parallel depthwise-separable towers (one per kernel size), ELU,
/// channel concatenation, two trailing convolutions (the second one
/// strided) and batch normalization.
class InceptionBlock {
public:
    InceptionBlock(int cin, int cout, const std::vector<int>& kernels);
    void init(RngStream& s);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    Batch4 forward(const Batch4& x);
    Batch4 backward(const Batch4& gy);
    Batch4 infer(const Batch4& x) const;

private:
    int cin_, cout_;
    std::vector<DepthwiseConv2d> dw_;
    std::vector<Conv2d> pw_;
    std::vector<Elu4> act_;
    Conv2d conv1_, conv2_;
    Elu4 act1_, act2_;
    BatchNorm2d bn_;
};

/// Three linear layers with ELU, a residual path joining the block input
/// to the third layer's output (learned projection when the widths
/// differ), then batch normalization.
class ResidualBlock {
public:
    ResidualBlock(int in, int out);
    void init(RngStream& s);
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);

    Batch2 forward(const Batch2& x);
    Batch2 backward(const Batch2& gy);
    Batch2 infer(const Batch2& x) const;

private:
    int in_, out_;
    Linear l1_, l2_, l3_;
    std::optional<Linear> proj_;
    Elu2 a1_, a2_, a3_;
    BatchNorm1d bn_;
};

} // namespace icc::nn
