#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icc::nn {

/// Parameter or buffer: flat value storage with a matching gradient slab.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;
    std::vector<double> g;

    static Tensor make(std::vector<int> shape_in);
    int64_t size() const { return static_cast<int64_t>(v.size()); }
    void zero_grad();
};

/// Named view into a model tensor. Buffers (running statistics) are part
/// of the persisted state but receive no optimizer updates.
struct NamedTensor {
    std::string name;
    Tensor* tensor = nullptr;
    bool trainable = true;
};

/// Activations: batch of images, [B, C, H, W] row-major.
struct Batch4 {
    int b = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Batch4() = default;
    Batch4(int b_, int c_, int h_, int w_)
        : b(b_), c(c_), h(h_), w(w_),
          v(static_cast<size_t>(b_) * c_ * h_ * w_, 0.0) {}

    double& at(int bi, int ci, int y, int x) {
        return v[((static_cast<size_t>(bi) * c + ci) * h + y) * w + x];
    }
    double at(int bi, int ci, int y, int x) const {
        return v[((static_cast<size_t>(bi) * c + ci) * h + y) * w + x];
    }
};

/// Activations: batch of feature rows, [B, N] row-major.
struct Batch2 {
    int b = 0, n = 0;
    std::vector<double> v;

    Batch2() = default;
    Batch2(int b_, int n_) : b(b_), n(n_), v(static_cast<size_t>(b_) * n_, 0.0) {}

    double& at(int bi, int i) { return v[static_cast<size_t>(bi) * n + i]; }
    double at(int bi, int i) const { return v[static_cast<size_t>(bi) * n + i]; }
};

} // namespace icc::nn
