#include "icc/nn/tensor.hpp"

#include <stdexcept>

namespace icc::nn {

Tensor Tensor::make(std::vector<int> shape_in) {
    int64_t sz = 1;
    for (int d : shape_in) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
        sz *= d;
    }
    Tensor t;
    t.shape = std::move(shape_in);
    t.v.assign(static_cast<size_t>(sz), 0.0);
    t.g.assign(static_cast<size_t>(sz), 0.0);
    return t;
}

void Tensor::zero_grad() {
    for (auto& x : g) x = 0.0;
}

} // namespace icc::nn
