#include "icc/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace icc::nn {

namespace {

double uniform_sym(RngStream& s, double limit) { return (2.0 * s.uniform() - 1.0) * limit; }

void he_init(Tensor& w, int fan_in, RngStream& s) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& x : w.v) x = uniform_sym(s, limit);
}

} // namespace

// ---------------------------------------------------------------- depthwise

DepthwiseConv2d::DepthwiseConv2d(int channels, int ksize)
    : channels_(channels), ksize_(ksize), pad_((ksize - 1) / 2) {
    if (channels < 1) throw std::invalid_argument("DepthwiseConv2d: bad channel count");
    if (ksize < 1 || ksize % 2 == 0)
        throw std::invalid_argument("DepthwiseConv2d: kernel size must be odd");
    w_ = Tensor::make({channels, ksize, ksize});
}

void DepthwiseConv2d::init(RngStream& s) { he_init(w_, ksize_ * ksize_, s); }

void DepthwiseConv2d::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    out.push_back({prefix + ".w", &w_, true});
}

Batch4 DepthwiseConv2d::run(const Batch4& x) const {
    if (x.c != channels_) throw std::invalid_argument("DepthwiseConv2d: channel mismatch");
    Batch4 y(x.b, x.c, x.h, x.w);
    const int k = ksize_, p = pad_;
    for (int bi = 0; bi < x.b; ++bi) {
        for (int ci = 0; ci < x.c; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const double wv = w_.v[(static_cast<size_t>(ci) * k + ky) * k + kx];
                    const int y0 = std::max(0, p - ky);
                    const int y1 = std::min(x.h - 1, x.h - 1 + p - ky);
                    const int x0 = std::max(0, p - kx);
                    const int x1 = std::min(x.w - 1, x.w - 1 + p - kx);
                    for (int yy = y0; yy <= y1; ++yy) {
                        const int iy = yy - p + ky;
                        const double* in_row = &x.v[((static_cast<size_t>(bi) * x.c + ci) * x.h + iy) * x.w];
                        double* out_row = &y.v[((static_cast<size_t>(bi) * x.c + ci) * x.h + yy) * x.w];
                        const int off = kx - p;
                        for (int xx = x0; xx <= x1; ++xx) out_row[xx] += wv * in_row[xx + off];
                    }
                }
            }
        }
    }
    return y;
}

Batch4 DepthwiseConv2d::forward(const Batch4& x) {
    x_ = x;
    return run(x);
}

Batch4 DepthwiseConv2d::infer(const Batch4& x) const { return run(x); }

Batch4 DepthwiseConv2d::backward(const Batch4& gy) {
    const Batch4& x = x_;
    Batch4 gx(x.b, x.c, x.h, x.w);
    const int k = ksize_, p = pad_;
    for (int bi = 0; bi < x.b; ++bi) {
        for (int ci = 0; ci < x.c; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    double acc = 0.0;
                    const int y0 = std::max(0, p - ky);
                    const int y1 = std::min(x.h - 1, x.h - 1 + p - ky);
                    const int x0 = std::max(0, p - kx);
                    const int x1 = std::min(x.w - 1, x.w - 1 + p - kx);
                    const double wv = w_.v[(static_cast<size_t>(ci) * k + ky) * k + kx];
                    for (int yy = y0; yy <= y1; ++yy) {
                        const int iy = yy - p + ky;
                        const double* in_row = &x.v[((static_cast<size_t>(bi) * x.c + ci) * x.h + iy) * x.w];
                        double* gin_row = &gx.v[((static_cast<size_t>(bi) * x.c + ci) * x.h + iy) * x.w];
                        const double* g_row = &gy.v[((static_cast<size_t>(bi) * x.c + ci) * x.h + yy) * x.w];
                        const int off = kx - p;
                        for (int xx = x0; xx <= x1; ++xx) {
                            acc += g_row[xx] * in_row[xx + off];
                            gin_row[xx + off] += wv * g_row[xx];
                        }
                    }
                    w_.g[(static_cast<size_t>(ci) * k + ky) * k + kx] += acc;
                }
            }
        }
    }
    return gx;
}

// --------------------------------------------------------------------- conv

Conv2d::Conv2d(int cin, int cout, int ksize, int stride)
    : cin_(cin), cout_(cout), ksize_(ksize), stride_(stride) {
    if (cin < 1 || cout < 1) throw std::invalid_argument("Conv2d: bad channel count");
    if (ksize < 1) throw std::invalid_argument("Conv2d: bad kernel size");
    if (stride < 1) throw std::invalid_argument("Conv2d: bad stride");
    w_ = Tensor::make({cout, cin, ksize, ksize});
    b_ = Tensor::make({cout});
}

void Conv2d::init(RngStream& s) {
    he_init(w_, cin_ * ksize_ * ksize_, s);
    for (auto& x : b_.v) x = 0.0;
}

void Conv2d::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    out.push_back({prefix + ".w", &w_, true});
    out.push_back({prefix + ".b", &b_, true});
}

void Conv2d::pads(int in_h, int in_w, int& pt, int& pl) const {
    const int oh = out_size(in_h, stride_), ow = out_size(in_w, stride_);
    const int th = std::max((oh - 1) * stride_ + ksize_ - in_h, 0);
    const int tw = std::max((ow - 1) * stride_ + ksize_ - in_w, 0);
    pt = th / 2;
    pl = tw / 2;
}

Batch4 Conv2d::run(const Batch4& x) const {
    if (x.c != cin_) throw std::invalid_argument("Conv2d: channel mismatch");
    const int oh = out_size(x.h, stride_), ow = out_size(x.w, stride_);
    int pt, pl;
    pads(x.h, x.w, pt, pl);
    Batch4 y(x.b, cout_, oh, ow);
    const int k = ksize_, s = stride_;
    for (int bi = 0; bi < x.b; ++bi) {
        for (int co = 0; co < cout_; ++co) {
            double* out_base = &y.v[(static_cast<size_t>(bi) * cout_ + co) * oh * ow];
            const double bias = b_.v[static_cast<size_t>(co)];
            for (int i = 0; i < oh * ow; ++i) out_base[i] = bias;
            for (int ci = 0; ci < cin_; ++ci) {
                const double* w_base =
                    &w_.v[(static_cast<size_t>(co) * cin_ + ci) * k * k];
                const double* in_base =
                    &x.v[(static_cast<size_t>(bi) * cin_ + ci) * x.h * x.w];
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = w_base[ky * k + kx];
                        const int ny = pt - ky;
                        const int nx = pl - kx;
                        // truncating division is not floor for negative
                        // numerators, so clamp those to an empty range
                        const int my = x.h - 1 + ny, mx = x.w - 1 + nx;
                        const int yy0 = ny > 0 ? (ny + s - 1) / s : 0;
                        const int yy1 = my < 0 ? -1 : std::min(oh - 1, my / s);
                        const int xx0 = nx > 0 ? (nx + s - 1) / s : 0;
                        const int xx1 = mx < 0 ? -1 : std::min(ow - 1, mx / s);
                        for (int yy = yy0; yy <= yy1; ++yy) {
                            const int iy = yy * s - ny;
                            const double* in_row = in_base + static_cast<size_t>(iy) * x.w;
                            double* out_row = out_base + static_cast<size_t>(yy) * ow;
                            for (int xx = xx0; xx <= xx1; ++xx)
                                out_row[xx] += wv * in_row[xx * s - nx];
                        }
                    }
                }
            }
        }
    }
    return y;
}

Batch4 Conv2d::forward(const Batch4& x) {
    x_ = x;
    return run(x);
}

Batch4 Conv2d::infer(const Batch4& x) const { return run(x); }

Batch4 Conv2d::backward(const Batch4& gy) {
    const Batch4& x = x_;
    const int oh = gy.h, ow = gy.w;
    int pt, pl;
    pads(x.h, x.w, pt, pl);
    Batch4 gx(x.b, x.c, x.h, x.w);
    const int k = ksize_, s = stride_;
    for (int bi = 0; bi < x.b; ++bi) {
        for (int co = 0; co < cout_; ++co) {
            const double* g_base = &gy.v[(static_cast<size_t>(bi) * cout_ + co) * oh * ow];
            double gb = 0.0;
            for (int i = 0; i < oh * ow; ++i) gb += g_base[i];
            b_.g[static_cast<size_t>(co)] += gb;
            for (int ci = 0; ci < cin_; ++ci) {
                double* wg_base = &w_.g[(static_cast<size_t>(co) * cin_ + ci) * k * k];
                const double* w_base = &w_.v[(static_cast<size_t>(co) * cin_ + ci) * k * k];
                const double* in_base = &x.v[(static_cast<size_t>(bi) * cin_ + ci) * x.h * x.w];
                double* gin_base = &gx.v[(static_cast<size_t>(bi) * cin_ + ci) * x.h * x.w];
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = w_base[ky * k + kx];
                        double acc = 0.0;
                        const int ny = pt - ky;
                        const int nx = pl - kx;
                        const int my = x.h - 1 + ny, mx = x.w - 1 + nx;
                        const int yy0 = ny > 0 ? (ny + s - 1) / s : 0;
                        const int yy1 = my < 0 ? -1 : std::min(oh - 1, my / s);
                        const int xx0 = nx > 0 ? (nx + s - 1) / s : 0;
                        const int xx1 = mx < 0 ? -1 : std::min(ow - 1, mx / s);
                        for (int yy = yy0; yy <= yy1; ++yy) {
                            const int iy = yy * s - ny;
                            const double* in_row = in_base + static_cast<size_t>(iy) * x.w;
                            double* gin_row = gin_base + static_cast<size_t>(iy) * x.w;
                            const double* g_row = g_base + static_cast<size_t>(yy) * ow;
                            for (int xx = xx0; xx <= xx1; ++xx) {
                                const int ix = xx * s - nx;
                                acc += g_row[xx] * in_row[ix];
                                gin_row[ix] += wv * g_row[xx];
                            }
                        }
                        wg_base[ky * k + kx] += acc;
                    }
                }
            }
        }
    }
    return gx;
}

// ---------------------------------------------------------------------- elu

namespace {

inline double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }
inline double elu_grad_from_out(double y) { return y >= 0.0 ? 1.0 : y + 1.0; }

} // namespace

Batch4 Elu4::forward(const Batch4& x) {
    y_ = x;
    for (auto& v : y_.v) v = elu(v);
    return y_;
}

Batch4 Elu4::infer(const Batch4& x) {
    Batch4 y = x;
    for (auto& v : y.v) v = elu(v);
    return y;
}

Batch4 Elu4::backward(const Batch4& gy) const {
    Batch4 gx = gy;
    for (size_t i = 0; i < gx.v.size(); ++i) gx.v[i] *= elu_grad_from_out(y_.v[i]);
    return gx;
}

Batch2 Elu2::forward(const Batch2& x) {
    y_ = x;
    for (auto& v : y_.v) v = elu(v);
    return y_;
}

Batch2 Elu2::infer(const Batch2& x) {
    Batch2 y = x;
    for (auto& v : y.v) v = elu(v);
    return y;
}

Batch2 Elu2::backward(const Batch2& gy) const {
    Batch2 gx = gy;
    for (size_t i = 0; i < gx.v.size(); ++i) gx.v[i] *= elu_grad_from_out(y_.v[i]);
    return gx;
}

// --------------------------------------------------------------- batch norm

BatchNorm2d::BatchNorm2d(int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma_ = Tensor::make({channels});
    beta_ = Tensor::make({channels});
    run_mean_ = Tensor::make({channels});
    run_var_ = Tensor::make({channels});
    for (auto& x : gamma_.v) x = 1.0;
    for (auto& x : run_var_.v) x = 1.0;
}

void BatchNorm2d::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    out.push_back({prefix + ".gamma", &gamma_, true});
    out.push_back({prefix + ".beta", &beta_, true});
    out.push_back({prefix + ".run_mean", &run_mean_, false});
    out.push_back({prefix + ".run_var", &run_var_, false});
}

Batch4 BatchNorm2d::forward(const Batch4& x) {
    if (x.c != channels_) throw std::invalid_argument("BatchNorm2d: channel mismatch");
    const int plane = x.h * x.w;
    const double n = static_cast<double>(x.b) * plane;
    xhat_ = Batch4(x.b, x.c, x.h, x.w);
    invstd_.assign(static_cast<size_t>(channels_), 0.0);
    Batch4 y(x.b, x.c, x.h, x.w);
    for (int c = 0; c < channels_; ++c) {
        double mu = 0.0;
        for (int bi = 0; bi < x.b; ++bi) {
            const double* p = &x.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            for (int i = 0; i < plane; ++i) mu += p[i];
        }
        mu /= n;
        double var = 0.0;
        for (int bi = 0; bi < x.b; ++bi) {
            const double* p = &x.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            for (int i = 0; i < plane; ++i) var += (p[i] - mu) * (p[i] - mu);
        }
        var /= n;
        const double istd = 1.0 / std::sqrt(var + eps_);
        invstd_[static_cast<size_t>(c)] = istd;
        const double g = gamma_.v[static_cast<size_t>(c)], b = beta_.v[static_cast<size_t>(c)];
        for (int bi = 0; bi < x.b; ++bi) {
            const double* p = &x.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            double* xh = &xhat_.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            double* py = &y.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            for (int i = 0; i < plane; ++i) {
                xh[i] = (p[i] - mu) * istd;
                py[i] = g * xh[i] + b;
            }
        }
        run_mean_.v[static_cast<size_t>(c)] =
            momentum_ * run_mean_.v[static_cast<size_t>(c)] + (1.0 - momentum_) * mu;
        run_var_.v[static_cast<size_t>(c)] =
            momentum_ * run_var_.v[static_cast<size_t>(c)] + (1.0 - momentum_) * var;
    }
    return y;
}

Batch4 BatchNorm2d::backward(const Batch4& gy) {
    const int plane = gy.h * gy.w;
    const double n = static_cast<double>(gy.b) * plane;
    Batch4 gx(gy.b, gy.c, gy.h, gy.w);
    for (int c = 0; c < channels_; ++c) {
        const double g = gamma_.v[static_cast<size_t>(c)];
        const double istd = invstd_[static_cast<size_t>(c)];
        double sum_g = 0.0, sum_gx = 0.0;
        for (int bi = 0; bi < gy.b; ++bi) {
            const double* pg = &gy.v[(static_cast<size_t>(bi) * gy.c + c) * plane];
            const double* xh = &xhat_.v[(static_cast<size_t>(bi) * gy.c + c) * plane];
            for (int i = 0; i < plane; ++i) {
                sum_g += pg[i];
                sum_gx += pg[i] * xh[i];
            }
        }
        gamma_.g[static_cast<size_t>(c)] += sum_gx;
        beta_.g[static_cast<size_t>(c)] += sum_g;
        // d xhat = g * gy; pull the two batch sums out of the elementwise pass
        for (int bi = 0; bi < gy.b; ++bi) {
            const double* pg = &gy.v[(static_cast<size_t>(bi) * gy.c + c) * plane];
            const double* xh = &xhat_.v[(static_cast<size_t>(bi) * gy.c + c) * plane];
            double* px = &gx.v[(static_cast<size_t>(bi) * gy.c + c) * plane];
            for (int i = 0; i < plane; ++i)
                px[i] = g * istd * (pg[i] - sum_g / n - xh[i] * sum_gx / n);
        }
    }
    return gx;
}

Batch4 BatchNorm2d::infer(const Batch4& x) const {
    Batch4 y(x.b, x.c, x.h, x.w);
    const int plane = x.h * x.w;
    for (int c = 0; c < channels_; ++c) {
        const double istd = 1.0 / std::sqrt(run_var_.v[static_cast<size_t>(c)] + eps_);
        const double mu = run_mean_.v[static_cast<size_t>(c)];
        const double g = gamma_.v[static_cast<size_t>(c)], b = beta_.v[static_cast<size_t>(c)];
        for (int bi = 0; bi < x.b; ++bi) {
            const double* p = &x.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            double* py = &y.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            for (int i = 0; i < plane; ++i) py[i] = g * (p[i] - mu) * istd + b;
        }
    }
    return y;
}

BatchNorm1d::BatchNorm1d(int features, double momentum, double eps)
    : features_(features), momentum_(momentum), eps_(eps) {
    gamma_ = Tensor::make({features});
    beta_ = Tensor::make({features});
    run_mean_ = Tensor::make({features});
    run_var_ = Tensor::make({features});
    for (auto& x : gamma_.v) x = 1.0;
    for (auto& x : run_var_.v) x = 1.0;
}

void BatchNorm1d::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    out.push_back({prefix + ".gamma", &gamma_, true});
    out.push_back({prefix + ".beta", &beta_, true});
    out.push_back({prefix + ".run_mean", &run_mean_, false});
    out.push_back({prefix + ".run_var", &run_var_, false});
}

Batch2 BatchNorm1d::forward(const Batch2& x) {
    if (x.n != features_) throw std::invalid_argument("BatchNorm1d: feature mismatch");
    if (x.b < 2) throw std::invalid_argument("BatchNorm1d: training needs batch size >= 2");
    const double n = static_cast<double>(x.b);
    xhat_ = Batch2(x.b, x.n);
    invstd_.assign(static_cast<size_t>(features_), 0.0);
    Batch2 y(x.b, x.n);
    for (int f = 0; f < features_; ++f) {
        double mu = 0.0;
        for (int bi = 0; bi < x.b; ++bi) mu += x.at(bi, f);
        mu /= n;
        double var = 0.0;
        for (int bi = 0; bi < x.b; ++bi) {
            const double d = x.at(bi, f) - mu;
            var += d * d;
        }
        var /= n;
        const double istd = 1.0 / std::sqrt(var + eps_);
        invstd_[static_cast<size_t>(f)] = istd;
        const double g = gamma_.v[static_cast<size_t>(f)], b = beta_.v[static_cast<size_t>(f)];
        for (int bi = 0; bi < x.b; ++bi) {
            const double xh = (x.at(bi, f) - mu) * istd;
            xhat_.at(bi, f) = xh;
            y.at(bi, f) = g * xh + b;
        }
        run_mean_.v[static_cast<size_t>(f)] =
            momentum_ * run_mean_.v[static_cast<size_t>(f)] + (1.0 - momentum_) * mu;
        run_var_.v[static_cast<size_t>(f)] =
            momentum_ * run_var_.v[static_cast<size_t>(f)] + (1.0 - momentum_) * var;
    }
    return y;
}

Batch2 BatchNorm1d::backward(const Batch2& gy) {
    const double n = static_cast<double>(gy.b);
    Batch2 gx(gy.b, gy.n);
    for (int f = 0; f < features_; ++f) {
        const double g = gamma_.v[static_cast<size_t>(f)];
        const double istd = invstd_[static_cast<size_t>(f)];
        double sum_g = 0.0, sum_gx = 0.0;
        for (int bi = 0; bi < gy.b; ++bi) {
            sum_g += gy.at(bi, f);
            sum_gx += gy.at(bi, f) * xhat_.at(bi, f);
        }
        gamma_.g[static_cast<size_t>(f)] += sum_gx;
        beta_.g[static_cast<size_t>(f)] += sum_g;
        for (int bi = 0; bi < gy.b; ++bi)
            gx.at(bi, f) =
                g * istd * (gy.at(bi, f) - sum_g / n - xhat_.at(bi, f) * sum_gx / n);
    }
    return gx;
}

Batch2 BatchNorm1d::infer(const Batch2& x) const {
    Batch2 y(x.b, x.n);
    for (int f = 0; f < features_; ++f) {
        const double istd = 1.0 / std::sqrt(run_var_.v[static_cast<size_t>(f)] + eps_);
        const double mu = run_mean_.v[static_cast<size_t>(f)];
        const double g = gamma_.v[static_cast<size_t>(f)], b = beta_.v[static_cast<size_t>(f)];
        for (int bi = 0; bi < x.b; ++bi) y.at(bi, f) = g * (x.at(bi, f) - mu) * istd + b;
    }
    return y;
}

// ----------------------------------------------------------------- pooling

Batch2 GlobalAvgPool::forward(const Batch4& x) {
    b_ = x.b;
    c_ = x.c;
    h_ = x.h;
    w_ = x.w;
    return infer(x);
}

Batch2 GlobalAvgPool::infer(const Batch4& x) {
    Batch2 y(x.b, x.c);
    const int plane = x.h * x.w;
    const double inv = 1.0 / static_cast<double>(plane);
    for (int bi = 0; bi < x.b; ++bi)
        for (int c = 0; c < x.c; ++c) {
            const double* p = &x.v[(static_cast<size_t>(bi) * x.c + c) * plane];
            double acc = 0.0;
            for (int i = 0; i < plane; ++i) acc += p[i];
            y.at(bi, c) = acc * inv;
        }
    return y;
}

Batch4 GlobalAvgPool::backward(const Batch2& gy) const {
    Batch4 gx(b_, c_, h_, w_);
    const int plane = h_ * w_;
    const double inv = 1.0 / static_cast<double>(plane);
    for (int bi = 0; bi < b_; ++bi)
        for (int c = 0; c < c_; ++c) {
            const double v = gy.at(bi, c) * inv;
            double* p = &gx.v[(static_cast<size_t>(bi) * c_ + c) * plane];
            for (int i = 0; i < plane; ++i) p[i] = v;
        }
    return gx;
}

// -------------------------------------------------------------- power norm

PowerNorm::PowerNorm(double momentum) : momentum_(momentum) {
    run_scale_ = Tensor::make({1});
    run_scale_.v[0] = 1.0;
}

void PowerNorm::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    out.push_back({prefix + ".run_scale", &run_scale_, false});
}

Batch2 PowerNorm::forward(const Batch2& x) {
    if (x.n % 2 != 0) throw std::invalid_argument("PowerNorm: needs an even feature count");
    const double symbols = static_cast<double>(x.b) * (x.n / 2);
    double total = 0.0;
    for (double v : x.v) total += v * v;
    s_ = std::sqrt(std::max(total / symbols, 1e-300));
    y_ = Batch2(x.b, x.n);
    const double inv = 1.0 / s_;
    for (size_t i = 0; i < x.v.size(); ++i) y_.v[i] = x.v[i] * inv;
    run_scale_.v[0] = momentum_ * run_scale_.v[0] + (1.0 - momentum_) * s_;
    return y_;
}

Batch2 PowerNorm::backward(const Batch2& gy) const {
    const double symbols = static_cast<double>(gy.b) * (gy.n / 2);
    double dot = 0.0;
    for (size_t i = 0; i < gy.v.size(); ++i) dot += gy.v[i] * y_.v[i];
    const double c = dot / symbols;
    Batch2 gx(gy.b, gy.n);
    const double inv = 1.0 / s_;
    for (size_t i = 0; i < gy.v.size(); ++i) gx.v[i] = (gy.v[i] - y_.v[i] * c) * inv;
    return gx;
}

Batch2 PowerNorm::infer(const Batch2& x) const {
    const double s = run_scale_.v[0] > 0.0 ? run_scale_.v[0] : 1.0;
    Batch2 y(x.b, x.n);
    const double inv = 1.0 / s;
    for (size_t i = 0; i < x.v.size(); ++i) y.v[i] = x.v[i] * inv;
    return y;
}

// ------------------------------------------------------------------ linear

Linear::Linear(int in, int out, bool bias) : in_(in), out_(out), bias_(bias) {
    if (in < 1 || out < 1) throw std::invalid_argument("Linear: bad dimensions");
    w_ = Tensor::make({out, in});
    b_ = Tensor::make({out});
}

void Linear::init(RngStream& s) {
    he_init(w_, in_, s);
    for (auto& x : b_.v) x = 0.0;
}

void Linear::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    out.push_back({prefix + ".w", &w_, true});
    if (bias_) out.push_back({prefix + ".b", &b_, true});
}

Batch2 Linear::run(const Batch2& x) const {
    if (x.n != in_) throw std::invalid_argument("Linear: input width mismatch");
    Batch2 y(x.b, out_);
    for (int bi = 0; bi < x.b; ++bi) {
        const double* xi = &x.v[static_cast<size_t>(bi) * in_];
        double* yi = &y.v[static_cast<size_t>(bi) * out_];
        for (int o = 0; o < out_; ++o) {
            const double* wr = &w_.v[static_cast<size_t>(o) * in_];
            double acc = bias_ ? b_.v[static_cast<size_t>(o)] : 0.0;
            for (int i = 0; i < in_; ++i) acc += wr[i] * xi[i];
            yi[o] = acc;
        }
    }
    return y;
}

Batch2 Linear::forward(const Batch2& x) {
    x_ = x;
    return run(x);
}

Batch2 Linear::infer(const Batch2& x) const { return run(x); }

Batch2 Linear::backward(const Batch2& gy) {
    const Batch2& x = x_;
    Batch2 gx(x.b, in_);
    for (int bi = 0; bi < x.b; ++bi) {
        const double* xi = &x.v[static_cast<size_t>(bi) * in_];
        const double* gi = &gy.v[static_cast<size_t>(bi) * out_];
        double* gxi = &gx.v[static_cast<size_t>(bi) * in_];
        for (int o = 0; o < out_; ++o) {
            const double g = gi[o];
            if (bias_) b_.g[static_cast<size_t>(o)] += g;
            double* wg = &w_.g[static_cast<size_t>(o) * in_];
            const double* wr = &w_.v[static_cast<size_t>(o) * in_];
            for (int i = 0; i < in_; ++i) {
                wg[i] += g * xi[i];
                gxi[i] += g * wr[i];
            }
        }
    }
    return gx;
}

// --------------------------------------------------------- inception block

namespace {

Batch4 concat_channels(const std::vector<Batch4>& parts) {
    const int b = parts[0].b, h = parts[0].h, w = parts[0].w;
    int ctot = 0;
    for (const auto& p : parts) ctot += p.c;
    Batch4 y(b, ctot, h, w);
    const int plane = h * w;
    for (int bi = 0; bi < b; ++bi) {
        int co = 0;
        for (const auto& p : parts) {
            for (int c = 0; c < p.c; ++c, ++co) {
                const double* src = &p.v[(static_cast<size_t>(bi) * p.c + c) * plane];
                double* dst = &y.v[(static_cast<size_t>(bi) * ctot + co) * plane];
                for (int i = 0; i < plane; ++i) dst[i] = src[i];
            }
        }
    }
    return y;
}

std::vector<Batch4> split_channels(const Batch4& x, const std::vector<int>& widths) {
    std::vector<Batch4> parts;
    parts.reserve(widths.size());
    const int plane = x.h * x.w;
    int c0 = 0;
    for (int cw : widths) {
        Batch4 p(x.b, cw, x.h, x.w);
        for (int bi = 0; bi < x.b; ++bi)
            for (int c = 0; c < cw; ++c) {
                const double* src = &x.v[(static_cast<size_t>(bi) * x.c + c0 + c) * plane];
                double* dst = &p.v[(static_cast<size_t>(bi) * cw + c) * plane];
                for (int i = 0; i < plane; ++i) dst[i] = src[i];
            }
        c0 += cw;
        parts.push_back(std::move(p));
    }
    return parts;
}

} // namespace

InceptionBlock::InceptionBlock(int cin, int cout, const std::vector<int>& kernels)
    : cin_(cin), cout_(cout),
      conv1_(cout * static_cast<int>(kernels.size()), cout, 3, 1),
      conv2_(cout, cout, 3, 2),
      bn_(cout) {
    if (kernels.empty()) throw std::invalid_argument("InceptionBlock: no kernels");
    for (int k : kernels) {
        dw_.emplace_back(cin, k);
        pw_.emplace_back(cin, cout, 1, 1);
        act_.emplace_back();
    }
}

void InceptionBlock::init(RngStream& s) {
    for (auto& l : dw_) l.init(s);
    for (auto& l : pw_) l.init(s);
    conv1_.init(s);
    conv2_.init(s);
}

void InceptionBlock::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    for (size_t i = 0; i < dw_.size(); ++i) {
        dw_[i].collect(prefix + ".dw" + std::to_string(i), out);
        pw_[i].collect(prefix + ".pw" + std::to_string(i), out);
    }
    conv1_.collect(prefix + ".conv1", out);
    conv2_.collect(prefix + ".conv2", out);
    bn_.collect(prefix + ".bn", out);
}

Batch4 InceptionBlock::forward(const Batch4& x) {
    std::vector<Batch4> branches;
    branches.reserve(dw_.size());
    for (size_t i = 0; i < dw_.size(); ++i)
        branches.push_back(act_[i].forward(pw_[i].forward(dw_[i].forward(x))));
    Batch4 cat = concat_channels(branches);
    Batch4 c1 = act1_.forward(conv1_.forward(cat));
    Batch4 c2 = act2_.forward(conv2_.forward(c1));
    return bn_.forward(c2);
}

Batch4 InceptionBlock::infer(const Batch4& x) const {
    std::vector<Batch4> branches;
    branches.reserve(dw_.size());
    for (size_t i = 0; i < dw_.size(); ++i)
        branches.push_back(Elu4::infer(pw_[i].infer(dw_[i].infer(x))));
    Batch4 cat = concat_channels(branches);
    Batch4 c1 = Elu4::infer(conv1_.infer(cat));
    Batch4 c2 = Elu4::infer(conv2_.infer(c1));
    return bn_.infer(c2);
}

Batch4 InceptionBlock::backward(const Batch4& gy) {
    Batch4 g = bn_.backward(gy);
    g = act2_.backward(g);
    g = conv2_.backward(g);
    g = act1_.backward(g);
    g = conv1_.backward(g);
    std::vector<int> widths(dw_.size(), cout_);
    std::vector<Batch4> parts = split_channels(g, widths);
    Batch4 gx;
    for (size_t i = 0; i < dw_.size(); ++i) {
        Batch4 gb = act_[i].backward(parts[i]);
        gb = pw_[i].backward(gb);
        gb = dw_[i].backward(gb);
        if (i == 0) {
            gx = std::move(gb);
        } else {
            for (size_t j = 0; j < gx.v.size(); ++j) gx.v[j] += gb.v[j];
        }
    }
    return gx;
}

// ---------------------------------------------------------- residual block

ResidualBlock::ResidualBlock(int in, int out)
    : in_(in), out_(out), l1_(in, out), l2_(out, out), l3_(out, out), bn_(out) {
    if (in != out) proj_.emplace(in, out, /*bias=*/false);
}

void ResidualBlock::init(RngStream& s) {
    l1_.init(s);
    l2_.init(s);
    l3_.init(s);
    if (proj_) proj_->init(s);
}

void ResidualBlock::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
    l1_.collect(prefix + ".l1", out);
    l2_.collect(prefix + ".l2", out);
    l3_.collect(prefix + ".l3", out);
    if (proj_) proj_->collect(prefix + ".proj", out);
    bn_.collect(prefix + ".bn", out);
}

Batch2 ResidualBlock::forward(const Batch2& x) {
    Batch2 h = a1_.forward(l1_.forward(x));
    h = a2_.forward(l2_.forward(h));
    Batch2 pre = l3_.forward(h);
    Batch2 skip = proj_ ? proj_->forward(x) : x;
    for (size_t i = 0; i < pre.v.size(); ++i) pre.v[i] += skip.v[i];
    return bn_.forward(a3_.forward(pre));
}

Batch2 ResidualBlock::infer(const Batch2& x) const {
    Batch2 h = Elu2::infer(l1_.infer(x));
    h = Elu2::infer(l2_.infer(h));
    Batch2 pre = l3_.infer(h);
    Batch2 skip = proj_ ? proj_->infer(x) : x;
    for (size_t i = 0; i < pre.v.size(); ++i) pre.v[i] += skip.v[i];
    return bn_.infer(Elu2::infer(pre));
}

Batch2 ResidualBlock::backward(const Batch2& gy) {
    Batch2 g = bn_.backward(gy);
    Batch2 gpre = a3_.backward(g);
    Batch2 gskip = proj_ ? proj_->backward(gpre) : gpre;
    Batch2 gh = l3_.backward(gpre);
    gh = a2_.backward(gh);
    gh = l2_.backward(gh);
    gh = a1_.backward(gh);
    Batch2 gx = l1_.backward(gh);
    for (size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += gskip.v[i];
    return gx;
}

} // namespace icc::nn
