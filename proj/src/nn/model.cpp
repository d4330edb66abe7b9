#include "icc/nn/model.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace icc::nn {

void ArchConfig::validate() const {
    if (m < 2) throw std::invalid_argument("arch: m must be at least 2");
    if (d < 1) throw std::invalid_argument("arch: d must be at least 1");
    if (channels.empty()) throw std::invalid_argument("arch: channels must not be empty");
    for (int c : channels)
        if (c < 1) throw std::invalid_argument("arch: channels must be positive");
    if (kernels.empty()) throw std::invalid_argument("arch: kernels must not be empty");
    for (int k : kernels)
        if (k < 1 || k % 2 == 0)
            throw std::invalid_argument("arch: kernels must be odd and positive");
    if (widths.empty()) throw std::invalid_argument("arch: widths must not be empty");
    for (int w : widths)
        if (w < 1) throw std::invalid_argument("arch: widths must be positive");
}

std::string ArchConfig::to_json_string() const {
    nlohmann::json j;
    j["m"] = m;
    j["channels"] = channels;
    j["kernels"] = kernels;
    j["widths"] = widths;
    j["d"] = d;
    return j.dump(2);
}

ArchConfig ArchConfig::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("arch: invalid json: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("arch: expected a json object");
    ArchConfig cfg;
    for (const auto& [key, val] : j.items()) {
        if (key == "m") cfg.m = val.get<int>();
        else if (key == "channels") cfg.channels = val.get<std::vector<int>>();
        else if (key == "kernels") cfg.kernels = val.get<std::vector<int>>();
        else if (key == "widths") cfg.widths = val.get<std::vector<int>>();
        else if (key == "d") cfg.d = val.get<int>();
        else throw std::invalid_argument("arch: unknown field '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

namespace {

ArchConfig validated(ArchConfig cfg) {
    cfg.validate();
    return cfg;
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Model::Model(ArchConfig cfg)
    : cfg_(validated(std::move(cfg))),
      enc_fc_(cfg_.channels.back(), 2 * cfg_.d),
      dec_fc_(cfg_.widths.back(), 1) {
    int cin = 2;
    for (int c : cfg_.channels) {
        enc_.emplace_back(cin, c, cfg_.kernels);
        cin = c;
    }
    int win = 2 * cfg_.d;
    for (int w : cfg_.widths) {
        dec_.emplace_back(win, w);
        win = w;
    }
}

void Model::init(RngStream& s) {
    for (auto& b : enc_) b.init(s);
    enc_fc_.init(s);
    for (auto& b : dec_) b.init(s);
    dec_fc_.init(s);
}

std::vector<NamedTensor> Model::named() {
    std::vector<NamedTensor> out;
    for (size_t i = 0; i < enc_.size(); ++i)
        enc_[i].collect("enc" + std::to_string(i), out);
    enc_fc_.collect("enc_fc", out);
    pnorm_.collect("pnorm", out);
    for (size_t i = 0; i < dec_.size(); ++i)
        dec_[i].collect("dec" + std::to_string(i), out);
    dec_fc_.collect("dec_fc", out);
    return out;
}

int64_t Model::param_count() {
    int64_t n = 0;
    for (const auto& t : named())
        if (t.trainable) n += t.tensor->size();
    return n;
}

Batch2 Model::encode_train(const Batch4& x) {
    Batch4 h = x;
    for (auto& b : enc_) h = b.forward(h);
    Batch2 f = gap_.forward(h);
    f = enc_fc_.forward(f);
    return pnorm_.forward(f);
}

Batch4 Model::encode_backward(const Batch2& gy) {
    Batch2 g = pnorm_.backward(gy);
    g = enc_fc_.backward(g);
    Batch4 g4 = gap_.backward(g);
    for (auto it = enc_.rbegin(); it != enc_.rend(); ++it) g4 = it->backward(g4);
    return g4;
}

Batch2 Model::encode_infer(const Batch4& x) const {
    Batch4 h = x;
    for (const auto& b : enc_) h = b.infer(h);
    Batch2 f = GlobalAvgPool::infer(h);
    f = enc_fc_.infer(f);
    return pnorm_.infer(f);
}

Batch2 Model::decode_train(const Batch2& z) {
    Batch2 h = z;
    for (auto& b : dec_) h = b.forward(h);
    h = dec_fc_.forward(h);
    for (auto& v : h.v) v = sigmoid(v);
    prob_ = h;
    return prob_;
}

Batch2 Model::decode_backward(const Batch2& gy) {
    Batch2 g = gy;
    for (size_t i = 0; i < g.v.size(); ++i) {
        const double p = prob_.v[i];
        g.v[i] *= p * (1.0 - p);
    }
    g = dec_fc_.backward(g);
    for (auto it = dec_.rbegin(); it != dec_.rend(); ++it) g = it->backward(g);
    return g;
}

Batch2 Model::decode_infer(const Batch2& z) const {
    Batch2 h = z;
    for (const auto& b : dec_) h = b.infer(h);
    h = dec_fc_.infer(h);
    for (auto& v : h.v) v = sigmoid(v);
    return h;
}

void Model::covariance_input_into(const ComplexMatrix& r, Batch4& dst, int slot) {
    const int m = r.rows();
    if (r.cols() != m) throw std::invalid_argument("model: covariance input must be square");
    if (dst.c != 2 || dst.h != m || dst.w != m)
        throw std::invalid_argument("model: input batch has the wrong shape");
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            dst.at(slot, 0, i, j) = r(i, j).real();
            dst.at(slot, 1, i, j) = r(i, j).imag();
        }
}

Batch4 Model::covariance_input(const std::vector<ComplexMatrix>& r) {
    if (r.empty()) throw std::invalid_argument("model: no covariance matrices given");
    const int m = r[0].rows();
    Batch4 x(static_cast<int>(r.size()), 2, m, m);
    for (size_t k = 0; k < r.size(); ++k) covariance_input_into(r[k], x, static_cast<int>(k));
    return x;
}

} // namespace icc::nn
