#include "icc/nn/train.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace icc::nn {

namespace {

constexpr double kClip = 1e-7;

double clip_prob(double h) { return std::min(std::max(h, kClip), 1.0 - kClip); }

} // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("train config: epochs must be non-negative");
    if (batch_size < 2) throw std::invalid_argument("train config: batch_size must be at least 2");
    if (!(learning_rate >= 0.0))
        throw std::invalid_argument("train config: learning_rate must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0))
        throw std::invalid_argument("train config: beta1 must lie in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("train config: beta2 must lie in [0,1)");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("train config: adam_eps must be positive");
    if (dataset_size < 2)
        throw std::invalid_argument("train config: dataset_size must be at least 2");
    if (!std::isfinite(train_snr_sense_db))
        throw std::invalid_argument("train config: train_snr_sense_db must be finite");
    if (!std::isfinite(train_snr_report_db))
        throw std::invalid_argument("train config: train_snr_report_db must be finite");
}

std::string TrainConfig::to_json_string() const {
    nlohmann::json j;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["learning_rate"] = learning_rate;
    j["beta1"] = beta1;
    j["beta2"] = beta2;
    j["adam_eps"] = adam_eps;
    j["dataset_size"] = dataset_size;
    j["train_snr_sense_db"] = train_snr_sense_db;
    j["train_snr_report_db"] = train_snr_report_db;
    j["aircomp"] = aircomp;
    j["seed"] = seed;
    return j.dump(2);
}

TrainConfig TrainConfig::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("train config: invalid json: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("train config: expected a json object");
    TrainConfig cfg;
    for (const auto& [key, val] : j.items()) {
        if (key == "epochs") cfg.epochs = val.get<int>();
        else if (key == "batch_size") cfg.batch_size = val.get<int>();
        else if (key == "learning_rate") cfg.learning_rate = val.get<double>();
        else if (key == "beta1") cfg.beta1 = val.get<double>();
        else if (key == "beta2") cfg.beta2 = val.get<double>();
        else if (key == "adam_eps") cfg.adam_eps = val.get<double>();
        else if (key == "dataset_size") cfg.dataset_size = val.get<long long>();
        else if (key == "train_snr_sense_db") cfg.train_snr_sense_db = val.get<double>();
        else if (key == "train_snr_report_db") cfg.train_snr_report_db = val.get<double>();
        else if (key == "aircomp") cfg.aircomp = val.get<bool>();
        else if (key == "seed") cfg.seed = val.get<uint64_t>();
        else throw std::invalid_argument("train config: unknown field '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

void TrainConfig::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("train config: cannot open '" + path + "' for writing");
    os << to_json_string() << "\n";
}

TrainConfig TrainConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("train config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_string(ss.str());
}

double bce_loss(const std::vector<double>& probs, const std::vector<int>& labels) {
    if (probs.size() != labels.size())
        throw std::invalid_argument("loss: prediction/label length mismatch");
    if (probs.empty()) throw std::invalid_argument("loss: empty batch");
    double total = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        const double h = clip_prob(probs[i]);
        total -= labels[i] ? std::log(h) : std::log(1.0 - h);
    }
    return total / static_cast<double>(probs.size());
}

double forward_backward(Model& model, const std::vector<const CovarianceSample*>& batch,
                        const ScenarioConfig& cfg, RngStream& channel_stream, bool aircomp) {
    if (batch.empty()) throw std::invalid_argument("train: empty batch");
    const int b = static_cast<int>(batch.size());
    const int k = static_cast<int>(batch[0]->r.size());
    const int m = model.arch().m;
    const int d = model.arch().d;
    for (const auto* s : batch)
        if (static_cast<int>(s->r.size()) != k)
            throw std::invalid_argument("train: inconsistent sensor count in batch");

    Batch4 xin(b * k, 2, m, m);
    for (int bi = 0; bi < b; ++bi)
        for (int ki = 0; ki < k; ++ki)
            Model::covariance_input_into(batch[bi]->r[ki], xin, bi * k + ki);

    Batch2 enc = model.encode_train(xin);  // [b*k, 2d]

    Batch2 zb(b, 2 * d);
    std::vector<std::vector<cdouble>> gains(b);
    std::vector<std::vector<cdouble>> ys(k, std::vector<cdouble>(d));
    for (int bi = 0; bi < b; ++bi) {
        for (int ki = 0; ki < k; ++ki)
            for (int j = 0; j < d; ++j)
                ys[ki][j] = cdouble(enc.at(bi * k + ki, 2 * j), enc.at(bi * k + ki, 2 * j + 1));
        std::vector<cdouble> z(d);
        ReportedSymbols rep;
        if (aircomp) {
            rep = report_aircomp(ys, cfg, channel_stream);
            z = *rep.aggregated;
        } else {
            rep = report_orthogonal(ys, cfg, channel_stream);
            for (int ki = 0; ki < k; ++ki)
                for (int j = 0; j < d; ++j) z[j] += (*rep.per_sensor)[ki][j];
            for (auto& v : z) v /= static_cast<double>(k);
        }
        for (int j = 0; j < d; ++j) {
            zb.at(bi, 2 * j) = z[j].real();
            zb.at(bi, 2 * j + 1) = z[j].imag();
        }
        gains[bi].resize(k);
        for (int ki = 0; ki < k; ++ki) gains[bi][ki] = rep.channel_draws[ki].gain;
    }

    Batch2 probs = model.decode_train(zb);  // [b, 1]

    double loss = 0.0;
    Batch2 gprob(b, 1);
    const double inv_b = 1.0 / static_cast<double>(b);
    for (int bi = 0; bi < b; ++bi) {
        const int e = batch[bi]->label;
        const double h = probs.at(bi, 0);
        const double hc = clip_prob(h);
        loss -= (e ? std::log(hc) : std::log(1.0 - hc)) * inv_b;
        // the clip is flat outside its band, so no gradient escapes there
        if (h > kClip && h < 1.0 - kClip)
            gprob.at(bi, 0) = inv_b * (e ? -1.0 / hc : 1.0 / (1.0 - hc));
    }
    if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss; decoder emitted an invalid probability");

    Batch2 gz = model.decode_backward(gprob);  // [b, 2d]

    // z = (1/k) sum_k g_k y_k + noise: the adjoint multiplies by conj(g)/k.
    Batch2 genc(b * k, 2 * d);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (int bi = 0; bi < b; ++bi)
        for (int ki = 0; ki < k; ++ki) {
            const cdouble gc = std::conj(gains[bi][ki]) * inv_k;
            for (int j = 0; j < d; ++j) {
                const cdouble w(gz.at(bi, 2 * j), gz.at(bi, 2 * j + 1));
                const cdouble gy = gc * w;
                genc.at(bi * k + ki, 2 * j) = gy.real();
                genc.at(bi * k + ki, 2 * j + 1) = gy.imag();
            }
        }
    model.encode_backward(genc);
    return loss;
}

namespace {

struct Adam {
    std::vector<std::vector<double>> m, v;
    long long t = 0;

    explicit Adam(const std::vector<NamedTensor>& named) {
        for (const auto& nt : named) {
            const size_t sz = nt.trainable ? nt.tensor->v.size() : 0;
            m.emplace_back(sz, 0.0);
            v.emplace_back(sz, 0.0);
        }
    }

    void step(const std::vector<NamedTensor>& named, const TrainConfig& tc) {
        ++t;
        const double c1 = 1.0 - std::pow(tc.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(tc.beta2, static_cast<double>(t));
        for (size_t i = 0; i < named.size(); ++i) {
            if (!named[i].trainable) continue;
            auto& tensor = *named[i].tensor;
            auto& mi = m[i];
            auto& vi = v[i];
            for (size_t j = 0; j < tensor.v.size(); ++j) {
                const double g = tensor.g[j];
                mi[j] = tc.beta1 * mi[j] + (1.0 - tc.beta1) * g;
                vi[j] = tc.beta2 * vi[j] + (1.0 - tc.beta2) * g * g;
                const double mhat = mi[j] / c1;
                const double vhat = vi[j] / c2;
                tensor.v[j] -= tc.learning_rate * mhat / (std::sqrt(vhat) + tc.adam_eps);
            }
        }
    }
};

} // namespace

TrainResult train(Model& model, const TrainConfig& tcfg, const ScenarioConfig& scfg,
                  const std::function<void(int, double)>& on_epoch) {
    tcfg.validate();
    ScenarioConfig cfg = scfg;
    cfg.set_snr_sense_db(tcfg.train_snr_sense_db);
    cfg.set_snr_report_db(tcfg.train_snr_report_db);
    cfg.validate();
    if (cfg.m != model.arch().m)
        throw std::invalid_argument("train: scenario covariance size does not match the model");

    const long long count = tcfg.dataset_size;
    std::vector<CovarianceSample> data;
    data.reserve(static_cast<size_t>(count));
    for (long long i = 0; i < count; ++i) {
        RngStream s(tcfg.seed, kDatasetStreamBase + static_cast<uint64_t>(i));
        const int label = s.uniform() < 0.5 ? 0 : 1;
        data.push_back(generate_slot(cfg, label, s));
    }

    auto named = model.named();
    Adam adam(named);
    TrainResult result;
    result.epoch_loss.reserve(static_cast<size_t>(tcfg.epochs));

    std::vector<size_t> order(static_cast<size_t>(count));
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        RngStream shuffle(tcfg.seed, kShuffleStreamBase + static_cast<uint64_t>(epoch));
        for (size_t i = order.size() - 1; i > 0; --i) {
            const size_t j =
                static_cast<size_t>(shuffle.uniform() * static_cast<double>(i + 1));
            std::swap(order[i], order[j]);
        }

        double epoch_total = 0.0;
        int batches = 0;
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(tcfg.batch_size)) {
            const size_t stop =
                std::min(order.size(), start + static_cast<size_t>(tcfg.batch_size));
            if (stop - start < 2) break;  // batch statistics need at least two samples
            std::vector<const CovarianceSample*> batch;
            batch.reserve(stop - start);
            for (size_t i = start; i < stop; ++i) batch.push_back(&data[order[i]]);

            RngStream channel(tcfg.seed, kChannelStreamBase +
                                             static_cast<uint64_t>(epoch) * (1ull << 20) +
                                             static_cast<uint64_t>(batches));
            for (auto& nt : named) nt.tensor->zero_grad();
            epoch_total += forward_backward(model, batch, cfg, channel, tcfg.aircomp);
            adam.step(named, tcfg);
            ++batches;
        }
        if (batches == 0) throw std::runtime_error("train: dataset too small for one batch");
        result.epoch_loss.push_back(epoch_total / batches);
        if (on_epoch) on_epoch(epoch, result.epoch_loss.back());
    }
    return result;
}

} // namespace icc::nn
