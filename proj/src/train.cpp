#include "glove/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "glove/errors.hpp"

namespace glove {

AdaDelta::AdaDelta(const std::vector<ParamView>& params, AdaDeltaConfig cfg)
    : cfg_(cfg) {
    eg2_.reserve(params.size());
    ed2_.reserve(params.size());
    for (const auto& p : params) {
        eg2_.emplace_back(p.n, 0.0f);
        ed2_.emplace_back(p.n, 0.0f);
    }
}

void AdaDelta::step(const std::vector<ParamView>& params,
                    const std::vector<ParamView>& grads) {
    if (params.size() != eg2_.size() || grads.size() != eg2_.size())
        throw Error("adadelta: parameter layout changed");
    const float rho = cfg_.rho, eps = cfg_.epsilon, scale = cfg_.step_scale;
    for (size_t j = 0; j < params.size(); ++j) {
        float* p = params[j].data;
        const float* g = grads[j].data;
        float* eg2 = eg2_[j].data();
        float* ed2 = ed2_[j].data();
        const size_t n = params[j].n;
        for (size_t i = 0; i < n; ++i) {
            eg2[i] = rho * eg2[i] + (1.0f - rho) * g[i] * g[i];
            float delta = -std::sqrt(ed2[i] + eps) / std::sqrt(eg2[i] + eps) * g[i];
            ed2[i] = rho * ed2[i] + (1.0f - rho) * delta * delta;
            p[i] += scale * delta;
        }
    }
}

EarlyStopper::Verdict EarlyStopper::update(double metric, int epoch) {
    Verdict v;
    if (best_epoch_ == 0 || metric > best_metric_) {
        best_metric_ = metric;
        best_epoch_ = epoch;
        v.improved = true;
    }
    v.stop = epoch - best_epoch_ >= patience_;
    return v;
}

FitResult fit(const ModelSpec& m, std::span<const Tensor> x,
              std::span<const int> y, std::span<const Tensor> xval,
              std::span<const int> yval, const TrainConfig& cfg) {
    if (x.empty()) throw Error("fit: empty training set");
    if (x.size() != y.size()) throw Error("fit: labels/windows mismatch");
    if (xval.size() != yval.size()) throw Error("fit: val labels/windows mismatch");
    for (const auto& t : x)
        if (t.ch != m.in_ch || t.len != m.in_len)
            throw ShapeError("fit: training window shape mismatch");

    {
        std::set<int> classes(y.begin(), y.end());
        if (classes.size() == 1)
            std::fprintf(stderr,
                         "warning: training set for '%s' has a single class\n",
                         m.name.c_str());
    }

    Rng rng(cfg.seed);
    FitResult res;
    res.weights = init_weights(m, rng);
    auto views = trainable_params(m, res.weights);
    AdaDelta opt(views, cfg.opt);
    GradStore grads = make_grad_store(m);
    auto gviews = grad_views(grads);
    EarlyStopper stopper(cfg.patience);
    ModelWeights best = res.weights;

    std::vector<size_t> order(x.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        int correct = 0;
        for (size_t at = 0; at < order.size(); at += cfg.batch_size) {
            const int bsz = int(std::min(size_t(cfg.batch_size), order.size() - at));
            Batch batch(bsz, m.in_ch, m.in_len);
            std::vector<int> targets(bsz);
            for (int j = 0; j < bsz; ++j) {
                batch.put(j, x[order[at + j]]);
                targets[j] = y[order[at + j]];
            }
            auto stats = train_batch(m, res.weights, batch, targets, rng, grads);
            loss_sum += stats.loss_sum;
            correct += stats.correct;
            opt.step(views, gviews);
        }

        EpochStats es;
        es.train_loss = loss_sum / double(x.size());
        es.train_acc = double(correct) / double(x.size());
        es.val_acc = xval.empty() ? es.train_acc
                                  : accuracy(m, res.weights, xval, yval,
                                             cfg.batch_size);
        res.history.push_back(es);
        res.epochs_run = epoch;

        auto verdict = stopper.update(es.val_acc, epoch);
        if (verdict.improved) best = res.weights;
        if (cfg.verbose)
            std::fprintf(stderr,
                         "%s epoch %3d  loss %.4f  acc %.4f  val %.4f%s\n",
                         m.name.c_str(), epoch, es.train_loss, es.train_acc,
                         es.val_acc, verdict.improved ? " *" : "");
        if (verdict.stop) break;
    }

    res.best_epoch = stopper.best_epoch();
    res.best_val_acc = stopper.best_metric();
    if (cfg.restore_best) res.weights = std::move(best);
    return res;
}

}  // namespace glove
