#include "glove/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glove/errors.hpp"
#include "glove/kernels.hpp"

namespace glove {

// ---------------------------------------------------------------------------
// Specs and shapes
// ---------------------------------------------------------------------------

LayerSpec LayerSpec::conv1d(int filters, int kernel) {
    if (filters <= 0 || kernel <= 0) throw ShapeError("conv1d: bad filters/kernel");
    LayerSpec l;
    l.kind = LayerKind::Conv1D;
    l.filters = filters;
    l.kernel = kernel;
    return l;
}
LayerSpec LayerSpec::channel_norm() { return {.kind = LayerKind::ChannelNorm}; }
LayerSpec LayerSpec::batch_norm() { return {.kind = LayerKind::BatchNorm}; }
LayerSpec LayerSpec::max_pool(int pool, int stride) {
    if (pool <= 0 || stride <= 0) throw ShapeError("max_pool: bad pool/stride");
    LayerSpec l;
    l.kind = LayerKind::MaxPool1D;
    l.pool = pool;
    l.stride = stride;
    return l;
}
LayerSpec LayerSpec::dropout(float rate) {
    if (rate < 0.0f || rate >= 1.0f) throw ShapeError("dropout: rate must be in [0,1)");
    LayerSpec l;
    l.kind = LayerKind::Dropout;
    l.rate = rate;
    return l;
}
LayerSpec LayerSpec::flatten() { return {.kind = LayerKind::Flatten}; }
LayerSpec LayerSpec::dense(int units) {
    if (units <= 0) throw ShapeError("dense: bad units");
    LayerSpec l;
    l.kind = LayerKind::Dense;
    l.units = units;
    return l;
}
LayerSpec LayerSpec::relu() { return {.kind = LayerKind::ReLU}; }
LayerSpec LayerSpec::softmax() { return {.kind = LayerKind::Softmax}; }

std::vector<Shape> shape_chain(const ModelSpec& m) {
    if (m.in_ch <= 0 || m.in_len <= 0) throw ShapeError("model: bad input shape");
    std::vector<Shape> chain;
    chain.reserve(m.layers.size() + 1);
    Shape s{m.in_ch, m.in_len};
    chain.push_back(s);
    for (const auto& l : m.layers) {
        switch (l.kind) {
            case LayerKind::Conv1D:
                s = {l.filters, s.len};
                break;
            case LayerKind::ChannelNorm:
            case LayerKind::BatchNorm:
            case LayerKind::Dropout:
            case LayerKind::ReLU:
                break;
            case LayerKind::MaxPool1D:
                s = {s.ch, kern::pool_out_len(s.len, l.pool, l.stride)};
                break;
            case LayerKind::Flatten:
                s = {s.ch * s.len, 1};
                break;
            case LayerKind::Dense:
                if (s.len != 1) throw ShapeError("dense needs a flat input");
                s = {l.units, 1};
                break;
            case LayerKind::Softmax:
                if (s.len != 1) throw ShapeError("softmax needs a flat input");
                break;
        }
        if (s.ch <= 0 || s.len <= 0) throw ShapeError("layer output has zero size");
        chain.push_back(s);
    }
    return chain;
}

ModelSpec build_inertial_model(int window_len) {
    ModelSpec m;
    m.name = "inertial";
    m.in_ch = 3;
    m.in_len = window_len;
    for (int i = 0; i < 3; ++i) {
        m.layers.push_back(LayerSpec::conv1d(10, 10));
        m.layers.push_back(LayerSpec::batch_norm());
        m.layers.push_back(LayerSpec::relu());
        if (i < 2) m.layers.push_back(LayerSpec::max_pool(5, 5));
    }
    m.layers.push_back(LayerSpec::dropout(0.5f));
    m.layers.push_back(LayerSpec::flatten());
    m.layers.push_back(LayerSpec::dense(10));
    m.layers.push_back(LayerSpec::relu());
    m.layers.push_back(LayerSpec::dense(2));
    m.layers.push_back(LayerSpec::softmax());
    shape_chain(m);
    return m;
}

ModelSpec build_capacitive_model(int window_len) {
    ModelSpec m;
    m.name = "capacitive";
    m.in_ch = 4;
    m.in_len = window_len;
    m.layers.push_back(LayerSpec::conv1d(40, 10));
    m.layers.push_back(LayerSpec::channel_norm());
    m.layers.push_back(LayerSpec::batch_norm());
    m.layers.push_back(LayerSpec::relu());
    m.layers.push_back(LayerSpec::max_pool(5, 5));
    m.layers.push_back(LayerSpec::conv1d(40, 10));
    m.layers.push_back(LayerSpec::batch_norm());
    m.layers.push_back(LayerSpec::relu());
    m.layers.push_back(LayerSpec::max_pool(5, 5));
    m.layers.push_back(LayerSpec::dropout(0.3f));
    m.layers.push_back(LayerSpec::flatten());
    m.layers.push_back(LayerSpec::dense(100));
    m.layers.push_back(LayerSpec::relu());
    m.layers.push_back(LayerSpec::dense(9));
    m.layers.push_back(LayerSpec::softmax());
    shape_chain(m);
    return m;
}

int tensor_count(LayerKind k) {
    switch (k) {
        case LayerKind::Conv1D:
        case LayerKind::ChannelNorm:
        case LayerKind::Dense:
            return 2;
        case LayerKind::BatchNorm:
            return 4;
        default:
            return 0;
    }
}

int trainable_tensor_count(LayerKind k) {
    switch (k) {
        case LayerKind::Conv1D:
        case LayerKind::ChannelNorm:
        case LayerKind::Dense:
        case LayerKind::BatchNorm:
            return 2;
        default:
            return 0;
    }
}

std::vector<size_t> tensor_sizes(const LayerSpec& l, Shape in) {
    switch (l.kind) {
        case LayerKind::Conv1D:
            return {size_t(l.filters) * in.ch * l.kernel, size_t(l.filters)};
        case LayerKind::ChannelNorm:
            return {size_t(in.ch) * in.len, size_t(in.ch) * in.len};
        case LayerKind::BatchNorm:
            return {size_t(in.ch), size_t(in.ch), size_t(in.ch), size_t(in.ch)};
        case LayerKind::Dense:
            return {size_t(l.units) * in.ch, size_t(l.units)};
        default:
            return {};
    }
}

ParamCounts count_parameters(const ModelSpec& m) {
    auto chain = shape_chain(m);
    ParamCounts c;
    for (size_t i = 0; i < m.layers.size(); ++i) {
        auto sizes = tensor_sizes(m.layers[i], chain[i]);
        int nt = trainable_tensor_count(m.layers[i].kind);
        for (size_t t = 0; t < sizes.size(); ++t) {
            if (int(t) < nt)
                c.trainable += sizes[t];
            else
                c.fixed += sizes[t];
        }
    }
    return c;
}

std::string_view kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv1D: return "conv1d";
        case LayerKind::ChannelNorm: return "channel_norm";
        case LayerKind::BatchNorm: return "batch_norm";
        case LayerKind::MaxPool1D: return "max_pool1d";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Dense: return "dense";
        case LayerKind::ReLU: return "relu";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

LayerKind kind_from_name(std::string_view s) {
    for (LayerKind k :
         {LayerKind::Conv1D, LayerKind::ChannelNorm, LayerKind::BatchNorm,
          LayerKind::MaxPool1D, LayerKind::Dropout, LayerKind::Flatten,
          LayerKind::Dense, LayerKind::ReLU, LayerKind::Softmax}) {
        if (kind_name(k) == s) return k;
    }
    throw Error("unknown layer kind: " + std::string(s));
}

std::string describe(const ModelSpec& m) {
    auto chain = shape_chain(m);
    std::ostringstream os;
    os << m.name << ": input (" << m.in_ch << ", " << m.in_len << ")\n";
    for (size_t i = 0; i < m.layers.size(); ++i) {
        auto sizes = tensor_sizes(m.layers[i], chain[i]);
        size_t n = 0;
        for (auto s : sizes) n += s;
        os << "  " << kind_name(m.layers[i].kind) << " -> (" << chain[i + 1].ch
           << ", " << chain[i + 1].len << ")";
        if (n > 0) os << "  params " << n;
        os << "\n";
    }
    auto c = count_parameters(m);
    os << "  trainable " << c.trainable << ", fixed " << c.fixed << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

ModelWeights init_weights(const ModelSpec& m, Rng& rng) {
    auto chain = shape_chain(m);
    ModelWeights w;
    w.layers.resize(m.layers.size());
    for (size_t i = 0; i < m.layers.size(); ++i) {
        const auto& l = m.layers[i];
        auto sizes = tensor_sizes(l, chain[i]);
        auto& lp = w.layers[i];
        lp.tensors.resize(sizes.size());
        for (size_t t = 0; t < sizes.size(); ++t) lp.tensors[t].resize(sizes[t]);
        switch (l.kind) {
            case LayerKind::Conv1D: {
                double limit = std::sqrt(
                    6.0 / (double(chain[i].ch) * l.kernel + double(l.filters) * l.kernel));
                for (auto& v : lp.tensors[0]) v = float(rng.uniform(-limit, limit));
                break;
            }
            case LayerKind::Dense: {
                double limit = std::sqrt(6.0 / (double(chain[i].ch) + double(l.units)));
                for (auto& v : lp.tensors[0]) v = float(rng.uniform(-limit, limit));
                break;
            }
            case LayerKind::BatchNorm:
                std::fill(lp.tensors[0].begin(), lp.tensors[0].end(), 1.0f);  // gamma
                std::fill(lp.tensors[3].begin(), lp.tensors[3].end(), 1.0f);  // run_var
                break;
            case LayerKind::ChannelNorm:
                std::fill(lp.tensors[0].begin(), lp.tensors[0].end(), 1.0f);  // gain
                break;
            default:
                break;
        }
    }
    return w;
}

std::vector<ParamView> trainable_params(const ModelSpec& m, ModelWeights& w) {
    std::vector<ParamView> views;
    for (size_t i = 0; i < m.layers.size(); ++i) {
        int nt = trainable_tensor_count(m.layers[i].kind);
        for (int t = 0; t < nt; ++t) {
            auto& v = w.layers[i].tensors[t];
            views.push_back({v.data(), v.size()});
        }
    }
    return views;
}

GradStore make_grad_store(const ModelSpec& m) {
    auto chain = shape_chain(m);
    GradStore g;
    g.layers.resize(m.layers.size());
    for (size_t i = 0; i < m.layers.size(); ++i) {
        auto sizes = tensor_sizes(m.layers[i], chain[i]);
        int nt = trainable_tensor_count(m.layers[i].kind);
        g.layers[i].tensors.resize(nt);
        for (int t = 0; t < nt; ++t) g.layers[i].tensors[t].resize(sizes[t]);
    }
    return g;
}

std::vector<ParamView> grad_views(GradStore& g) {
    std::vector<ParamView> views;
    for (auto& l : g.layers)
        for (auto& t : l.tensors) views.push_back({t.data(), t.size()});
    return views;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

struct LayerCache {
    std::vector<int> argmax;                 // max pool
    std::vector<float> mask;                 // dropout
    std::vector<float> xhat;                 // batch/channel norm
    std::vector<float> inv_std;              // bn: (C), cn: (B, C)
};

void check_input(const Batch& x, Shape s) {
    if (x.ch != s.ch || x.len != s.len)
        throw ShapeError("input shape does not match the layer graph");
}

// One layer over a batch. `mutable_params` enables batch-norm running-stat
// updates in train mode.
void apply_layer(const LayerSpec& l, const LayerParams& p, Shape in, Shape out,
                 const Batch& x, Mode mode, Rng* rng, Batch& y,
                 LayerCache* cache, LayerParams* mutable_params) {
    const int B = x.n;
    switch (l.kind) {
        case LayerKind::Conv1D:
            kern::conv1d_fwd(x.v.data(), B, in.ch, in.len, p.tensors[0].data(),
                             p.tensors[1].data(), l.filters, l.kernel, y.v.data());
            break;
        case LayerKind::ChannelNorm: {
            std::vector<float> scratch_h, scratch_s;
            float* xhat;
            float* istd;
            if (cache) {
                cache->xhat.resize(x.v.size());
                cache->inv_std.resize(size_t(B) * in.ch);
                xhat = cache->xhat.data();
                istd = cache->inv_std.data();
            } else {
                scratch_h.resize(x.v.size());
                scratch_s.resize(size_t(B) * in.ch);
                xhat = scratch_h.data();
                istd = scratch_s.data();
            }
            kern::cn_fwd(x.v.data(), B, in.ch, in.len, p.tensors[0].data(),
                         p.tensors[1].data(), kChannelNormEps, y.v.data(), xhat,
                         istd);
            break;
        }
        case LayerKind::BatchNorm: {
            std::vector<float> scratch_h, scratch_s, bmean, bvar;
            float* xhat;
            float* istd;
            if (cache) {
                cache->xhat.resize(x.v.size());
                cache->inv_std.resize(in.ch);
                xhat = cache->xhat.data();
                istd = cache->inv_std.data();
            } else {
                scratch_h.resize(x.v.size());
                scratch_s.resize(in.ch);
                xhat = scratch_h.data();
                istd = scratch_s.data();
            }
            if (mode == Mode::Train) {
                bmean.resize(in.ch);
                bvar.resize(in.ch);
                kern::bn_batch_stats(x.v.data(), B, in.ch, in.len, bmean.data(),
                                     bvar.data());
                kern::bn_fwd(x.v.data(), B, in.ch, in.len, bmean.data(),
                             bvar.data(), p.tensors[0].data(), p.tensors[1].data(),
                             kBatchNormEps, y.v.data(), xhat, istd);
                if (mutable_params) {
                    auto& rm = mutable_params->tensors[2];
                    auto& rv = mutable_params->tensors[3];
                    for (int c = 0; c < in.ch; ++c) {
                        rm[c] = kBatchNormMomentum * rm[c] +
                                (1.0f - kBatchNormMomentum) * bmean[c];
                        rv[c] = kBatchNormMomentum * rv[c] +
                                (1.0f - kBatchNormMomentum) * bvar[c];
                    }
                }
            } else {
                kern::bn_fwd(x.v.data(), B, in.ch, in.len, p.tensors[2].data(),
                             p.tensors[3].data(), p.tensors[0].data(),
                             p.tensors[1].data(), kBatchNormEps, y.v.data(), xhat,
                             istd);
            }
            break;
        }
        case LayerKind::MaxPool1D: {
            std::vector<int> scratch;
            int* arg;
            if (cache) {
                cache->argmax.resize(size_t(B) * in.ch * out.len);
                arg = cache->argmax.data();
            } else {
                scratch.resize(size_t(B) * in.ch * out.len);
                arg = scratch.data();
            }
            kern::maxpool_fwd(x.v.data(), B, in.ch, in.len, l.pool, l.stride,
                              y.v.data(), arg);
            break;
        }
        case LayerKind::Dropout:
            if (mode == Mode::Train) {
                if (!rng) throw Error("dropout in train mode needs an rng");
                const float keep_scale = 1.0f / (1.0f - l.rate);
                std::vector<float> local;
                float* mask;
                if (cache) {
                    cache->mask.resize(x.v.size());
                    mask = cache->mask.data();
                } else {
                    local.resize(x.v.size());
                    mask = local.data();
                }
                for (size_t i = 0; i < x.v.size(); ++i)
                    mask[i] = rng->uniform01() < l.rate ? 0.0f : keep_scale;
                kern::scale_by_mask(x.v.data(), x.v.size(), mask, y.v.data());
            } else {
                y.v = x.v;
            }
            break;
        case LayerKind::Flatten:
            y.v = x.v;  // same memory order, new dims
            break;
        case LayerKind::Dense:
            kern::dense_fwd(x.v.data(), B, in.ch, p.tensors[0].data(),
                            p.tensors[1].data(), l.units, y.v.data());
            break;
        case LayerKind::ReLU:
            kern::relu_fwd(x.v.data(), x.v.size(), y.v.data());
            break;
        case LayerKind::Softmax:
            kern::softmax_fwd(x.v.data(), B, in.ch, y.v.data());
            break;
    }
}

struct ForwardPass {
    std::vector<Batch> acts;  // acts[0] = input, acts[i+1] = layer i output
    std::vector<LayerCache> caches;
};

ForwardPass run_forward(const ModelSpec& m, const ModelWeights& w,
                        const Batch& x, Mode mode, Rng* rng, bool want_caches,
                        ModelWeights* mutable_w) {
    auto chain = shape_chain(m);
    check_input(x, chain[0]);
    ForwardPass fp;
    fp.acts.reserve(m.layers.size() + 1);
    fp.acts.push_back(x);
    if (want_caches) fp.caches.resize(m.layers.size());
    for (size_t i = 0; i < m.layers.size(); ++i) {
        Batch y(x.n, chain[i + 1].ch, chain[i + 1].len);
        apply_layer(m.layers[i], w.layers[i], chain[i], chain[i + 1],
                    fp.acts.back(), mode, rng, y,
                    want_caches ? &fp.caches[i] : nullptr,
                    mutable_w ? &mutable_w->layers[i] : nullptr);
        fp.acts.push_back(std::move(y));
    }
    return fp;
}

int argmax_first(const float* p, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (p[i] > p[best]) best = i;
    return best;
}

}  // namespace

std::vector<float> model_forward(const ModelSpec& m, const ModelWeights& w,
                                 const Tensor& x) {
    Batch b(1, x.ch, x.len);
    b.put(0, x);
    auto fp = run_forward(m, w, b, Mode::Infer, nullptr, false, nullptr);
    return fp.acts.back().v;
}

Tensor layer_forward(const LayerSpec& l, const LayerParams& p, Shape in,
                     const Tensor& x, Mode mode, Rng* rng) {
    ModelSpec tmp{.name = "layer", .in_ch = in.ch, .in_len = in.len, .layers = {l}};
    auto chain = shape_chain(tmp);
    Batch bx(1, x.ch, x.len);
    check_input(bx, chain[0]);
    bx.put(0, x);
    Batch by(1, chain[1].ch, chain[1].len);
    apply_layer(l, p, chain[0], chain[1], bx, mode, rng, by, nullptr, nullptr);
    return by.get(0);
}

double cross_entropy(std::span<const float> probs, int target) {
    if (target < 0 || size_t(target) >= probs.size())
        throw Error("cross_entropy: target out of range");
    double p = std::max(double(probs[target]), 1e-12);
    return -std::log(p);
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

BatchStats train_batch(const ModelSpec& m, ModelWeights& w, const Batch& x,
                       std::span<const int> targets, Rng& dropout_rng,
                       GradStore& grads) {
    const int B = x.n;
    if (int(targets.size()) != B) throw Error("train_batch: targets/batch mismatch");
    if (m.layers.empty() || m.layers.back().kind != LayerKind::Softmax)
        throw ShapeError("training requires a softmax head");
    auto chain = shape_chain(m);
    const int n_classes = chain.back().ch;
    for (int t : targets)
        if (t < 0 || t >= n_classes) throw Error("train_batch: target out of range");

    auto fp = run_forward(m, w, x, Mode::Train, &dropout_rng, true, &w);
    const Batch& probs = fp.acts.back();

    BatchStats stats;
    for (int b = 0; b < B; ++b) {
        const float* p = probs.sample(b);
        stats.loss_sum += cross_entropy({p, size_t(n_classes)}, targets[b]);
        if (argmax_first(p, n_classes) == targets[b]) ++stats.correct;
    }

    // Softmax + cross-entropy backward fused; /B makes every downstream
    // gradient a batch mean.
    const size_t last = m.layers.size() - 1;
    Batch dcur(B, chain[last].ch, chain[last].len);
    for (int b = 0; b < B; ++b) {
        const float* p = probs.sample(b);
        float* d = dcur.sample(b);
        for (int i = 0; i < n_classes; ++i)
            d[i] = (p[i] - (i == targets[b] ? 1.0f : 0.0f)) / float(B);
    }

    for (size_t ii = last; ii-- > 0;) {
        const auto& l = m.layers[ii];
        const Shape in = chain[ii], out = chain[ii + 1];
        const Batch& xin = fp.acts[ii];
        LayerCache& cache = fp.caches[ii];
        Batch dprev(B, in.ch, in.len);
        switch (l.kind) {
            case LayerKind::Conv1D:
                kern::conv1d_bwd_params(dcur.v.data(), xin.v.data(), B, in.ch,
                                        in.len, l.filters, l.kernel,
                                        grads.layers[ii].tensors[0].data(),
                                        grads.layers[ii].tensors[1].data());
                if (ii > 0)
                    kern::conv1d_bwd_input(dcur.v.data(), B, in.ch, in.len,
                                           w.layers[ii].tensors[0].data(),
                                           l.filters, l.kernel, dprev.v.data());
                break;
            case LayerKind::ChannelNorm:
                kern::cn_bwd(dcur.v.data(), cache.xhat.data(), B, in.ch, in.len,
                             w.layers[ii].tensors[0].data(), cache.inv_std.data(),
                             dprev.v.data(), grads.layers[ii].tensors[0].data(),
                             grads.layers[ii].tensors[1].data());
                break;
            case LayerKind::BatchNorm:
                kern::bn_bwd(dcur.v.data(), cache.xhat.data(), B, in.ch, in.len,
                             w.layers[ii].tensors[0].data(), cache.inv_std.data(),
                             dprev.v.data(), grads.layers[ii].tensors[0].data(),
                             grads.layers[ii].tensors[1].data());
                break;
            case LayerKind::MaxPool1D:
                kern::maxpool_bwd(dcur.v.data(), cache.argmax.data(), B, in.ch,
                                  in.len, l.pool, l.stride, dprev.v.data());
                break;
            case LayerKind::Dropout:
                kern::scale_by_mask(dcur.v.data(), dcur.v.size(),
                                    cache.mask.data(), dprev.v.data());
                break;
            case LayerKind::Flatten:
                dprev.v = dcur.v;
                break;
            case LayerKind::Dense:
                kern::dense_bwd_params(dcur.v.data(), xin.v.data(), B, in.ch,
                                       l.units,
                                       grads.layers[ii].tensors[0].data(),
                                       grads.layers[ii].tensors[1].data());
                kern::dense_bwd_input(dcur.v.data(), B, in.ch,
                                      w.layers[ii].tensors[0].data(), l.units,
                                      dprev.v.data());
                break;
            case LayerKind::ReLU:
                kern::relu_bwd(dcur.v.data(), xin.v.data(), xin.v.size(),
                               dprev.v.data());
                break;
            case LayerKind::Softmax:
                throw ShapeError("softmax is only supported as the final layer");
        }
        dcur = std::move(dprev);
        (void)out;
    }
    return stats;
}

std::vector<int> predict(const ModelSpec& m, const ModelWeights& w,
                         std::span<const Tensor> xs, int batch_size) {
    std::vector<int> out;
    out.reserve(xs.size());
    auto chain = shape_chain(m);
    const int n_classes = chain.back().ch;
    for (size_t i = 0; i < xs.size(); i += batch_size) {
        const int B = int(std::min(size_t(batch_size), xs.size() - i));
        Batch b(B, m.in_ch, m.in_len);
        for (int j = 0; j < B; ++j) b.put(j, xs[i + j]);
        auto fp = run_forward(m, w, b, Mode::Infer, nullptr, false, nullptr);
        for (int j = 0; j < B; ++j)
            out.push_back(argmax_first(fp.acts.back().sample(j), n_classes));
    }
    return out;
}

double accuracy(const ModelSpec& m, const ModelWeights& w,
                std::span<const Tensor> xs, std::span<const int> ys,
                int batch_size) {
    if (xs.empty()) throw Error("accuracy: empty evaluation set");
    auto pred = predict(m, w, xs, batch_size);
    size_t good = 0;
    for (size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == ys[i]) ++good;
    return double(good) / double(pred.size());
}

}  // namespace glove
