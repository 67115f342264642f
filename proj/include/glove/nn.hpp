#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glove/rng.hpp"
#include "glove/tensor.hpp"

namespace glove {

// ---------------------------------------------------------------------------
// Layer graph description
// ---------------------------------------------------------------------------

enum class LayerKind {
    Conv1D,       // 'same' zero padding, stride 1
    ChannelNorm,  // per-sample channel standardisation + learned affine
    BatchNorm,    // per-channel, running stats for inference
    MaxPool1D,
    Dropout,
    Flatten,
    Dense,
    ReLU,
    Softmax,
};

struct LayerSpec {
    LayerKind kind{};
    int filters = 0, kernel = 0;  // Conv1D
    int pool = 0, stride = 0;     // MaxPool1D
    float rate = 0.0f;            // Dropout
    int units = 0;                // Dense

    static LayerSpec conv1d(int filters, int kernel);
    static LayerSpec channel_norm();
    static LayerSpec batch_norm();
    static LayerSpec max_pool(int pool, int stride);
    static LayerSpec dropout(float rate);
    static LayerSpec flatten();
    static LayerSpec dense(int units);
    static LayerSpec relu();
    static LayerSpec softmax();
};

struct ModelSpec {
    std::string name;
    int in_ch = 0;
    int in_len = 0;
    std::vector<LayerSpec> layers;
};

struct Shape {
    int ch = 0, len = 0;
    bool operator==(const Shape&) const = default;
};

// Shape before each layer plus the final output: chain[i] feeds layer i,
// chain.back() is the model output. Throws ShapeError on invalid graphs.
std::vector<Shape> shape_chain(const ModelSpec& m);

// The two recogniser architectures. Movement windows are (3, L) and feed a
// 2-way null/gesture head; capacitance windows are (4, L) and feed the
// 9-way head (null + 8 gestures).
ModelSpec build_inertial_model(int window_len = 100);
ModelSpec build_capacitive_model(int window_len = 100);

struct ParamCounts {
    size_t trainable = 0;
    size_t fixed = 0;  // batch-norm running stats
    size_t total() const { return trainable + fixed; }
};
ParamCounts count_parameters(const ModelSpec& m);
std::string describe(const ModelSpec& m);

std::string_view kind_name(LayerKind k);
LayerKind kind_from_name(std::string_view s);

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

// Tensor slots per kind (trainable slots always come first):
//   Conv1D:      W (F*C*K), b (F)
//   ChannelNorm: gain (C*L), shift (C*L)
//   BatchNorm:   gamma (C), beta (C) | run_mean (C), run_var (C)
//   Dense:       W (U*I), b (U)
struct LayerParams {
    std::vector<std::vector<float>> tensors;
};

struct ModelWeights {
    std::vector<LayerParams> layers;
};

int tensor_count(LayerKind k);
int trainable_tensor_count(LayerKind k);
std::vector<size_t> tensor_sizes(const LayerSpec& l, Shape in);

// Glorot-uniform conv/dense init, identity norms. Draw order is fixed, so a
// seed pins the full weight state.
ModelWeights init_weights(const ModelSpec& m, Rng& rng);

struct ParamView {
    float* data = nullptr;
    size_t n = 0;
};
// Trainable tensors in declaration order; the optimiser and the gradient
// store both follow this order.
std::vector<ParamView> trainable_params(const ModelSpec& m, ModelWeights& w);

struct GradStore {
    std::vector<LayerParams> layers;  // trainable slots only, others empty
};
GradStore make_grad_store(const ModelSpec& m);
std::vector<ParamView> grad_views(GradStore& g);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

enum class Mode { Infer, Train };

// Single-window inference (batch norm uses running stats, dropout is
// identity). Returns the output activations, e.g. class probabilities.
std::vector<float> model_forward(const ModelSpec& m, const ModelWeights& w,
                                 const Tensor& x);

// One layer applied to one tensor; `in` is the expected input shape.
Tensor layer_forward(const LayerSpec& l, const LayerParams& p, Shape in,
                     const Tensor& x, Mode mode, Rng* rng = nullptr);

// -log(max(p[target], 1e-12))
double cross_entropy(std::span<const float> probs, int target);

struct BatchStats {
    double loss_sum = 0.0;
    int correct = 0;
};

// Full train-mode forward/backward over one batch. Gradients are means over
// the batch and overwrite `grads`. Batch-norm running stats are updated.
// The final layer must be Softmax; its backward is fused with cross-entropy.
BatchStats train_batch(const ModelSpec& m, ModelWeights& w, const Batch& x,
                       std::span<const int> targets, Rng& dropout_rng,
                       GradStore& grads);

// Inference over a set of windows, batched internally.
std::vector<int> predict(const ModelSpec& m, const ModelWeights& w,
                         std::span<const Tensor> xs, int batch_size = 32);
double accuracy(const ModelSpec& m, const ModelWeights& w,
                std::span<const Tensor> xs, std::span<const int> ys,
                int batch_size = 32);

inline constexpr float kBatchNormEps = 1e-3f;
inline constexpr float kBatchNormMomentum = 0.99f;
inline constexpr float kChannelNormEps = 1e-3f;

}  // namespace glove
