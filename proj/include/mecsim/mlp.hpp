#pragma once

#include "mecsim/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mecsim {

/// out x in weights, row-major, plus bias.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;
    std::vector<double> b;
};

/// Feed-forward Q network: ReLU hidden layers, one linear scalar output.
struct MlpWeights {
    std::vector<DenseLayer> layers;

    static MlpWeights zeros(std::size_t input, std::span<const int> hidden);
    /// He-uniform initialisation for the hidden layers, small output layer.
    static MlpWeights random(std::size_t input, std::span<const int> hidden, Rng& rng);

    std::size_t input_size() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t parameter_count() const;
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    /// Shapes must chain and end in a single output; throws ConfigError.
    void validate() const;
};

/// Reusable activation buffers for allocation-free forward passes.
struct MlpScratch {
    std::vector<std::vector<double>> act;
};

double mlp_q(std::span<const double> input, const MlpWeights& w, MlpScratch& scratch);
double mlp_q(std::span<const double> input, const MlpWeights& w);
/// Scores the concatenation state_vec ++ candidate_features.
double mlp_q(std::span<const double> state_vec, std::span<const double> candidate_features,
             const MlpWeights& w);

struct Transition {
    std::vector<double> input;                      // encoded (state, action)
    double reward = 0.0;
    std::vector<std::vector<double>> next_inputs;   // feasible next (state, action) pairs
    bool terminal = false;
};

struct LossGrad {
    double loss = 0.0;
    MlpWeights grad;
};

/// Squared TD error against a fixed target; the gradient flows only through
/// the prediction.
LossGrad q_loss_and_grad(std::span<const double> input, double target, const MlpWeights& w);

/// Target r + discount * max over next_inputs (0 when terminal or empty).
LossGrad q_loss_and_grad(const Transition& t, const MlpWeights& w, double discount);

/// w - learn_rate * grad.
MlpWeights sgd_step(MlpWeights w, const MlpWeights& grad, double learn_rate);
void sgd_step_inplace(MlpWeights& w, const MlpWeights& grad, double learn_rate);

/// Rescales grad to at most max_norm (global L2); returns the original norm.
double clip_gradient(MlpWeights& grad, double max_norm);

} // namespace mecsim
