#include "mecsim/mlp.hpp"

#include "mecsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mecsim {

namespace {

std::vector<std::size_t> chain(std::size_t input, std::span<const int> hidden) {
    std::vector<std::size_t> sizes{input};
    for (int h : hidden) {
        if (h < 1) throw ConfigError("agent.hidden: layer widths must be >= 1");
        sizes.push_back(static_cast<std::size_t>(h));
    }
    sizes.push_back(1);
    return sizes;
}

} // namespace

MlpWeights MlpWeights::zeros(std::size_t input, std::span<const int> hidden) {
    const auto sizes = chain(input, hidden);
    MlpWeights m;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer;
        layer.in = sizes[l];
        layer.out = sizes[l + 1];
        layer.w.assign(layer.in * layer.out, 0.0);
        layer.b.assign(layer.out, 0.0);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

MlpWeights MlpWeights::random(std::size_t input, std::span<const int> hidden, Rng& rng) {
    MlpWeights m = zeros(input, hidden);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto& layer = m.layers[l];
        const bool last = l + 1 == m.layers.size();
        const double limit = last ? 1.0 / std::sqrt(static_cast<double>(layer.in))
                                  : std::sqrt(6.0 / static_cast<double>(layer.in));
        for (double& v : layer.w) v = rng.uniform(-limit, limit);
    }
    return m;
}

std::size_t MlpWeights::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

std::vector<double> MlpWeights::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers) {
        flat.insert(flat.end(), l.w.begin(), l.w.end());
        flat.insert(flat.end(), l.b.begin(), l.b.end());
    }
    return flat;
}

void MlpWeights::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ConfigError("mlp: flat parameter count does not match layer shapes");
    }
    std::size_t pos = 0;
    for (auto& l : layers) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l.w.size(), l.w.begin());
        pos += l.w.size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l.b.size(), l.b.begin());
        pos += l.b.size();
    }
}

void MlpWeights::validate() const {
    if (layers.empty()) throw ConfigError("mlp: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.w.size() != layer.in * layer.out || layer.b.size() != layer.out) {
            throw ConfigError("mlp: layer " + std::to_string(l) + " storage does not match its shape");
        }
        if (l > 0 && layers[l - 1].out != layer.in) {
            throw ConfigError("mlp: layer " + std::to_string(l) + " input does not chain");
        }
    }
    if (layers.back().out != 1) throw ConfigError("mlp: output layer must be scalar");
}

double mlp_q(std::span<const double> input, const MlpWeights& w, MlpScratch& scratch) {
    if (w.layers.empty() || input.size() != w.layers.front().in) {
        throw ConfigError("mlp_q: input size " + std::to_string(input.size()) +
                          " does not match network input " + std::to_string(w.input_size()));
    }
    scratch.act.resize(w.layers.size());
    std::span<const double> x = input;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& layer = w.layers[l];
        auto& y = scratch.act[l];
        y.resize(layer.out);
        const bool hidden = l + 1 < w.layers.size();
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + o * layer.in;
            double acc = layer.b[o];
            for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
            y[o] = hidden ? std::max(acc, 0.0) : acc;
        }
        x = y;
    }
    return x[0];
}

double mlp_q(std::span<const double> input, const MlpWeights& w) {
    MlpScratch scratch;
    return mlp_q(input, w, scratch);
}

double mlp_q(std::span<const double> state_vec, std::span<const double> candidate_features,
             const MlpWeights& w) {
    std::vector<double> input(state_vec.begin(), state_vec.end());
    input.insert(input.end(), candidate_features.begin(), candidate_features.end());
    return mlp_q(input, w);
}

LossGrad q_loss_and_grad(std::span<const double> input, double target, const MlpWeights& w) {
    MlpScratch scratch;
    const double q = mlp_q(input, w, scratch);
    const double td = target - q;
    LossGrad out;
    out.loss = td * td;
    out.grad = w;
    for (auto& l : out.grad.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    // dloss/dq = -2 td; propagate back through the layers.
    std::vector<double> delta{-2.0 * td};
    for (std::size_t l = w.layers.size(); l-- > 0;) {
        const auto& layer = w.layers[l];
        auto& g = out.grad.layers[l];
        std::span<const double> x = l == 0 ? input : std::span<const double>(scratch.act[l - 1]);
        for (std::size_t o = 0; o < layer.out; ++o) {
            g.b[o] = delta[o];
            double* grow = g.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) grow[i] = delta[o] * x[i];
        }
        if (l == 0) break;
        std::vector<double> prev(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * delta[o];
        }
        // ReLU derivative at the previous layer's output; 0 at the kink.
        for (std::size_t i = 0; i < layer.in; ++i) {
            if (!(x[i] > 0.0)) prev[i] = 0.0;
        }
        delta = std::move(prev);
    }
    return out;
}

LossGrad q_loss_and_grad(const Transition& t, const MlpWeights& w, double discount) {
    double bootstrap = 0.0;
    if (!t.terminal && !t.next_inputs.empty()) {
        MlpScratch scratch;
        bootstrap = -std::numeric_limits<double>::infinity();
        for (const auto& next : t.next_inputs) bootstrap = std::max(bootstrap, mlp_q(next, w, scratch));
    }
    return q_loss_and_grad(t.input, t.reward + discount * bootstrap, w);
}

void sgd_step_inplace(MlpWeights& w, const MlpWeights& grad, double learn_rate) {
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        auto& layer = w.layers[l];
        const auto& g = grad.layers.at(l);
        for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] -= learn_rate * g.w[i];
        for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= learn_rate * g.b[i];
    }
}

MlpWeights sgd_step(MlpWeights w, const MlpWeights& grad, double learn_rate) {
    sgd_step_inplace(w, grad, learn_rate);
    return w;
}

double clip_gradient(MlpWeights& grad, double max_norm) {
    double sq = 0.0;
    for (const auto& l : grad.layers) {
        for (double v : l.w) sq += v * v;
        for (double v : l.b) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / norm;
        for (auto& l : grad.layers) {
            for (double& v : l.w) v *= s;
            for (double& v : l.b) v *= s;
        }
    }
    return norm;
}

} // namespace mecsim
