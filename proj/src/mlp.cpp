#include "mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace cuphaptics {

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw invalid_input("an MLP needs at least an input and an output layer");
    if (std::ranges::any_of(sizes_, [](std::size_t s) { return s == 0; }))
        throw invalid_input("layer sizes must be positive");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(offset);
        offset += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(offset, 0.0);
}

std::span<double> MlpModel::weights(std::size_t layer) {
    return std::span(params_).subspan(weight_offset(layer), sizes_[layer + 1] * sizes_[layer]);
}
std::span<const double> MlpModel::weights(std::size_t layer) const {
    return std::span(params_).subspan(weight_offset(layer), sizes_[layer + 1] * sizes_[layer]);
}
std::span<double> MlpModel::biases(std::size_t layer) {
    return std::span(params_).subspan(bias_offset(layer), sizes_[layer + 1]);
}
std::span<const double> MlpModel::biases(std::size_t layer) const {
    return std::span(params_).subspan(bias_offset(layer), sizes_[layer + 1]);
}

void MlpModel::validate() const {
    if (!std::ranges::all_of(params_, [](double p) { return std::isfinite(p); }))
        throw invalid_input("model parameters must be finite");
    if ((input_mode == InputMode::Standardized) != stats.has_value())
        throw invalid_input("standardized models must carry feature statistics (and raw models must not)");
    if (stats) {
        if (input_size() != kChambers) throw invalid_input("standardized models take 4 inputs");
        for (int c = 0; c < kChambers; ++c)
            if (!std::isfinite(stats->mean[c]) || !(stats->std[c] > 0.0) || !std::isfinite(stats->std[c]))
                throw invalid_input("feature statistics must be finite with positive std");
    }
}

MlpModel init_model(std::uint64_t seed, const std::vector<std::size_t>& layer_sizes) {
    MlpModel model(layer_sizes);
    Rng rng(seed);
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const double fan_in = static_cast<double>(layer_sizes[l]);
        const double fan_out = static_cast<double>(layer_sizes[l + 1]);
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : model.weights(l)) w = uniform(rng, -bound, bound);
    }
    return model;
}

namespace {

// z = W a + b for one layer.
void affine(std::span<const double> w, std::span<const double> b, std::span<const double> a, std::span<double> z) {
    const std::size_t n_in = a.size();
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double* row = w.data() + j * n_in;
        double acc = b[j];
        for (std::size_t k = 0; k < n_in; ++k) acc += row[k] * a[k];
        z[j] = acc;
    }
}

void check_input(const MlpModel& model, std::span<const double> input) {
    if (input.size() != model.input_size())
        throw invalid_input("expected " + std::to_string(model.input_size()) + " inputs, got " +
                            std::to_string(input.size()));
    if (!std::ranges::all_of(input, [](double x) { return std::isfinite(x); }))
        throw invalid_input("network inputs must be finite");
}

}  // namespace

std::vector<double> forward(const MlpModel& model, std::span<const double> input) {
    check_input(model, input);
    std::vector<double> a(input.begin(), input.end());
    std::vector<double> z;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        z.assign(model.layer_sizes()[l + 1], 0.0);
        affine(model.weights(l), model.biases(l), a, z);
        if (l + 1 < model.layer_count())
            for (double& v : z) v = std::max(v, 0.0);
        a.swap(z);
    }
    return a;
}

std::array<double, 2> target_encoding(Angle phi) { return {std::cos(phi.radians()), std::sin(phi.radians())}; }

std::optional<Angle> decode_angle(std::span<const double> output) {
    if (output.size() != 2) throw invalid_input("angle decoding expects a 2-vector");
    if (!std::isfinite(output[0]) || !std::isfinite(output[1])) throw invalid_input("network output must be finite");
    return polar_angle({output[0], output[1]});
}

double loss(std::span<const double> pred, std::span<const double> target) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - target[i]) * (pred[i] - target[i]);
    return sum / static_cast<double>(pred.size());
}

double backward(const MlpModel& model, const BatchView& batch, std::span<double> grad) {
    if (batch.size == 0) throw invalid_input("backward needs a non-empty batch");
    const auto& sizes = model.layer_sizes();
    const std::size_t layers = model.layer_count();
    const std::size_t n_in = model.input_size();
    const std::size_t n_out = model.output_size();
    if (batch.inputs.size() != batch.size * n_in || batch.targets.size() != batch.size * n_out)
        throw invalid_input("batch buffers do not match the model shape");
    if (grad.size() != model.parameter_count()) throw invalid_input("gradient buffer has the wrong size");

    std::ranges::fill(grad, 0.0);

    // acts[l] is the input to layer l; acts[layers] is the network output.
    std::vector<std::vector<double>> acts(layers + 1);
    for (std::size_t l = 0; l <= layers; ++l) acts[l].resize(sizes[l]);
    std::vector<double> delta, prev_delta;

    const double inv_batch = 1.0 / static_cast<double>(batch.size);
    double total_loss = 0.0;
    for (std::size_t s = 0; s < batch.size; ++s) {
        const auto input = batch.inputs.subspan(s * n_in, n_in);
        const auto target = batch.targets.subspan(s * n_out, n_out);
        std::ranges::copy(input, acts[0].begin());
        for (std::size_t l = 0; l < layers; ++l) {
            affine(model.weights(l), model.biases(l), acts[l], acts[l + 1]);
            if (l + 1 < layers)
                for (double& v : acts[l + 1]) v = std::max(v, 0.0);
        }
        total_loss += loss(acts[layers], target);

        // d(mean batch loss)/d(output) for this sample
        delta.resize(n_out);
        for (std::size_t k = 0; k < n_out; ++k)
            delta[k] = 2.0 * (acts[layers][k] - target[k]) / static_cast<double>(n_out) * inv_batch;

        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t fan_in = sizes[l];
            const std::size_t fan_out = sizes[l + 1];
            double* gw = grad.data() + model.weight_offset(l);
            double* gb = grad.data() + model.bias_offset(l);
            const auto& a = acts[l];
            for (std::size_t j = 0; j < fan_out; ++j) {
                const double d = delta[j];
                gb[j] += d;
                if (d == 0.0) continue;
                double* row = gw + j * fan_in;
                for (std::size_t k = 0; k < fan_in; ++k) row[k] += d * a[k];
            }
            if (l == 0) break;
            // Through W^T and the ReLU of the previous layer. A post-ReLU
            // activation of exactly 0 means the pre-activation was <= 0.
            const auto w = model.weights(l);
            prev_delta.assign(fan_in, 0.0);
            for (std::size_t j = 0; j < fan_out; ++j) {
                const double d = delta[j];
                if (d == 0.0) continue;
                const double* row = w.data() + j * fan_in;
                for (std::size_t k = 0; k < fan_in; ++k) prev_delta[k] += row[k] * d;
            }
            for (std::size_t k = 0; k < fan_in; ++k)
                if (!(a[k] > 0.0)) prev_delta[k] = 0.0;
            delta.swap(prev_delta);
        }
    }
    return total_loss * inv_batch;
}

std::vector<double> backward(const MlpModel& model, const BatchView& batch) {
    std::vector<double> grad(model.parameter_count());
    backward(model, batch, grad);
    return grad;
}

void RmspropParams::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw config_error("learning rate must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw config_error("rho must lie in (0, 1)");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw config_error("eps must be positive");
}

void rmsprop_step(std::span<double> params, std::span<const double> grads, RmspropState& state) {
    if (params.size() != grads.size() || state.v.size() != params.size())
        throw invalid_input("parameter, gradient and optimizer state sizes differ");
    const auto& h = state.hyper;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        double& v = state.v[i];
        v = h.rho * v + (1.0 - h.rho) * g * g;
        params[i] -= h.lr * g / (std::sqrt(v) + h.eps);
    }
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw config_error("batch size must be at least 1");
    if (max_epochs < 1) throw config_error("max epochs must be at least 1");
    optimizer.validate();
    if (layer_sizes.size() < 2 || layer_sizes.front() != kChambers || layer_sizes.back() != 2)
        throw config_error("layer sizes must start with 4 inputs and end with 2 outputs");
}

std::array<double, kChambers> model_input(const MlpModel& model, const SensorFrame& frame) {
    if (model.input_mode == InputMode::Standardized) {
        if (!model.stats) throw invalid_input("standardized model without feature statistics");
        return standardize(frame, *model.stats);
    }
    return frame.p_ch;
}

std::array<double, 2> predict_vector(const MlpModel& model, const SensorFrame& frame) {
    if (model.input_size() != kChambers || model.output_size() != 2)
        throw invalid_input("direction models map 4 inputs to 2 outputs");
    frame.validate();
    const auto in = model_input(model, frame);
    const auto out = forward(model, in);
    return {out[0], out[1]};
}

std::optional<Angle> predict_angle(const MlpModel& model, const SensorFrame& frame) {
    return decode_angle(predict_vector(model, frame));
}

namespace {

struct Encoded {
    std::vector<double> inputs;
    std::vector<double> targets;
    std::size_t size = 0;
};

Encoded encode(const MlpModel& model, std::span<const LabeledSample> samples) {
    Encoded e;
    e.size = samples.size();
    e.inputs.reserve(samples.size() * kChambers);
    e.targets.reserve(samples.size() * 2);
    for (const auto& s : samples) {
        for (double x : model_input(model, s.frame)) e.inputs.push_back(x);
        for (double t : target_encoding(s.pose.phi)) e.targets.push_back(t);
    }
    return e;
}

struct Evaluation {
    double loss = 0.0;
    double rmse_deg = 0.0;
};

Evaluation evaluate(const MlpModel& model, const Encoded& data, std::span<const LabeledSample> samples) {
    double loss_sum = 0.0;
    double sq_err = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < data.size; ++i) {
        const auto out = forward(model, std::span(data.inputs).subspan(i * kChambers, kChambers));
        loss_sum += loss(out, std::span(data.targets).subspan(i * 2, 2));
        if (const auto phi = polar_angle({out[0], out[1]})) {
            const double err = angular_error(*phi, samples[i].pose.phi);
            sq_err += err * err;
            ++scored;
        }
    }
    const double n = static_cast<double>(data.size);
    return {loss_sum / n,
            scored ? std::sqrt(sq_err / static_cast<double>(scored)) : std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace

TrainResult train(std::span<const LabeledSample> train_set, std::span<const LabeledSample> val_set,
                  const TrainConfig& config) {
    config.validate();
    if (train_set.empty() || val_set.empty()) throw config_error("training and validation sets must be non-empty");

    MlpModel model = init_model(config.seed, config.layer_sizes);
    model.input_mode = config.input_mode;
    if (config.input_mode == InputMode::Standardized) model.stats = feature_stats(train_set);

    const Encoded train_data = encode(model, train_set);
    const Encoded val_data = encode(model, val_set);

    TrainHistory history;
    history.initial_val_loss = evaluate(model, val_data, val_set).loss;
    history.best_val_loss = history.initial_val_loss;
    std::vector<double> best_params(model.params().begin(), model.params().end());

    RmspropState opt(config.optimizer, model.parameter_count());
    std::vector<double> grad(model.parameter_count());
    std::vector<std::size_t> order(train_data.size);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(mix_seed(config.seed ^ 0x5348'5546'464c'4521ull));

    std::vector<double> batch_inputs, batch_targets;
    std::size_t stale_epochs = 0;
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle(std::span(order), shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch_inputs.clear();
            batch_targets.clear();
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                batch_inputs.insert(batch_inputs.end(), train_data.inputs.begin() + i * kChambers,
                                    train_data.inputs.begin() + (i + 1) * kChambers);
                batch_targets.insert(batch_targets.end(), train_data.targets.begin() + i * 2,
                                     train_data.targets.begin() + (i + 1) * 2);
            }
            const BatchView batch{batch_inputs, batch_targets, end - start};
            epoch_loss += backward(model, batch, grad) * static_cast<double>(end - start);
            rmsprop_step(model.params(), grad, opt);
        }

        const Evaluation val = evaluate(model, val_data, val_set);
        history.train_loss.push_back(epoch_loss / static_cast<double>(train_data.size));
        history.val_loss.push_back(val.loss);
        history.val_rmse_deg.push_back(val.rmse_deg);

        if (val.loss < history.best_val_loss) {
            history.best_val_loss = val.loss;
            history.best_epoch = static_cast<int>(epoch);
            std::ranges::copy(model.params(), best_params.begin());
            stale_epochs = 0;
        } else if (++stale_epochs >= config.patience && epoch + 1 < config.max_epochs) {
            history.stopped_early = true;
            break;
        }
    }

    std::ranges::copy(best_params, model.params().begin());
    model.validate();
    return {std::move(model), std::move(history)};
}

}  // namespace cuphaptics
