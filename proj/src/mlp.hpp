#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dataset.hpp"
#include "haptic_core.hpp"

namespace cuphaptics {

enum class InputMode : std::uint8_t { Raw = 0, Standardized = 1 };

inline const std::vector<std::size_t> kDefaultLayerSizes{4, 16, 32, 16, 2};

/// Fully connected ReLU network with a linear output layer.
///
/// All parameters live in one flat buffer, layer after layer; within a layer
/// the weight matrix (fan_out x fan_in, row-major) comes first, then the bias.
/// Gradients and optimizer state share that layout.
class MlpModel {
public:
    explicit MlpModel(std::vector<std::size_t> layer_sizes = kDefaultLayerSizes);

    const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    std::size_t layer_count() const noexcept { return sizes_.size() - 1; }
    std::size_t input_size() const noexcept { return sizes_.front(); }
    std::size_t output_size() const noexcept { return sizes_.back(); }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    std::size_t weight_offset(std::size_t layer) const { return offsets_.at(layer); }
    std::size_t bias_offset(std::size_t layer) const { return offsets_.at(layer) + sizes_[layer + 1] * sizes_[layer]; }
    std::span<double> weights(std::size_t layer);
    std::span<const double> weights(std::size_t layer) const;
    std::span<double> biases(std::size_t layer);
    std::span<const double> biases(std::size_t layer) const;

    InputMode input_mode = InputMode::Raw;
    std::optional<FeatureStats> stats;  // present iff input_mode == Standardized

    /// Throws InvalidInput on non-finite parameters or inconsistent input mode.
    void validate() const;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

/// Glorot-uniform weights, zero biases, deterministic in seed.
MlpModel init_model(std::uint64_t seed, const std::vector<std::size_t>& layer_sizes = kDefaultLayerSizes);

std::vector<double> forward(const MlpModel& model, std::span<const double> input);

/// (cos phi, sin phi).
std::array<double, 2> target_encoding(Angle phi);
std::optional<Angle> decode_angle(std::span<const double> output);

/// Mean squared error over output components.
double loss(std::span<const double> pred, std::span<const double> target);

/// Row-major batch: `inputs` holds size x input_size values, `targets`
/// holds size x output_size.
struct BatchView {
    std::span<const double> inputs;
    std::span<const double> targets;
    std::size_t size = 0;
};

/// Gradient of the mean batch loss with respect to every parameter, written
/// into `grad` (parameter layout). Returns the mean batch loss.
/// ReLU'(0) is taken as 0.
double backward(const MlpModel& model, const BatchView& batch, std::span<double> grad);
std::vector<double> backward(const MlpModel& model, const BatchView& batch);

struct RmspropParams {
    double lr = 1e-3;
    double rho = 0.9;
    double eps = 1e-8;

    void validate() const;
};

struct RmspropState {
    RmspropParams hyper;
    std::vector<double> v;  // running mean of squared gradients

    RmspropState() = default;
    RmspropState(RmspropParams h, std::size_t n) : hyper(h), v(n, 0.0) {}
};

/// v <- rho v + (1 - rho) g^2;  theta <- theta - lr g / (sqrt(v) + eps)
void rmsprop_step(std::span<double> params, std::span<const double> grads, RmspropState& state);

struct TrainConfig {
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    std::uint64_t seed = 0;
    RmspropParams optimizer;
    InputMode input_mode = InputMode::Standardized;
    std::vector<std::size_t> layer_sizes = kDefaultLayerSizes;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_rmse_deg;
    double initial_val_loss = 0.0;
    double best_val_loss = 0.0;
    int best_epoch = -1;  // 0-based; -1 when no epoch beat the initial model
    bool stopped_early = false;

    std::size_t epochs() const noexcept { return train_loss.size(); }
    friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
    MlpModel model;
    TrainHistory history;
};

/// Mini-batch RMSprop with per-epoch reshuffling. Keeps the parameters with
/// the lowest validation loss and stops after `patience` epochs without
/// improvement. Fully deterministic in (config, data).
TrainResult train(std::span<const LabeledSample> train_set, std::span<const LabeledSample> val_set,
                  const TrainConfig& config);

/// Network input for a frame: standardized or raw chamber pressures.
std::array<double, kChambers> model_input(const MlpModel& model, const SensorFrame& frame);

/// Raw network output for a frame (the predicted direction vector).
std::array<double, 2> predict_vector(const MlpModel& model, const SensorFrame& frame);
std::optional<Angle> predict_angle(const MlpModel& model, const SensorFrame& frame);

inline constexpr char kModelMagic[] = "CUPMLP1";

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

/// JSON sidecar with training configuration and final metrics.
void write_model_sidecar(const std::filesystem::path& path, const MlpModel& model, const TrainConfig& config,
                         const TrainHistory& history);

}  // namespace cuphaptics
