#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "haptic_core.hpp"
#include "mlp.hpp"

namespace cuphaptics {

enum class Method { Mlp, ModelBased };

std::string method_name(Method m);  // "mlp" / "model_based"

struct Prediction {
    std::optional<Angle> phi_pred;  // absent: no defined direction
    Angle phi_true;
};

/// Error summary over the defined predictions; absent ones are counted only.
struct Scores {
    double rmse_deg = 0.0;
    double mae_deg = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_scored = 0;
    std::size_t n_undefined = 0;

    friend bool operator==(const Scores&, const Scores&) = default;
};

/// Wrap-aware angular RMSE over defined predictions. Throws InvalidInput when
/// nothing is left to score.
double rmse_deg(std::span<const Prediction> predictions);
double mae_deg(std::span<const Prediction> predictions);
Scores score(std::span<const Prediction> predictions);

std::vector<Prediction> evaluate_model_based(std::span<const LabeledSample> samples);
std::vector<Prediction> evaluate_mlp(const MlpModel& model, std::span<const LabeledSample> samples);

struct SeedRun {
    std::uint64_t seed = 0;
    Scores mlp;
    Scores model_based;
    std::vector<Prediction> mlp_predictions;
    std::vector<Prediction> model_predictions;
    TrainHistory history;
};

struct MethodSummary {
    double rmse_mean = 0.0;
    double rmse_std = 0.0;  // population std across seeds
    double mae_mean = 0.0;
    double mae_std = 0.0;
};

struct EvalReport {
    std::size_t n_samples = 0;
    double train_fraction = 0.0;
    std::vector<SeedRun> runs;  // in the order seeds were given
    MethodSummary mlp;
    MethodSummary model_based;
    bool single_run = false;  // std fields are 0 by convention

    const MethodSummary& summary(Method m) const { return m == Method::Mlp ? mlp : model_based; }
};

/// Per seed: split with that seed, train an MLP with that seed, score both
/// estimators on the same validation fold. Seeds run in parallel.
EvalReport compare(std::span<const LabeledSample> dataset, double train_fraction, const TrainConfig& train_config,
                   std::span<const std::uint64_t> seeds);

nlohmann::ordered_json report_json(const EvalReport& report);
void write_report_json(const EvalReport& report, const std::filesystem::path& path);
/// One row per method and seed.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

inline constexpr const char* kScatterCsvHeader = "phi_true_deg,phi_pred_deg,method";

struct ScatterRow {
    double phi_true_deg = 0.0;
    double phi_pred_deg = 0.0;
    std::string method;

    friend bool operator==(const ScatterRow&, const ScatterRow&) = default;
};

/// Writes defined predictions only.
void export_scatter(std::span<const Prediction> predictions, Method method, const std::filesystem::path& path);
std::vector<ScatterRow> read_scatter(const std::filesystem::path& path);

}  // namespace cuphaptics
