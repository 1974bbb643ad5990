#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haptic_core.hpp"
#include "mlp.hpp"
#include "synth.hpp"

namespace cuphaptics {

enum class EstimatorKind { ModelBased, Mlp, Oracle };

std::string estimator_name(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator(std::string_view name);

struct Estimator {
    EstimatorKind kind = EstimatorKind::ModelBased;
    std::shared_ptr<const MlpModel> model;  // required for Mlp
};

struct SearchConfig {
    double step_size_mm = 2.0;
    std::size_t max_steps = 25;
    double success_delta_mm = 7.0;
    Estimator estimator;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class Termination { Success, NoGradient, BudgetExhausted };

struct SearchResult {
    bool success = false;
    std::size_t steps = 0;
    Termination reason = Termination::BudgetExhausted;
    std::vector<GroundTruthPose> trajectory;  // steps + 1 poses
    std::vector<DirectionEstimate> estimates;
};

/// Direction the estimator reports for a frame sensed at `truth`.
DirectionEstimate estimate_direction(const Estimator& estimator, const SensorFrame& frame,
                                     const GroundTruthPose& truth);

/// Translates the cup step_size along the estimated direction. The edge is
/// fixed, so phi is unchanged and delta shrinks by the projection of the
/// motion on the plate's inward normal (never below 0).
GroundTruthPose search_step(const GroundTruthPose& pose, const DirectionEstimate& estimate, double step_size_mm);

/// Sense, estimate, move until delta <= success_delta, the estimator has no
/// direction, or max_steps moves were made. Step k senses with
/// substream(config.seed, k).
SearchResult run_search(const GroundTruthPose& initial, const SearchConfig& config, const CupGeometry& geom,
                        const PressureFieldParams& params);

struct SearchGrid {
    std::vector<double> delta0_mm;
    std::vector<double> phi0_deg;
    std::vector<double> noise_sigma_kpa;
    std::vector<Estimator> estimators;
    std::size_t reps = 1;
    SearchConfig base;  // estimator field ignored
    CupGeometry geom;
    PressureFieldParams field;  // noise_sigma overridden per cell
};

struct SearchCell {
    double delta0_mm = 0.0;
    double phi0_deg = 0.0;
    double noise_sigma_kpa = 0.0;
    std::string estimator;
    double success_rate = 0.0;
    double mean_steps = 0.0;

    friend bool operator==(const SearchCell&, const SearchCell&) = default;
};

/// Every (estimator, noise, delta0, phi0) cell, `reps` runs each; run r uses
/// seed mix_seed(base.seed + r), so cells share their noise realizations.
std::vector<SearchCell> batch_search(const SearchGrid& grid);

inline constexpr const char* kSearchCsvHeader = "delta0_mm,phi0_deg,noise_sigma_kpa,estimator,success_rate,mean_steps";
void write_search_csv(const std::vector<SearchCell>& cells, const std::filesystem::path& path);

}  // namespace cuphaptics
