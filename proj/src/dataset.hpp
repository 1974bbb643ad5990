#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "haptic_core.hpp"

namespace cuphaptics {

struct LabeledSample {
    SensorFrame frame;
    GroundTruthPose pose;
};

inline constexpr const char* kDatasetCsvHeader = "p_ch1_kpa,p_ch2_kpa,p_ch3_kpa,p_ch4_kpa,p_atm_kpa,delta_mm,phi_deg";

/// Writes one row per sample, each value with 9 significant digits.
void write_csv(std::span<const LabeledSample> samples, const std::filesystem::path& path);

/// Parses a dataset CSV. Schema or invariant violations throw a Parse error
/// naming the line and column.
std::vector<LabeledSample> read_csv(const std::filesystem::path& path);

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

struct Split {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> validation;
};

/// Shuffle-then-cut; |train| = round(n * train_fraction).
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);
Split split(std::span<const LabeledSample> samples, const SplitSpec& spec);

/// Per-channel mean and population standard deviation of the chamber pressures.
struct FeatureStats {
    std::array<double, kChambers> mean{};
    std::array<double, kChambers> std{};

    friend bool operator==(const FeatureStats&, const FeatureStats&) = default;
};

FeatureStats feature_stats(std::span<const LabeledSample> train);
std::array<double, kChambers> standardize(const SensorFrame& frame, const FeatureStats& stats);

}  // namespace cuphaptics
