#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "haptic_core.hpp"
#include "rng.hpp"

namespace cuphaptics {

struct LabeledSample;

/// Cup layout. Chamber centers sit on the quadrant diagonals, which is what
/// makes the pairwise sums of the direction estimate line up with the tool axes.
struct CupGeometry {
    double r_cup_mm = 15.0;
    double r_chamber_mm = 10.0;
    static constexpr std::array<double, kChambers> kChamberAnglesDeg{315.0, 225.0, 135.0, 45.0};

    void validate() const;
};

enum class Response { Affine, Sigmoid };

struct PressureFieldParams {
    double p_max_kpa = 10.0;
    double transition_width_mm = 4.0;
    Response response = Response::Sigmoid;
    double noise_sigma_kpa = 0.3;
    double p_atm_kpa = 101.325;

    void validate() const;
};

enum class Sampling { UniformRandom, Grid };

struct GenerationConfig {
    std::uint64_t n_samples = 25273;
    double delta_min_mm = 7.0;
    double delta_max_mm = 14.0;
    double phi_min_deg = 0.0;
    double phi_max_deg = 360.0;
    Sampling sampling = Sampling::UniformRandom;
    std::uint64_t seed = 0;

    void validate(const CupGeometry& geom) const;
};

/// Signed depth (mm) of chamber `chamber` (0-based) inside the plate.
///
/// The plate occupies the half-plane whose inward normal in the tool frame is
/// (cos phi, sin phi); its edge lies at signed coordinate delta - r_cup along
/// that normal. delta = 0 is a full seal, delta = 2 r_cup is fully off.
double coverage_depth(const CupGeometry& geom, const GroundTruthPose& pose, int chamber);

/// Noiseless vacuum a chamber at depth d holds.
double chamber_vacuum_mean(const PressureFieldParams& params, double depth_mm);

/// chamber_vacuum_mean plus i.i.d. Gaussian sensor noise drawn from rng.
double chamber_vacuum(const PressureFieldParams& params, double depth_mm, Rng& rng);

SensorFrame synth_frame(const CupGeometry& geom, const PressureFieldParams& params, const GroundTruthPose& pose,
                        Rng& rng);

/// Sample i draws its pose (random mode) and its noise from substream(seed, i),
/// so the result does not depend on generation order or thread count.
std::vector<LabeledSample> generate_dataset(const CupGeometry& geom, const PressureFieldParams& params,
                                            const GenerationConfig& config);

}  // namespace cuphaptics
