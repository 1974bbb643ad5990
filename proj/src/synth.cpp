#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dataset.hpp"
#include "error.hpp"
#include "parallel.hpp"

namespace cuphaptics {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

GroundTruthPose grid_pose(const GenerationConfig& config, std::uint64_t index) {
    const auto n = config.n_samples;
    auto n_phi = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const auto n_delta = (n + n_phi - 1) / n_phi;
    const auto row = index / n_phi;
    const auto col = index % n_phi;
    const double delta = n_delta == 1 ? config.delta_min_mm
                                      : config.delta_min_mm + (config.delta_max_mm - config.delta_min_mm) *
                                                                  static_cast<double>(row) /
                                                                  static_cast<double>(n_delta - 1);
    const double phi = config.phi_min_deg + (config.phi_max_deg - config.phi_min_deg) * static_cast<double>(col) /
                                                static_cast<double>(n_phi);
    return {delta, wrap_angle(phi)};
}

}  // namespace

void CupGeometry::validate() const {
    if (!(r_chamber_mm > 0.0 && r_chamber_mm < r_cup_mm))
        throw config_error("cup geometry requires 0 < r_chamber < r_cup");
}

void PressureFieldParams::validate() const {
    if (!(p_max_kpa > 0.0) || !std::isfinite(p_max_kpa)) throw config_error("p_max must be positive");
    if (!(transition_width_mm > 0.0) || !std::isfinite(transition_width_mm))
        throw config_error("transition width must be positive");
    if (!(noise_sigma_kpa >= 0.0) || !std::isfinite(noise_sigma_kpa))
        throw config_error("noise sigma must be non-negative");
    if (!(p_atm_kpa > 0.0) || !std::isfinite(p_atm_kpa)) throw config_error("p_atm must be positive");
}

void GenerationConfig::validate(const CupGeometry& geom) const {
    if (n_samples == 0) throw config_error("n_samples must be positive");
    if (!(delta_min_mm >= 0.0 && delta_min_mm <= delta_max_mm && delta_max_mm <= 2.0 * geom.r_cup_mm))
        throw config_error("delta range must satisfy 0 <= delta_min <= delta_max <= 2 r_cup (" +
                           std::to_string(2.0 * geom.r_cup_mm) + " mm)");
    if (!(std::isfinite(phi_min_deg) && std::isfinite(phi_max_deg) && phi_min_deg <= phi_max_deg &&
          phi_max_deg - phi_min_deg <= 360.0))
        throw config_error("phi range must be finite, ordered and span at most 360 degrees");
}

double coverage_depth(const CupGeometry& geom, const GroundTruthPose& pose, int chamber) {
    const double alpha = CupGeometry::kChamberAnglesDeg.at(static_cast<std::size_t>(chamber));
    return geom.r_chamber_mm * std::cos((alpha - pose.phi.degrees()) * kDegToRad) - pose.delta_mm + geom.r_cup_mm;
}

double chamber_vacuum_mean(const PressureFieldParams& params, double depth_mm) {
    const double w = params.transition_width_mm;
    switch (params.response) {
        case Response::Affine:
            return params.p_max_kpa * std::clamp(0.5 + depth_mm / (2.0 * w), 0.0, 1.0);
        case Response::Sigmoid:
            return params.p_max_kpa * logistic(depth_mm / w);
    }
    return 0.0;
}

double chamber_vacuum(const PressureFieldParams& params, double depth_mm, Rng& rng) {
    double v = chamber_vacuum_mean(params, depth_mm);
    // No draw at all when noiseless.
    if (params.noise_sigma_kpa > 0.0) v += params.noise_sigma_kpa * standard_normal(rng);
    return v;
}

SensorFrame synth_frame(const CupGeometry& geom, const PressureFieldParams& params, const GroundTruthPose& pose,
                        Rng& rng) {
    SensorFrame frame;
    frame.p_atm = params.p_atm_kpa;
    for (int i = 0; i < kChambers; ++i) {
        const double vac = chamber_vacuum(params, coverage_depth(geom, pose, i), rng);
        frame.p_ch[i] = std::clamp(params.p_atm_kpa - vac, 0.0, params.p_atm_kpa + kPressureNoiseTolerance);
    }
    return frame;
}

std::vector<LabeledSample> generate_dataset(const CupGeometry& geom, const PressureFieldParams& params,
                                            const GenerationConfig& config) {
    geom.validate();
    params.validate();
    config.validate(geom);

    std::vector<LabeledSample> out(config.n_samples);
    parallel_for(out.size(), [&](std::size_t i) {
        Rng rng = substream(config.seed, i);
        GroundTruthPose pose;
        if (config.sampling == Sampling::Grid) {
            pose = grid_pose(config, i);
        } else {
            pose.delta_mm = uniform(rng, config.delta_min_mm, config.delta_max_mm);
            pose.phi = wrap_angle(uniform(rng, config.phi_min_deg, config.phi_max_deg));
        }
        out[i] = LabeledSample{synth_frame(geom, params, pose, rng), pose};
    });
    return out;
}

}  // namespace cuphaptics
