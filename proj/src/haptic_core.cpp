#include "haptic_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace cuphaptics {

void SensorFrame::validate() const {
    if (!std::isfinite(p_atm) || p_atm < 0.0)
        throw invalid_input("atmospheric pressure must be finite and non-negative, got " + std::to_string(p_atm));
    for (int i = 0; i < kChambers; ++i) {
        const double p = p_ch[i];
        if (!std::isfinite(p) || p < 0.0)
            throw invalid_input("chamber " + std::to_string(i + 1) + " pressure must be finite and non-negative");
        if (p > p_atm + kPressureNoiseTolerance)
            throw invalid_input("chamber " + std::to_string(i + 1) + " pressure exceeds ambient by more than " +
                                std::to_string(kPressureNoiseTolerance) + " kPa");
    }
}

double Vector2::norm() const { return std::hypot(x, y); }

Angle Angle::from_degrees(double degrees) {
    if (!std::isfinite(degrees)) throw invalid_input("angle must be finite");
    double r = std::fmod(degrees, 360.0);
    if (r < 0.0) r += 360.0;
    // -1e-20 + 360 rounds to 360
    if (r >= 360.0) r = 0.0;
    return Angle(r);
}

double Angle::radians() const noexcept { return value_ * std::numbers::pi / 180.0; }

Angle wrap_angle(double raw_degrees) { return Angle::from_degrees(raw_degrees); }

double angular_error(Angle a, Angle b) {
    const double d = std::fmod(std::abs(a.degrees() - b.degrees()), 360.0);
    return std::min(d, 360.0 - d);
}

std::optional<Angle> polar_angle(Vector2 v) {
    if (!(v.norm() > kZeroVectorEps)) return std::nullopt;
    return wrap_angle(std::atan2(v.y, v.x) * 180.0 / std::numbers::pi);
}

VacuumPressures vacuum_pressures(const SensorFrame& frame) {
    frame.validate();
    VacuumPressures vp;
    for (int i = 0; i < kChambers; ++i) vp.p[i] = frame.p_atm - frame.p_ch[i];
    return vp;
}

DirectionEstimate model_direction(const VacuumPressures& vp) {
    const auto& p = vp.p;
    DirectionEstimate est;
    est.v_pred.x = (p[0] + p[3]) - (p[1] + p[2]);
    est.v_pred.y = (p[2] + p[3]) - (p[0] + p[1]);
    est.phi_pred = polar_angle(est.v_pred);
    return est;
}

}  // namespace cuphaptics
