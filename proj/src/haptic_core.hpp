#pragma once

#include <array>
#include <optional>

namespace cuphaptics {

inline constexpr int kChambers = 4;

// Pressure noise allowance, kPa: a chamber may read slightly above ambient.
inline constexpr double kPressureNoiseTolerance = 0.5;

// Below this norm (pressure-sum units) a direction vector carries no angle.
inline constexpr double kZeroVectorEps = 1e-9;

/// One reading of the cup: absolute chamber pressures and ambient, all kPa.
/// Chamber i (1-based in the literature) is p_ch[i - 1].
struct SensorFrame {
    std::array<double, kChambers> p_ch{};
    double p_atm = 101.325;

    /// Throws InvalidInput when a pressure is non-finite, negative, or a
    /// chamber exceeds ambient by more than the noise tolerance.
    void validate() const;
};

/// Gauge pressures P_i = p_atm - p_ch[i], kPa. Larger means a better seal.
struct VacuumPressures {
    std::array<double, kChambers> p{};
};

/// Tool-frame vector; x along x_tool, y along y_tool.
struct Vector2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const;
    friend bool operator==(const Vector2&, const Vector2&) = default;
};

/// Yaw in degrees, always in [0, 360).
class Angle {
public:
    Angle() = default;

    /// Wraps any finite value into [0, 360); throws InvalidInput otherwise.
    static Angle from_degrees(double degrees);

    double degrees() const noexcept { return value_; }
    double radians() const noexcept;

    friend bool operator==(const Angle&, const Angle&) = default;

private:
    explicit Angle(double wrapped) : value_(wrapped) {}
    double value_ = 0.0;
};

struct GroundTruthPose {
    double delta_mm = 0.0;
    Angle phi;
};

struct DirectionEstimate {
    Vector2 v_pred;
    std::optional<Angle> phi_pred;  // empty for a zero vector
};

Angle wrap_angle(double raw_degrees);

/// Smallest absolute difference between two yaws, in [0, 180].
double angular_error(Angle a, Angle b);

/// Polar angle of v, or nothing when |v| <= kZeroVectorEps.
std::optional<Angle> polar_angle(Vector2 v);

VacuumPressures vacuum_pressures(const SensorFrame& frame);

/// Pairwise-difference direction estimate:
///   x = (P1 + P4) - (P2 + P3),  y = (P3 + P4) - (P1 + P2).
/// Chambers 1 and 4 sit on +x_tool, chambers 3 and 4 on +y_tool.
DirectionEstimate model_direction(const VacuumPressures& vp);

}  // namespace cuphaptics
