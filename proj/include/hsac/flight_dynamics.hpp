// 3-DOF point-mass aircraft model.
//
// Ground frame with z pointing down (altitude h = -z). Controls are the
// attack angle alpha and bank angle mu, driven by rate commands; throttle is
// pinned at its maximum. Every function here is pure.
#pragma once

#include <numbers>
#include <string>
#include <vector>

namespace hsac {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Kinematic and control state of one aircraft. SI units, radians.
struct UcavState {
    double x = 0.0;  ///< north, m
    double y = 0.0;  ///< east, m
    double z = 0.0;  ///< down, m
    double v = 0.0;  ///< airspeed, m/s
    double gamma = 0.0;  ///< flight-path angle, [-pi/2, pi/2]
    double chi = 0.0;    ///< heading, (-pi, pi]
    double alpha = 0.0;  ///< attack angle
    double mu = 0.0;     ///< bank angle, [-pi, pi]
    double eta = 1.0;    ///< throttle, fixed at 1

    double altitude() const { return -z; }

    bool operator==(const UcavState&) const = default;
};

/// Airframe, atmosphere and operating-limit constants.
///
/// Mass, thrust, load/speed/altitude bands and control limits follow the
/// published airframe table. The aerodynamic constants are not published;
/// the defaults trim the aircraft exactly at alpha = 0, v = 150 m/s
/// (lift = weight, drag = max thrust).
struct AircraftParams {
    double m = 150.0;
    double g = 9.80665;
    double t_max = 100.0 * 9.80665;  // 100 kgf
    double rho = 1.225;
    double s_w = 0.5337;
    double c_l0 = 0.2;
    double c_l_alpha = 3.5;
    double c_d0 = 0.02;
    double bdp = 2.8333;
    double n_max = 10.0;
    double q_max = 0.5 * 1.225 * 400.0 * 400.0;
    double h_min = 2000.0;
    double h_max = 8000.0;
    double v_min = 80.0;
    double v_max = 400.0;
    double alpha_min = deg_to_rad(-15.0);
    double alpha_max = deg_to_rad(15.0);
    double d_alpha = deg_to_rad(5.0);
    double d_mu = deg_to_rad(50.0);
    double dt = 0.1;

    /// Throws ConfigError when a band is empty or a positive constant is not.
    void validate() const;
};

struct AeroCoefficients {
    double c_l = 0.0;
    double c_d = 0.0;
};

struct AeroForces {
    double lift = 0.0;  // N
    double drag = 0.0;  // N
};

struct LoadAndPressure {
    double n = 0.0;      // load factor
    double q_bar = 0.0;  // dynamic pressure, Pa
};

struct StateDerivative {
    double dx = 0.0, dy = 0.0, dz = 0.0;  // m/s
    double dv = 0.0;                      // m/s^2
    double dgamma = 0.0, dchi = 0.0;      // rad/s
};

/// Rate commands for alpha and mu, rad/s.
struct ControlRates {
    double alpha_dot = 0.0;
    double mu_dot = 0.0;
};

enum class LimitViolation { LoadFactor, Altitude, Speed, DynamicPressure };

std::string to_string(LimitViolation violation);

struct LimitStatus {
    bool overloaded = false;
    std::vector<LimitViolation> reasons;

    bool has(LimitViolation violation) const;
};

AeroCoefficients lift_drag_coefficients(double alpha, const AircraftParams& params);
AeroForces aero_forces(double alpha, double v, const AircraftParams& params);
LoadAndPressure load_and_pressure(double alpha, double v, const AircraftParams& params);

/// Kinematics (position rates) and point-mass dynamics (v, gamma, chi rates).
StateDerivative state_derivative(const UcavState& state, const AircraftParams& params);

/// Clamps `rates` to the per-axis rate limits.
ControlRates clamp_rates(const ControlRates& rates, const AircraftParams& params);

/// One explicit-Euler step.
///
/// Controls are integrated first (rate clamped, alpha clamped to its band,
/// mu wrapped to [-pi, pi]); the kinematic derivative is then evaluated with
/// the new controls and the pre-step kinematic state, and applied to
/// x, y, z, v, gamma, chi. Heading is wrapped to (-pi, pi], flight-path angle
/// clamped to [-pi/2, pi/2].
UcavState step(const UcavState& state, const ControlRates& action, const AircraftParams& params);

/// Operational-limit check: load factor, altitude band, speed band, dynamic
/// pressure.
LimitStatus check_limits(const UcavState& state, const AircraftParams& params);

/// Wraps to (-pi, pi].
double wrap_angle(double angle);

}  // namespace hsac
