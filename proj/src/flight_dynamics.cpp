#include "hsac/flight_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("aircraft params: ") + what);
}

}  // namespace

void AircraftParams::validate() const {
    require(m > 0.0, "m must be > 0");
    require(g > 0.0, "g must be > 0");
    require(rho > 0.0, "rho must be > 0");
    require(s_w > 0.0, "s_w must be > 0");
    require(dt > 0.0, "dt must be > 0");
    require(n_max > 1.0, "n_max must be > 1");
    require(t_max >= 0.0, "t_max must be >= 0");
    require(q_max > 0.0, "q_max must be > 0");
    require(h_min < h_max, "altitude band is empty");
    require(v_min > 0.0 && v_min < v_max, "speed band must satisfy 0 < v_min < v_max");
    require(alpha_min < alpha_max, "alpha band is empty");
    require(d_alpha > 0.0 && d_mu > 0.0, "rate limits must be > 0");
}

std::string to_string(LimitViolation violation) {
    switch (violation) {
        case LimitViolation::LoadFactor: return "load factor";
        case LimitViolation::Altitude: return "altitude";
        case LimitViolation::Speed: return "speed";
        case LimitViolation::DynamicPressure: return "dynamic pressure";
    }
    return "unknown";
}

bool LimitStatus::has(LimitViolation violation) const {
    return std::find(reasons.begin(), reasons.end(), violation) != reasons.end();
}

AeroCoefficients lift_drag_coefficients(double alpha, const AircraftParams& params) {
    const double c_l = params.c_l0 + params.c_l_alpha * alpha;
    return {c_l, params.c_d0 + params.bdp * c_l * c_l};
}

AeroForces aero_forces(double alpha, double v, const AircraftParams& params) {
    const auto coeff = lift_drag_coefficients(alpha, params);
    const double qs = 0.5 * params.rho * v * v * params.s_w;
    return {qs * coeff.c_l, qs * coeff.c_d};
}

LoadAndPressure load_and_pressure(double alpha, double v, const AircraftParams& params) {
    const auto forces = aero_forces(alpha, v, params);
    return {forces.lift / (params.m * params.g), 0.5 * params.rho * v * v};
}

StateDerivative state_derivative(const UcavState& s, const AircraftParams& p) {
    const auto forces = aero_forces(s.alpha, s.v, p);
    const double thrust = s.eta * p.t_max;
    const double cos_gamma = std::cos(s.gamma);
    const double sin_gamma = std::sin(s.gamma);
    // Thrust component normal to the velocity vector plus lift.
    const double normal_force = thrust * std::sin(s.alpha) + forces.lift;

    StateDerivative d;
    d.dx = s.v * cos_gamma * std::cos(s.chi);
    d.dy = s.v * cos_gamma * std::sin(s.chi);
    d.dz = -s.v * sin_gamma;
    d.dv = (thrust * std::cos(s.alpha) - forces.drag) / p.m - p.g * sin_gamma;
    d.dchi = normal_force * std::sin(s.mu) / (p.m * s.v * cos_gamma);
    d.dgamma = (normal_force * std::cos(s.mu) - p.m * p.g * cos_gamma) / (p.m * s.v);
    return d;
}

ControlRates clamp_rates(const ControlRates& rates, const AircraftParams& params) {
    return {std::clamp(rates.alpha_dot, -params.d_alpha, params.d_alpha),
            std::clamp(rates.mu_dot, -params.d_mu, params.d_mu)};
}

double wrap_angle(double angle) {
    double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) wrapped += 2.0 * kPi;
    return wrapped;
}

UcavState step(const UcavState& state, const ControlRates& action, const AircraftParams& params) {
    const auto rates = clamp_rates(action, params);

    UcavState next = state;
    next.eta = 1.0;
    next.alpha = std::clamp(state.alpha + rates.alpha_dot * params.dt, params.alpha_min,
                            params.alpha_max);
    next.mu = std::remainder(state.mu + rates.mu_dot * params.dt, 2.0 * kPi);

    const auto d = state_derivative(next, params);
    next.x = state.x + d.dx * params.dt;
    next.y = state.y + d.dy * params.dt;
    next.z = state.z + d.dz * params.dt;
    next.v = state.v + d.dv * params.dt;
    next.gamma = std::clamp(state.gamma + d.dgamma * params.dt, -0.5 * kPi, 0.5 * kPi);
    next.chi = wrap_angle(state.chi + d.dchi * params.dt);
    return next;
}

LimitStatus check_limits(const UcavState& state, const AircraftParams& params) {
    LimitStatus status;
    const double h = state.altitude();
    const auto lp = load_and_pressure(state.alpha, state.v, params);
    if (lp.n > params.n_max) status.reasons.push_back(LimitViolation::LoadFactor);
    if (h < params.h_min || h > params.h_max) status.reasons.push_back(LimitViolation::Altitude);
    if (state.v < params.v_min || state.v > params.v_max) status.reasons.push_back(LimitViolation::Speed);
    if (lp.q_bar > params.q_max) status.reasons.push_back(LimitViolation::DynamicPressure);
    status.overloaded = !status.reasons.empty();
    return status;
}

}  // namespace hsac
