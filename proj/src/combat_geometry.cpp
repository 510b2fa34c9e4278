#include "hsac/combat_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

namespace {

using Vec3 = std::array<double, 3>;

double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

}  // namespace

double angle_between(const Vec3& a, const Vec3& b) {
    // atan2 of |a x b| and a.b stays accurate near 0 and pi where acos does not.
    const Vec3 cross{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    const double cross_norm = norm(cross);
    if (cross_norm == 0.0 && dot == 0.0) return 0.0;
    return std::atan2(cross_norm, dot);
}

double signed_planar_angle(double ax, double ay, double bx, double by, bool& degenerate) {
    if ((ax == 0.0 && ay == 0.0) || (bx == 0.0 && by == 0.0)) {
        degenerate = true;
        return 0.0;
    }
    degenerate = false;
    const double angle = std::atan2(ax * by - ay * bx, ax * bx + ay * by);
    return angle == -kPi ? kPi : angle;
}

Vec3 velocity_vector(const UcavState& s) {
    const double horizontal = s.v * std::cos(s.gamma);
    return {horizontal * std::cos(s.chi), horizontal * std::sin(s.chi), -s.v * std::sin(s.gamma)};
}

RelativeGeometry relative_geometry(const UcavState& own, const UcavState& opp) {
    const Vec3 los{opp.x - own.x, opp.y - own.y, opp.z - own.z};
    const double d_los = norm(los);
    if (d_los == 0.0) throw DegenerateGeometry("aircraft positions coincide");

    const Vec3 v_own = velocity_vector(own);
    const Vec3 v_opp = velocity_vector(opp);

    RelativeGeometry geo;
    geo.d_los = d_los;
    geo.ata = angle_between(v_own, los);
    geo.aa = angle_between(v_opp, los);

    bool flag = false;
    geo.ata_xoy = signed_planar_angle(v_own[0], v_own[1], los[0], los[1], flag);
    if (flag) geo.degenerate |= kAtaXoy;
    geo.ata_yoz = signed_planar_angle(v_own[1], v_own[2], los[1], los[2], flag);
    if (flag) geo.degenerate |= kAtaYoz;
    geo.aa_xoy = signed_planar_angle(v_opp[0], v_opp[1], los[0], los[1], flag);
    if (flag) geo.degenerate |= kAaXoy;
    geo.aa_yoz = signed_planar_angle(v_opp[1], v_opp[2], los[1], los[2], flag);
    if (flag) geo.degenerate |= kAaYoz;
    return geo;
}

RelativeGeometry relative_geometry_or_fallback(const UcavState& own, const UcavState& opp) {
    try {
        return relative_geometry(own, opp);
    } catch (const DegenerateGeometry&) {
        RelativeGeometry geo;
        geo.degenerate = kAtaXoy | kAtaYoz | kAaXoy | kAaYoz;
        return geo;
    }
}

Observation observe(const RelativeGeometry& geo, const UcavState& own, const UcavState& opp,
                    const AircraftParams& params, double d_norm) {
    constexpr double two_pi = 2.0 * kPi;
    const double speed_span = params.v_max - params.v_min;
    Observation obs{};
    obs[kObsAtaXoy] = geo.ata_xoy / two_pi;
    obs[kObsAtaYoz] = geo.ata_yoz / two_pi;
    obs[kObsAaXoy] = geo.aa_xoy / two_pi;
    obs[kObsAaYoz] = geo.aa_yoz / two_pi;
    obs[kObsBank] = own.mu / two_pi;
    obs[kObsDistance] = geo.d_los / d_norm;
    obs[kObsSpeed] = own.v / speed_span;
    obs[kObsPathAngle] = own.gamma / two_pi;
    obs[kObsOpponentSpeed] = opp.v / speed_span;
    obs[kObsAttackAngle] = own.alpha / (params.alpha_max - params.alpha_min);
    obs[kObsAltitude] = own.altitude() / (params.h_max - params.h_min);
    return obs;
}

Observation observe(const UcavState& own, const UcavState& opp, const AircraftParams& params,
                    double d_norm) {
    return observe(relative_geometry_or_fallback(own, opp), own, opp, params, d_norm);
}

ObservationBounds observation_bounds(const AircraftParams& params, double d_norm,
                                     double max_distance) {
    const double speed_span = params.v_max - params.v_min;
    const double alpha_span = params.alpha_max - params.alpha_min;
    const double h_span = params.h_max - params.h_min;
    ObservationBounds b;
    for (std::size_t i : {kObsAtaXoy, kObsAtaYoz, kObsAaXoy, kObsAaYoz, kObsBank}) {
        b.lower[i] = -0.5;
        b.upper[i] = 0.5;
    }
    b.lower[kObsDistance] = 0.0;
    b.upper[kObsDistance] = max_distance / d_norm;
    b.lower[kObsSpeed] = b.lower[kObsOpponentSpeed] = params.v_min / speed_span;
    b.upper[kObsSpeed] = b.upper[kObsOpponentSpeed] = params.v_max / speed_span;
    b.lower[kObsPathAngle] = -0.25;
    b.upper[kObsPathAngle] = 0.25;
    b.lower[kObsAttackAngle] = params.alpha_min / alpha_span;
    b.upper[kObsAttackAngle] = params.alpha_max / alpha_span;
    b.lower[kObsAltitude] = params.h_min / h_span;
    b.upper[kObsAltitude] = params.h_max / h_span;
    return b;
}

}  // namespace hsac
