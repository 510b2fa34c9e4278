// Relative engagement geometry and the normalized observation vector.
#pragma once

#include <array>
#include <cstdint>

#include "hsac/flight_dynamics.hpp"

namespace hsac {

/// Angles between velocity vectors and the line of sight (LOS) from own
/// aircraft to the opponent.
///
/// ata: own velocity vs LOS. aa: opponent velocity vs the same LOS, so a
/// pure tail chase gives ata = aa = 0. The *_xoy / *_yoz fields are signed
/// angles between the projections onto the ground XOY plane (positive about
/// +Z) and the YOZ plane (positive about +X).
struct RelativeGeometry {
    double ata = 0.0;
    double aa = 0.0;
    double ata_xoy = 0.0;
    double ata_yoz = 0.0;
    double aa_xoy = 0.0;
    double aa_yoz = 0.0;
    double d_los = 0.0;

    /// Bit set of projections that degenerated to a zero-length vector and
    /// were replaced by angle 0. See `DegenerateProjection`.
    std::uint8_t degenerate = 0;
};

enum DegenerateProjection : std::uint8_t {
    kAtaXoy = 1u << 0,
    kAtaYoz = 1u << 1,
    kAaXoy = 1u << 2,
    kAaYoz = 1u << 3,
};

inline constexpr std::size_t kObservationSize = 11;
using Observation = std::array<double, kObservationSize>;

/// Index of each observation entry.
enum ObservationIndex : std::size_t {
    kObsAtaXoy = 0,
    kObsAtaYoz,
    kObsAaXoy,
    kObsAaYoz,
    kObsBank,
    kObsDistance,
    kObsSpeed,
    kObsPathAngle,
    kObsOpponentSpeed,
    kObsAttackAngle,
    kObsAltitude,
};

inline constexpr double kDefaultDistanceNorm = 10000.0;

/// Unsigned angle between two 3-vectors in [0, pi]; 0 if either is zero.
double angle_between(const std::array<double, 3>& a, const std::array<double, 3>& b);

/// Signed angle from `a` to `b` in (-pi, pi]. Sets `degenerate` and returns 0
/// if either vector has zero length.
double signed_planar_angle(double ax, double ay, double bx, double by, bool& degenerate);

std::array<double, 3> velocity_vector(const UcavState& state);

/// Throws DegenerateGeometry when both aircraft occupy the same point.
RelativeGeometry relative_geometry(const UcavState& own, const UcavState& opp);

/// As `relative_geometry` but returns an all-zero geometry (every
/// projection flagged) instead of throwing on coincident positions.
RelativeGeometry relative_geometry_or_fallback(const UcavState& own, const UcavState& opp);

Observation observe(const UcavState& own, const UcavState& opp, const AircraftParams& params,
                    double d_norm = kDefaultDistanceNorm);

/// Same as `observe` with a geometry computed by the caller.
Observation observe(const RelativeGeometry& geo, const UcavState& own, const UcavState& opp,
                    const AircraftParams& params, double d_norm = kDefaultDistanceNorm);

struct ObservationBounds {
    Observation lower{};
    Observation upper{};
};

/// Closed bounds every entry satisfies when both aircraft are inside the
/// speed and altitude bands and no further apart than `max_distance`.
ObservationBounds observation_bounds(const AircraftParams& params, double d_norm,
                                     double max_distance);

}  // namespace hsac
