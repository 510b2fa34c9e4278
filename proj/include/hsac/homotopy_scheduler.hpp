// Blend-weight schedule for the homotopy reward: q starts at 1 and drops by
// 1/N each time the actor-gradient magnitudes stop trending.
#pragma once

#include <cstdint>
#include <deque>
#include <span>

namespace hsac {

struct HomotopySchedule {
    double q = 1.0;
    int n = 0;
    int big_n = 100;
    std::size_t big_m = 2000;
    double epsilon = 1e-5;
    std::deque<double> buffer;

    /// Throws ConfigError.
    void validate() const;
    bool buffer_full() const { return buffer.size() >= big_m; }
};

/// q = max(0, 1 - n/N), exactly 0 once n >= N.
double schedule_weight(int n, int big_n);

/// Appends a gradient magnitude, evicting the oldest entry beyond M.
/// Throws NonFinite for non-finite or negative input.
void record(HomotopySchedule& schedule, double grad_magnitude);

/// Least-squares slope of values against indices 1..M with intercept.
/// Throws InsufficientData for fewer than 2 values.
double fit_slope(std::span<const double> values);
double fit_slope(const std::deque<double>& values);

/// Advances q by one step when the buffer is full, |slope| < epsilon and
/// q > 0. Clears the buffer on advance. Returns whether it advanced.
bool maybe_advance(HomotopySchedule& schedule);

/// Unconditional advance (if q > 0), used for scripted schedules.
bool force_advance(HomotopySchedule& schedule);

}  // namespace hsac
