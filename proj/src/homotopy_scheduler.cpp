#include "hsac/homotopy_scheduler.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "hsac/errors.hpp"

namespace hsac {

void HomotopySchedule::validate() const {
    if (big_n < 1) throw ConfigError("schedule: N must be >= 1");
    if (big_m < 2) throw ConfigError("schedule: M must be >= 2");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("schedule: epsilon must be > 0");
    if (n < 0 || n > big_n) throw ConfigError("schedule: n must lie in [0, N]");
    if (q != schedule_weight(n, big_n)) throw ConfigError("schedule: q inconsistent with n");
}

double schedule_weight(int n, int big_n) {
    if (n >= big_n) return 0.0;
    return 1.0 - static_cast<double>(n) / static_cast<double>(big_n);
}

void record(HomotopySchedule& schedule, double grad_magnitude) {
    if (!std::isfinite(grad_magnitude) || grad_magnitude < 0.0)
        throw NonFinite("gradient magnitude must be finite and >= 0");
    schedule.buffer.push_back(grad_magnitude);
    while (schedule.buffer.size() > schedule.big_m) schedule.buffer.pop_front();
}

double fit_slope(std::span<const double> values) {
    const auto m = static_cast<Eigen::Index>(values.size());
    if (m < 2) throw InsufficientData("slope fit needs at least 2 values");
    Eigen::MatrixXd x(m, 2);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        x(i, 0) = static_cast<double>(i + 1);
        x(i, 1) = 1.0;
        y(i) = values[static_cast<std::size_t>(i)];
    }
    return x.colPivHouseholderQr().solve(y)(0);
}

double fit_slope(const std::deque<double>& values) {
    const std::vector<double> flat(values.begin(), values.end());
    return fit_slope(std::span<const double>(flat));
}

bool force_advance(HomotopySchedule& schedule) {
    if (!(schedule.q > 0.0)) return false;
    schedule.n += 1;
    schedule.q = schedule_weight(schedule.n, schedule.big_n);
    schedule.buffer.clear();
    return true;
}

bool maybe_advance(HomotopySchedule& schedule) {
    if (!schedule.buffer_full() || !(schedule.q > 0.0)) return false;
    if (!(std::abs(fit_slope(schedule.buffer)) < schedule.epsilon)) return false;
    return force_advance(schedule);
}

}  // namespace hsac
