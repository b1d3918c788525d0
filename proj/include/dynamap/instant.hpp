#pragma once

#include <cmath>

namespace dynamap {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kSecondsPerBin = 300.0;
inline constexpr int kBinsPerDay = 288;

// Clock time within one day, seconds since midnight, normalized to
// [0, 86400). Arithmetic that crosses midnight wraps onto the same day.
class Instant {
public:
    Instant() = default;
    explicit Instant(double seconds_since_midnight) : sec_(wrap(seconds_since_midnight)) {}

    static Instant from_hms(int h, int m = 0, double s = 0.0) {
        return Instant(h * 3600.0 + m * 60.0 + s);
    }

    double seconds() const { return sec_; }

    // 5-minute bin index, 0..287.
    int bin() const { return static_cast<int>(sec_ / kSecondsPerBin) % kBinsPerDay; }

    static double wrap(double s) {
        double r = std::fmod(s, kSecondsPerDay);
        return r < 0.0 ? r + kSecondsPerDay : r;
    }

private:
    double sec_ = 0.0;
};

inline int bin_of_seconds(double sec_in_day) {
    return static_cast<int>(sec_in_day / kSecondsPerBin) % kBinsPerDay;
}

}  // namespace dynamap
