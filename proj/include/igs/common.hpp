#pragma once

#include <stdexcept>
#include <string>

namespace igs {

// Solver failed to reach the requested tolerance; message carries the residual.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// det[g] fell below the degeneracy threshold; message carries the location.
class DegenerateMetric : public std::runtime_error {
public:
    explicit DegenerateMetric(const std::string& msg) : std::runtime_error(msg) {}
};

// Query at a location where the requested quantity is not defined
// (e.g. curvature on a patch interface).
class UnsupportedLocation : public std::runtime_error {
public:
    explicit UnsupportedLocation(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kDegenerateMetricEps = 1e-14;

} // namespace igs
