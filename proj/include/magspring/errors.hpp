#pragma once

#include <stdexcept>
#include <string>

namespace magspring {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user configuration (bad file, missing field, out-of-range value).
struct ConfigError : Error {
    using Error::Error;
};

/// Geometrically impossible or degenerate input.
struct GeometryError : Error {
    using Error::Error;
};

/// Mesh generation failure (bad sizing, self-intersecting outline, non-convergence).
struct MeshError : Error {
    using Error::Error;
};

/// Linear solver failure (non-convergence, singular system).
struct SolveError : Error {
    using Error::Error;
};

/// Not enough data for a numerical operation (e.g. spline fit on too few samples).
struct DataError : Error {
    using Error::Error;
};

}  // namespace magspring
