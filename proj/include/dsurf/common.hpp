#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsurf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<std::uint32_t, 3>;
using Edge = std::array<std::uint32_t, 2>;

/// Failure categories. Each maps onto a CLI exit code (see tools/dsurf.cpp).
enum class ErrorKind {
    Structural,
    DegenerateGeometry,
    Numeric,
    Shape,
    Argument,
    OptimizationFailure,
    ProjectionFailure,
    Config,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const { return m_kind; }
    /// Message without the kind prefix.
    const std::string& message() const { return m_message; }

private:
    ErrorKind m_kind;
    std::string m_message;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline bool is_finite(const Vec3& v)
{
    return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

} // namespace dsurf
