// Common scalar/vector aliases and the error taxonomy shared by all modules.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace strainforge {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// All lengths are millimeters, all angles radians unless a name says otherwise.

// Error categories map onto CLI exit codes: validation -> 2, numeric -> 3, io -> 4.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry violations (non-orthonormal directions, inconsistent slice normals, ...).
class GeometryError : public ValidationError {
public:
    explicit GeometryError(const std::string& msg) : ValidationError(msg) {}
};

class MeshError : public ValidationError {
public:
    explicit MeshError(const std::string& msg) : ValidationError(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace strainforge
