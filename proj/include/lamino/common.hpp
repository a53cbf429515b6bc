#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lamino {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Raised for malformed user input (bad flags, invalid configs, broken files).
/// The CLI maps it to exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a computation cannot proceed (I/O failure, non-finite loss).
/// The CLI maps it to exit code 2.
struct ComputeError : std::runtime_error {
  explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateHistogram : ComputeError {
  DegenerateHistogram() : ComputeError("histogram is degenerate: all values equal") {}
};

struct EmptyMask : ComputeError {
  EmptyMask() : ComputeError("threshold mask is empty: no voxel passes") {}
};

struct NonFiniteLoss : ComputeError {
  explicit NonFiniteLoss(const std::string& msg) : ComputeError(msg) {}
};

/// Axis-aligned box in world coordinates.
struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double max_extent() const { return extent().maxCoeff(); }
  double diagonal() const { return extent().norm(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  Aabb scaled(double factor) const {
    const Vec3 c = center();
    const Vec3 h = 0.5 * factor * extent();
    return {c - h, c + h};
  }
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic per-stream generator: one master seed, one stream tag.
/// Keeps independent stages (sampling, noise, view order) decorrelated while
/// everything derives from a single --seed.
inline std::mt19937_64 make_rng(uint64_t seed, uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

}  // namespace lamino
