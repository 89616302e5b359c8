#pragma once

#include <Eigen/Dense>

#include <random>
#include <stdexcept>

namespace cdg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Base type of every recoverable error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The query point left the tubular neighborhood where the closest-point
/// projection is single-valued (torus symmetry axis, too far off-surface, ...).
struct OutsideNeighborhood : Error { using Error::Error; };

/// The facet-to-surface measure ratio came out non-positive: the mesh is too
/// coarse or degenerate for the surface it approximates.
struct NonPositiveMeasure : Error { using Error::Error; };

/// An edge of a supposedly closed surface mesh is not shared by exactly two faces.
struct NonManifoldEdge : Error { using Error::Error; };

/// A vertex perturbation squashed a face below the minimal admissible area.
struct DegenerateFace : Error { using Error::Error; };

/// A facet is too small or thin to carry a well-conditioned tangent frame.
struct DegenerateTriangle : Error { using Error::Error; };

/// The linear solver missed its residual tolerance.
struct SolverBreakdown : Error { using Error::Error; };

/// Convergence-order input contained non-positive error values.
struct NonPositive : Error { using Error::Error; };

/// Toroidal angles are undefined on the symmetry axis.
struct AxisPoint : Error { using Error::Error; };

/// Uniform double in [0, 1) from the top 53 bits of one 64-bit draw.
/// Used instead of std::uniform_real_distribution, whose output is
/// implementation-defined; this keeps seeded runs bit-identical across
/// platforms and standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cdg
