#pragma once

#include "cdg/core.hpp"

#include <utility>

namespace cdg {

/// Closed analytic surface described by its oriented distance function
/// (positive outside): a sphere, or a torus of revolution about the z-axis.
class ImplicitSurface {
 public:
  enum class Kind { Sphere, Torus };

  static ImplicitSurface sphere(double radius);
  static ImplicitSurface torus(double major_radius, double minor_radius);

  Kind kind() const { return kind_; }
  bool is_sphere() const { return kind_ == Kind::Sphere; }

  /// Sphere radius; throws std::logic_error on a torus.
  double radius() const;
  /// Torus radii; throw std::logic_error on a sphere.
  double major_radius() const;
  double minor_radius() const;

  /// Exact surface area: 4*pi*rho^2, resp. 4*pi^2*R*r.
  double area() const;

  /// True when the closest-point projection is single-valued at x and the
  /// distance calculus (curvature extension, measure ratio) is well behaved:
  /// sphere |x| > 0.01*rho; torus |d(x)| < 0.99*r away from the symmetry axis.
  bool in_neighborhood(const Vec3& x) const;

 private:
  ImplicitSurface(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_;  // sphere radius, or torus major radius
  double b_;  // torus minor radius (0 for spheres)
};

/// Second-order jet of the oriented distance function at a point x:
/// signed distance d, unit normal n = grad d, Hessian H = grad^2 d
/// (the shape operator extended off the surface), and the closest surface
/// point p = x - d n.
struct SurfaceJet {
  double d;
  Vec3 n;
  Mat3 H;
  Vec3 p;

  /// Tangential projector P = I - n n^T.
  Mat3 projector() const { return Mat3::Identity() - n * n.transpose(); }
};

/// Evaluate the distance jet in closed form. Throws OutsideNeighborhood when
/// x violates ImplicitSurface::in_neighborhood.
SurfaceJet surface_jet(const ImplicitSurface& surface, const Vec3& x);

/// Closest point on the surface (the projection part of the jet).
Vec3 closest_point(const ImplicitSurface& surface, const Vec3& x);

/// Principal curvatures transported off the surface along the normal:
/// kappa_i(x) = kappa_i(p) / (1 + d(x) kappa_i(p)), the nonzero eigenvalues
/// of H at x. Sphere: both 1/(rho + d). Torus: (1/(r + d), cos(theta)/s).
std::pair<double, double> extended_curvatures(const ImplicitSurface& surface,
                                              const Vec3& x);

/// Ratio between the exact-surface and facet area measures at a facet point x
/// with facet normal n_h: (n . n_h)(1 - d kappa_1)(1 - d kappa_2) with the
/// extended curvatures. Throws NonPositiveMeasure when the ratio is <= 0
/// (mesh too coarse or degenerate for the surface).
double measure_ratio(const ImplicitSurface& surface, const Vec3& x,
                     const Vec3& n_h);

}  // namespace cdg
