#include "cdg/geometry.hpp"

#include <cmath>
#include <numbers>

namespace cdg {

ImplicitSurface ImplicitSurface::sphere(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  return {Kind::Sphere, radius, 0.0};
}

ImplicitSurface ImplicitSurface::torus(double major_radius, double minor_radius) {
  if (!(major_radius > 0.0) || !(minor_radius > 0.0) || !(minor_radius < major_radius))
    throw std::invalid_argument("torus radii must satisfy 0 < r < R");
  return {Kind::Torus, major_radius, minor_radius};
}

double ImplicitSurface::radius() const {
  if (kind_ != Kind::Sphere) throw std::logic_error("radius() is sphere-only");
  return a_;
}

double ImplicitSurface::major_radius() const {
  if (kind_ != Kind::Torus) throw std::logic_error("major_radius() is torus-only");
  return a_;
}

double ImplicitSurface::minor_radius() const {
  if (kind_ != Kind::Torus) throw std::logic_error("minor_radius() is torus-only");
  return b_;
}

double ImplicitSurface::area() const {
  const double pi = std::numbers::pi;
  if (kind_ == Kind::Sphere) return 4.0 * pi * a_ * a_;
  return 4.0 * pi * pi * a_ * b_;
}

bool ImplicitSurface::in_neighborhood(const Vec3& x) const {
  if (kind_ == Kind::Sphere) {
    // Exclude a ball around the center where the projection is ill defined
    // and the extended curvature 1/(rho + d) blows up; no outer bound.
    return x.norm() > 0.01 * a_;
  }
  const double s = std::hypot(x[0], x[1]);
  if (s <= 1e-12 * a_) return false;  // symmetry axis
  const double delta = std::hypot(s - a_, x[2]);  // distance to the ring circle
  return std::abs(delta - b_) < 0.99 * b_;
}

namespace {

SurfaceJet sphere_jet(double rho, const Vec3& x) {
  SurfaceJet jet;
  const double len = x.norm();
  jet.d = len - rho;
  jet.n = x / len;
  jet.H = (Mat3::Identity() - jet.n * jet.n.transpose()) / len;
  jet.p = x - jet.d * jet.n;
  return jet;
}

SurfaceJet torus_jet(double R, double r, const Vec3& x) {
  SurfaceJet jet;
  const double s = std::hypot(x[0], x[1]);
  const double ux = x[0] / s, uy = x[1] / s;       // (cos phi, sin phi)
  const Vec3 c(R * ux, R * uy, 0.0);               // nearest ring-circle point
  const double delta = std::hypot(s - R, x[2]);    // |x - c|
  jet.d = delta - r;
  const double ct = (s - R) / delta;               // cos theta (tube angle)
  const double st = x[2] / delta;                  // sin theta
  jet.n = Vec3(ct * ux, ct * uy, st);
  const Vec3 t_theta(-st * ux, -st * uy, ct);      // tube tangent
  const Vec3 t_phi(-uy, ux, 0.0);                  // azimuthal tangent
  jet.H = t_theta * t_theta.transpose() / delta + (ct / s) * t_phi * t_phi.transpose();
  jet.p = c + (r / delta) * (x - c);
  return jet;
}

}  // namespace

SurfaceJet surface_jet(const ImplicitSurface& surface, const Vec3& x) {
  if (!surface.in_neighborhood(x))
    throw OutsideNeighborhood("point is outside the projection neighborhood of the surface");
  if (surface.is_sphere()) return sphere_jet(surface.radius(), x);
  return torus_jet(surface.major_radius(), surface.minor_radius(), x);
}

Vec3 closest_point(const ImplicitSurface& surface, const Vec3& x) {
  return surface_jet(surface, x).p;
}

std::pair<double, double> extended_curvatures(const ImplicitSurface& surface,
                                              const Vec3& x) {
  if (!surface.in_neighborhood(x))
    throw OutsideNeighborhood("point is outside the projection neighborhood of the surface");
  if (surface.is_sphere()) {
    const double k = 1.0 / x.norm();  // 1/(rho + d)
    return {k, k};
  }
  const double R = surface.major_radius(), r = surface.minor_radius();
  const double s = std::hypot(x[0], x[1]);
  const double delta = std::hypot(s - R, x[2]);
  // Tube curvature 1/(r + d) = 1/delta; azimuthal curvature cos(theta)/s.
  return {1.0 / delta, (s - R) / (delta * s)};
}

double measure_ratio(const ImplicitSurface& surface, const Vec3& x, const Vec3& n_h) {
  const SurfaceJet jet = surface_jet(surface, x);
  const auto [k1, k2] = extended_curvatures(surface, x);
  const double mu = jet.n.dot(n_h) * (1.0 - jet.d * k1) * (1.0 - jet.d * k2);
  if (!(mu > 0.0))
    throw NonPositiveMeasure("non-positive facet-to-surface measure ratio");
  return mu;
}

}  // namespace cdg
