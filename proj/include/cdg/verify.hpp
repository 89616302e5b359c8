#pragma once

#include "cdg/assembly.hpp"
#include "cdg/problems.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace cdg {

/// Evaluate a function living on the exact surface at an off-surface point by
/// composing with the closest-point projection. Throws OutsideNeighborhood
/// when x is outside the tubular neighborhood.
double lift(const ImplicitSurface& surface, const std::function<double(const Vec3&)>& g,
            const Vec3& x);

/// L2 distance over the facet mesh between the discrete function u_h and the
/// lifted reference u_exact(p(x)), measured modulo constants:
/// sqrt(integral of (e - mean e)^2) with e = u_exact(p(x)) - u_h(x).
/// The quotient absorbs the constant offset between the discrete zero-mean
/// constraint (imposed on the facet mesh) and the exact solution's zero mean
/// (which holds on the exact surface).
double l2_quotient_error(const TriangleMesh& mesh, const DofMap& dofmap,
                         const Eigen::VectorXd& u_h,
                         const std::function<double(const Vec3&)>& u_exact);

/// Coefficients of the nodal interpolant of w(p(x)): values at the vertices
/// (which lie on the surface) and at the projected straight-edge midpoints.
Eigen::VectorXd nodal_interpolant(const TriangleMesh& mesh, const Adjacency& adjacency,
                                  const DofMap& dofmap,
                                  const std::function<double(const Vec3&)>& w);

/// Discrete energy norm of a coefficient vector d:
///   |||d|||^2 = sum_K ||Lap d||_K^2 + sum_E 2 h ||{Lap d}||_E^2
///             + sum_E (2 / h) ||J(d)||_E^2
/// with h the global mesh size, {.} the edge average, and J the conormal
/// jump of the tangential gradient. The factors 2 come from writing the norm
/// as a sum over element boundaries, which visits every edge twice.
double energy_norm(const TriangleMesh& mesh, const Adjacency& adjacency,
                   const DofMap& dofmap, const Eigen::VectorXd& d);

/// Energy distance ||| interpolant(u_exact) - u_h |||.
double energy_error(const TriangleMesh& mesh, const Adjacency& adjacency,
                    const DofMap& dofmap, const Eigen::VectorXd& u_h,
                    const std::function<double(const Vec3&)>& u_exact);

/// Pairwise estimated orders of convergence:
/// slope_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k), k = 1..n-1.
/// Throws NonPositive on non-positive entries, std::invalid_argument when the
/// lists are shorter than 2 or of different lengths.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// Least-squares slope of log(values) against log(hs); NaN when fewer than
/// two points or any entry is non-positive.
double least_squares_slope(const std::vector<double>& hs,
                           const std::vector<double>& values);

/// Per-level maxima of the geometric consistency quantities. Face quantities
/// are sampled at the triangle quadrature points, edge quantities at the edge
/// quadrature points of both incident faces.
struct GeometryRateRow {
  double h = 0.0;
  double max_d = 0.0;             // max |d|, distance of facets to the surface
  double max_n_diff = 0.0;        // max |n - n_h|
  double max_one_ndot = 0.0;      // max |1 - n . n_h|
  double max_mu = 0.0;            // max |1 - mu_h|, measure-ratio defect
  double max_conormal = 0.0;      // max |nu_Gamma - P nu_hat| (curved vs projected facet conormal)
  double max_conormal_sum = 0.0;  // max |nu_hat+ + nu_hat-|; first order, not part of the CSV
};

/// Rows for a refinement family plus fitted log-log slopes (NaN when the
/// family has fewer than two levels).
struct GeometryRateReport {
  std::vector<GeometryRateRow> rows;
  double slope_d = 0.0;
  double slope_n_diff = 0.0;
  double slope_one_ndot = 0.0;
  double slope_mu = 0.0;
  double slope_conormal = 0.0;
};

GeometryRateReport geometry_rates(const ImplicitSurface& surface,
                                  const std::vector<TriangleMesh>& family);

/// CSV with header `h,max_d,max_n_diff,max_one_ndot,max_mu,max_conormal` and,
/// when at least two rows exist, a trailing fitted-slopes row tagged "slope".
void write_geometry_csv(const GeometryRateReport& report, std::ostream& out);

namespace detail {

/// Sampling core of geometry_rates, parameterized on the distance jet and the
/// measure ratio so test fixtures can substitute analytic jets of surfaces
/// the library does not model (e.g. an exact plane, where every quantity
/// vanishes identically).
GeometryRateRow sample_geometry(const TriangleMesh& mesh,
                                const std::vector<EdgeAdjacency>& edges,
                                const std::function<SurfaceJet(const Vec3&)>& jet,
                                const std::function<double(const Vec3&, const Vec3&)>& measure);

}  // namespace detail

/// Max discrepancy, over all facet quadrature points, between the facet
/// tangential gradient of the lifted function w(p(x)) (computed by central
/// differences in the facet plane, step 1e-6) and the chain-rule expression
/// P_h (P - d H) (grad_G w)(p(x)). With analytic w and grad_G w the identity
/// is exact, so the result is finite-difference noise (~1e-8).
double lifting_diagnostic(const ImplicitSurface& surface, const TriangleMesh& mesh,
                          const std::function<double(const Vec3&)>& w,
                          const std::function<Vec3(const Vec3&)>& grad_w);

/// Configuration of a convergence study (mirrors the CLI options).
struct StudyConfig {
  std::string problem = "sphere";  // "sphere" or "torus"
  int level_min = 1;
  int level_max = 4;
  double beta = 10.0;
  bool perturbed = false;
  double amplitude = 0.2;
  std::uint64_t seed = 1;
  LoadSource load_source = LoadSource::Oracle;
  HMode h_mode = HMode::GlobalH;
  Execution execution = Execution::Parallel;
};

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  double l2_error = 0.0;
  double energy_error = 0.0;
  double eoc_l2 = 0.0;     // NaN on the first row of a study
  double eoc_energy = 0.0; // idem
};

/// Everything produced by one level of a study; the heavyweight members let
/// the CLI dump meshes, matrices, and solutions without re-solving.
struct LevelResult {
  ConvergenceRow row;
  TriangleMesh mesh;
  Adjacency adjacency;
  DofMap dofmap;
  SparseSystem system;
  Eigen::VectorXd u;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<ConvergenceRow> rows;
};

/// Generate (and optionally perturb) the level mesh, assemble, solve, and
/// measure both error norms.
LevelResult solve_level(const StudyConfig& config, int level);

/// solve_level over config.level_min..level_max plus pairwise orders.
ConvergenceReport run_convergence_study(const StudyConfig& config);

/// CSV: one `# key=value ...` metadata line, the pinned header
/// `level,h,ndof,l2_error,energy_error,eoc_l2,eoc_energy`, then one row per
/// level (eoc fields empty on the first row).
void write_convergence_csv(const ConvergenceReport& report, std::ostream& out);

}  // namespace cdg
