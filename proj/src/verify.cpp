#include "cdg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cdg {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<FacetOperators> build_operators(const TriangleMesh& mesh) {
  std::vector<FacetOperators> ops;
  ops.reserve(mesh.faces.size());
  for (const auto& tri : mesh.faces)
    ops.push_back(facet_operators(facet_frame(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                              mesh.vertices[tri[2]])));
  return ops;
}

/// Constant facet Laplacian of the coefficient vector d on face f.
double face_laplacian(const DofMap& dofmap, const FacetOperators& ops,
                      const Eigen::VectorXd& d, int f) {
  double lap = 0.0;
  for (int i = 0; i < 6; ++i) lap += d[dofmap.face_dofs[f][i]] * ops.laplacian[i];
  return lap;
}

}  // namespace

double lift(const ImplicitSurface& surface, const std::function<double(const Vec3&)>& g,
            const Vec3& x) {
  return g(closest_point(surface, x));
}

double l2_quotient_error(const TriangleMesh& mesh, const DofMap& dofmap,
                         const Eigen::VectorXd& u_h,
                         const std::function<double(const Vec3&)>& u_exact) {
  const TriangleRule& rule = triangle_rule();
  const int npts = static_cast<int>(rule.barycentric.size());
  double area = 0.0, first = 0.0, second = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]],
               &c = mesh.vertices[tri[2]];
    const FacetFrame frame = facet_frame(a, b, c);
    area += frame.area;
    for (int q = 0; q < npts; ++q) {
      const Vec3& bary = rule.barycentric[q];
      const Vec3 x = bary[0] * a + bary[1] * b + bary[2] * c;
      const P2Eval p2 = reference_p2(bary);
      double uh = 0.0;
      for (int i = 0; i < 6; ++i) uh += u_h[dofmap.face_dofs[f][i]] * p2.value[i];
      const double e = u_exact(closest_point(mesh.surface, x)) - uh;
      const double w = 2.0 * frame.area * rule.weights[q];
      first += w * e;
      second += w * e * e;
    }
  }
  // Quotient norm: subtracting the mean is equivalent to the variance form.
  return std::sqrt(std::max(second - first * first / area, 0.0));
}

Eigen::VectorXd nodal_interpolant(const TriangleMesh& mesh, const Adjacency& adjacency,
                                  const DofMap& dofmap,
                                  const std::function<double(const Vec3&)>& w) {
  Eigen::VectorXd coeffs(dofmap.ndof);
  for (int v = 0; v < dofmap.nvertices; ++v)
    coeffs[v] = w(closest_point(mesh.surface, mesh.vertices[v]));
  for (int e = 0; e < dofmap.nedges; ++e)
    coeffs[dofmap.nvertices + e] =
        w(closest_point(mesh.surface, adjacency.edges[e].midpoint));
  return coeffs;
}

double energy_norm(const TriangleMesh& mesh, const Adjacency& adjacency,
                   const DofMap& dofmap, const Eigen::VectorXd& d) {
  const double h = mesh_size(mesh).h;
  const std::vector<FacetOperators> ops = build_operators(mesh);
  const EdgeRule& rule = edge_rule();

  // Facet term: the Laplacian is constant per face, the integral exact.
  std::vector<double> lap(mesh.faces.size());
  double facet_term = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    lap[f] = face_laplacian(dofmap, ops[f], d, static_cast<int>(f));
    facet_term += ops[f].frame.area * lap[f] * lap[f];
  }

  // Edge terms: the average of the facet Laplacians is constant per edge, the
  // conormal jump of the gradient varies linearly and needs quadrature.
  double average_term = 0.0, jump_term = 0.0;
  for (const EdgeAdjacency& edge : adjacency.edges) {
    const double avg = 0.5 * (lap[edge.face_plus] + lap[edge.face_minus]);
    average_term += 2.0 * h * edge.length * avg * avg;

    const auto& face_p = mesh.faces[edge.face_plus];
    const auto& face_m = mesh.faces[edge.face_minus];
    double jump_sq = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      const auto grad_p =
          ops[edge.face_plus].gradients(edge_barycentric(face_p, edge.v0, edge.v1, t));
      const auto grad_m =
          ops[edge.face_minus].gradients(edge_barycentric(face_m, edge.v0, edge.v1, t));
      Vec3 gp = Vec3::Zero(), gm = Vec3::Zero();
      for (int i = 0; i < 6; ++i) {
        gp += d[dofmap.face_dofs[edge.face_plus][i]] * grad_p[i];
        gm += d[dofmap.face_dofs[edge.face_minus][i]] * grad_m[i];
      }
      const double jump = edge.conormal_plus.dot(gp) + edge.conormal_minus.dot(gm);
      jump_sq += rule.weights[q] * jump * jump;
    }
    jump_term += (2.0 / h) * edge.length * jump_sq;
  }
  return std::sqrt(facet_term + average_term + jump_term);
}

double energy_error(const TriangleMesh& mesh, const Adjacency& adjacency,
                    const DofMap& dofmap, const Eigen::VectorXd& u_h,
                    const std::function<double(const Vec3&)>& u_exact) {
  const Eigen::VectorXd diff = nodal_interpolant(mesh, adjacency, dofmap, u_exact) - u_h;
  return energy_norm(mesh, adjacency, dofmap, diff);
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size())
    throw std::invalid_argument("eoc: errors and mesh sizes differ in length");
  if (errors.size() < 2) throw std::invalid_argument("eoc: need at least two levels");
  for (double e : errors)
    if (!(e > 0.0)) throw NonPositive("eoc: errors must be positive");
  for (double h : hs)
    if (!(h > 0.0)) throw NonPositive("eoc: mesh sizes must be positive");
  std::vector<double> slopes(errors.size() - 1);
  for (std::size_t k = 1; k < errors.size(); ++k)
    slopes[k - 1] = std::log(errors[k - 1] / errors[k]) / std::log(hs[k - 1] / hs[k]);
  return slopes;
}

double least_squares_slope(const std::vector<double>& hs,
                           const std::vector<double>& values) {
  if (hs.size() != values.size() || hs.size() < 2) return kNan;
  for (std::size_t i = 0; i < hs.size(); ++i)
    if (!(hs[i] > 0.0) || !(values[i] > 0.0)) return kNan;
  const double n = static_cast<double>(hs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace detail {

GeometryRateRow sample_geometry(const TriangleMesh& mesh,
                                const std::vector<EdgeAdjacency>& edges,
                                const std::function<SurfaceJet(const Vec3&)>& jet,
                                const std::function<double(const Vec3&, const Vec3&)>& measure) {
  GeometryRateRow row;
  row.h = mesh_size(mesh).h;

  const TriangleRule& face_rule = triangle_rule();
  for (const auto& tri : mesh.faces) {
    const Vec3 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]],
               &c = mesh.vertices[tri[2]];
    const Vec3 n_h = facet_frame(a, b, c).n_h;
    for (const Vec3& bary : face_rule.barycentric) {
      const Vec3 x = bary[0] * a + bary[1] * b + bary[2] * c;
      const SurfaceJet j = jet(x);
      row.max_d = std::max(row.max_d, std::abs(j.d));
      row.max_n_diff = std::max(row.max_n_diff, (j.n - n_h).norm());
      row.max_one_ndot = std::max(row.max_one_ndot, std::abs(1.0 - j.n.dot(n_h)));
      row.max_mu = std::max(row.max_mu, std::abs(1.0 - measure(x, n_h)));
    }
  }

  // Curved conormal at an edge point: normal x (lifted edge tangent), the
  // tangent obtained by differencing the closest-point map along the edge.
  const EdgeRule& rule = edge_rule();
  const double step = 1e-6;
  for (const EdgeAdjacency& edge : edges) {
    row.max_conormal_sum =
        std::max(row.max_conormal_sum, (edge.conormal_plus + edge.conormal_minus).norm());
    const Vec3 &v0 = mesh.vertices[edge.v0], &v1 = mesh.vertices[edge.v1];
    const Vec3 dir = (v1 - v0).normalized();
    for (double t : rule.points) {
      const Vec3 x = (1.0 - t) * v0 + t * v1;
      const SurfaceJet j = jet(x);
      const Vec3 tangent = (jet(x + step * dir).p - jet(x - step * dir).p).normalized();
      const Vec3 curved = j.n.cross(tangent).normalized();
      const Mat3 P = j.projector();
      for (const Vec3& conormal : {edge.conormal_plus, edge.conormal_minus}) {
        const Vec3 signed_curved = curved.dot(conormal) >= 0.0 ? curved : Vec3(-curved);
        row.max_conormal =
            std::max(row.max_conormal, (signed_curved - P * conormal).norm());
      }
    }
  }
  return row;
}

}  // namespace detail

GeometryRateReport geometry_rates(const ImplicitSurface& surface,
                                  const std::vector<TriangleMesh>& family) {
  GeometryRateReport report;
  auto jet = [&surface](const Vec3& x) { return surface_jet(surface, x); };
  auto measure = [&surface](const Vec3& x, const Vec3& n_h) {
    return measure_ratio(surface, x, n_h);
  };
  std::vector<double> hs;
  for (const TriangleMesh& mesh : family) {
    const Adjacency adjacency = build_adjacency(mesh);
    report.rows.push_back(detail::sample_geometry(mesh, adjacency.edges, jet, measure));
    hs.push_back(report.rows.back().h);
  }
  auto column = [&](double GeometryRateRow::* field) {
    std::vector<double> values;
    for (const GeometryRateRow& row : report.rows) values.push_back(row.*field);
    return least_squares_slope(hs, values);
  };
  report.slope_d = column(&GeometryRateRow::max_d);
  report.slope_n_diff = column(&GeometryRateRow::max_n_diff);
  report.slope_one_ndot = column(&GeometryRateRow::max_one_ndot);
  report.slope_mu = column(&GeometryRateRow::max_mu);
  report.slope_conormal = column(&GeometryRateRow::max_conormal);
  return report;
}

void write_geometry_csv(const GeometryRateReport& report, std::ostream& out) {
  out << "h,max_d,max_n_diff,max_one_ndot,max_mu,max_conormal\n";
  char line[256];
  for (const GeometryRateRow& row : report.rows) {
    std::snprintf(line, sizeof line, "%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n", row.h,
                  row.max_d, row.max_n_diff, row.max_one_ndot, row.max_mu,
                  row.max_conormal);
    out << line;
  }
  if (report.rows.size() >= 2) {
    std::snprintf(line, sizeof line, "slope,%.6f,%.6f,%.6f,%.6f,%.6f\n", report.slope_d,
                  report.slope_n_diff, report.slope_one_ndot, report.slope_mu,
                  report.slope_conormal);
    out << line;
  }
}

double lifting_diagnostic(const ImplicitSurface& surface, const TriangleMesh& mesh,
                          const std::function<double(const Vec3&)>& w,
                          const std::function<Vec3(const Vec3&)>& grad_w) {
  const TriangleRule& rule = triangle_rule();
  const double step = 1e-6;
  auto lifted = [&](const Vec3& y) { return w(closest_point(surface, y)); };
  double worst = 0.0;
  for (const auto& tri : mesh.faces) {
    const Vec3 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]],
               &c = mesh.vertices[tri[2]];
    const FacetFrame frame = facet_frame(a, b, c);
    for (const Vec3& bary : rule.barycentric) {
      const Vec3 x = bary[0] * a + bary[1] * b + bary[2] * c;
      // Facet gradient of the lifted function by central differences in the
      // facet plane.
      const double g1 = (lifted(x + step * frame.t1) - lifted(x - step * frame.t1)) /
                        (2.0 * step);
      const double g2 = (lifted(x + step * frame.t2) - lifted(x - step * frame.t2)) /
                        (2.0 * step);
      const Vec3 fd_gradient = g1 * frame.t1 + g2 * frame.t2;
      // Chain rule through the closest-point map: P_h (P - d H) grad_G w.
      const SurfaceJet j = surface_jet(surface, x);
      const Mat3 B = j.projector() - j.d * j.H;
      const Vec3 chain = B * grad_w(j.p);
      const Vec3 chain_tangential = chain - frame.n_h.dot(chain) * frame.n_h;
      worst = std::max(worst, (fd_gradient - chain_tangential).norm());
    }
  }
  return worst;
}

LevelResult solve_level(const StudyConfig& config, int level) {
  const ModelProblem problem = make_problem(config.problem, config.load_source);
  TriangleMesh mesh = generate_mesh(problem.surface, level);
  if (config.perturbed) mesh = perturb_vertices(mesh, config.amplitude, config.seed);
  Adjacency adjacency = build_adjacency(mesh);
  DofMap dofmap = build_dofmap(mesh, adjacency);
  SparseSystem system =
      assemble(mesh, adjacency, dofmap, config.beta, config.h_mode, config.execution);
  const LoadVector load =
      load_vector(mesh, adjacency, dofmap, problem.f_load, config.execution);
  Eigen::VectorXd u = solve(system, load.b).u;

  ConvergenceRow row;
  row.level = level;
  row.h = mesh_size(mesh).h;
  row.ndof = dofmap.ndof;
  row.l2_error = l2_quotient_error(mesh, dofmap, u, problem.u_exact);
  row.energy_error = energy_error(mesh, adjacency, dofmap, u, problem.u_exact);
  row.eoc_l2 = kNan;
  row.eoc_energy = kNan;
  return LevelResult{row, std::move(mesh), std::move(adjacency), std::move(dofmap),
                     std::move(system), std::move(u)};
}

ConvergenceReport run_convergence_study(const StudyConfig& config) {
  ConvergenceReport report;
  report.config = config;
  std::vector<double> hs, l2, energy;
  for (int level = config.level_min; level <= config.level_max; ++level) {
    report.rows.push_back(solve_level(config, level).row);
    hs.push_back(report.rows.back().h);
    l2.push_back(report.rows.back().l2_error);
    energy.push_back(report.rows.back().energy_error);
  }
  if (report.rows.size() >= 2) {
    const std::vector<double> eoc_l2 = eoc(l2, hs);
    const std::vector<double> eoc_energy = eoc(energy, hs);
    for (std::size_t k = 1; k < report.rows.size(); ++k) {
      report.rows[k].eoc_l2 = eoc_l2[k - 1];
      report.rows[k].eoc_energy = eoc_energy[k - 1];
    }
  }
  return report;
}

void write_convergence_csv(const ConvergenceReport& report, std::ostream& out) {
  const StudyConfig& c = report.config;
  char line[512];
  std::snprintf(line, sizeof line,
                "# problem=%s levels=%d..%d beta=%g mesh=%s amplitude=%g seed=%llu "
                "load=%s h_mode=%s\n",
                c.problem.c_str(), c.level_min, c.level_max, c.beta,
                c.perturbed ? "perturbed" : "structured", c.amplitude,
                static_cast<unsigned long long>(c.seed),
                c.load_source == LoadSource::Oracle ? "oracle" : "closed-form",
                c.h_mode == HMode::GlobalH ? "global" : "per-edge");
  out << line;
  out << "level,h,ndof,l2_error,energy_error,eoc_l2,eoc_energy\n";
  for (const ConvergenceRow& row : report.rows) {
    std::snprintf(line, sizeof line, "%d,%.12e,%d,%.12e,%.12e,", row.level, row.h,
                  row.ndof, row.l2_error, row.energy_error);
    out << line;
    if (std::isnan(row.eoc_l2)) {
      out << ",";
    } else {
      std::snprintf(line, sizeof line, "%.6f,%.6f", row.eoc_l2, row.eoc_energy);
      out << line;
    }
    out << "\n";
  }
}

}  // namespace cdg
