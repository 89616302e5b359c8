// Command-line driver: single solves, convergence sweeps, and geometry checks
// over the built-in model problems, with CSV/OFF/SVG output.

#include "cdg/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

/// Flat option set shared by all subcommands; JSON config files use the same
/// field names.
struct RunConfig {
  std::string problem = "sphere";
  int level = 2;                      // solve
  std::vector<int> levels = {1, 4};   // convergence / geomcheck
  double beta = 10.0;
  std::string mesh = "structured";
  std::uint64_t seed = 1;
  double amplitude = 0.2;
  std::string load_source = "oracle";
  std::string h_mode = "global";
  std::string out;                    // empty = stdout
  std::string off_path, matrix_path, solution_path, svg_path;
};

void apply_json_config(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  if (j.contains("problem")) config.problem = j["problem"].get<std::string>();
  if (j.contains("level")) config.level = j["level"].get<int>();
  if (j.contains("levels")) config.levels = j["levels"].get<std::vector<int>>();
  if (j.contains("beta")) config.beta = j["beta"].get<double>();
  if (j.contains("mesh")) config.mesh = j["mesh"].get<std::string>();
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("amplitude")) config.amplitude = j["amplitude"].get<double>();
  if (j.contains("load_source")) config.load_source = j["load_source"].get<std::string>();
  if (j.contains("h_mode")) config.h_mode = j["h_mode"].get<std::string>();
  if (j.contains("out")) config.out = j["out"].get<std::string>();
}

cdg::StudyConfig to_study_config(const RunConfig& config) {
  cdg::StudyConfig study;
  study.problem = config.problem;
  study.level_min = config.levels.at(0);
  study.level_max = config.levels.at(1);
  study.beta = config.beta;
  study.perturbed = config.mesh == "perturbed";
  study.amplitude = config.amplitude;
  study.seed = config.seed;
  study.load_source = config.load_source == "closed-form" ? cdg::LoadSource::ClosedForm
                                                          : cdg::LoadSource::Oracle;
  study.h_mode = config.h_mode == "per-edge" ? cdg::HMode::PerEdge : cdg::HMode::GlobalH;
  return study;
}

const char* error_name(const cdg::Error& e) {
  if (dynamic_cast<const cdg::OutsideNeighborhood*>(&e)) return "OutsideNeighborhood";
  if (dynamic_cast<const cdg::NonPositiveMeasure*>(&e)) return "NonPositiveMeasure";
  if (dynamic_cast<const cdg::NonManifoldEdge*>(&e)) return "NonManifoldEdge";
  if (dynamic_cast<const cdg::DegenerateFace*>(&e)) return "DegenerateFace";
  if (dynamic_cast<const cdg::DegenerateTriangle*>(&e)) return "DegenerateTriangle";
  if (dynamic_cast<const cdg::SolverBreakdown*>(&e)) return "SolverBreakdown";
  if (dynamic_cast<const cdg::NonPositive*>(&e)) return "NonPositive";
  if (dynamic_cast<const cdg::AxisPoint*>(&e)) return "AxisPoint";
  return "Error";
}

/// Run `body` with the requested output stream (stdout when no path given).
void with_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  body(out);
}

/// Minimal log-log SVG: both error series against h, with a dashed slope-2
/// reference line anchored at the coarsest L2 point.
void write_svg_plot(const cdg::ConvergenceReport& report, std::ostream& out) {
  const int width = 640, height = 480;
  const double left = 80, right = 610, top = 30, bottom = 420;

  std::vector<double> hs, l2, energy;
  for (const auto& row : report.rows) {
    hs.push_back(row.h);
    l2.push_back(row.l2_error);
    energy.push_back(row.energy_error);
  }
  auto log10v = [](double v) { return std::log10(v); };
  double xmin = log10v(hs.back()), xmax = log10v(hs.front());
  double ymin = 1e300, ymax = -1e300;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double ref = l2.front() * std::pow(hs[i] / hs.front(), 2.0);
    for (double v : {l2[i], energy[i], ref}) {
      ymin = std::min(ymin, log10v(v));
      ymax = std::max(ymax, log10v(v));
    }
  }
  const double xpad = 0.05 * (xmax - xmin + 1e-12), ypad = 0.05 * (ymax - ymin + 1e-12);
  xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;
  auto X = [&](double h) { return left + (log10v(h) - xmin) / (xmax - xmin) * (right - left); };
  auto Y = [&](double e) { return bottom - (log10v(e) - ymin) / (ymax - ymin) * (bottom - top); };

  char buf[512];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                left, bottom, right, bottom, left, top, left, bottom);
  out << buf;

  auto polyline = [&](const std::vector<double>& ys, const char* color, bool dashed) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (dashed) out << " stroke-dasharray=\"6,4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < hs.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", X(hs[i]), Y(ys[i]));
      out << buf;
    }
    out << "\"/>\n";
  };
  std::vector<double> reference;
  for (double h : hs) reference.push_back(l2.front() * std::pow(h / hs.front(), 2.0));
  polyline(reference, "red", true);
  polyline(l2, "steelblue", false);
  polyline(energy, "darkorange", false);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"steelblue\"/>\n",
                  X(hs[i]), Y(l2[i]));
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"6\" height=\"6\" fill=\"darkorange\"/>\n",
                  X(hs[i]) - 3, Y(energy[i]) - 3);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%.3g</text>\n",
                  X(hs[i]), bottom + 18, hs[i]);
    out << buf;
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 40
      << "\" font-size=\"13\" text-anchor=\"middle\">mesh size h (log)</text>\n";
  out << "<text x=\"20\" y=\"" << (top + bottom) / 2
      << "\" font-size=\"13\" transform=\"rotate(-90 20 " << (top + bottom) / 2
      << ")\" text-anchor=\"middle\">error (log)</text>\n";
  out << "<text x=\"" << right - 180 << "\" y=\"" << top + 16
      << "\" font-size=\"12\" fill=\"steelblue\">L2 quotient error</text>\n";
  out << "<text x=\"" << right - 180 << "\" y=\"" << top + 32
      << "\" font-size=\"12\" fill=\"darkorange\">energy error</text>\n";
  out << "<text x=\"" << right - 180 << "\" y=\"" << top + 48
      << "\" font-size=\"12\" fill=\"red\">slope-2 reference</text>\n";
  out << "</svg>\n";
}

int cmd_solve(const RunConfig& config) {
  cdg::StudyConfig study = to_study_config(config);
  study.level_min = study.level_max = config.level;
  const cdg::LevelResult result = cdg::solve_level(study, config.level);

  cdg::ConvergenceReport report;
  report.config = study;
  report.rows = {result.row};
  with_output(config.out, [&](std::ostream& os) { cdg::write_convergence_csv(report, os); });

  if (!config.off_path.empty())
    with_output(config.off_path, [&](std::ostream& os) { cdg::write_off(result.mesh, os); });
  if (!config.matrix_path.empty())
    with_output(config.matrix_path,
                [&](std::ostream& os) { cdg::write_sparse_coordinates(result.system.A, os); });
  if (!config.solution_path.empty())
    with_output(config.solution_path, [&](std::ostream& os) {
      char buf[64];
      for (Eigen::Index i = 0; i < result.u.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", result.u[i]);
        os << buf;
      }
    });
  return 0;
}

int cmd_convergence(const RunConfig& config) {
  const cdg::ConvergenceReport report = cdg::run_convergence_study(to_study_config(config));
  with_output(config.out, [&](std::ostream& os) { cdg::write_convergence_csv(report, os); });
  if (!config.svg_path.empty())
    with_output(config.svg_path, [&](std::ostream& os) { write_svg_plot(report, os); });
  return 0;
}

int cmd_geomcheck(const RunConfig& config) {
  const cdg::StudyConfig study = to_study_config(config);
  const cdg::ImplicitSurface surface =
      cdg::make_problem(study.problem, study.load_source).surface;
  std::vector<cdg::TriangleMesh> family;
  for (int level = study.level_min; level <= study.level_max; ++level) {
    cdg::TriangleMesh mesh = cdg::generate_mesh(surface, level);
    if (study.perturbed) mesh = cdg::perturb_vertices(mesh, study.amplitude, study.seed);
    family.push_back(std::move(mesh));
  }
  const cdg::GeometryRateReport report = cdg::geometry_rates(surface, family);
  if (report.rows.size() < 2)
    std::cerr << "geomcheck: fewer than two levels, slope fit omitted\n";
  with_output(config.out, [&](std::ostream& os) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "# problem=%s levels=%d..%d mesh=%s seed=%llu\n",
                  study.problem.c_str(), study.level_min, study.level_max,
                  study.perturbed ? "perturbed" : "structured",
                  static_cast<unsigned long long>(study.seed));
    os << buf;
    cdg::write_geometry_csv(report, os);
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (const char* env = std::getenv("CDG_THREADS")) {
    const int threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);
  }
#endif

  RunConfig config;

  // The JSON config (if any) provides defaults; explicit flags override it,
  // so it has to be located and applied before CLI11 parses the rest.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    try {
      if (arg == "--config" && i + 1 < argc) {
        apply_json_config(config, argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        apply_json_config(config, arg.substr(9));
      }
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App app{"continuous/discontinuous Galerkin solver for the surface biharmonic problem"};
  app.require_subcommand(1);

  std::string config_path;  // consumed above; registered so parsing accepts it
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    cmd->add_option("--problem", config.problem, "model problem")
        ->check(CLI::IsMember({"sphere", "torus"}));
    cmd->add_option("--beta", config.beta, "edge penalty parameter")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--mesh", config.mesh, "mesh family")
        ->check(CLI::IsMember({"structured", "perturbed"}));
    cmd->add_option("--seed", config.seed, "perturbation seed");
    cmd->add_option("--amplitude", config.amplitude, "perturbation amplitude (of h)")
        ->check(CLI::Range(0.0, 0.3));
    cmd->add_option("--load-source", config.load_source, "right-hand side origin")
        ->check(CLI::IsMember({"closed-form", "oracle"}));
    cmd->add_option("--h-mode", config.h_mode, "penalty length scale")
        ->check(CLI::IsMember({"global", "per-edge"}));
    cmd->add_option("--out", config.out, "output CSV path (default stdout)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one refinement level");
  add_common(solve);
  solve->add_option("--level", config.level, "refinement level")->check(CLI::NonNegativeNumber);
  solve->add_option("--write-off", config.off_path, "dump the mesh in OFF format");
  solve->add_option("--dump-matrix", config.matrix_path, "dump the stiffness matrix (i j value)");
  solve->add_option("--dump-solution", config.solution_path, "dump solution coefficients");

  CLI::App* convergence = app.add_subcommand("convergence", "run a refinement study");
  add_common(convergence);
  convergence->add_option("--levels", config.levels, "level range (min max)")
      ->expected(2)
      ->check(CLI::NonNegativeNumber);
  convergence->add_option("--svg", config.svg_path, "write a log-log SVG plot");

  CLI::App* geomcheck = app.add_subcommand("geomcheck", "geometric consistency rates");
  add_common(geomcheck);
  geomcheck->add_option("--levels", config.levels, "level range (min max)")
      ->expected(2)
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (config.levels.size() != 2 || config.levels[0] > config.levels[1]) {
    std::cerr << "invalid level range\n";
    return 2;
  }
  if (convergence->parsed() && config.levels[0] == config.levels[1]) {
    std::cerr << "convergence needs at least two levels\n";
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(config);
    if (convergence->parsed()) return cmd_convergence(config);
    return cmd_geomcheck(config);
  } catch (const cdg::Error& e) {
    std::cerr << error_name(e) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
