#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "ebdg/basis.hpp"
#include "ebdg/errors.hpp"
#include "ebdg/io.hpp"
#include "ebdg/solver.hpp"
#include "ebdg/stability.hpp"
#include "equivalence.hpp"

namespace ebdg::cli {
namespace {

struct Options {
  int p = 1;
  std::string method = "rod-e";
  std::string coords = "nodal";
  std::string weight_file;
  std::string integrator = "explicit";
  double d = -1.0;
  double cfl = 1.0;
  int cells = 2;
  double cfl_hi = 1.0;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 42;
  int threads = 0;
  int instances = 100;
  std::vector<int> meshes;
  bool periodic = false;
};

Matrix read_weight(const std::string& path, int p) {
  if (path.empty()) throw ValidationError("--method rod-w needs --weight-file");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weight file '" + path + "'");
  std::vector<double> values{std::istream_iterator<double>(in), std::istream_iterator<double>()};
  const int b = p + 1;
  if (static_cast<int>(values.size()) != b * b) {
    throw ValidationError("weight file must hold " + std::to_string(b * b) + " numbers, found " +
                          std::to_string(values.size()));
  }
  Matrix w(b, b);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) w(i, j) = values[i * b + j];
  return w;
}

CorrectionMethod method_from(const Options& o) {
  CorrectionMethod m;
  m.kind = parse_correction_kind(o.method);
  m.coordinates = parse_rod_coordinates(o.coords);
  if (m.kind == CorrectionKind::kRodL2) m.coordinates = RodCoordinates::kModal;
  if (m.kind == CorrectionKind::kRodW) m.weight = read_weight(o.weight_file, o.p);
  return m;
}

/// Writes through `fn` to --out (or `fallback` when --out is empty).
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write '" + path + "'");
  fn(file);
  if (!file) throw ValidationError("write to '" + path + "' failed");
}

int run_periodic_cfl(const Options& o, bool single, std::ostream& out) {
  out << "p,cfl_max,heuristic\n";
  const int lo = single ? o.p : 0;
  const int hi = single ? o.p : 6;
  for (int p = lo; p <= hi; ++p) {
    out << p << ',' << format_double(periodic_cfl_max(p)) << ','
        << format_double(1.0 / (2 * p + 1)) << '\n';
  }
  return kExitOk;
}

int run_eigen(const Options& o, std::ostream& out) {
  const Matrix a = o.periodic ? periodic_system_matrix(o.p, o.cells)
                              : embedded_system_matrix(o.p, method_from(o), o.d, o.cells);
  out << "re,im\n";
  for (const Complex& z : eigenvalues_dense(a)) {
    out << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
  }
  return kExitOk;
}

int run_stability_map(const Options& o, std::ostream& out) {
  GridSpec grid;
  grid.cfl_hi = o.cfl_hi;
  AnalysisOptions analysis;
  analysis.cells = o.cells;
  const StabilityMap map =
      stability_map(o.p, method_from(o), parse_integrator(o.integrator), grid, o.threads, analysis);
  if (o.format == "csv" || !o.out.empty()) {
    emit(o.out, out, [&](std::ostream& s) { write_map_csv(s, map); });
  }
  if (o.format == "svg") {
    std::string svg_path;
    if (!o.out.empty()) svg_path = std::filesystem::path(o.out).replace_extension(".svg").string();
    emit(svg_path, out, [&](std::ostream& s) { write_map_svg(s, map); });
  }
  return kExitOk;
}

int run_converge(const Options& o, std::ostream& out) {
  RunConfig config;
  config.degree = o.p;
  config.method = method_from(o);
  config.integrator = parse_integrator(o.integrator);
  config.d = o.d;
  config.cfl = o.cfl;
  std::vector<int> meshes = o.meshes;
  if (meshes.empty()) {
    meshes = o.p <= 3 ? std::vector<int>{20, 40, 80, 160} : std::vector<int>{5, 10, 20, 40};
  }
  const ConvergenceReport report = convergence_study(config, meshes, o.threads);
  emit(o.out, out, [&](std::ostream& s) { write_convergence_csv(s, report); });
  for (const auto& row : report.rows) {
    if (row.unstable) return kExitUnstable;
  }
  return kExitOk;
}

int run_verify_equivalence(const Options& o, std::ostream& out) {
  const EquivalenceReport report = verify_equivalence(o.seed, o.instances);
  out << "case,instances,max_deviation\n";
  for (const auto& c : report.cases) {
    out << c.name << ',' << c.instances << ',' << format_double(c.max_deviation) << '\n';
  }
  out << "max," << report.cases.size() * o.instances << ','
      << format_double(report.max_deviation()) << '\n';
  return report.max_deviation() <= 1e-10 ? kExitOk : kExitNumerical;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Embedded-boundary DG analysis for 1D linear advection", "ebdg"};
  app.require_subcommand(1);

  const auto methods = CLI::IsMember({"sb", "rod-e", "rod-l2", "rod-w"});
  const auto integrators = CLI::IsMember({"explicit", "implicit"});
  auto add_method = [&](CLI::App* sub) {
    sub->add_option("--method", o.method, "Boundary correction")->check(methods);
    sub->add_option("--rod-coords", o.coords, "Coefficients for the rod-e/rod-w distance")
        ->check(CLI::IsMember({"nodal", "modal"}));
    sub->add_option("--weight-file", o.weight_file, "Whitespace-separated (p+1)^2 SPD weight");
  };
  auto add_p = [&](CLI::App* sub) {
    return sub->add_option("--p", o.p, "Polynomial degree")->check(CLI::Range(0, 12));
  };
  auto add_d = [&](CLI::App* sub) {
    sub->add_option("--d", o.d, "Signed boundary distance in cell lengths")
        ->check(CLI::Range(-1.0, 1.0));
  };
  auto add_cells = [&](CLI::App* sub) {
    sub->add_option("--cells", o.cells, "Cells in the analysis system")->check(CLI::Range(2, 64));
  };
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads (0: all cores)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* periodic = app.add_subcommand("periodic-cfl", "Table of CFL_max for the periodic scheme");
  auto* periodic_p = add_p(periodic);

  auto* eigen = app.add_subcommand("eigen", "Sorted eigenvalues of M^-1 K");
  add_p(eigen);
  add_method(eigen);
  add_d(eigen);
  add_cells(eigen);
  eigen->add_flag("--periodic", o.periodic, "Use the periodic operator");

  auto* map = app.add_subcommand("stability-map", "Stable/unstable grid over (d, CFL)");
  add_p(map);
  add_method(map);
  map->add_option("--integrator", o.integrator)->check(integrators);
  map->add_option("--cfl-hi", o.cfl_hi, "Upper end of the CFL axis")
      ->check(CLI::IsMember({1.0, 10.0}));
  add_cells(map);
  map->add_option("--out", o.out, "CSV path (SVG goes next to it)");
  map->add_option("--format", o.format)->check(CLI::IsMember({"csv", "svg"}));
  add_threads(map);

  auto* converge = app.add_subcommand("converge", "Manufactured-solution convergence study");
  add_p(converge);
  add_method(converge);
  converge->add_option("--integrator", o.integrator)->check(integrators);
  add_d(converge);
  converge->add_option("--cfl", o.cfl, "Normalized CFL")->check(CLI::PositiveNumber);
  converge->add_option("--meshes", o.meshes, "Cell counts, each double the previous")->delimiter(',');
  converge->add_option("--out", o.out, "CSV path");
  add_threads(converge);

  auto* verify = app.add_subcommand("verify-equivalence", "Closed form vs KKT property suite");
  verify->add_option("--seed", o.seed, "RNG seed");
  verify->add_option("--instances", o.instances, "Instances per kind")->check(CLI::Range(1, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (periodic->parsed()) return run_periodic_cfl(o, periodic_p->count() > 0, out);
    if (eigen->parsed()) return run_eigen(o, out);
    if (map->parsed()) return run_stability_map(o, out);
    if (converge->parsed()) return run_converge(o, out);
    if (verify->parsed()) return run_verify_equivalence(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UnstableRunError& e) {
    err << "unstable: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitValidation;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("ebdg");
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ebdg::cli
