#include "shapegrad/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "shapegrad/io.hpp"
#include "shapegrad/problems.hpp"
#include "shapegrad/report.hpp"

namespace shapegrad {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config;
  std::string out;
  int threads = 1;
  long seed = 0;  // accepted for interface stability; runs are deterministic
};

struct MeshOptions {
  bool disk = false;
  std::vector<double> center{0.0, 0.0};
  double radius = 1.0;
  int refine = 3;
  std::vector<double> rect;
  int nx = 8;
  int ny = 8;
  std::string output;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
  auto log = std::make_shared<spdlog::logger>("shapegrad", sink);
  log->set_pattern("[%l] %v");
  const char* env = std::getenv("SHAPEGRAD_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug")
    log->set_level(spdlog::level::debug);
  else if (level == "info")
    log->set_level(spdlog::level::info);
  else {
    log->set_level(spdlog::level::err);
    if (level != "error") log->error("SHAPEGRAD_LOG='{}' is not one of error, info, debug", level);
  }
  return log;
}

class Timer {
 public:
  Timer(spdlog::logger& log, std::string what) : log_(log), what_(std::move(what)) {}
  ~Timer() {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    log_.info("{} took {:.1f} ms", what_, ms);
  }

 private:
  spdlog::logger& log_;
  std::string what_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Everything a problem command needs, loaded from --config.
struct Session {
  RunConfig config;
  Mesh mesh;
  VectorField theta;
  fs::path out_dir;
};

Session open_session(const GlobalOptions& g) {
  if (g.config.empty()) throw InvalidInput("--config is required for this command");
  Session s{RunConfig::load(g.config), {}, {}, {}};
  s.config.validation.threads = g.threads;
  s.mesh = s.config.build_mesh();
  s.theta = s.config.build_theta(s.mesh);
  s.out_dir = g.out.empty() ? s.config.out_dir : fs::path(g.out);
  return s;
}

bool wants(const RunConfig& c, const std::string& format) {
  return std::find(c.formats.begin(), c.formats.end(), format) != c.formats.end();
}

Json header(const std::string& command, const Session& s, const ShapeProblem& problem) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["problem"] = problem.id();
  Json cfg = Json::object();
  for (const auto& [k, v] : s.config.entries) cfg[k] = v;
  j["config"] = std::move(cfg);
  j["mesh"] = Json{{"nodes", s.mesh.num_nodes()},
                   {"triangles", s.mesh.num_triangles()},
                   {"boundary_edges", s.mesh.boundary().size()},
                   {"hash", hash_hex(s.mesh.hash())},
                   {"order", s.config.order},
                   {"dofs", problem.dof_count()}};
  j["theta"] = s.theta.name();
  j["velocity"] = s.config.validation.velocity == VelocityMode::nodal_interpolant ? "nodal" : "analytic";
  return j;
}

Json check(const std::string& name, double value, double tolerance, bool pass) {
  return Json{{"name", name},
              {"value", std::isfinite(value) ? Json(value) : Json(nullptr)},
              {"tolerance", tolerance},
              {"pass", pass}};
}

void write_json(const fs::path& dir, const std::string& name, const Json& j) {
  write_atomic((dir / name).string(), j.dump(2) + "\n");
}

int finish(Json& report, const Json& checks, const Session& s, const std::string& name, std::ostream& out) {
  bool pass = true;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  report["checks"] = checks;
  report["pass"] = pass;
  if (wants(s.config, "json")) write_json(s.out_dir, name, report);
  for (const auto& c : checks)
    out << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << '\n';
  return pass ? kExitOk : kExitValidation;
}

int cmd_mesh(const GlobalOptions& g, const MeshOptions& m, std::ostream& out) {
  Mesh mesh;
  if (m.disk == !m.rect.empty()) {
    if (m.disk || g.config.empty()) throw InvalidInput("mesh: give exactly one of --disk and --rect (or --config)");
    mesh = RunConfig::load(g.config).build_mesh();
  } else if (m.disk) {
    if (m.center.size() != 2 || !(m.radius > 0.0) || m.refine < 0)
      throw InvalidInput("mesh: --disk needs --radius > 0, --refine >= 0 and a two-value --center");
    mesh = gen_disk(Vec2(m.center[0], m.center[1]), m.radius, m.refine);
  } else {
    if (m.rect.size() != 4 || m.nx < 1 || m.ny < 1 || !(m.rect[2] > m.rect[0]) || !(m.rect[3] > m.rect[1]))
      throw InvalidInput("mesh: --rect x0 y0 x1 y1 with x1 > x0, y1 > y0 and --nx, --ny >= 1");
    mesh = gen_rectangle(m.rect[0], m.rect[1], m.rect[2], m.rect[3], m.nx, m.ny);
  }
  std::string path = m.output;
  if (path.empty()) path = (fs::path(g.out.empty() ? "." : g.out) / "mesh.msh").string();
  write_atomic(path, format_mesh(mesh));
  out << "nodes " << mesh.num_nodes() << " triangles " << mesh.num_triangles() << " boundary_edges "
      << mesh.boundary().size() << '\n';
  return kExitOk;
}

int cmd_solve(const GlobalOptions& g, std::ostream& out, spdlog::logger& log) {
  const Session s = open_session(g);
  std::unique_ptr<ShapeProblem> problem;
  {
    Timer t(log, "solve");
    problem = make_problem(s.config, s.mesh);
  }
  Json report = header("solve", s, *problem);
  report["cost"] = problem->cost();
  Json files = Json::array();
  if (problem->has_state()) {
    auto write_field = [&](const std::string& name, const TimeSeries& series) {
      write_atomic((s.out_dir / name).string(), format_field({s.config.order, s.mesh.hash(), series}));
      files.push_back(name);
    };
    write_field("u.field", problem->state());
    write_field("p.field", problem->adjoint());
    if (!s.theta.is_zero()) write_field("udot.field", problem->material(s.theta, s.config.validation.velocity));
  }
  report["fields"] = files;
  Json diag = Json::object();
  for (const auto& [k, v] : problem->diagnostics(s.theta)) diag[k] = v;
  report["diagnostics"] = diag;
  if (wants(s.config, "json")) write_json(s.out_dir, "solve.json", report);
  out << "cost " << format_number(problem->cost()) << '\n';
  return kExitOk;
}

int cmd_derive(const GlobalOptions& g, bool full, std::ostream& out, spdlog::logger& log) {
  const Session s = open_session(g);
  const ValidationSettings& v = s.config.validation;
  std::unique_ptr<ShapeProblem> problem;
  {
    Timer t(log, "solve");
    problem = make_problem(s.config, s.mesh);
  }
  const std::string command = full ? "validate" : "derive";
  Json report = header(command, s, *problem);
  report["cost"] = problem->cost();
  const DerivativeTerms terms = problem->derivative(s.theta, v.velocity);
  report["derivative"] = to_json(terms);
  out << "dJ " << format_number(terms.total()) << '\n';

  Json checks = Json::array();
  FdTable fd;
  {
    Timer t(log, "finite differences");
    fd = fd_shape_check(*problem, s.theta, v);
  }
  fd.mesh = hash_hex(s.mesh.hash());
  report["fd"] = to_json(fd);
  checks.push_back(check("fd_shape", fd.relative_gap(), v.fd_rel_tol, fd.pass));
  if (wants(s.config, "csv")) write_atomic((s.out_dir / "fd_table.csv").string(), fd_table_csv(fd));

  if (full) {
    if (const auto dual = dual_form_check(*problem, s.theta, v.velocity)) {
      report["dual_form"] = to_json(*dual);
      checks.push_back(check("dual_form", dual->gap(), v.dual_form_tol, dual->gap() <= v.dual_form_tol));
    }
    if (problem->has_state()) {
      TaylorTable taylor;
      {
        Timer t(log, "material Taylor check");
        taylor = material_taylor_check(*problem, s.theta, v);
      }
      report["taylor"] = to_json(taylor);
      const double order = taylor.rows.empty() ? 0.0 : taylor.rows.back().order;
      checks.push_back(check("material_taylor", order, v.taylor_min_order, taylor.pass));
      if (wants(s.config, "csv")) write_atomic((s.out_dir / "taylor.csv").string(), taylor_csv(taylor));

      const DualityReport dual = duality_check(*problem, s.theta, v.velocity);
      report["duality"] = to_json(dual);
      checks.push_back(check("duality", dual.rel_gap(), v.duality_tol, dual.rel_gap() <= v.duality_tol));
    }
    Json diag = Json::object();
    for (const auto& [k, val] : problem->diagnostics(s.theta)) diag[k] = val;
    report["diagnostics"] = diag;
  }
  return finish(report, checks, s, command + ".json", out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  CLI::App app{"Distributed shape derivatives: assembly and verification", "shapegrad"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Run configuration (INI)");
  app.add_option("--out", g.out, "Output directory (overrides [output] dir)");
  app.add_option("--threads", g.threads, "Worker threads for independent FD rows")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Reserved; runs are deterministic");

  MeshOptions m;
  auto* mesh = app.add_subcommand("mesh", "Generate a mesh file");
  mesh->fallthrough();
  mesh->add_flag("--disk", m.disk, "Refined hexagon approximating a disk");
  mesh->add_option("--center", m.center, "Disk center")->expected(2);
  mesh->add_option("--radius", m.radius, "Disk radius");
  mesh->add_option("--refine", m.refine, "Disk refinement level");
  mesh->add_option("--rect", m.rect, "Rectangle x0 y0 x1 y1")->expected(4);
  mesh->add_option("--nx", m.nx, "Rectangle cells in x");
  mesh->add_option("--ny", m.ny, "Rectangle cells in y");
  mesh->add_option("-o,--output", m.output, "Mesh file to write");
  auto* solve = app.add_subcommand("solve", "Solve state, adjoint and material derivative; write field files");
  solve->fallthrough();
  auto* derive = app.add_subcommand("derive", "Assemble dJ and compare with difference quotients");
  derive->fallthrough();
  auto* validate = app.add_subcommand("validate", "Run every applicable check");
  validate->fallthrough();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (mesh->parsed()) return cmd_mesh(g, m, out);
    if (solve->parsed()) return cmd_solve(g, out, *log);
    if (derive->parsed()) return cmd_derive(g, false, out, *log);
    return cmd_derive(g, true, out, *log);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MeshValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SingularSystem& e) {
    err << "solve failed: " << e.what() << '\n';
    return kExitSolve;
  } catch (const ConvergenceError& e) {
    err << "solve failed: " << e.what() << '\n';
    return kExitSolve;
  } catch (const FlowDegeneracy& e) {
    err << "solve failed: " << e.what() << '\n';
    return kExitSolve;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolve;
  }
}

}  // namespace shapegrad
