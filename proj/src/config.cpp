#include "shapegrad/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "shapegrad/io.hpp"

namespace shapegrad {

namespace {

enum class Kind { scalar, time, matrix, nonlinear, number, integer };

// Data keys each problem accepts.
const std::map<std::string, std::map<std::string, Kind>>& data_keys() {
  static const std::map<std::string, std::map<std::string, Kind>> keys{
      {"robin", {{"M", Kind::matrix}, {"beta", Kind::scalar}, {"f", Kind::scalar}, {"g", Kind::scalar}}},
      {"quasilinear",
       {{"m", Kind::nonlinear},
        {"f", Kind::nonlinear},
        {"g", Kind::scalar},
        {"ud", Kind::scalar},
        {"c1", Kind::number},
        {"c2", Kind::number},
        {"c3", Kind::number},
        {"r_check", Kind::number}}},
      {"dirichlet_energy", {{"f", Kind::scalar}}},
      {"parabolic_j1",
       {{"M", Kind::matrix}, {"f", Kind::time}, {"g", Kind::scalar}, {"ud", Kind::time}, {"T", Kind::number},
        {"steps", Kind::integer}}},
      {"parabolic_j2",
       {{"M", Kind::matrix}, {"f", Kind::time}, {"g", Kind::scalar}, {"ud", Kind::time}, {"T", Kind::number},
        {"steps", Kind::integer}}},
      {"prop5_manufactured", {{"u", Kind::scalar}, {"p", Kind::scalar}, {"h", Kind::scalar}, {"ud", Kind::scalar}}},
      {"prop6_manufactured", {{"u", Kind::scalar}, {"p", Kind::scalar}, {"h", Kind::scalar}, {"ud", Kind::scalar}}},
      {"area", {}},
  };
  return keys;
}

double to_number(const std::string& text, const std::string& what) {
  const auto v = parse_numbers(text, what);
  if (v.size() != 1) throw InvalidInput(what + ": expected one number, got '" + text + "'");
  return v[0];
}

int to_int(const std::string& text, const std::string& what) {
  const double v = to_number(text, what);
  if (v != static_cast<int>(v)) throw InvalidInput(what + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

void check_entry(const std::string& key, Kind kind, const std::string& value) {
  const std::string what = "data." + key;
  switch (kind) {
    case Kind::scalar:
      make_scalar_function(CatalogSpec::parse(value));
      break;
    case Kind::time:
      make_time_function(value);
      break;
    case Kind::matrix:
      make_matrix_function(CatalogSpec::parse(value));
      break;
    case Kind::nonlinear:
      make_nonlinear_function(CatalogSpec::parse(value));
      break;
    case Kind::number:
      to_number(value, what);
      break;
    case Kind::integer:
      to_int(value, what);
      break;
  }
}

VelocityMode parse_velocity(const std::string& v) {
  if (v == "nodal") return VelocityMode::nodal_interpolant;
  if (v == "analytic") return VelocityMode::analytic;
  throw InvalidInput("validation.velocity must be 'nodal' or 'analytic', got '" + v + "'");
}

}  // namespace

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw InvalidInput(what + ": '" + tok + "' is not a number");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = data.find(key);
  return it == data.end() ? fallback : it->second;
}

double RunConfig::number(const std::string& key, double fallback) const {
  const auto it = data.find(key);
  return it == data.end() ? fallback : to_number(it->second, "data." + key);
}

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), static_cast<int>(e.line()));
  }

  RunConfig cfg;
  static const std::map<std::string, std::set<std::string>> allowed{
      {"problem", {"id"}},
      {"mesh", {"generate", "file", "order"}},
      {"data", {}},
      {"theta", {"field", "support", "margin"}},
      {"validation",
       {"s_list", "steps", "fd_min_order", "fd_forward_min_order", "fd_rel_tol", "fd_abs_tol", "extrapolated_tol",
        "taylor_min_order", "taylor_abs_tol", "duality_tol", "dual_form_tol", "velocity"}},
      {"output", {"dir", "formats"}},
  };
  for (const auto& [section, body] : tree) {
    const auto sec = allowed.find(section);
    if (sec == allowed.end()) throw InvalidInput("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (section != "data" && !sec->second.count(key))
        throw InvalidInput("unknown key '" + key + "' in [" + section + "]");
      cfg.entries.emplace_back(section + "." + key, value.data());
    }
  }

  cfg.problem = tree.get<std::string>("problem.id", "");
  if (std::find(problem_ids().begin(), problem_ids().end(), cfg.problem) == problem_ids().end())
    throw InvalidInput("problem.id must name a known problem, got '" + cfg.problem + "'");

  cfg.mesh_generate = tree.get<std::string>("mesh.generate", "");
  const std::string file = tree.get<std::string>("mesh.file", "");
  if (cfg.mesh_generate.empty() == file.empty())
    throw InvalidInput("[mesh] needs exactly one of 'generate' and 'file'");
  if (!file.empty()) cfg.mesh_file = base_dir / file;
  cfg.order = to_int(tree.get<std::string>("mesh.order", "1"), "mesh.order");
  if (cfg.order != 1 && cfg.order != 2) throw InvalidInput("mesh.order must be 1 or 2");

  const auto& keys = data_keys().at(cfg.problem);
  if (const auto data = tree.get_child_optional("data"))
    for (const auto& [key, value] : *data) {
      const auto k = keys.find(key);
      if (k == keys.end()) throw InvalidInput("problem '" + cfg.problem + "' takes no data key '" + key + "'");
      check_entry(key, k->second, value.data());
      cfg.data[key] = value.data();
    }

  cfg.theta = tree.get<std::string>("theta.field", "zero");
  make_vector_field(CatalogSpec::parse(cfg.theta), Box{Vec2(-1, -1), Vec2(1, 1)});
  cfg.theta_support = tree.get<std::string>("theta.support", "");
  if (!cfg.theta_support.empty() && parse_numbers(cfg.theta_support, "theta.support").size() != 4)
    throw InvalidInput("theta.support needs four numbers x0 y0 x1 y1");
  cfg.theta_margin = to_number(tree.get<std::string>("theta.margin", "0"), "theta.margin");

  ValidationSettings& v = cfg.validation;
  if (const auto s = tree.get_optional<std::string>("validation.s_list")) v.s_list = parse_numbers(*s, "s_list");
  auto num = [&](const char* key, double& target) {
    if (const auto s = tree.get_optional<std::string>(std::string("validation.") + key))
      target = to_number(*s, std::string("validation.") + key);
  };
  if (const auto s = tree.get_optional<std::string>("validation.steps")) v.steps = to_int(*s, "validation.steps");
  num("fd_min_order", v.fd_min_order);
  num("fd_forward_min_order", v.fd_forward_min_order);
  num("fd_rel_tol", v.fd_rel_tol);
  num("fd_abs_tol", v.fd_abs_tol);
  num("extrapolated_tol", v.extrapolated_tol);
  num("taylor_min_order", v.taylor_min_order);
  num("taylor_abs_tol", v.taylor_abs_tol);
  num("duality_tol", v.duality_tol);
  num("dual_form_tol", v.dual_form_tol);
  v.velocity = parse_velocity(tree.get<std::string>("validation.velocity", "nodal"));
  v.validate();

  const std::string dir = tree.get<std::string>("output.dir", "out");
  cfg.out_dir = dir;
  if (const auto f = tree.get_optional<std::string>("output.formats")) {
    cfg.formats.clear();
    std::istringstream fs(*f);
    std::string tok;
    while (fs >> tok) {
      if (tok != "json" && tok != "csv") throw InvalidInput("output.formats accepts 'json' and 'csv', got '" + tok + "'");
      cfg.formats.push_back(tok);
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw InvalidInput("config file not found: " + path.string());
  return parse(read_file(path.string()), path.parent_path());
}

Mesh RunConfig::build_mesh() const {
  if (!mesh_file.empty()) return load_mesh(mesh_file.string());
  std::istringstream in(mesh_generate);
  std::string kind, rest;
  in >> kind;
  std::getline(in, rest);
  const auto p = parse_numbers(rest, "mesh.generate");
  if (kind == "disk") {
    if (p.size() != 4 || p[3] != static_cast<int>(p[3]) || p[3] < 0 || !(p[2] > 0))
      throw InvalidInput("mesh.generate: disk cx cy radius refine");
    return gen_disk(Vec2(p[0], p[1]), p[2], static_cast<int>(p[3]));
  }
  if (kind == "rect") {
    if (p.size() != 6 || p[4] < 1 || p[5] < 1 || p[4] != static_cast<int>(p[4]) || p[5] != static_cast<int>(p[5]))
      throw InvalidInput("mesh.generate: rect x0 y0 x1 y1 nx ny");
    return gen_rectangle(p[0], p[1], p[2], p[3], static_cast<int>(p[4]), static_cast<int>(p[5]));
  }
  throw InvalidInput("mesh.generate: unknown generator '" + kind + "'");
}

VectorField RunConfig::build_theta(const Mesh& mesh) const {
  Box box = mesh.holdall();
  if (!theta_support.empty()) {
    const auto b = parse_numbers(theta_support, "theta.support");
    box = Box{Vec2(b[0], b[1]), Vec2(b[2], b[3])};
  }
  if (!mesh.holdall().contains(box)) throw InvalidInput("theta.support must lie inside the mesh hold-all box");
  return make_vector_field(CatalogSpec::parse(theta), box, theta_margin);
}

}  // namespace shapegrad
