#pragma once

// Run configuration: INI-style sections read into a RunConfig.
//
//   [problem]    id = robin | quasilinear | dirichlet_energy | parabolic_j1 |
//                     parabolic_j2 | prop5_manufactured | prop6_manufactured | area
//   [mesh]       generate = disk cx cy radius refine | rect x0 y0 x1 y1 nx ny
//                file = path (relative to the config file), order = 1 | 2
//   [data]       catalog entries and numbers, per problem (see README)
//   [theta]      field = <vector catalog entry>, support = x0 y0 x1 y1, margin = m
//   [validation] s_list, steps, tolerances, velocity = nodal | analytic
//   [output]     dir = path, formats = json csv

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shapegrad/mesh.hpp"
#include "shapegrad/validation.hpp"

namespace shapegrad {

inline const std::vector<std::string>& problem_ids() {
  static const std::vector<std::string> ids{"robin",        "quasilinear",        "dirichlet_energy",
                                            "parabolic_j1", "parabolic_j2",       "prop5_manufactured",
                                            "prop6_manufactured", "area"};
  return ids;
}

struct RunConfig {
  std::string problem;
  std::string mesh_generate;
  std::filesystem::path mesh_file;
  int order = 1;
  std::map<std::string, std::string> data;
  std::string theta = "zero";
  std::string theta_support;  // empty: the mesh hold-all box
  double theta_margin = 0.0;
  ValidationSettings validation;
  std::filesystem::path out_dir = "out";
  std::vector<std::string> formats{"json", "csv"};
  /// Every key in file order, for report echoes.
  std::vector<std::pair<std::string, std::string>> entries;

  /// Throws InvalidInput (or ParseError) on unknown sections, keys, catalog
  /// names or malformed numbers.
  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  Mesh build_mesh() const;
  VectorField build_theta(const Mesh& mesh) const;

  bool has(const std::string& key) const { return data.count(key) != 0; }
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
};

/// Parses "a b c ..." into doubles; throws InvalidInput naming `what`.
std::vector<double> parse_numbers(const std::string& text, const std::string& what);

}  // namespace shapegrad
