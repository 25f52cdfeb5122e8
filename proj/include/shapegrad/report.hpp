#pragma once

// Report serialization: JSON documents, CSV tables and field files.
//
// fd_table CSV columns, in order:
//   s, J_plus, J_minus, central_quotient, central_error, central_order,
//   forward_quotient, forward_error, forward_order, status
// taylor CSV columns: s, remainder, order, status
// status is ok, FAIL or degenerate.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "shapegrad/validation.hpp"

namespace shapegrad {

inline constexpr const char* kReportSchema = "shapegrad-report/1";

using Json = nlohmann::ordered_json;

/// 17 significant digits with "." as decimal separator; "nan", "inf", "-inf".
std::string format_number(double v);
/// RFC 4180 quoting when the field holds a comma, quote or line break.
std::string csv_field(const std::string& s);

std::string fd_table_csv(const FdTable& table);
std::string taylor_csv(const TaylorTable& table);

Json to_json(const DerivativeTerms& terms);
Json to_json(const FdTable& table);
Json to_json(const TaylorTable& table);
Json to_json(const DualityReport& report);
Json to_json(const DualFormReport& report);

/// Mesh hash as 16 lowercase hex digits.
std::string hash_hex(std::uint64_t h);

/// Coefficient vectors tied to a Lagrange space on a specific mesh.
struct FieldFile {
  int order = 1;
  std::uint64_t mesh_hash = 0;
  TimeSeries slices;
};

/// "shapegrad-field v1", then "space P<order> mesh <hash> dofs <n> slices <k>",
/// then n·k coefficients, one per line, slice by slice.
std::string format_field(const FieldFile& field);
FieldFile parse_field(const std::string& text);

}  // namespace shapegrad
