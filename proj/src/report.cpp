#include "shapegrad/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace shapegrad {

namespace {

const char* status(bool degenerate, bool pass) { return degenerate ? "degenerate" : pass ? "ok" : "FAIL"; }

// JSON has no NaN; missing values become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  // The C locale is never changed, so the separator is always '.'.
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fd_table_csv(const FdTable& t) {
  std::ostringstream out;
  out << "s,J_plus,J_minus,central_quotient,central_error,central_order,forward_quotient,forward_error,"
         "forward_order,status\r\n";
  for (const auto& r : t.rows) {
    for (double v : {r.s, r.j_plus, r.j_minus, r.central, r.central_error, r.central_order, r.forward,
                     r.forward_error, r.forward_order})
      out << format_number(v) << ',';
    out << status(r.degenerate, r.pass) << "\r\n";
  }
  return out.str();
}

std::string taylor_csv(const TaylorTable& t) {
  std::ostringstream out;
  out << "s,remainder,order,status\r\n";
  for (const auto& r : t.rows)
    out << format_number(r.s) << ',' << format_number(r.remainder) << ',' << format_number(r.order) << ','
        << status(r.degenerate, r.pass) << "\r\n";
  return out.str();
}

Json to_json(const DerivativeTerms& d) {
  Json j;
  j["total"] = number(d.total());
  j["S0"] = number(d.S0);
  j["S1"] = number(d.S1);
  j["S2"] = number(d.S2);
  j["boundary"] = number(d.boundary());
  j["S0_gamma"] = number(d.S0_gamma);
  j["S1_gamma"] = number(d.S1_gamma);
  j["dt_pairing"] = number(d.dt_pairing);
  return j;
}

Json to_json(const FdTable& t) {
  Json j;
  j["problem"] = t.problem;
  j["theta"] = t.theta;
  j["mesh"] = t.mesh;
  j["dofs"] = t.dofs;
  j["J"] = number(t.j0);
  j["dJ"] = number(t.dJ);
  j["observed_order"] = number(t.observed_order());
  j["relative_gap"] = number(t.relative_gap());
  j["extrapolated"] = number(t.extrapolated);
  j["extrapolated_gap"] = number(t.extrapolated_gap);
  j["exact"] = t.exact;
  j["pass"] = t.pass;
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json row;
    row["s"] = number(r.s);
    row["J_plus"] = number(r.j_plus);
    row["J_minus"] = number(r.j_minus);
    row["central_quotient"] = number(r.central);
    row["central_error"] = number(r.central_error);
    row["central_order"] = number(r.central_order);
    row["forward_quotient"] = number(r.forward);
    row["forward_error"] = number(r.forward_error);
    row["forward_order"] = number(r.forward_order);
    row["status"] = status(r.degenerate, r.pass);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

Json to_json(const TaylorTable& t) {
  Json j;
  j["state_norm"] = number(t.state_norm);
  j["pass"] = t.pass;
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back(Json{{"s", number(r.s)},
                        {"remainder", number(r.remainder)},
                        {"order", number(r.order)},
                        {"status", status(r.degenerate, r.pass)}});
  j["rows"] = std::move(rows);
  return j;
}

Json to_json(const DualityReport& r) {
  return Json{{"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"abs_gap", number(r.abs_gap())},
              {"rel_gap", number(r.rel_gap())}};
}

Json to_json(const DualFormReport& r) {
  return Json{{"tensor", number(r.tensor)}, {"raw", number(r.raw)}, {"rel_gap", number(r.gap())}};
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_field(const FieldFile& f) {
  const std::size_t n = f.slices.empty() ? 0 : static_cast<std::size_t>(f.slices.front().size());
  std::ostringstream out;
  out << "shapegrad-field v1\n"
      << "space P" << f.order << " mesh " << hash_hex(f.mesh_hash) << " dofs " << n << " slices " << f.slices.size()
      << '\n';
  for (const auto& s : f.slices) {
    if (static_cast<std::size_t>(s.size()) != n) throw InvalidInput("field slices differ in length");
    for (Eigen::Index i = 0; i < s.size(); ++i) out << format_number(s[i]) << '\n';
  }
  return out.str();
}

FieldFile parse_field(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line != "shapegrad-field v1") throw ParseError("expected 'shapegrad-field v1'", 1);
  ++lineno;
  if (!std::getline(in, line)) throw ParseError("missing space line", lineno);
  std::istringstream sp(line);
  std::string kw_space, order, kw_mesh, hash, kw_dofs, kw_slices;
  std::size_t n = 0, k = 0;
  if (!(sp >> kw_space >> order >> kw_mesh >> hash >> kw_dofs >> n >> kw_slices >> k) || kw_space != "space" ||
      kw_mesh != "mesh" || kw_dofs != "dofs" || kw_slices != "slices" || (order != "P1" && order != "P2") ||
      hash.size() != 16)
    throw ParseError("malformed space line", lineno);
  FieldFile f;
  f.order = order == "P1" ? 1 : 2;
  try {
    f.mesh_hash = std::stoull(hash, nullptr, 16);
  } catch (const std::exception&) {
    throw ParseError("malformed mesh hash", lineno);
  }
  f.slices.assign(k, Vector(n));
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t i = 0; i < n; ++i) {
      ++lineno;
      if (!std::getline(in, line)) throw ParseError("too few coefficients", lineno);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(line, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != line.size()) throw ParseError("malformed coefficient", lineno);
      f.slices[s][static_cast<Eigen::Index>(i)] = v;
    }
  while (std::getline(in, line))
    if (!line.empty()) throw ParseError("trailing content", ++lineno);
  return f;
}

}  // namespace shapegrad
