#pragma once

// JSON files for pencils and certificates, and JSON renderings of reports.
//
// Pencil:      {"g": 2, "d": 2, "A0": [[...]], "A": [[[...]], [[...]]]}
// Certificate: {"mu": 2, "V": [[[...]], [[...]]]}

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lmidom/cube.hpp"
#include "lmidom/error.hpp"
#include "lmidom/inclusion.hpp"
#include "lmidom/minimize.hpp"
#include "lmidom/pencil.hpp"
#include "lmidom/radius.hpp"

namespace lmidom {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline std::size_t line_of_key(std::string_view text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string_view::npos ? 0 : line_of_offset(text, pos);
}

struct JsonSource {
  std::string_view text;
  std::string file;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    const auto top = field.substr(0, field.find_first_of("[."));
    throw ParseError(file, line_of_key(text, top), field, what);
  }

  Json parse() const {
    try {
      return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(file, line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), "", "invalid JSON");
    }
  }

  const Json& member(const Json& obj, const std::string& key) const {
    if (!obj.is_object()) fail(key, "expected a JSON object at top level");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(file, 0, key, "missing");
    return *it;
  }

  std::size_t count(const Json& obj, const std::string& key) const {
    const Json& v = member(obj, key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  Matrix matrix(const Json& v, const std::string& field, std::size_t rows, std::size_t cols) const {
    if (!v.is_array() || v.size() != rows) fail(field, "expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const Json& row = v[i];
      if (!row.is_array() || row.size() != cols) {
        fail(field, "row " + std::to_string(i) + ": expected " + std::to_string(cols) + " entries");
      }
      for (std::size_t j = 0; j < cols; ++j) {
        if (!row[j].is_number()) fail(field, "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not a number");
        m(i, j) = row[j].get<double>();
      }
    }
    return m;
  }

  std::vector<Matrix> matrices(const Json& v, const std::string& field, std::size_t count, std::size_t rows,
                               std::size_t cols) const {
    if (!v.is_array() || v.size() != count) fail(field, "expected " + std::to_string(count) + " matrices");
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < count; ++k)
      out.push_back(matrix(v[k], field + "[" + std::to_string(k) + "]", rows, cols));
    return out;
  }
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << text;
}

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  os << "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << format_double(m(i, j));
    os << "]";
  }
  os << "]";
}

inline void write_matrix_list(std::ostream& os, const std::vector<Matrix>& ms) {
  if (ms.empty()) {
    os << "[]";
    return;
  }
  os << "[\n";
  for (std::size_t k = 0; k < ms.size(); ++k) {
    os << "    ";
    write_matrix(os, ms[k]);
    os << (k + 1 < ms.size() ? ",\n" : "\n");
  }
  os << "  ]";
}

}  // namespace detail

/// Parses the pencil format. Symmetry is checked with tolerance 1e-9; the
/// file name is only used in error messages.
inline LinearPencil parse_pencil(std::string_view text, const std::string& file = "<input>") {
  const detail::JsonSource src{text, file};
  const Json doc = src.parse();
  const std::size_t g = src.count(doc, "g");
  const std::size_t d = src.count(doc, "d");
  if (d == 0) src.fail("d", "must be positive");
  const Matrix a0 = src.matrix(src.member(doc, "A0"), "A0", d, d);
  const auto as = src.matrices(src.member(doc, "A"), "A", g, d, d);
  if (!is_symmetric(a0, 1e-9)) src.fail("A0", "not symmetric");
  for (std::size_t j = 0; j < g; ++j)
    if (!is_symmetric(as[j], 1e-9)) src.fail("A[" + std::to_string(j) + "]", "not symmetric");
  return LinearPencil(a0, as);
}

inline LinearPencil load_pencil(const std::filesystem::path& path) {
  return parse_pencil(detail::read_file(path), path.string());
}

inline std::string pencil_to_string(const LinearPencil& l) {
  std::ostringstream os;
  os << "{\n  \"g\": " << l.num_vars() << ",\n  \"d\": " << l.size() << ",\n  \"A0\": ";
  detail::write_matrix(os, l.a0());
  os << ",\n  \"A\": ";
  detail::write_matrix_list(os, l.coeffs());
  os << "\n}\n";
  return os.str();
}

inline void save_pencil(const std::filesystem::path& path, const LinearPencil& l) {
  detail::write_file(path, pencil_to_string(l));
}

/// Every V must have the shape of V[0].
inline Certificate parse_certificate(std::string_view text, const std::string& file = "<input>") {
  const detail::JsonSource src{text, file};
  const Json doc = src.parse();
  const std::size_t mu = src.count(doc, "mu");
  const Json& vs = src.member(doc, "V");
  if (!vs.is_array() || vs.size() != mu) src.fail("V", "expected " + std::to_string(mu) + " matrices");
  Certificate cert;
  if (mu == 0) return cert;
  const std::size_t rows = vs[0].is_array() ? vs[0].size() : 0;
  const std::size_t cols = rows && vs[0][0].is_array() ? vs[0][0].size() : 0;
  if (rows == 0 || cols == 0) src.fail("V[0]", "expected a non-empty matrix");
  cert.vs = src.matrices(vs, "V", mu, rows, cols);
  return cert;
}

inline Certificate load_certificate(const std::filesystem::path& path) {
  return parse_certificate(detail::read_file(path), path.string());
}

inline std::string certificate_to_string(const Certificate& c) {
  std::ostringstream os;
  os << "{\n  \"mu\": " << c.mu() << ",\n  \"V\": ";
  detail::write_matrix_list(os, c.vs);
  os << "\n}\n";
  return os.str();
}

inline void save_certificate(const std::filesystem::path& path, const Certificate& c) {
  detail::write_file(path, certificate_to_string(c));
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Non-finite values have no JSON literal; they become null.
inline Json number_to_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const InclusionReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["included"] = r.included;
  j["marginal"] = r.marginal;
  j["margin"] = number_to_json(r.margin);
  if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
  return j;
}

inline Json to_json(const RadiusReport& r) {
  Json j;
  j["bounded"] = r.bounded;
  j["b"] = number_to_json(r.b_star);
  j["radius"] = number_to_json(r.radius_bound);
  return j;
}

inline Json to_json(const CubeReport& r) {
  Json j;
  j["rho"] = number_to_json(r.rho);
  j["method"] = r.method;
  Json etas = Json::array();
  for (const auto& [s, t] : r.etas) etas.push_back(Json::array({s, t}));
  j["etas"] = std::move(etas);
  if (r.seed) j["seed"] = *r.seed;
  return j;
}

inline Json to_json(const MinimalPencilReport& r) {
  Json j;
  j["U"] = matrix_to_json(r.u);
  j["blocks"] = r.decomposition.block_sizes;
  j["kept"] = r.kept;
  j["removed"] = r.removed;
  return j;
}

inline Json to_json(const CertificateCheck& c) {
  Json j;
  j["verified"] = c.ok;
  j["max_residual"] = c.max_residual;
  j["residuals"] = c.residuals;
  return j;
}

}  // namespace lmidom
