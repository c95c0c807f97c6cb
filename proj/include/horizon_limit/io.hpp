#pragma once

// Config reading and plot-ready CSV output.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "horizon_limit/core.hpp"
#include "horizon_limit/costate.hpp"
#include "horizon_limit/integrate.hpp"
#include "horizon_limit/oracle.hpp"
#include "horizon_limit/shoot.hpp"

namespace horizon_limit {

/// Shortest representation that reads back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// TOML subset: [section] headers, key = value with strings, numbers,
// booleans and flat arrays of these; '#' comments.

using TomlValue = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;
using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;

namespace detail {

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : text_(text) {}

  TomlTable parse() {
    TomlTable out;
    std::string section;
    out[section];
    while (pos_ < text_.size()) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_];
      if (c == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '[') {
        ++pos_;
        skip_blank();
        section = key();
        skip_blank();
        expect(']');
        if (out.count(section) && !out[section].empty()) fail("duplicate section [" + section + "]");
        out[section];
        end_of_line();
        continue;
      }
      const std::string k = key();
      skip_blank();
      expect('=');
      skip_blank();
      TomlValue v = value();
      if (out[section].count(k)) fail("duplicate key '" + qualified(section, k) + "'");
      out[section][k] = std::move(v);
      end_of_line();
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }
  static std::string qualified(const std::string& section, const std::string& k) {
    return section.empty() ? k : section + "." + k;
  }
  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  void skip_comment() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }
  void skip_space_and_newlines() {
    for (;;) {
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == '\n') {
        ++pos_;
        ++line_;
      } else if (pos_ < text_.size() && text_[pos_] == '#') {
        skip_comment();
      } else {
        return;
      }
    }
  }
  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void end_of_line() {
    skip_blank();
    if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
    if (pos_ < text_.size()) {
      if (text_[pos_] != '\n') fail("unexpected text after value");
      ++pos_;
      ++line_;
    }
  }
  std::string key() {
    if (pos_ < text_.size() && text_[pos_] == '"') return string();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }
  std::string string() {
    expect('"');
    std::string s;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated string");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      s.push_back(c);
    }
    expect('"');
    return s;
  }
  double number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '+' ||
                                   text_[pos_] == '-' || text_[pos_] == '.' || text_[pos_] == '_'))
      ++pos_;
    std::string tok(text_.substr(start, pos_ - start));
    std::erase(tok, '_');
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    if (tok == "nan" || tok == "+nan" || tok == "-nan") return std::numeric_limits<double>::quiet_NaN();
    const char* first = tok.data() + (tok.size() > 0 && tok[0] == '+' ? 1 : 0);
    double v = 0.0;
    const auto res = std::from_chars(first, tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size()) fail("invalid value '" + tok + "'");
    return v;
  }
  TomlValue scalar() {
    if (pos_ >= text_.size()) fail("missing value");
    if (text_[pos_] == '"') return string();
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }
  TomlValue value() {
    if (pos_ < text_.size() && text_[pos_] == '[') {
      ++pos_;
      std::vector<double> nums;
      std::vector<std::string> strs;
      skip_space_and_newlines();
      while (pos_ < text_.size() && text_[pos_] != ']') {
        TomlValue v = scalar();
        if (auto* d = std::get_if<double>(&v)) nums.push_back(*d);
        else if (auto* s = std::get_if<std::string>(&v)) strs.push_back(*s);
        else fail("arrays hold numbers or strings");
        if (!nums.empty() && !strs.empty()) fail("mixed array");
        skip_space_and_newlines();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_space_and_newlines();
        } else {
          break;
        }
      }
      expect(']');
      if (!strs.empty()) return strs;
      return nums;
    }
    return scalar();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace detail

inline TomlTable parse_toml(std::string_view text) { return detail::TomlReader(text).parse(); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV

inline void write_csv_row(std::ostream& os, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
  os << '\n';
}

inline void write_csv_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

inline std::vector<std::string> indexed(const std::string& stem, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 1; i <= n; ++i) out.push_back(stem + "_" + std::to_string(i));
  return out;
}

inline std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline void append(std::vector<double>& row, const Vector& v) { row.insert(row.end(), v.data(), v.data() + v.size()); }

/// tau, lambda_n, psi0_1..psi0_m, I_norm
inline void write_horizons_csv(std::ostream& os, const LimitingSolution& sol) {
  const Eigen::Index m = sol.psi0_star.size();
  write_csv_header(os, concat({{"tau", "lambda_n"}, indexed("psi0", m), {"I_norm"}}));
  for (const auto& h : sol.horizon_diagnostics) {
    std::vector<double> row{h.tau, h.lambda_n};
    append(row, h.psi0_n);
    row.push_back(h.I_norm);
    write_csv_row(os, row);
  }
}

/// t, psi_1..psi_m, lambda, H_direct, H_michel along the limiting costate
inline void write_costate_trace_csv(std::ostream& os, const LimitingSolution& sol, const HamiltonianTrace& ht) {
  const Eigen::Index m = sol.psi0_star.size();
  write_csv_header(os, concat({{"t"}, indexed("psi", m), {"lambda", "H_direct", "H_michel"}}));
  for (std::size_t i = 0; i < ht.grid.size(); ++i) {
    std::vector<double> row{ht.grid[i]};
    append(row, sol.psi_at(ht.grid[i]));
    row.insert(row.end(), {sol.lambda_star, ht.H_direct[i], ht.H_michel[i]});
    write_csv_row(os, row);
  }
}

/// t, x_1..x_m, A_11..A_mm (row-major), I_1..I_m, logdetA
inline void write_fundamental_csv(std::ostream& os, const FundamentalTrace& ft) {
  const Eigen::Index m = ft.xi.size();
  std::vector<std::string> a_cols;
  for (Eigen::Index i = 1; i <= m; ++i)
    for (Eigen::Index j = 1; j <= m; ++j) a_cols.push_back("A_" + std::to_string(i) + std::to_string(j));
  write_csv_header(os, concat({{"t"}, indexed("x", m), a_cols, indexed("I", m), {"logdetA"}}));
  for (std::size_t k = 0; k < ft.grid.size() && k < ft.states.size(); ++k) {
    std::vector<double> row{ft.grid[k]};
    append(row, ft.states[k]);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) row.push_back(ft.A_samples[k](i, j));
    append(row, ft.I_samples[k]);
    row.push_back(ft.logdet_samples[k]);
    write_csv_row(os, row);
  }
}

/// T, H_direct, H_michel
inline void write_hamiltonian_csv(std::ostream& os, const HamiltonianTrace& ht) {
  write_csv_header(os, {"T", "H_direct", "H_michel"});
  for (std::size_t i = 0; i < ht.grid.size(); ++i) write_csv_row(os, {ht.grid[i], ht.H_direct[i], ht.H_michel[i]});
}

/// iter, psi_lo, psi_hi, psi_mid, residual
inline void write_bracket_csv(std::ostream& os, const std::vector<BracketStep>& history) {
  write_csv_header(os, {"iter", "psi_lo", "psi_hi", "psi_mid", "residual"});
  for (const auto& h : history) write_csv_row(os, {double(h.iter), h.psi_lo, h.psi_hi, h.psi_mid, h.residual});
}

/// k, t_k, u_1..u_k, x_1..x_m, p_1..p_m; u is empty on the last node
inline void write_transcription_csv(std::ostream& os, const Transcription& tr) {
  const Eigen::Index m = tr.states.empty() ? 0 : tr.states[0].size();
  const Eigen::Index kdim = tr.controls.empty() ? 0 : tr.controls[0].size();
  write_csv_header(os, concat({{"k", "t_k"}, indexed("u", kdim), indexed("x", m), indexed("p", m)}));
  for (int k = 0; k <= tr.steps; ++k) {
    os << k << ',' << format_number(tr.t(k));
    for (Eigen::Index d = 0; d < kdim; ++d) os << ',' << (k < tr.steps ? format_number(tr.controls[k][d]) : "");
    for (Eigen::Index d = 0; d < m; ++d) os << ',' << format_number(tr.states[k][d]);
    for (Eigen::Index d = 0; d < m; ++d) os << ',' << format_number(tr.multipliers[k][d]);
    os << '\n';
  }
}

/// Reads `t,u_1..u_k` (or `t,x_1..x_m`) with a header line.
inline std::pair<std::vector<double>, std::vector<Vector>> read_table_csv(std::istream& in, const std::string& stem) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty table");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.pop_back();
      while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.erase(cell.begin());
      header.push_back(cell);
    }
  }
  if (header.size() < 2 || header[0] != "t") throw ConfigError("table header must start with t");
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] != stem + "_" + std::to_string(i)) throw ConfigError("unexpected column '" + header[i] + "'");
  std::vector<double> ts;
  std::vector<Vector> vs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const char* b = cell.data();
      const char* e = cell.data() + cell.size();
      while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
      while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
      const auto res = std::from_chars(b, e, v);
      if (res.ec != std::errc() || res.ptr != e) throw ConfigError("bad number on table line " + std::to_string(lineno));
      vals.push_back(v);
    }
    if (vals.size() != header.size()) throw ConfigError("wrong column count on table line " + std::to_string(lineno));
    ts.push_back(vals[0]);
    vs.push_back(Eigen::Map<const Vector>(vals.data() + 1, static_cast<Eigen::Index>(vals.size() - 1)));
  }
  if (ts.empty()) throw ConfigError("table has no rows");
  return {std::move(ts), std::move(vs)};
}

}  // namespace horizon_limit
