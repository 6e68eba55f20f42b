#include "misclassit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "misclassit/errors.hpp"

namespace misclassit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string where(std::size_t line, std::string_view column) {
  return "line " + std::to_string(line) + ", column '" + std::string(column) + "'";
}

int parse_binary(std::string_view s, std::size_t line, std::string_view column) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw SchemaError(where(line, column) + ": expected 0 or 1, got '" + std::string(s) + "'");
}

Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

Dataset build(const CsvTable& t, const std::vector<std::size_t>& rows, bool add_intercept) {
  std::vector<std::size_t> val, non;
  for (std::size_t r : rows) (t.y[r] ? val : non).push_back(r);
  const auto p = t.x.cols();
  Matrix xv(static_cast<Eigen::Index>(val.size()), p), xn(static_cast<Eigen::Index>(non.size()), p);
  std::vector<std::uint8_t> y, ytv, ytn;
  for (std::size_t i = 0; i < val.size(); ++i) {
    xv.row(static_cast<Eigen::Index>(i)) = t.x.row(static_cast<Eigen::Index>(val[i]));
    y.push_back(static_cast<std::uint8_t>(*t.y[val[i]]));
    ytv.push_back(static_cast<std::uint8_t>(t.ytilde[val[i]]));
  }
  for (std::size_t i = 0; i < non.size(); ++i) {
    xn.row(static_cast<Eigen::Index>(i)) = t.x.row(static_cast<Eigen::Index>(non[i]));
    ytn.push_back(static_cast<std::uint8_t>(t.ytilde[non[i]]));
  }
  if (add_intercept) {
    xv = with_intercept(xv);
    xn = with_intercept(xn);
  }
  return Dataset(std::move(xv), std::move(y), std::move(ytv), std::move(xn), std::move(ytn),
                 add_intercept);
}

void write_rows(std::ostream& out, const Dataset& d, const std::string& group_field) {
  const Eigen::Index skip = d.has_intercept() ? 1 : 0;
  auto emit_x = [&](const Matrix& x, Eigen::Index i) {
    for (Eigen::Index j = skip; j < x.cols(); ++j) out << ',' << format_double(x(i, j));
    out << '\n';
  };
  for (int i = 0; i < d.n1(); ++i) {
    out << static_cast<int>(d.y()[i]) << ',' << static_cast<int>(d.validation_ytilde()[i])
        << group_field;
    emit_x(d.validation_x(), i);
  }
  for (int i = 0; i < d.n2(); ++i) {
    out << ',' << static_cast<int>(d.nonvalidation_ytilde()[i]) << group_field;
    emit_x(d.nonvalidation_x(), i);
  }
}

void write_header(std::ostream& out, const Dataset& d, bool grouped) {
  out << "y,ytilde";
  if (grouped) out << ",group";
  const int px = d.p() - (d.has_intercept() ? 1 : 0);
  for (int j = 1; j <= px; ++j) out << ",x" << j;
  out << '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

CsvTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty input: missing header");
  const auto header = split(line);
  std::optional<std::size_t> iy, iyt, ig;
  std::vector<std::size_t> ix;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view h = header[c];
    if (h == "y") {
      iy = c;
    } else if (h == "ytilde") {
      iyt = c;
    } else if (h == "group") {
      ig = c;
    } else if (h.size() > 1 && h.front() == 'x') {
      if (h.substr(1) != std::to_string(ix.size() + 1)) {
        throw SchemaError("covariate column '" + std::string(h) + "' out of order; expected x" +
                          std::to_string(ix.size() + 1));
      }
      ix.push_back(c);
    } else {
      throw SchemaError("unknown column '" + std::string(h) + "'");
    }
  }
  if (!iyt) throw SchemaError("missing required column 'ytilde'");
  if (ix.empty()) throw SchemaError("no covariate columns (expected x1..xp)");

  CsvTable t;
  if (ig) t.group.emplace();
  std::vector<double> xs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw SchemaError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(f.size()));
    }
    if (iy && !f[*iy].empty() && f[*iy] != "NA") {
      t.y.push_back(parse_binary(f[*iy], lineno, "y"));
    } else {
      t.y.push_back(std::nullopt);
    }
    t.ytilde.push_back(parse_binary(f[*iyt], lineno, "ytilde"));
    if (ig) {
      long g = 0;
      const std::string_view s = f[*ig];
      const auto res = std::from_chars(s.data(), s.data() + s.size(), g);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
        throw SchemaError(where(lineno, "group") + ": expected an integer");
      }
      t.group->push_back(g);
    }
    for (std::size_t j = 0; j < ix.size(); ++j) {
      const auto v = parse_double(f[ix[j]]);
      if (!v || !std::isfinite(*v)) {
        throw SchemaError(where(lineno, header[ix[j]]) + ": expected a finite number");
      }
      xs.push_back(*v);
    }
  }
  const auto rows = static_cast<Eigen::Index>(t.ytilde.size());
  if (rows == 0) throw SchemaError("no data rows");
  if (std::none_of(t.y.begin(), t.y.end(), [](const auto& v) { return v.has_value(); })) {
    throw SchemaError("column 'y': no validation rows (every y is missing)");
  }
  t.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), rows, static_cast<Eigen::Index>(ix.size()));
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open data file '" + path + "'");
  return read_csv(in);
}

Dataset to_dataset(const CsvTable& t, bool add_intercept) {
  std::vector<std::size_t> rows(t.ytilde.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return build(t, rows, add_intercept);
}

GroupedDataset to_grouped(const CsvTable& t, bool add_intercept) {
  if (!t.group) throw SchemaError("missing column 'group' required for a grouped fit");
  std::map<long, std::vector<std::size_t>> by_id;
  for (std::size_t i = 0; i < t.group->size(); ++i) by_id[(*t.group)[i]].push_back(i);
  std::vector<Dataset> groups;
  for (const auto& [id, rows] : by_id) {
    const bool has_val =
        std::any_of(rows.begin(), rows.end(), [&](std::size_t r) { return t.y[r].has_value(); });
    if (!has_val) throw SchemaError("group " + std::to_string(id) + " has no validation rows");
    groups.push_back(build(t, rows, add_intercept));
  }
  return GroupedDataset(std::move(groups));
}

void write_csv(std::ostream& out, const Dataset& data) {
  write_header(out, data, false);
  write_rows(out, data, "");
}

void write_csv(std::ostream& out, const GroupedDataset& data, const std::vector<long>& ids) {
  if (static_cast<int>(ids.size()) != data.K()) throw DimensionError("need one id per group");
  write_header(out, data.group(0), true);
  for (int k = 0; k < data.K(); ++k) {
    write_rows(out, data.group(k), "," + std::to_string(ids[static_cast<std::size_t>(k)]));
  }
}

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  for (auto f : split(s)) {
    const auto v = parse_double(f);
    if (!v) throw SchemaError("cannot parse number '" + std::string(f) + "' in list");
    out.push_back(*v);
  }
  return out;
}

}  // namespace misclassit
