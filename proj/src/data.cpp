#include "scanalr/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "scanalr/error.hpp"

namespace scanalr {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

double parse_double(const std::string& field, const std::filesystem::path& path, std::size_t line,
                    const std::string& column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end)
    throw InputError(where(path, line) + "column '" + column + "': not a number: '" + field + "'");
  if (!std::isfinite(value))
    throw InputError(where(path, line) + "column '" + column + "': non-finite value");
  return value;
}

std::uint64_t parse_count(const std::string& field, const std::filesystem::path& path,
                          std::size_t line, const std::string& column) {
  std::uint64_t value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end)
    throw InputError(where(path, line) + "column '" + column +
                     "': expected a non-negative integer, got '" + field + "'");
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::size_t header_line = 0;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    if (table.header.empty()) {
      table.header = std::move(fields);
      table.header_line = lineno;
      continue;
    }
    if (fields.size() != table.header.size())
      throw InputError(where(path, lineno) + "expected " + std::to_string(table.header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.row_lines.push_back(lineno);
  }
  if (table.header.empty()) throw InputError(path.string() + ": empty file");
  if (table.rows.empty()) throw InputError(path.string() + ": no data rows");
  return table;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

// Coordinate columns sit between `id` and the first label column: either
// x[,y[,z]] or x1..xd.
std::size_t coordinate_columns(const std::vector<std::string>& header, std::size_t label_col,
                               const std::filesystem::path& path) {
  if (header.empty() || header[0] != "id")
    throw InputError(path.string() + ": header must start with 'id'");
  const std::size_t dim = label_col - 1;
  if (dim == 0) throw InputError(path.string() + ": no coordinate columns in header");
  static const char* kNamed[] = {"x", "y", "z"};
  bool named = dim <= 3;
  for (std::size_t k = 0; named && k < dim; ++k) named = header[1 + k] == kNamed[k];
  bool numbered = true;
  for (std::size_t k = 0; numbered && k < dim; ++k) numbered = header[1 + k] == "x" + std::to_string(k + 1);
  if (!named && !numbered)
    throw InputError(path.string() + ": coordinate columns must be named x,y[,z] or x1..xd");
  return dim;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

PointDataset::PointDataset(std::size_t dim, std::vector<double> coords, std::vector<std::uint8_t> cases,
                           std::vector<double> covariates, std::size_t covariate_cols,
                           std::vector<std::string> ids, std::vector<std::string> covariate_names)
    : dim_(dim),
      coords_(std::move(coords)),
      cases_(std::move(cases)),
      covariates_(std::move(covariates)),
      covariate_cols_(covariate_cols),
      ids_(std::move(ids)),
      covariate_names_(std::move(covariate_names)) {
  const std::size_t J = cases_.size();
  if (dim_ == 0) throw InputError("dimension must be at least 1");
  if (coords_.size() != J * dim_) throw InputError("location count does not match label count");
  for (double c : coords_)
    if (!std::isfinite(c)) throw InputError("non-finite coordinate");
  case_count_ = 0;
  for (auto x : cases_) {
    if (x > 1) throw InputError("case labels must be 0 or 1");
    case_count_ += x;
  }
  if (covariate_cols_ > 0) {
    if (covariates_.size() != J * covariate_cols_) throw InputError("covariate matrix must have J rows");
    for (std::size_t i = 0; i < J; ++i) {
      if (covariates_[i * covariate_cols_] != 1.0)
        throw InputError("covariate column 1 must be the intercept (all ones)");
      for (std::size_t k = 0; k < covariate_cols_; ++k)
        if (!std::isfinite(covariates_[i * covariate_cols_ + k])) throw InputError("non-finite covariate");
    }
  } else if (!covariates_.empty()) {
    throw InputError("covariate values given without a column count");
  }
  if (!ids_.empty() && ids_.size() != J) throw InputError("id count does not match subject count");
  if (ids_.empty()) {
    ids_.reserve(J);
    for (std::size_t i = 0; i < J; ++i) ids_.push_back(std::to_string(i));
  }
  if (covariate_cols_ > 0 && covariate_names_.size() != covariate_cols_ - 1) {
    covariate_names_.clear();
    for (std::size_t k = 1; k < covariate_cols_; ++k) covariate_names_.push_back("cov" + std::to_string(k));
  }
}

double PointDataset::case_fraction() const noexcept {
  return subjects() == 0 ? 0.0 : static_cast<double>(case_count_) / static_cast<double>(subjects());
}

PointDataset PointDataset::with_cases(std::vector<std::uint8_t> cases) const {
  return PointDataset(dim_, coords_, std::move(cases), covariates_, covariate_cols_, ids_, covariate_names_);
}

PointDataset PointDataset::standardized() const {
  if (covariate_cols_ <= 1) return *this;
  const std::size_t J = subjects();
  std::vector<double> cov = covariates_;
  for (std::size_t k = 1; k < covariate_cols_; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < J; ++i) mean += cov[i * covariate_cols_ + k];
    mean /= static_cast<double>(J);
    double ss = 0.0;
    for (std::size_t i = 0; i < J; ++i) {
      const double d = cov[i * covariate_cols_ + k] - mean;
      ss += d * d;
    }
    const double sd = J > 1 ? std::sqrt(ss / static_cast<double>(J - 1)) : 0.0;
    for (std::size_t i = 0; i < J; ++i) {
      double& v = cov[i * covariate_cols_ + k];
      v -= mean;
      if (sd > 0.0) v /= sd;
    }
  }
  return PointDataset(dim_, coords_, cases_, std::move(cov), covariate_cols_, ids_, covariate_names_);
}

std::uint64_t AggregatedDataset::total_cases() const noexcept {
  return std::accumulate(case_counts.begin(), case_counts.end(), std::uint64_t{0});
}

std::uint64_t AggregatedDataset::total_population() const noexcept {
  return std::accumulate(populations.begin(), populations.end(), std::uint64_t{0});
}

void AggregatedDataset::validate() const {
  const std::size_t q = case_counts.size();
  if (dim == 0) throw InputError("dimension must be at least 1");
  if (populations.size() != q || centroids.size() != q * dim)
    throw InputError("aggregated dataset: column lengths disagree");
  if (!ids.empty() && ids.size() != q) throw InputError("aggregated dataset: id count mismatch");
  for (std::size_t j = 0; j < q; ++j) {
    const std::string row = ids.empty() ? std::to_string(j) : ids[j];
    if (populations[j] == 0) throw InputError("aggregated row '" + row + "': population must be >= 1");
    if (case_counts[j] > populations[j]) throw InputError("aggregated row '" + row + "': cases exceed population");
  }
  for (double c : centroids)
    if (!std::isfinite(c)) throw InputError("aggregated dataset: non-finite coordinate");
}

PointDataset AggregatedDataset::expand() const {
  validate();
  const std::uint64_t J = total_population();
  std::vector<double> coords;
  std::vector<std::uint8_t> cases;
  std::vector<std::string> subject_ids;
  coords.reserve(J * dim);
  cases.reserve(J);
  subject_ids.reserve(J);
  for (std::size_t j = 0; j < locations(); ++j) {
    const std::string base = ids.empty() ? std::to_string(j) : ids[j];
    for (std::uint64_t s = 0; s < populations[j]; ++s) {
      coords.insert(coords.end(), centroids.begin() + j * dim, centroids.begin() + (j + 1) * dim);
      cases.push_back(s < case_counts[j] ? 1 : 0);
      subject_ids.push_back(base + "." + std::to_string(s));
    }
  }
  return PointDataset(dim, std::move(coords), std::move(cases), {}, 0, std::move(subject_ids));
}

CsvKind detect_csv_kind(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto header = split_fields(t);
    if (find_column(header, "cases") && find_column(header, "population")) return CsvKind::Aggregated;
    if (find_column(header, "case")) return CsvKind::Point;
    throw InputError(path.string() + ": header has neither 'case' nor 'cases,population' columns");
  }
  throw InputError(path.string() + ": empty file");
}

PointDataset load_point_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const auto case_col = find_column(table.header, "case");
  if (!case_col) throw InputError(path.string() + ": header lacks a 'case' column");
  const std::size_t dim = coordinate_columns(table.header, *case_col, path);
  const std::size_t n_cov = table.header.size() - *case_col - 1;
  const std::size_t r = n_cov > 0 ? n_cov + 1 : 0;

  std::vector<double> coords;
  std::vector<std::uint8_t> cases;
  std::vector<double> cov;
  std::vector<std::string> ids;
  coords.reserve(table.rows.size() * dim);
  cases.reserve(table.rows.size());
  if (r > 0) cov.reserve(table.rows.size() * r);
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const auto& f = table.rows[row];
    const std::size_t line = table.row_lines[row];
    ids.push_back(f[0]);
    for (std::size_t k = 0; k < dim; ++k) coords.push_back(parse_double(f[1 + k], path, line, table.header[1 + k]));
    const std::string& label = f[*case_col];
    if (label != "0" && label != "1")
      throw InputError(where(path, line) + "case label must be 0 or 1, got '" + label + "'");
    cases.push_back(label == "1" ? 1 : 0);
    if (r > 0) {
      cov.push_back(1.0);
      for (std::size_t k = 0; k < n_cov; ++k)
        cov.push_back(parse_double(f[*case_col + 1 + k], path, line, table.header[*case_col + 1 + k]));
    }
  }
  std::vector<std::string> names(table.header.begin() + static_cast<std::ptrdiff_t>(*case_col + 1), table.header.end());
  return PointDataset(dim, std::move(coords), std::move(cases), std::move(cov), r, std::move(ids), std::move(names));
}

AggregatedDataset load_aggregated_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const auto cases_col = find_column(table.header, "cases");
  const auto pop_col = find_column(table.header, "population");
  if (!cases_col || !pop_col || *pop_col != *cases_col + 1 || *pop_col + 1 != table.header.size())
    throw InputError(path.string() + ": header must be id,<coords>,cases,population");
  AggregatedDataset agg;
  agg.dim = coordinate_columns(table.header, *cases_col, path);
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const auto& f = table.rows[row];
    const std::size_t line = table.row_lines[row];
    agg.ids.push_back(f[0]);
    for (std::size_t k = 0; k < agg.dim; ++k)
      agg.centroids.push_back(parse_double(f[1 + k], path, line, table.header[1 + k]));
    const auto m = parse_count(f[*cases_col], path, line, "cases");
    const auto n = parse_count(f[*pop_col], path, line, "population");
    if (n == 0) throw InputError(where(path, line) + "population must be at least 1");
    if (m > n) throw InputError(where(path, line) + "cases (" + f[*cases_col] + ") exceed population (" + f[*pop_col] + ")");
    agg.case_counts.push_back(m);
    agg.populations.push_back(n);
  }
  agg.validate();
  return agg;
}

void write_point_csv(const PointDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "id";
  static const char* kNamed[] = {"x", "y", "z"};
  for (std::size_t k = 0; k < data.dim(); ++k)
    out << ',' << (data.dim() <= 3 ? std::string(kNamed[k]) : "x" + std::to_string(k + 1));
  out << ",case";
  for (const auto& name : data.covariate_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < data.subjects(); ++i) {
    out << data.ids()[i];
    for (double c : data.location(i)) out << ',' << format_double(c);
    out << ',' << static_cast<int>(data.cases()[i]);
    if (data.has_covariates()) {
      const auto row = data.covariate_row(i);
      for (std::size_t k = 1; k < row.size(); ++k) out << ',' << format_double(row[k]);
    }
    out << '\n';
  }
}

}  // namespace scanalr
