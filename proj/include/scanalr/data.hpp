#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace scanalr {

/// Case-control point data: one row per subject.
///
/// Locations are stored flat (row-major, `dim` coordinates per subject).
/// When covariates are present the matrix is row-major with `covariate_cols`
/// columns and column 0 is the intercept (all ones).
class PointDataset {
 public:
  PointDataset() = default;
  /// Validates and takes ownership. Throws InputError on any invariant
  /// violation.
  PointDataset(std::size_t dim, std::vector<double> coords, std::vector<std::uint8_t> cases,
               std::vector<double> covariates = {}, std::size_t covariate_cols = 0,
               std::vector<std::string> ids = {}, std::vector<std::string> covariate_names = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t subjects() const noexcept { return cases_.size(); }  // J
  std::size_t case_count() const noexcept { return case_count_; }  // I
  /// I/J.
  double case_fraction() const noexcept;

  std::span<const double> location(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const noexcept { return coords_; }
  std::span<const std::uint8_t> cases() const noexcept { return cases_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  bool has_covariates() const noexcept { return covariate_cols_ > 0; }
  std::size_t covariate_cols() const noexcept { return covariate_cols_; }  // r
  std::span<const double> covariate_row(std::size_t i) const noexcept {
    return {covariates_.data() + i * covariate_cols_, covariate_cols_};
  }
  std::span<const double> covariates() const noexcept { return covariates_; }
  /// Names of the non-intercept covariate columns, in file order.
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }

  /// Same locations and covariates, different labels.
  PointDataset with_cases(std::vector<std::uint8_t> cases) const;
  /// Copy with every non-intercept covariate column centred and scaled to
  /// unit sample standard deviation. Constant columns are left centred only.
  PointDataset standardized() const;

 private:
  std::size_t dim_ = 2;
  std::vector<double> coords_;
  std::vector<std::uint8_t> cases_;
  std::size_t case_count_ = 0;
  std::vector<double> covariates_;
  std::size_t covariate_cols_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> covariate_names_;
};

/// Case-population data aggregated at q locations (e.g. tract centroids).
struct AggregatedDataset {
  std::size_t dim = 2;
  std::vector<double> centroids;  // q * dim
  std::vector<std::uint64_t> case_counts;
  std::vector<std::uint64_t> populations;
  std::vector<std::string> ids;

  std::size_t locations() const noexcept { return case_counts.size(); }
  std::uint64_t total_cases() const noexcept;
  std::uint64_t total_population() const noexcept;
  /// Throws InputError unless m_j <= n_j, n_j >= 1 and sizes agree.
  void validate() const;
  /// One subject per person: centroid j replicated n_j times, the first m_j
  /// of them cases.
  PointDataset expand() const;
};

PointDataset load_point_csv(const std::filesystem::path& path);
AggregatedDataset load_aggregated_csv(const std::filesystem::path& path);

enum class CsvKind { Point, Aggregated };
/// Decide the layout from the header row.
CsvKind detect_csv_kind(const std::filesystem::path& path);

/// Writes the `id,x,y,case[,cov...]` layout read by load_point_csv.
/// The intercept column is not written.
void write_point_csv(const PointDataset& data, const std::filesystem::path& path);

}  // namespace scanalr
