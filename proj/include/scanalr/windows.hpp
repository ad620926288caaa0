#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scanalr/data.hpp"

namespace scanalr {

/// Axis-aligned study region.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Circles of one radius centred on the lattice (spacing*Z + offset)^d.
struct GridWindows {
  double radius = 0.0;
  double spacing = 1.0;
  double offset = 0.0;
  std::size_t min_subjects = 0;
  /// Centres must lie in this box; defaults to the bounding box of the data.
  std::optional<Box> domain;
  /// Also require the whole circle to lie inside the domain.
  bool circle_inside = false;
};

/// For every distinct location v_i, the circles through its nearest
/// locations: radius r_ij = distance to the j-th closest location
/// (j = 1 is v_i itself), min_rank <= j <= max_rank.
struct KnnWindows {
  std::size_t max_rank = 1;
  std::size_t min_rank = 1;
  std::optional<double> max_radius;
};

/// Every circle C(v_i, r_ij) with r_ij = |v_i - v_j| <= max_radius over
/// pairs of distinct locations (including j = i).
struct AllPairsWindows {
  double max_radius = 0.0;
};

/// Arbitrary subject-index sets (0-based).
struct ExplicitWindows {
  std::vector<std::vector<std::size_t>> sets;
};

struct WindowSpec {
  std::variant<GridWindows, KnnWindows, AllPairsWindows, ExplicitWindows> family;
  /// Drop windows whose membership repeats an earlier window.
  bool dedup = false;

  /// Throws InputError when parameters are out of range.
  void validate() const;
  /// Canonical text form, e.g. "grid:w=40,s=10,o=5,min=2".
  std::string describe() const;
};

/// Parses the CLI notation: grid:w=..,s=..,o=..,min=..[,box=x0:x1:y0:y1][,inside=1],
/// knn:jmax=..[,jmin=..][,rmax=..], allpairs:wmax=.., sets:<file>.
/// A trailing ",dedup=1" is accepted by every family.
WindowSpec parse_window_spec(const std::string& text);
/// One window per non-comment line: subject indices separated by commas or
/// whitespace.
ExplicitWindows load_window_sets(const std::string& path);

enum class WindowKind { Grid, Knn, AllPairs, Explicit };

/// Where a window came from.
struct WindowOrigin {
  WindowKind kind = WindowKind::Explicit;
  std::vector<double> center;  // empty for explicit sets
  double radius = 0.0;
  double radius_sq = 0.0;  // membership test is |t - center|^2 <= radius_sq
  std::size_t center_location = 0;  // knn / allpairs: index of the centre location
  std::size_t rank = 0;             // knn: j; allpairs: index of the partner location
  std::size_t set_id = 0;           // explicit: position in the input list
};

/// An ordered family of scanning windows over a fixed set of subjects.
///
/// Subjects are grouped into cells such that every window is a union of
/// cells (co-located subjects for geometric windows, membership classes for
/// explicit sets). Windows sharing a centre are stored as prefixes of one
/// distance-ordered cell list, so memberships are never materialized unless
/// asked for and per-window totals cost O(total prefix length).
class WindowSet {
 public:
  std::size_t size() const noexcept { return star_of_.size(); }  // N
  std::size_t subjects() const noexcept { return subject_cell_.size(); }  // J
  std::size_t case_count() const noexcept { return case_count_; }  // I at build time

  /// n_B and m_B (integral values stored as double for the scoring kernels).
  std::span<const double> subject_counts() const noexcept { return n_; }
  std::span<const double> case_counts() const noexcept { return m_; }
  const WindowOrigin& origin(std::size_t w) const { return origins_.at(w); }

  /// Sorted subject indices of window w.
  std::vector<std::size_t> membership(std::size_t w) const;
  /// Sorted cell indices of window w; equal keys mean equal memberships.
  std::vector<std::size_t> cell_membership(std::size_t w) const;

  std::size_t cells() const noexcept { return cell_offsets_.size() - 1; }
  std::size_t cell_of(std::size_t subject) const { return subject_cell_.at(subject); }
  std::span<const std::size_t> cell_subjects(std::size_t c) const {
    return {cell_subjects_.data() + cell_offsets_[c], cell_offsets_[c + 1] - cell_offsets_[c]};
  }

  /// Per-cell totals of a per-subject quantity.
  std::vector<double> cell_totals(std::span<const double> per_subject) const;
  std::vector<double> cell_totals(std::span<const std::uint8_t> labels) const;

  /// out[w] = sum of cell_values over the cells of window w.
  void window_sums(std::span<const double> cell_values, std::span<double> out) const;
  std::vector<double> window_sums(std::span<const double> cell_values) const;

  /// m_B for every window under other labels (same subjects). Throws
  /// InputError on a length mismatch.
  std::vector<double> recount_cases(std::span<const std::uint8_t> labels) const;

  /// Sub-family with the listed windows, in the listed order.
  WindowSet select(std::span<const std::size_t> keep) const;

  /// Tab-separated provenance dump: id, kind, center, radius, n_B, m_B.
  void write_tsv(std::ostream& out) const;

 private:
  friend class WindowBuilder;

  std::size_t case_count_ = 0;
  std::vector<std::size_t> cell_offsets_{0};
  std::vector<std::size_t> cell_subjects_;
  std::vector<std::size_t> subject_cell_;

  std::vector<std::size_t> star_offsets_{0};  // CSR over star_cells_
  std::vector<std::size_t> star_cells_;
  std::vector<std::size_t> star_of_;  // per window
  std::vector<std::size_t> cut_;      // per window: prefix length in cells

  std::vector<double> n_;
  std::vector<double> m_;
  std::vector<WindowOrigin> origins_;
};

/// Builds the window family described by `spec` over `data`. Windows are
/// listed in canonical order: grid by centre (lexicographic, first
/// coordinate slowest); knn by centre location then rank; allpairs by centre
/// location then partner location; explicit sets in input order. Locations
/// are distinct coordinates numbered by first appearance in the data.
/// Throws InputError if the family ends up empty or an explicit index is out
/// of range.
WindowSet build_windows(const PointDataset& data, const WindowSpec& spec, unsigned threads = 1);

}  // namespace scanalr
