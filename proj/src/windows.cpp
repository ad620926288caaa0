#include "scanalr/windows.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "scanalr/error.hpp"
#include "scanalr/parallel.hpp"

namespace scanalr {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return d2;
}

struct Neighbor {
  double d2;
  std::size_t cell;
  bool operator<(const Neighbor& o) const { return d2 < o.d2 || (d2 == o.d2 && cell < o.cell); }
};

// Number of leading entries of a distance-sorted list within d2.
std::size_t prefix_within(const std::vector<Neighbor>& sorted, double d2) {
  return static_cast<std::size_t>(
      std::upper_bound(sorted.begin(), sorted.end(), d2,
                       [](double v, const Neighbor& n) { return v < n.d2; }) -
      sorted.begin());
}

// Uniform bucket grid over cell locations for fixed-radius queries.
class BucketIndex {
 public:
  BucketIndex(std::span<const double> coords, std::size_t dim, double bucket)
      : coords_(coords), dim_(dim), bucket_(bucket > 0.0 ? bucket : 1.0) {
    const std::size_t count = coords.size() / dim;
    std::vector<std::int64_t> key(dim);
    for (std::size_t c = 0; c < count; ++c) {
      for (std::size_t k = 0; k < dim; ++k) key[k] = slot(coords[c * dim + k]);
      buckets_[key].push_back(c);
    }
  }

  /// Cells within radius of `center`, sorted by (distance, cell).
  std::vector<Neighbor> within(std::span<const double> center, double radius) const {
    std::vector<Neighbor> out;
    const double r2 = radius * radius;
    std::vector<std::int64_t> lo(dim_), hi(dim_), key(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
      lo[k] = slot(center[k] - radius);
      hi[k] = slot(center[k] + radius);
    }
    key = lo;
    while (true) {
      if (auto it = buckets_.find(key); it != buckets_.end()) {
        for (std::size_t c : it->second) {
          const double d2 = squared_distance(center, coords_.subspan(c * dim_, dim_));
          if (d2 <= r2) out.push_back({d2, c});
        }
      }
      std::size_t k = 0;
      while (k < dim_ && key[k] == hi[k]) {
        key[k] = lo[k];
        ++k;
      }
      if (k == dim_) break;
      ++key[k];
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
      std::size_t h = 0x9e3779b97f4a7c15ULL;
      for (auto v : key) h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  std::int64_t slot(double x) const { return static_cast<std::int64_t>(std::floor(x / bucket_)); }

  std::span<const double> coords_;
  std::size_t dim_;
  double bucket_;
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> buckets_;
};

struct CenterWindows {
  std::vector<std::size_t> star;  // cells, distance order
  std::vector<std::size_t> cuts;
  std::vector<WindowOrigin> origins;
};

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

class WindowBuilder {
 public:
  WindowBuilder(const PointDataset& data, const WindowSpec& spec, unsigned threads)
      : data_(data), spec_(spec), threads_(threads) {}

  WindowSet build() {
    spec_.validate();
    ws_.case_count_ = data_.case_count();
    if (const auto* ex = std::get_if<ExplicitWindows>(&spec_.family)) {
      build_explicit(*ex);
    } else {
      group_locations();
      std::vector<CenterWindows> centers;
      if (const auto* g = std::get_if<GridWindows>(&spec_.family)) centers = grid_centers(*g);
      if (const auto* k = std::get_if<KnnWindows>(&spec_.family)) centers = knn_centers(*k);
      if (const auto* a = std::get_if<AllPairsWindows>(&spec_.family)) centers = allpairs_centers(*a);
      for (auto& c : centers) add_star(c.star, c.cuts, c.origins);
    }
    finish();
    return std::move(ws_);
  }

 private:
  void group_locations() {
    const std::size_t J = data_.subjects();
    const std::size_t dim = data_.dim();
    std::vector<std::size_t> order(J);
    for (std::size_t i = 0; i < J; ++i) order[i] = i;
    auto loc = [&](std::size_t i) { return data_.location(i); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto la = loc(a), lb = loc(b);
      return std::lexicographical_compare(la.begin(), la.end(), lb.begin(), lb.end());
    });
    // groups of equal coordinates, each listed in subject order
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < J; ++k) {
      if (k == 0 || !std::equal(loc(order[k]).begin(), loc(order[k]).end(), loc(order[k - 1]).begin()))
        groups.emplace_back();
      groups.back().push_back(order[k]);
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    ws_.subject_cell_.assign(J, 0);
    ws_.cell_offsets_.assign(1, 0);
    ws_.cell_subjects_.clear();
    location_coords_.clear();
    for (std::size_t c = 0; c < groups.size(); ++c) {
      for (std::size_t i : groups[c]) {
        ws_.cell_subjects_.push_back(i);
        ws_.subject_cell_[i] = c;
      }
      ws_.cell_offsets_.push_back(ws_.cell_subjects_.size());
      const auto first = loc(groups[c].front());
      location_coords_.insert(location_coords_.end(), first.begin(), first.end());
    }
    (void)dim;
  }

  std::size_t cell_size(std::size_t c) const { return ws_.cell_offsets_[c + 1] - ws_.cell_offsets_[c]; }
  std::size_t location_count() const { return ws_.cell_offsets_.size() - 1; }
  std::span<const double> location(std::size_t c) const {
    return std::span<const double>(location_coords_).subspan(c * data_.dim(), data_.dim());
  }

  std::vector<CenterWindows> grid_centers(const GridWindows& g) {
    const std::size_t dim = data_.dim();
    Box box;
    if (g.domain) {
      box = *g.domain;
      if (box.lo.size() != dim || box.hi.size() != dim)
        throw InputError("grid windows: domain box dimension does not match the data");
    } else {
      box.lo.assign(dim, std::numeric_limits<double>::infinity());
      box.hi.assign(dim, -std::numeric_limits<double>::infinity());
      for (std::size_t c = 0; c < location_count(); ++c)
        for (std::size_t k = 0; k < dim; ++k) {
          box.lo[k] = std::min(box.lo[k], location(c)[k]);
          box.hi[k] = std::max(box.hi[k], location(c)[k]);
        }
    }
    // lattice values per axis
    std::vector<std::vector<double>> axis(dim);
    std::size_t total = 1;
    for (std::size_t k = 0; k < dim; ++k) {
      const double lo = g.circle_inside ? box.lo[k] + g.radius : box.lo[k];
      const double hi = g.circle_inside ? box.hi[k] - g.radius : box.hi[k];
      const auto first = static_cast<std::int64_t>(std::ceil((lo - g.offset) / g.spacing)) - 1;
      const auto last = static_cast<std::int64_t>(std::floor((hi - g.offset) / g.spacing)) + 1;
      for (std::int64_t t = first; t <= last; ++t) {
        const double v = g.offset + g.spacing * static_cast<double>(t);
        if (v >= lo && v <= hi) axis[k].push_back(v);
      }
      total *= axis[k].size();
    }
    BucketIndex index(location_coords_, dim, g.radius);
    std::vector<CenterWindows> out(total);
    parallel_for(total, threads_, [&](std::size_t flat) {
      std::vector<double> center(dim);
      std::size_t rest = flat;
      for (std::size_t k = dim; k-- > 0;) {
        center[k] = axis[k][rest % axis[k].size()];
        rest /= axis[k].size();
      }
      auto near = index.within(center, g.radius);
      std::size_t n = 0;
      for (const auto& nb : near) n += cell_size(nb.cell);
      if (near.empty() || n < g.min_subjects) return;
      auto& cw = out[flat];
      for (const auto& nb : near) cw.star.push_back(nb.cell);
      cw.cuts.push_back(near.size());
      WindowOrigin o;
      o.kind = WindowKind::Grid;
      o.center = center;
      o.radius = g.radius;
      o.radius_sq = g.radius * g.radius;
      cw.origins.push_back(std::move(o));
    });
    return out;
  }

  std::vector<CenterWindows> knn_centers(const KnnWindows& spec) {
    const std::size_t q = location_count();
    const std::size_t max_rank = std::min(spec.max_rank, q);
    std::vector<CenterWindows> out(q);
    parallel_for(q, threads_, [&](std::size_t c) {
      std::vector<Neighbor> all(q);
      for (std::size_t o = 0; o < q; ++o) all[o] = {squared_distance(location(c), location(o)), o};
      std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(max_rank - 1), all.end());
      const double outer = all[max_rank - 1].d2;
      std::vector<Neighbor> star;
      for (const auto& nb : all)
        if (nb.d2 <= outer) star.push_back(nb);
      std::sort(star.begin(), star.end());
      auto& cw = out[c];
      for (std::size_t j = spec.min_rank; j <= max_rank; ++j) {
        const double r2 = star[j - 1].d2;
        if (spec.max_radius && std::sqrt(r2) > *spec.max_radius) break;
        cw.cuts.push_back(prefix_within(star, r2));
        WindowOrigin o;
        o.kind = WindowKind::Knn;
        o.center.assign(location(c).begin(), location(c).end());
        o.radius = std::sqrt(r2);
        o.radius_sq = r2;
        o.center_location = c;
        o.rank = j;
        cw.origins.push_back(std::move(o));
      }
      if (cw.cuts.empty()) return;
      const std::size_t len = *std::max_element(cw.cuts.begin(), cw.cuts.end());
      for (std::size_t k = 0; k < len; ++k) cw.star.push_back(star[k].cell);
    });
    return out;
  }

  std::vector<CenterWindows> allpairs_centers(const AllPairsWindows& spec) {
    const std::size_t q = location_count();
    BucketIndex index(location_coords_, data_.dim(), spec.max_radius);
    std::vector<CenterWindows> out(q);
    parallel_for(q, threads_, [&](std::size_t c) {
      auto star = index.within(location(c), spec.max_radius);
      auto& cw = out[c];
      std::vector<Neighbor> partners = star;
      std::sort(partners.begin(), partners.end(),
                [](const Neighbor& a, const Neighbor& b) { return a.cell < b.cell; });
      for (const auto& p : partners) {
        cw.cuts.push_back(prefix_within(star, p.d2));
        WindowOrigin o;
        o.kind = WindowKind::AllPairs;
        o.center.assign(location(c).begin(), location(c).end());
        o.radius = std::sqrt(p.d2);
        o.radius_sq = p.d2;
        o.center_location = c;
        o.rank = p.cell;
        cw.origins.push_back(std::move(o));
      }
      for (const auto& nb : star) cw.star.push_back(nb.cell);
    });
    return out;
  }

  void build_explicit(const ExplicitWindows& ex) {
    const std::size_t J = data_.subjects();
    std::vector<std::vector<std::size_t>> signature(J);
    for (std::size_t s = 0; s < ex.sets.size(); ++s) {
      for (std::size_t i : ex.sets[s]) {
        if (i >= J)
          throw InputError("explicit window " + std::to_string(s) + ": subject index " + std::to_string(i) +
                           " out of range (J = " + std::to_string(J) + ")");
        if (!signature[i].empty() && signature[i].back() == s)
          throw InputError("explicit window " + std::to_string(s) + ": duplicate subject index " + std::to_string(i));
        signature[i].push_back(s);
      }
    }
    // cells = classes of subjects with identical window membership
    std::map<std::vector<std::size_t>, std::size_t> cell_id;
    std::vector<std::vector<std::size_t>> cells;
    ws_.subject_cell_.assign(J, 0);
    for (std::size_t i = 0; i < J; ++i) {
      auto [it, inserted] = cell_id.try_emplace(signature[i], cells.size());
      if (inserted) cells.emplace_back();
      cells[it->second].push_back(i);
      ws_.subject_cell_[i] = it->second;
    }
    ws_.cell_offsets_.assign(1, 0);
    for (const auto& c : cells) {
      ws_.cell_subjects_.insert(ws_.cell_subjects_.end(), c.begin(), c.end());
      ws_.cell_offsets_.push_back(ws_.cell_subjects_.size());
    }
    for (std::size_t s = 0; s < ex.sets.size(); ++s) {
      std::set<std::size_t> set_cells;
      for (std::size_t i : ex.sets[s]) set_cells.insert(ws_.subject_cell_[i]);
      std::vector<std::size_t> star(set_cells.begin(), set_cells.end());
      WindowOrigin o;
      o.kind = WindowKind::Explicit;
      o.set_id = s;
      add_star(star, {star.size()}, {o});
    }
  }

  void add_star(const std::vector<std::size_t>& star, const std::vector<std::size_t>& cuts,
                const std::vector<WindowOrigin>& origins) {
    if (cuts.empty()) return;
    const std::size_t id = ws_.star_offsets_.size() - 1;
    ws_.star_cells_.insert(ws_.star_cells_.end(), star.begin(), star.end());
    ws_.star_offsets_.push_back(ws_.star_cells_.size());
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      ws_.star_of_.push_back(id);
      ws_.cut_.push_back(cuts[k]);
      ws_.origins_.push_back(origins[k]);
    }
  }

  void finish() {
    std::vector<double> sizes(ws_.cells());
    for (std::size_t c = 0; c < sizes.size(); ++c)
      sizes[c] = static_cast<double>(ws_.cell_offsets_[c + 1] - ws_.cell_offsets_[c]);
    ws_.n_ = ws_.window_sums(sizes);
    ws_.m_ = ws_.recount_cases(data_.cases());
    if (spec_.dedup) {
      std::set<std::vector<std::size_t>> seen;
      std::vector<std::size_t> keep;
      for (std::size_t w = 0; w < ws_.size(); ++w)
        if (seen.insert(ws_.cell_membership(w)).second) keep.push_back(w);
      ws_ = ws_.select(keep);
    }
    if (ws_.size() == 0) throw InputError("window family is empty after filtering: " + spec_.describe());
  }

  const PointDataset& data_;
  const WindowSpec& spec_;
  unsigned threads_;
  WindowSet ws_;
  std::vector<double> location_coords_;
};

void WindowSpec::validate() const {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GridWindows>) {
          if (!(f.radius >= 0.0) || !std::isfinite(f.radius)) throw InputError("grid windows: radius must be >= 0");
          if (!(f.spacing > 0.0) || !std::isfinite(f.spacing)) throw InputError("grid windows: spacing must be > 0");
          if (!std::isfinite(f.offset)) throw InputError("grid windows: offset must be finite");
        } else if constexpr (std::is_same_v<T, KnnWindows>) {
          if (f.max_rank < 1) throw InputError("knn windows: jmax must be >= 1");
          if (f.min_rank < 1 || f.min_rank > f.max_rank) throw InputError("knn windows: need 1 <= jmin <= jmax");
          if (f.max_radius && !(*f.max_radius >= 0.0)) throw InputError("knn windows: rmax must be >= 0");
        } else if constexpr (std::is_same_v<T, AllPairsWindows>) {
          if (!(f.max_radius >= 0.0) || !std::isfinite(f.max_radius))
            throw InputError("allpairs windows: wmax must be >= 0");
        } else {
          if (f.sets.empty()) throw InputError("explicit windows: no sets given");
        }
      },
      family);
}

std::string WindowSpec::describe() const {
  std::ostringstream s;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GridWindows>) {
          s << "grid:w=" << format_number(f.radius) << ",s=" << format_number(f.spacing)
            << ",o=" << format_number(f.offset) << ",min=" << f.min_subjects;
          if (f.domain && f.domain->lo.size() == 2)
            s << ",box=" << format_number(f.domain->lo[0]) << ':' << format_number(f.domain->hi[0]) << ':'
              << format_number(f.domain->lo[1]) << ':' << format_number(f.domain->hi[1]);
          if (f.circle_inside) s << ",inside=1";
        } else if constexpr (std::is_same_v<T, KnnWindows>) {
          s << "knn:jmax=" << f.max_rank;
          if (f.min_rank != 1) s << ",jmin=" << f.min_rank;
          if (f.max_radius) s << ",rmax=" << format_number(*f.max_radius);
        } else if constexpr (std::is_same_v<T, AllPairsWindows>) {
          s << "allpairs:wmax=" << format_number(f.max_radius);
        } else {
          s << "sets:" << f.sets.size();
        }
      },
      family);
  if (dedup) s << ",dedup=1";
  return s.str();
}

namespace {

double spec_number(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
    throw InputError("window spec: bad value for '" + key + "': '" + value + "'");
  return v;
}

std::size_t spec_count(const std::string& key, const std::string& value) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw InputError("window spec: bad integer for '" + key + "': '" + value + "'");
  return v;
}

}  // namespace

WindowSpec parse_window_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InputError("unknown window spec '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  WindowSpec spec;
  if (kind == "sets") {
    std::string path = body;
    if (const auto pos = body.rfind(",dedup="); pos != std::string::npos) {
      spec.dedup = body.substr(pos + 7) == "1";
      path = body.substr(0, pos);
    }
    spec.family = load_window_sets(path);
    return spec;
  }
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("window spec: expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto require = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw InputError("window spec '" + kind + "': missing '" + key + "'");
    return *v;
  };
  if (auto d = take("dedup")) spec.dedup = *d == "1";
  if (kind == "grid") {
    GridWindows g;
    g.radius = spec_number("w", require("w"));
    if (auto v = take("s")) g.spacing = spec_number("s", *v);
    if (auto v = take("o")) g.offset = spec_number("o", *v);
    if (auto v = take("min")) g.min_subjects = spec_count("min", *v);
    if (auto v = take("inside")) g.circle_inside = *v == "1";
    if (auto v = take("box")) {
      std::vector<double> b;
      std::stringstream bs(*v);
      std::string part;
      while (std::getline(bs, part, ':')) b.push_back(spec_number("box", part));
      if (b.size() % 2 != 0 || b.empty()) throw InputError("window spec: box needs lo:hi pairs per axis");
      Box box;
      for (std::size_t k = 0; k < b.size(); k += 2) {
        box.lo.push_back(b[k]);
        box.hi.push_back(b[k + 1]);
      }
      g.domain = box;
    }
    spec.family = g;
  } else if (kind == "knn") {
    KnnWindows k;
    k.max_rank = spec_count("jmax", require("jmax"));
    if (auto v = take("jmin")) k.min_rank = spec_count("jmin", *v);
    if (auto v = take("rmax")) k.max_radius = spec_number("rmax", *v);
    spec.family = k;
  } else if (kind == "allpairs") {
    AllPairsWindows a;
    a.max_radius = spec_number("wmax", require("wmax"));
    spec.family = a;
  } else {
    throw InputError("unknown window spec '" + text + "'");
  }
  if (!kv.empty()) throw InputError("window spec '" + kind + "': unknown key '" + kv.begin()->first + "'");
  spec.validate();
  return spec;
}

ExplicitWindows load_window_sets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open window set file " + path);
  ExplicitWindows ex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::stringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok.front() == '#') continue;
    std::vector<std::size_t> set;
    do {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InputError(path + ":" + std::to_string(lineno) + ": bad subject index '" + tok + "'");
      set.push_back(v);
    } while (ls >> tok);
    std::sort(set.begin(), set.end());
    ex.sets.push_back(std::move(set));
  }
  if (ex.sets.empty()) throw InputError(path + ": no window sets");
  return ex;
}

std::vector<std::size_t> WindowSet::cell_membership(std::size_t w) const {
  const std::size_t s = star_of_.at(w);
  std::vector<std::size_t> out(star_cells_.begin() + static_cast<std::ptrdiff_t>(star_offsets_[s]),
                               star_cells_.begin() + static_cast<std::ptrdiff_t>(star_offsets_[s] + cut_[w]));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> WindowSet::membership(std::size_t w) const {
  std::vector<std::size_t> out;
  for (std::size_t c : cell_membership(w)) {
    const auto subs = cell_subjects(c);
    out.insert(out.end(), subs.begin(), subs.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> WindowSet::cell_totals(std::span<const double> per_subject) const {
  if (per_subject.size() != subjects())
    throw InputError("per-subject vector has " + std::to_string(per_subject.size()) + " entries, expected " +
                     std::to_string(subjects()));
  std::vector<double> out(cells(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c)
    for (std::size_t i : cell_subjects(c)) out[c] += per_subject[i];
  return out;
}

std::vector<double> WindowSet::cell_totals(std::span<const std::uint8_t> labels) const {
  if (labels.size() != subjects())
    throw InputError("label vector has " + std::to_string(labels.size()) + " entries, expected " +
                     std::to_string(subjects()));
  std::vector<double> out(cells(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) out[subject_cell_[i]] += labels[i];
  return out;
}

void WindowSet::window_sums(std::span<const double> cell_values, std::span<double> out) const {
  if (cell_values.size() != cells()) throw InputError("cell vector length mismatch");
  if (out.size() != size()) throw InputError("window output length mismatch");
  std::vector<double> prefix;
  std::size_t current = static_cast<std::size_t>(-1);
  for (std::size_t w = 0; w < size(); ++w) {
    const std::size_t s = star_of_[w];
    if (s != current) {
      current = s;
      const std::size_t begin = star_offsets_[s], end = star_offsets_[s + 1];
      prefix.assign(end - begin + 1, 0.0);
      for (std::size_t k = begin; k < end; ++k) prefix[k - begin + 1] = prefix[k - begin] + cell_values[star_cells_[k]];
    }
    out[w] = prefix[cut_[w]];
  }
}

std::vector<double> WindowSet::window_sums(std::span<const double> cell_values) const {
  std::vector<double> out(size());
  window_sums(cell_values, out);
  return out;
}

std::vector<double> WindowSet::recount_cases(std::span<const std::uint8_t> labels) const {
  return window_sums(cell_totals(labels));
}

WindowSet WindowSet::select(std::span<const std::size_t> keep) const {
  WindowSet out;
  out.case_count_ = case_count_;
  out.cell_offsets_ = cell_offsets_;
  out.cell_subjects_ = cell_subjects_;
  out.subject_cell_ = subject_cell_;
  out.star_offsets_ = star_offsets_;
  out.star_cells_ = star_cells_;
  for (std::size_t w : keep) {
    if (w >= size()) throw InputError("window index out of range in select()");
    out.star_of_.push_back(star_of_[w]);
    out.cut_.push_back(cut_[w]);
    out.n_.push_back(n_[w]);
    out.m_.push_back(m_[w]);
    out.origins_.push_back(origins_[w]);
  }
  return out;
}

void WindowSet::write_tsv(std::ostream& out) const {
  static const char* kKind[] = {"grid", "knn", "allpairs", "explicit"};
  out << "window\tkind\tcenter\tradius\tn_B\tm_B\n";
  for (std::size_t w = 0; w < size(); ++w) {
    const auto& o = origins_[w];
    out << w << '\t' << kKind[static_cast<int>(o.kind)] << '\t';
    if (o.center.empty()) {
      out << "set" << o.set_id << "\t-";
    } else {
      for (std::size_t k = 0; k < o.center.size(); ++k) out << (k ? "," : "") << format_number(o.center[k]);
      out << '\t' << format_number(o.radius);
    }
    out << '\t' << static_cast<std::uint64_t>(n_[w]) << '\t' << static_cast<std::uint64_t>(m_[w]) << '\n';
  }
}

WindowSet build_windows(const PointDataset& data, const WindowSpec& spec, unsigned threads) {
  if (data.subjects() == 0) throw InputError("cannot build windows on an empty dataset");
  return WindowBuilder(data, spec, threads).build();
}

}  // namespace scanalr
