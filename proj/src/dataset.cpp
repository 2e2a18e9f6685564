// Copyright 2026 The xaxa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xaxa/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <cctype>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "xaxa/errors.hpp"

namespace xaxa {

namespace {

std::atomic<std::uint64_t> g_access_count{0};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Splits one CSV record. Double quotes group fields and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::optional<double> parse_real(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t column_of(const std::vector<std::string>& header, const std::string& name,
                      const std::filesystem::path& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw UsageError("column \"" + name + "\" not found in " + path.string());
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

// Uniform grid over the first (up to three) coordinates. Rows are bucketed in
// ascending row order so a cell scan yields row indices in order.
class GridIndex {
 public:
  GridIndex(const Dataset& ds, std::size_t cells_per_dim) : dims_(std::min<std::size_t>(ds.dim(), 3)) {
    const std::size_t n = ds.size();
    if (cells_per_dim == 0) {
      const double target = std::max(1.0, static_cast<double>(n) / 16.0);
      cells_per_dim = static_cast<std::size_t>(std::pow(target, 1.0 / static_cast<double>(dims_)));
    }
    cells_ = std::clamp<std::size_t>(cells_per_dim, 1, 1024);
    lo_.assign(dims_, std::numeric_limits<double>::infinity());
    width_.assign(dims_, 1.0);
    std::vector<double> hi(dims_, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
      auto r = ds.row(i);
      for (std::size_t j = 0; j < dims_; ++j) {
        lo_[j] = std::min(lo_[j], r[j]);
        hi[j] = std::max(hi[j], r[j]);
      }
    }
    for (std::size_t j = 0; j < dims_; ++j) {
      const double span = hi[j] - lo_[j];
      width_[j] = span > 0 ? span / static_cast<double>(cells_) : 1.0;
    }
    std::size_t total = 1;
    for (std::size_t j = 0; j < dims_; ++j) total *= cells_;
    start_.assign(total + 1, 0);
    std::vector<std::size_t> cell_of(n);
    for (std::size_t i = 0; i < n; ++i) {
      cell_of[i] = cell_id(ds.row(i));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
    rows_.resize(n);
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) rows_[fill[cell_of[i]]++] = i;
  }

  // Calls fn(row) for every row whose cell intersects the L-inf box around center.
  template <typename Fn>
  void for_candidates(std::span<const double> center, double radius, Fn&& fn) const {
    const double pad = radius * (1.0 + 1e-9) + 1e-12;
    std::vector<std::size_t> lo(dims_), hi(dims_);
    for (std::size_t j = 0; j < dims_; ++j) {
      lo[j] = coord_cell(j, center[j] - pad);
      hi[j] = coord_cell(j, center[j] + pad);
    }
    std::vector<std::size_t> cur = lo;
    while (true) {
      std::size_t id = 0;
      for (std::size_t j = 0; j < dims_; ++j) id = id * cells_ + cur[j];
      for (std::size_t k = start_[id]; k < start_[id + 1]; ++k) fn(rows_[k]);
      std::size_t j = dims_;
      while (j > 0) {
        --j;
        if (cur[j] < hi[j]) {
          ++cur[j];
          break;
        }
        cur[j] = lo[j];
        if (j == 0) return;
      }
    }
  }

 private:
  std::size_t coord_cell(std::size_t j, double v) const {
    const double t = (v - lo_[j]) / width_[j];
    if (!(t > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(t), cells_ - 1);
  }

  std::size_t cell_id(std::span<const double> r) const {
    std::size_t id = 0;
    for (std::size_t j = 0; j < dims_; ++j) id = id * cells_ + coord_cell(j, r[j]);
    return id;
  }

  std::size_t dims_;
  std::size_t cells_ = 1;
  std::vector<double> lo_;
  std::vector<double> width_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> rows_;
};

std::string_view to_string(AggregateKind kind) noexcept {
  switch (kind) {
    case AggregateKind::Count: return "count";
    case AggregateKind::Avg: return "avg";
    case AggregateKind::Sum: return "sum";
  }
  return "count";
}

AggregateKind parse_aggregate_kind(std::string_view text) {
  const std::string t = lower(text);
  if (t == "count") return AggregateKind::Count;
  if (t == "avg") return AggregateKind::Avg;
  if (t == "sum") return AggregateKind::Sum;
  throw UsageError("unknown aggregate kind \"" + std::string(text) + "\" (expected count, avg or sum)");
}

Point ScalingParams::normalize(const Point& raw) const {
  if (raw.dim() != coords.size()) throw UsageError("dimension mismatch while scaling a point");
  std::vector<double> out(raw.dim());
  for (std::size_t j = 0; j < raw.dim(); ++j) {
    const double span = coords[j].span();
    out[j] = span > 0 ? (raw[j] - coords[j].min) / span : 0.0;
  }
  return Point(std::move(out));
}

Point ScalingParams::denormalize(const Point& unit) const {
  if (unit.dim() != coords.size()) throw UsageError("dimension mismatch while scaling a point");
  std::vector<double> out(unit.dim());
  for (std::size_t j = 0; j < unit.dim(); ++j) out[j] = coords[j].min + unit[j] * coords[j].span();
  return Point(std::move(out));
}

double ScalingParams::normalize_measure(double raw) const {
  if (!measure) return raw;
  const double span = measure->span();
  return span > 0 ? (raw - measure->min) / span : 0.0;
}

double ScalingParams::denormalize_measure(double unit) const {
  if (!measure) return unit;
  return measure->min + unit * measure->span();
}

double ScalingParams::normalize_radius(double raw) const {
  double widest = 0.0;
  for (const auto& r : coords) widest = std::max(widest, r.span());
  return widest > 0 ? raw / widest : raw;
}

Dataset::Dataset(std::string name, std::size_t dim, std::vector<double> coords,
                 std::optional<std::vector<double>> measure, double norm_order)
    : name_(std::move(name)), dim_(dim), coords_(std::move(coords)), measure_(std::move(measure)),
      norm_order_(norm_order) {
  if (dim_ == 0) throw UsageError("dataset dimension must be >= 1");
  if (coords_.size() % dim_ != 0) throw UsageError("coordinate buffer is not a multiple of the dimension");
  if (measure_ && measure_->size() != size()) throw UsageError("measure column length differs from row count");
  if (!(norm_order_ >= 1.0)) throw UsageError("norm order must be >= 1");
  for (double v : coords_) {
    if (!std::isfinite(v)) throw DataError("non-finite coordinate in dataset " + name_);
  }
}

Point Dataset::point(std::size_t i) const {
  auto r = row(i);
  return Point(std::vector<double>(r.begin(), r.end()));
}

void Dataset::build_index(std::size_t cells_per_dim) {
  index_ = std::make_shared<const GridIndex>(*this, cells_per_dim);
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& coord_columns,
                 const std::optional<std::string>& measure_column, const CsvOptions& options) {
  if (coord_columns.empty()) throw UsageError("at least one coordinate column is required");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header row in " + path.string());
  const auto header = split_record(line, options.delimiter);

  std::vector<std::size_t> cols;
  for (const auto& c : coord_columns) cols.push_back(column_of(header, c, path));
  std::optional<std::size_t> mcol;
  if (measure_column) mcol = column_of(header, *measure_column, path);

  std::vector<double> coords;
  std::optional<std::vector<double>> measure;
  if (mcol) measure.emplace();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_record(line, options.delimiter);
    auto field = [&](std::size_t c) -> double {
      if (c >= fields.size()) {
        throw DataError(path.string() + ": malformed row " + std::to_string(line_no) + " (expected " +
                        std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()) + ")");
      }
      auto v = parse_real(fields[c]);
      if (!v) {
        throw DataError(path.string() + ": non-numeric value \"" + fields[c] + "\" in column \"" + header[c] +
                        "\" at row " + std::to_string(line_no));
      }
      return *v;
    };
    for (std::size_t c : cols) coords.push_back(field(c));
    if (mcol) measure->push_back(field(*mcol));
  }
  return Dataset(path.stem().string(), cols.size(), std::move(coords), std::move(measure));
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
  if (ds.has_measure()) out << ",measure";
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto r = ds.row(i);
    for (std::size_t j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << r[j];
    if (ds.has_measure()) out << ',' << ds.measure(i);
    out << '\n';
  }
}

Dataset load_normalized_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header row in " + path.string());
  std::vector<std::string> coords;
  std::optional<std::string> measure;
  for (const auto& h : split_record(line, ',')) {
    if (h == "measure") {
      measure = h;
    } else if (h.size() > 1 && h[0] == 'x' && std::all_of(h.begin() + 1, h.end(), ::isdigit)) {
      coords.push_back(h);
    }
  }
  if (coords.empty()) throw DataError(path.string() + ": no x<i> coordinate columns");
  in.close();
  return load_csv(path, coords, measure);
}

std::pair<Dataset, ScalingParams> normalize(const Dataset& ds) {
  const std::size_t n = ds.size();
  if (n == 0) throw UsageError("cannot normalize an empty dataset");
  const std::size_t d = ds.dim();
  ScalingParams params;
  params.coords.assign(d, Range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  for (std::size_t i = 0; i < n; ++i) {
    auto r = ds.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      params.coords[j].min = std::min(params.coords[j].min, r[j]);
      params.coords[j].max = std::max(params.coords[j].max, r[j]);
    }
  }
  std::vector<double> coords(ds.raw_coords().begin(), ds.raw_coords().end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const Range& rg = params.coords[j];
      double& v = coords[i * d + j];
      v = rg.span() > 0 ? (v - rg.min) / rg.span() : 0.0;
    }
  }
  std::optional<std::vector<double>> measure;
  if (ds.has_measure()) {
    const auto& m = *ds.measures();
    auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    params.measure = Range{*lo, *hi};
    measure.emplace(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) (*measure)[i] = params.normalize_measure(m[i]);
  }
  Dataset out(ds.name(), d, std::move(coords), std::move(measure), ds.norm_order());
  if (ds.has_index()) out.build_index();
  return {std::move(out), std::move(params)};
}

namespace {

struct Member {
  std::size_t row;
  double distance;
};

// Rows within `theta` of the center, in ascending row order, with their distances.
std::vector<Member> members(const Dataset& ds, const Point& center, double theta, ScanMode mode) {
  if (center.dim() != ds.dim()) {
    throw UsageError("query dimension " + std::to_string(center.dim()) + " does not match dataset dimension " +
                     std::to_string(ds.dim()));
  }
  if (!(theta > 0.0)) throw UsageError("query radius must be > 0");
  const double p = ds.norm_order();
  std::vector<Member> out;
  auto visit = [&](std::size_t i) {
    const double dist = p_norm_distance(ds.row(i), center.coords(), p);
    if (dist <= theta) out.push_back({i, dist});
  };
  const bool use_index = mode == ScanMode::Index || (mode == ScanMode::Auto && ds.has_index());
  if (use_index) {
    if (!ds.has_index()) throw UsageError("index scan requested but no index was built");
    ds.index()->for_candidates(center.coords(), theta, visit);
    std::sort(out.begin(), out.end(), [](const Member& a, const Member& b) { return a.row < b.row; });
  } else {
    for (std::size_t i = 0; i < ds.size(); ++i) visit(i);
  }
  return out;
}

Answer aggregate(const Dataset& ds, const std::vector<Member>& ms, double theta, AggregateKind kind) {
  Answer a;
  double sum = 0.0;
  for (const Member& m : ms) {
    if (m.distance > theta) continue;
    ++a.count;
    if (kind != AggregateKind::Count) sum += ds.measure(m.row);
  }
  switch (kind) {
    case AggregateKind::Count: a.value = static_cast<double>(a.count); break;
    case AggregateKind::Sum: a.value = sum; break;
    case AggregateKind::Avg:
      if (a.count == 0) {
        a.empty_subspace = true;
        a.value = 0.0;
      } else {
        a.value = sum / static_cast<double>(a.count);
      }
      break;
  }
  return a;
}

}  // namespace

Answer execute_aq(const Dataset& ds, const Query& q, AggregateKind kind, ScanMode mode) {
  if (kind != AggregateKind::Count && !ds.has_measure()) {
    throw UsageError(std::string(to_string(kind)) + " requires a measure column");
  }
  g_access_count.fetch_add(1, std::memory_order_relaxed);
  return aggregate(ds, members(ds, q.center, q.theta, mode), q.theta, kind);
}

std::vector<SeriesPoint> actual_explanation(const Dataset& ds, const Query& q, AggregateKind kind, std::size_t n,
                                            double theta_min) {
  if (n < 2) throw UsageError("actual explanation needs at least 2 sub-radii");
  if (!(theta_min > 0.0) || !(theta_min < q.theta)) {
    throw UsageError("theta_min must lie in (0, query radius)");
  }
  if (kind != AggregateKind::Count && !ds.has_measure()) {
    throw UsageError(std::string(to_string(kind)) + " requires a measure column");
  }
  g_access_count.fetch_add(1, std::memory_order_relaxed);
  const auto ms = members(ds, q.center, q.theta, ScanMode::Auto);
  const auto radii = evenly_spaced_radii(theta_min, q.theta, n);
  std::vector<SeriesPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = radii[i];
    const Answer a = aggregate(ds, ms, theta, kind);
    out[i] = SeriesPoint{theta, a.value, !a.empty_subspace};
  }
  return out;
}

std::uint64_t dataset_access_count() noexcept { return g_access_count.load(std::memory_order_relaxed); }

}  // namespace xaxa
