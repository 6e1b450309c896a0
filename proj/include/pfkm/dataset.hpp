#ifndef PFKM_DATASET_HPP
#define PFKM_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pfkm/core.hpp"
#include "pfkm/rng.hpp"

namespace pfkm {

enum class Normalization { MinMax, ZScore, None };

inline std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::MinMax: return "minmax";
    case Normalization::ZScore: return "zscore";
    default: return "none";
  }
}

struct SubsampleSpec {
  int count = 0;
  std::uint64_t seed = 0;
  bool stratified = false;
};

struct DatasetSchema {
  std::string group_column;
  std::vector<std::string> numeric_columns;
  Normalization normalization = Normalization::MinMax;
  std::optional<SubsampleSpec> subsample;
};

struct TMode {
  enum Kind { Explicit, MinFeasible } kind = MinFeasible;
  int value = 0;

  static TMode explicit_t(int t) { return {Explicit, t}; }
  static TMode min_feasible() { return {MinFeasible, 0}; }
};

struct LoadReport {
  long long rows_read = 0;
  long long rows_dropped = 0;
  std::vector<std::string> group_labels;  // dense id order
  std::vector<long long> group_sizes;
  int t_used = 0;
  std::string normalization;

  nlohmann::json to_json() const {
    nlohmann::json sizes = nlohmann::json::object();
    for (std::size_t g = 0; g < group_labels.size(); ++g) sizes[group_labels[g]] = group_sizes[g];
    return {{"rows_read", rows_read},
            {"rows_dropped", rows_dropped},
            {"group_sizes", sizes},
            {"t_used", t_used},
            {"normalization", normalization}};
  }
};

struct LoadedInstance {
  Instance instance;
  LoadReport report;
};

// ---------------------------------------------------------------------------
// CSV parsing: comma separators, first row headers, double-quote escaping.

namespace csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table parse(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    auto fields = split_line(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

}  // namespace csv

namespace detail {

inline bool is_missing(const std::string& v) { return v.empty() || v == "?"; }

inline std::optional<double> parse_finite(const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    while (used < v.size() && std::isspace(static_cast<unsigned char>(v[used]))) ++used;
    if (used != v.size() || !std::isfinite(d)) return std::nullopt;
    return d;
  } catch (...) {
    return std::nullopt;
  }
}

// Proportional allocation by largest remainder, at least one per group.
inline std::vector<long long> stratified_allocation(const std::vector<long long>& sizes,
                                                    long long count) {
  const std::size_t ell = sizes.size();
  long long n = 0;
  for (long long s : sizes) n += s;
  std::vector<long long> alloc(ell, 1);
  long long assigned = static_cast<long long>(ell);
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t g = 0; g < ell; ++g) {
    double exact = static_cast<double>(count) * sizes[g] / n;
    long long extra = std::max<long long>(0, static_cast<long long>(exact) - 1);
    extra = std::min(extra, sizes[g] - 1);
    alloc[g] += extra;
    assigned += extra;
    remainders.emplace_back(exact - std::floor(exact), g);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::size_t cursor = 0;
  while (assigned < count) {
    std::size_t g = remainders[cursor % ell].second;
    if (alloc[g] < sizes[g]) {
      ++alloc[g];
      ++assigned;
    }
    ++cursor;
    if (cursor > 4 * ell * static_cast<std::size_t>(count + 1))
      throw std::logic_error("stratified allocation cannot fill the request");
  }
  while (assigned > count) {
    std::size_t g = remainders[cursor % ell].second;
    if (alloc[g] > 1) {
      --alloc[g];
      --assigned;
    }
    ++cursor;
  }
  return alloc;
}

inline std::vector<int> sample_without_replacement(Rng& rng, int n, int count) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Shared index selection: a plain uniform draw, upgraded to a per-group
// stratified draw when requested or when some group ends up empty.
inline std::vector<int> subsample_indices(const std::vector<GroupId>& labels, int ell, int count,
                                          std::uint64_t seed, bool stratified) {
  Rng rng(seed);
  const int n = static_cast<int>(labels.size());
  std::vector<int> chosen;
  if (!stratified) {
    chosen = sample_without_replacement(rng, n, count);
    std::vector<long long> seen(ell, 0);
    for (int p : chosen) ++seen[labels[p]];
    if (*std::min_element(seen.begin(), seen.end()) == 0) stratified = true;
  }
  if (stratified) {
    chosen.clear();
    std::vector<long long> sizes(ell, 0);
    std::vector<std::vector<int>> members(ell);
    for (int p = 0; p < n; ++p) {
      ++sizes[labels[p]];
      members[labels[p]].push_back(p);
    }
    auto alloc = stratified_allocation(sizes, count);
    for (int g = 0; g < ell; ++g) {
      auto local = sample_without_replacement(rng, static_cast<int>(members[g].size()),
                                              static_cast<int>(alloc[g]));
      for (int li : local) chosen.push_back(members[g][li]);
    }
    std::sort(chosen.begin(), chosen.end());
  }
  return chosen;
}

}  // namespace detail

/// Deterministic subsample of an instance. Uniform without replacement; if
/// stratified is requested (or a plain draw misses a group) the sample is
/// allocated proportionally per group with at least one member each.
inline Instance subsample(const Instance& inst, int count, std::uint64_t seed,
                          bool stratified = false) {
  if (!inst.disjoint()) throw std::invalid_argument("subsample requires disjoint groups");
  if (count > inst.n()) throw std::invalid_argument("subsample: count exceeds instance size");
  if (count < inst.num_groups())
    throw std::invalid_argument("subsample: count below the number of groups");

  std::vector<GroupId> all_labels(inst.n());
  for (PointId p = 0; p < inst.n(); ++p) all_labels[p] = inst.group_of(p);
  std::vector<int> chosen =
      detail::subsample_indices(all_labels, inst.num_groups(), count, seed, stratified);

  std::vector<GroupId> labels;
  labels.reserve(chosen.size());
  for (int p : chosen) labels.push_back(inst.group_of(p));
  if (!inst.coords().empty()) {
    std::vector<std::vector<double>> coords;
    coords.reserve(chosen.size());
    for (int p : chosen) coords.push_back(inst.coords()[p]);
    return Instance::from_points_disjoint(std::move(coords), labels, inst.k(), inst.t());
  }
  std::vector<std::vector<double>> dist(chosen.size(), std::vector<double>(chosen.size()));
  for (std::size_t i = 0; i < chosen.size(); ++i)
    for (std::size_t j = 0; j < chosen.size(); ++j) dist[i][j] = inst.distance(chosen[i], chosen[j]);
  return Instance::from_matrix_disjoint(std::move(dist), labels, inst.k(), inst.t());
}

/// Builds an instance from CSV text: groups from one categorical column,
/// an L2 metric over the normalized numeric columns, t per the mode. Rows
/// with missing values in the selected columns are dropped and counted.
inline LoadedInstance load_instance(const std::string& csv_text, const DatasetSchema& schema,
                                    int k, TMode t_mode) {
  csv::Table table = csv::parse(csv_text);
  if (table.header.empty() || table.rows.empty())
    throw std::runtime_error("load_instance: empty dataset");

  auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("load_instance: column '" + name + "' not in header");
  };
  for (const auto& name : schema.numeric_columns)
    if (name == schema.group_column)
      throw std::runtime_error("load_instance: group column listed as numeric");
  const int group_col = column_index(schema.group_column);
  std::vector<int> numeric_cols;
  for (const auto& name : schema.numeric_columns) numeric_cols.push_back(column_index(name));

  LoadReport report;
  report.rows_read = static_cast<long long>(table.rows.size());
  report.normalization = to_string(schema.normalization);

  std::vector<std::string> group_values;
  std::vector<std::vector<double>> raw;
  for (const auto& row : table.rows) {
    bool missing = static_cast<int>(row.size()) <= group_col ||
                   detail::is_missing(row[group_col]);
    std::vector<double> values;
    for (int c : numeric_cols) {
      if (missing) break;
      if (static_cast<int>(row.size()) <= c || detail::is_missing(row[c])) {
        missing = true;
        break;
      }
      auto v = detail::parse_finite(row[c]);
      if (!v) {
        missing = true;
        break;
      }
      values.push_back(*v);
    }
    if (missing) {
      ++report.rows_dropped;
      continue;
    }
    group_values.push_back(row[group_col]);
    raw.push_back(std::move(values));
  }
  if (raw.empty()) throw std::runtime_error("load_instance: no usable rows");

  // group ids in first-appearance order
  std::map<std::string, GroupId> group_of;
  std::vector<GroupId> labels;
  for (const auto& g : group_values) {
    auto it = group_of.find(g);
    if (it == group_of.end()) {
      GroupId id = static_cast<GroupId>(report.group_labels.size());
      group_of.emplace(g, id);
      report.group_labels.push_back(g);
      labels.push_back(id);
    } else {
      labels.push_back(it->second);
    }
  }
  if (report.group_labels.size() < 2)
    throw std::runtime_error("load_instance: need at least two group values");

  // column-wise normalization over the loaded rows
  const std::size_t dims = numeric_cols.size();
  for (std::size_t d = 0; d < dims; ++d) {
    double mn = raw[0][d], mx = raw[0][d], sum = 0.0;
    for (const auto& row : raw) {
      mn = std::min(mn, row[d]);
      mx = std::max(mx, row[d]);
      sum += row[d];
    }
    if (schema.normalization == Normalization::MinMax) {
      double span = mx - mn;
      for (auto& row : raw) row[d] = span > 0.0 ? (row[d] - mn) / span : 0.0;
    } else if (schema.normalization == Normalization::ZScore) {
      double mean = sum / raw.size();
      double var = 0.0;
      for (const auto& row : raw) var += (row[d] - mean) * (row[d] - mean);
      double sd = std::sqrt(var / raw.size());
      for (auto& row : raw) row[d] = sd > 0.0 ? (row[d] - mean) / sd : 0.0;
    }
  }

  // subsample indices before fixing t, so min-feasible reflects what is
  // actually clustered
  std::vector<int> keep(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) keep[i] = static_cast<int>(i);
  if (schema.subsample) {
    const auto& ss = *schema.subsample;
    if (ss.count > static_cast<int>(raw.size()))
      throw std::runtime_error("load_instance: subsample count exceeds usable rows");
    if (ss.count < static_cast<int>(report.group_labels.size()))
      throw std::runtime_error("load_instance: subsample count below the number of groups");
    keep = detail::subsample_indices(labels, static_cast<int>(report.group_labels.size()),
                                     ss.count, ss.seed, ss.stratified);
  }

  std::vector<std::vector<double>> coords;
  std::vector<GroupId> kept_labels;
  coords.reserve(keep.size());
  for (int i : keep) {
    coords.push_back(raw[i]);
    kept_labels.push_back(labels[i]);
  }
  // reindex groups densely in first-appearance order of the kept rows
  std::vector<GroupId> remap(report.group_labels.size(), -1);
  std::vector<std::string> kept_group_labels;
  for (auto& g : kept_labels) {
    if (remap[g] < 0) {
      remap[g] = static_cast<GroupId>(kept_group_labels.size());
      kept_group_labels.push_back(report.group_labels[g]);
    }
    g = remap[g];
  }
  report.group_labels = kept_group_labels;
  if (report.group_labels.size() < 2)
    throw std::runtime_error("load_instance: need at least two group values");

  report.group_sizes.assign(report.group_labels.size(), 0);
  for (GroupId g : kept_labels) ++report.group_sizes[g];

  int t = 0;
  if (t_mode.kind == TMode::Explicit) {
    t = t_mode.value;
  } else {
    long long mx = *std::max_element(report.group_sizes.begin(), report.group_sizes.end());
    long long mn = *std::min_element(report.group_sizes.begin(), report.group_sizes.end());
    t = static_cast<int>((mx + mn - 1) / mn);
    t = std::max(t, 1);
  }
  report.t_used = t;

  Instance inst = Instance::from_points_disjoint(std::move(coords), kept_labels, k, t);
  return {std::move(inst), std::move(report)};
}

inline DatasetSchema schema_from_json(const nlohmann::json& j) {
  DatasetSchema schema;
  schema.group_column = j.at("group_column").get<std::string>();
  for (const auto& c : j.at("numeric_columns")) schema.numeric_columns.push_back(c.get<std::string>());
  if (j.contains("normalization")) {
    std::string n = j["normalization"].get<std::string>();
    if (n == "minmax") schema.normalization = Normalization::MinMax;
    else if (n == "zscore") schema.normalization = Normalization::ZScore;
    else if (n == "none") schema.normalization = Normalization::None;
    else throw std::runtime_error("unknown normalization '" + n + "'");
  }
  if (j.contains("subsample")) {
    SubsampleSpec ss;
    ss.count = j["subsample"].at("count").get<int>();
    ss.seed = j["subsample"].value("seed", std::uint64_t{0});
    ss.stratified = j["subsample"].value("stratified", false);
    schema.subsample = ss;
  }
  return schema;
}

}  // namespace pfkm

#endif  // PFKM_DATASET_HPP
