#include "fairbalance/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "fairbalance/error.hpp"

namespace fairbalance::stats {

namespace {

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw ArgumentError("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("percentile must lie in [0, 1]");
  const auto v = sorted_copy(values);
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::span<const double> values) { return percentile(values, 0.5); }

double iqr(std::span<const double> values) { return percentile(values, 0.75) - percentile(values, 0.25); }

MannWhitneyResult mann_whitney(std::span<const double> x, std::span<const double> y, MannWhitneyOptions options) {
  if (x.empty() || y.empty()) throw ArgumentError("Mann-Whitney needs two nonempty samples");
  const std::size_t n1 = x.size(), n2 = y.size(), total = n1 + n2;

  // Pooled midranks, doubled so they stay integral.
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(total);
  for (double v : x) pooled.emplace_back(v, true);
  for (double v : y) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::int64_t> rank2(total);
  double tie_term = 0.0;
  std::int64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    const auto midrank2 = static_cast<std::int64_t>(i + 1 + j);  // 2 * (i+1 + j) / 2
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      rank2[k] = midrank2;
      if (pooled[k].second) rank_sum2 += midrank2;
    }
    i = j;
  }

  MannWhitneyResult result;
  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
  result.u = static_cast<double>(rank_sum2) / 2.0 - d1 * (d1 + 1.0) / 2.0;
  if (pooled.front().first == pooled.back().first) return result;  // all values identical

  const bool exact = options.method == MwuMethod::exact ||
                     (options.method == MwuMethod::automatic && total <= options.exact_limit);
  if (exact) {
    if (total > 50) throw ArgumentError("exact Mann-Whitney is limited to 50 pooled observations");
    // ways[k][s]: subsets of size k with doubled rank sum s.
    const std::int64_t max_sum = std::accumulate(rank2.begin(), rank2.end(), std::int64_t{0});
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    std::int64_t reach = 0;
    for (std::size_t i = 0; i < total; ++i) {
      reach += rank2[i];
      for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
        for (std::int64_t s = reach; s >= rank2[i]; --s) {
          ways[k][static_cast<std::size_t>(s)] += ways[k - 1][static_cast<std::size_t>(s - rank2[i])];
        }
      }
    }
    // Doubled null mean of the rank sum: n1 (N + 1).
    const auto center = static_cast<std::int64_t>(n1 * (total + 1));
    const std::int64_t observed = std::llabs(rank_sum2 - center);
    double extreme = 0.0, all = 0.0;
    for (std::int64_t s = 0; s <= max_sum; ++s) {
      const double c = ways[n1][static_cast<std::size_t>(s)];
      all += c;
      if (std::llabs(s - center) >= observed) extreme += c;
    }
    result.p_value = std::min(1.0, extreme / all);
    result.exact = true;
    return result;
  }

  const double nn = static_cast<double>(total);
  const double mean = d1 * d2 / 2.0;
  const double variance = d1 * d2 / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (!(variance > 0.0)) return result;
  const double z = std::max(std::abs(result.u - mean) - 0.5, 0.0) / std::sqrt(variance);
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return result;
}

double cliffs_delta(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ArgumentError("Cliff's delta needs two nonempty samples");
  const auto sorted_y = sorted_copy(y);
  std::int64_t balance = 0;
  for (double v : x) {
    const auto below = std::lower_bound(sorted_y.begin(), sorted_y.end(), v) - sorted_y.begin();
    const auto above = sorted_y.end() - std::upper_bound(sorted_y.begin(), sorted_y.end(), v);
    balance += below - above;
  }
  return static_cast<double>(balance) / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

RankResult rank_treatments(std::span<const NamedSamples> samples, Direction direction, RankOptions options) {
  if (samples.empty()) throw ArgumentError("nothing to rank");
  std::set<std::string> names;
  struct Entry {
    const std::string* name;
    std::vector<double> values;
    double median;
  };
  std::vector<Entry> entries;
  for (const auto& s : samples) {
    if (!names.insert(s.name).second) throw ArgumentError("duplicate treatment '" + s.name + "'");
    if (s.values.size() < 2) throw ArgumentError("treatment '" + s.name + "' needs at least two observations");
    Entry e{&s.name, s.values, 0.0};
    if (direction == Direction::higher_is_better) {
      for (auto& v : e.values) v = -v;
    }
    e.median = median(e.values);
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.median != b.median ? a.median < b.median : *a.name < *b.name;
  });

  RankResult ranks;
  int rank = 0;
  const Entry* base = &entries.front();
  ranks[*base->name] = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const Entry& current = entries[i];
    const double p = mann_whitney_u(current.values, base->values, options.test);
    const double delta = cliffs_delta(current.values, base->values);
    if (p < options.significance && delta > options.effect_size) {
      ++rank;
      base = &current;
    }
    ranks[*current.name] = rank;
  }
  return ranks;
}

}  // namespace fairbalance::stats
