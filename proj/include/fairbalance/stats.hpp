#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fairbalance::stats {

[[nodiscard]] double median(std::span<const double> values);

/// Linear interpolation between order statistics at position q * (n - 1).
[[nodiscard]] double percentile(std::span<const double> values, double q);

/// 75th minus 25th percentile.
[[nodiscard]] double iqr(std::span<const double> values);

enum class MwuMethod { automatic, exact, asymptotic };

struct MannWhitneyOptions {
  MwuMethod method = MwuMethod::automatic;
  /// `automatic` enumerates the exact distribution up to this pooled size.
  std::size_t exact_limit = 12;
};

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of the first sample (midranks for ties)
  double p_value = 1.0;
  bool exact = false;
};

/// Two-sided rank-sum test. The exact path enumerates every way of drawing
/// |x| of the pooled midranks, so ties are handled exactly; the asymptotic
/// path uses the tie-corrected variance with a 0.5 continuity correction.
/// Throws ArgumentError on an empty sample, or for `exact` beyond 50 pooled
/// observations.
[[nodiscard]] MannWhitneyResult mann_whitney(std::span<const double> x, std::span<const double> y,
                                             MannWhitneyOptions options = {});

[[nodiscard]] inline double mann_whitney_u(std::span<const double> x, std::span<const double> y,
                                           MannWhitneyOptions options = {}) {
  return mann_whitney(x, y, options).p_value;
}

/// (#{x_i > y_j} - #{x_i < y_j}) / (|x| |y|).
[[nodiscard]] double cliffs_delta(std::span<const double> x, std::span<const double> y);

struct NamedSamples {
  std::string name;
  std::vector<double> values;
};

enum class Direction { lower_is_better, higher_is_better };

struct RankOptions {
  double significance = 0.05;
  double effect_size = 0.33;
  MannWhitneyOptions test;
};

/// Treatment name -> rank, 0 best.
using RankResult = std::map<std::string, int>;

/// Sorts treatments by median (ties by name) and walks them in order. A
/// treatment opens a new rank, and becomes the new base, when it differs
/// from the current base with p < significance and a Cliff's delta above
/// effect_size, oriented so that positive means worse than the base;
/// otherwise it shares the base's rank. Higher-is-better samples are negated
/// first. Throws ArgumentError on duplicate names or fewer than two
/// observations in a sample.
[[nodiscard]] RankResult rank_treatments(std::span<const NamedSamples> samples, Direction direction,
                                         RankOptions options = {});

}  // namespace fairbalance::stats
