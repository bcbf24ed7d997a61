#pragma once

#include <Eigen/Core>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "fairbalance/dataset.hpp"

namespace fairbalance {

/// Preprocessing treatment applied to the training split before fitting.
enum class Treatment { none, reweighing, fair_balance, fair_balance_variant };

/// Config/CLI spelling: none, reweighing, fairbalance, fairbalancevariant.
[[nodiscard]] std::string_view to_string(Treatment t) noexcept;
/// Report spelling: None, Reweighing, FairBalance, FairBalanceVariant.
[[nodiscard]] std::string_view display_name(Treatment t) noexcept;
/// Case-insensitive; accepts both spellings. Throws ConfigError.
[[nodiscard]] Treatment parse_treatment(std::string_view name);

struct Cell {
  GroupKey group;
  int label = 0;
  constexpr auto operator<=>(const Cell&) const = default;
};

/// Tallies |A=s & Y=y| with the derived totals |A=s|, |Y=y| and n.
class CellCounts {
 public:
  CellCounts() = default;
  CellCounts(std::span<const GroupKey> groups, const Eigen::Ref<const Eigen::VectorXi>& labels);

  [[nodiscard]] std::size_t cell(const Cell& c) const;
  [[nodiscard]] std::size_t group_total(const GroupKey& g) const;
  [[nodiscard]] std::size_t label_total(int label) const;
  [[nodiscard]] std::size_t total() const noexcept { return total_; }

  [[nodiscard]] const std::map<Cell, std::size_t>& cells() const noexcept { return cells_; }
  [[nodiscard]] const std::map<GroupKey, std::size_t>& groups() const noexcept { return groups_; }
  [[nodiscard]] const std::map<int, std::size_t>& labels() const noexcept { return labels_; }

  /// Groups in which at least one label that occurs in the data is absent.
  [[nodiscard]] std::vector<GroupKey> incomplete_groups() const;

 private:
  std::map<Cell, std::size_t> cells_;
  std::map<GroupKey, std::size_t> groups_;
  std::map<int, std::size_t> labels_;
  std::size_t total_ = 0;
};

[[nodiscard]] CellCounts count_cells(const Dataset& train);

/// Exact non-negative rational, kept in lowest terms.
struct Ratio {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  static Ratio of(std::int64_t numerator, std::int64_t denominator);
  [[nodiscard]] double value() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Weight of an occupied cell before rescaling:
///
///   none                 1
///   reweighing           |A=s| * |Y=y| / |A=s & Y=y|
///   fair_balance         |A=s| / |A=s & Y=y|
///   fair_balance_variant 1 / |A=s & Y=y|
///
/// Throws ArgumentError if the cell is empty.
[[nodiscard]] Ratio cell_weight(const CellCounts& counts, const Cell& cell, Treatment treatment);

struct SampleWeights {
  Eigen::VectorXd values;
  /// Groups where class balancing was impossible because a label is absent.
  std::vector<GroupKey> incomplete_groups;

  [[nodiscard]] Index size() const noexcept { return values.size(); }
};

/// Per-row weights before the mean-one rescale.
[[nodiscard]] Eigen::VectorXd raw_weights(std::span<const GroupKey> groups,
                                          const Eigen::Ref<const Eigen::VectorXi>& labels,
                                          Treatment treatment);

/// Divides by the mean so the weights average to one. Ratios are preserved.
template <typename Derived>
[[nodiscard]] Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> rescale_to_mean_one(
    const Eigen::MatrixBase<Derived>& weights) {
  return weights / weights.mean();
}

/// Weights for `treatment`, rescaled to mean one. Throws ArgumentError on an
/// empty dataset; logs a warning for every incomplete group.
[[nodiscard]] SampleWeights compute_weights(const Dataset& train, Treatment treatment);

[[nodiscard]] SampleWeights none(const Dataset& train);
[[nodiscard]] SampleWeights reweighing(const Dataset& train);
[[nodiscard]] SampleWeights fair_balance(const Dataset& train);
[[nodiscard]] SampleWeights fair_balance_variant(const Dataset& train);

}  // namespace fairbalance
