#include "fairbalance/weights.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "fairbalance/error.hpp"
#include "fairbalance/log.hpp"

namespace fairbalance {

std::string_view to_string(Treatment t) noexcept {
  switch (t) {
    case Treatment::none: return "none";
    case Treatment::reweighing: return "reweighing";
    case Treatment::fair_balance: return "fairbalance";
    case Treatment::fair_balance_variant: return "fairbalancevariant";
  }
  return "?";
}

std::string_view display_name(Treatment t) noexcept {
  switch (t) {
    case Treatment::none: return "None";
    case Treatment::reweighing: return "Reweighing";
    case Treatment::fair_balance: return "FairBalance";
    case Treatment::fair_balance_variant: return "FairBalanceVariant";
  }
  return "?";
}

Treatment parse_treatment(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (auto t : {Treatment::none, Treatment::reweighing, Treatment::fair_balance,
                 Treatment::fair_balance_variant}) {
    if (lower == to_string(t)) return t;
  }
  throw ConfigError("unknown treatment '" + std::string(name) + "'");
}

CellCounts::CellCounts(std::span<const GroupKey> groups, const Eigen::Ref<const Eigen::VectorXi>& labels) {
  if (static_cast<Index>(groups.size()) != labels.size()) {
    throw ArgumentError("groups and labels differ in length");
  }
  // Occupied cells are few (at most 2^m * classes), so tally into a short
  // vector keyed by the last cell seen before building the maps.
  std::vector<std::pair<Cell, std::size_t>> tally;
  std::size_t last = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Cell c{groups[i], labels(static_cast<Index>(i))};
    if (tally.empty() || tally[last].first != c) {
      auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& e) { return e.first == c; });
      if (it == tally.end()) {
        tally.emplace_back(c, 0);
        it = tally.end() - 1;
      }
      last = static_cast<std::size_t>(it - tally.begin());
    }
    ++tally[last].second;
  }
  for (const auto& [c, count] : tally) {
    cells_[c] += count;
    groups_[c.group] += count;
    labels_[c.label] += count;
    total_ += count;
  }
}

std::size_t CellCounts::cell(const Cell& c) const {
  const auto it = cells_.find(c);
  return it == cells_.end() ? 0 : it->second;
}

std::size_t CellCounts::group_total(const GroupKey& g) const {
  const auto it = groups_.find(g);
  return it == groups_.end() ? 0 : it->second;
}

std::size_t CellCounts::label_total(int label) const {
  const auto it = labels_.find(label);
  return it == labels_.end() ? 0 : it->second;
}

std::vector<GroupKey> CellCounts::incomplete_groups() const {
  std::vector<GroupKey> out;
  for (const auto& [g, total] : groups_) {
    for (const auto& [y, count] : labels_) {
      if (cell({g, y}) == 0) {
        out.push_back(g);
        break;
      }
    }
  }
  return out;
}

CellCounts count_cells(const Dataset& train) { return CellCounts(train.groups, train.labels); }

Ratio Ratio::of(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0 || numerator < 0) throw ArgumentError("ratio needs a positive denominator");
  const auto g = std::gcd(numerator, denominator);
  return {numerator / g, denominator / g};
}

Ratio cell_weight(const CellCounts& counts, const Cell& cell, Treatment treatment) {
  const auto in_cell = static_cast<std::int64_t>(counts.cell(cell));
  if (in_cell == 0) throw ArgumentError("cell " + cell.group.to_string() + "/" + std::to_string(cell.label) + " is empty");
  const auto in_group = static_cast<std::int64_t>(counts.group_total(cell.group));
  const auto in_class = static_cast<std::int64_t>(counts.label_total(cell.label));
  switch (treatment) {
    case Treatment::none: return {1, 1};
    case Treatment::reweighing: return Ratio::of(in_group * in_class, in_cell);
    case Treatment::fair_balance: return Ratio::of(in_group, in_cell);
    case Treatment::fair_balance_variant: return Ratio::of(1, in_cell);
  }
  return {1, 1};
}

Eigen::VectorXd raw_weights(std::span<const GroupKey> groups, const Eigen::Ref<const Eigen::VectorXi>& labels,
                            Treatment treatment) {
  const auto n = labels.size();
  if (n == 0) throw ArgumentError("cannot weight an empty dataset");
  if (treatment == Treatment::none) return Eigen::VectorXd::Ones(n);

  const CellCounts counts(groups, labels);
  std::vector<std::pair<Cell, double>> table;
  for (const auto& [c, count] : counts.cells()) table.emplace_back(c, cell_weight(counts, c, treatment).value());

  Eigen::VectorXd w(n);
  std::size_t last = 0;
  for (Index i = 0; i < n; ++i) {
    const Cell c{groups[static_cast<std::size_t>(i)], labels(i)};
    if (table[last].first != c) {
      last = static_cast<std::size_t>(
          std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == c; }) - table.begin());
    }
    w(i) = table[last].second;
  }
  return w;
}

SampleWeights compute_weights(const Dataset& train, Treatment treatment) {
  if (train.rows() == 0) throw ArgumentError("cannot weight an empty dataset");
  SampleWeights out;
  out.values = rescale_to_mean_one(raw_weights(train.groups, train.labels, treatment));
  if (treatment != Treatment::none) {
    out.incomplete_groups = count_cells(train).incomplete_groups();
    for (const auto& g : out.incomplete_groups) {
      log::warn(std::string(display_name(treatment)) + ": group " + g.to_string() +
                " lacks a class; classes cannot be balanced there");
    }
  }
  return out;
}

SampleWeights none(const Dataset& train) { return compute_weights(train, Treatment::none); }
SampleWeights reweighing(const Dataset& train) { return compute_weights(train, Treatment::reweighing); }
SampleWeights fair_balance(const Dataset& train) { return compute_weights(train, Treatment::fair_balance); }
SampleWeights fair_balance_variant(const Dataset& train) {
  return compute_weights(train, Treatment::fair_balance_variant);
}

}  // namespace fairbalance
