#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>

#include "fairbalance/dataset.hpp"

namespace fairbalance {

using LabelsRef = Eigen::Ref<const Eigen::VectorXi>;

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  [[nodiscard]] std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Counts with label 1 as positive. Throws ArgumentError on length mismatch
/// or non-binary entries.
[[nodiscard]] ConfusionMatrix confusion(const LabelsRef& truth, const LabelsRef& predicted);

/// A rate is undefined (nullopt) when its class is absent.
struct Rates {
  std::optional<double> tpr;  // TP / (TP + FN)
  std::optional<double> fpr;  // FP / (FP + TN)
};

[[nodiscard]] Rates rates(const ConfusionMatrix& cm) noexcept;

struct GroupRates {
  Rates rates;
  std::size_t count = 0;
};

using GroupedRates = std::map<GroupKey, GroupRates>;

[[nodiscard]] GroupedRates grouped_rates(const LabelsRef& truth, const LabelsRef& predicted,
                                         std::span<const GroupKey> groups);

/// 0.5 * [max_s (TPR + FPR) - min_s (TPR + FPR)] over groups where both rates
/// are defined. Groups lacking a rate are skipped with a warning.
[[nodiscard]] double maod(const GroupedRates& rates);

/// max_s TPR - min_s TPR over groups where TPR is defined.
[[nodiscard]] double meod(const GroupedRates& rates);

/// Two-group signed differences, unprivileged minus privileged:
///   AOD = 0.5 * [(FPR_u - FPR_p) + (TPR_u - TPR_p)],  EOD = TPR_u - TPR_p.
/// Throws ArgumentError unless there are exactly two groups, one of them
/// `privileged`, with all rates defined.
[[nodiscard]] double aod_binary(const GroupedRates& rates, const GroupKey& privileged);
[[nodiscard]] double eod_binary(const GroupedRates& rates, const GroupKey& privileged);

/// (TP + TN) / n. Throws ArgumentError on an empty matrix.
[[nodiscard]] double accuracy(const ConfusionMatrix& cm);

/// Less frequent label; ties go to label 1.
[[nodiscard]] int minority_class(const LabelsRef& labels);

/// F1 with `minority` as the positive class; 0 when precision + recall = 0.
[[nodiscard]] double f1_minority(const LabelsRef& truth, const LabelsRef& predicted, int minority);

}  // namespace fairbalance
