#include "fairbalance/metrics.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "fairbalance/error.hpp"
#include "fairbalance/log.hpp"

namespace fairbalance {

namespace {

void check_binary(const LabelsRef& v, const char* what) {
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0 && v(i) != 1) throw ArgumentError(std::string(what) + " must contain only 0 and 1");
  }
}

void warn_skipped(const char* metric, const GroupKey& g) {
  log::warn(std::string(metric) + ": group " + g.to_string() + " has an undefined rate and is skipped");
}

struct Spread {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) noexcept {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  [[nodiscard]] double width() const noexcept { return hi >= lo ? hi - lo : 0.0; }
};

const Rates& two_group_rates(const GroupedRates& rates, const GroupKey& privileged, bool want_privileged) {
  if (rates.size() != 2 || !rates.contains(privileged)) {
    throw ArgumentError("two-group metrics need exactly two groups including the privileged one");
  }
  for (const auto& [g, r] : rates) {
    if ((g == privileged) == want_privileged) return r.rates;
  }
  throw ArgumentError("unreachable");
}

}  // namespace

ConfusionMatrix confusion(const LabelsRef& truth, const LabelsRef& predicted) {
  if (truth.size() != predicted.size()) throw ArgumentError("truth and predictions differ in length");
  check_binary(truth, "truth");
  check_binary(predicted, "predictions");
  ConfusionMatrix cm;
  for (Index i = 0; i < truth.size(); ++i) {
    if (truth(i) == 1) {
      ++(predicted(i) == 1 ? cm.tp : cm.fn);
    } else {
      ++(predicted(i) == 1 ? cm.fp : cm.tn);
    }
  }
  return cm;
}

Rates rates(const ConfusionMatrix& cm) noexcept {
  Rates r;
  if (cm.tp + cm.fn > 0) r.tpr = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  if (cm.fp + cm.tn > 0) r.fpr = static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
  return r;
}

GroupedRates grouped_rates(const LabelsRef& truth, const LabelsRef& predicted, std::span<const GroupKey> groups) {
  if (truth.size() != predicted.size() || truth.size() != static_cast<Index>(groups.size())) {
    throw ArgumentError("truth, predictions and groups differ in length");
  }
  check_binary(truth, "truth");
  check_binary(predicted, "predictions");
  std::map<GroupKey, ConfusionMatrix> per_group;
  for (Index i = 0; i < truth.size(); ++i) {
    auto& cm = per_group[groups[static_cast<std::size_t>(i)]];
    if (truth(i) == 1) {
      ++(predicted(i) == 1 ? cm.tp : cm.fn);
    } else {
      ++(predicted(i) == 1 ? cm.fp : cm.tn);
    }
  }
  GroupedRates out;
  for (const auto& [g, cm] : per_group) out[g] = {rates(cm), cm.total()};
  return out;
}

double maod(const GroupedRates& grouped) {
  Spread spread;
  for (const auto& [g, r] : grouped) {
    if (!r.rates.tpr || !r.rates.fpr) {
      warn_skipped("mAOD", g);
      continue;
    }
    spread.add(*r.rates.tpr + *r.rates.fpr);
  }
  return 0.5 * spread.width();
}

double meod(const GroupedRates& grouped) {
  Spread spread;
  for (const auto& [g, r] : grouped) {
    if (!r.rates.tpr) {
      warn_skipped("mEOD", g);
      continue;
    }
    spread.add(*r.rates.tpr);
  }
  return spread.width();
}

double aod_binary(const GroupedRates& grouped, const GroupKey& privileged) {
  const Rates& u = two_group_rates(grouped, privileged, false);
  const Rates& p = two_group_rates(grouped, privileged, true);
  if (!u.tpr || !u.fpr || !p.tpr || !p.fpr) throw ArgumentError("AOD needs defined rates in both groups");
  return 0.5 * ((*u.fpr - *p.fpr) + (*u.tpr - *p.tpr));
}

double eod_binary(const GroupedRates& grouped, const GroupKey& privileged) {
  const Rates& u = two_group_rates(grouped, privileged, false);
  const Rates& p = two_group_rates(grouped, privileged, true);
  if (!u.tpr || !p.tpr) throw ArgumentError("EOD needs defined TPR in both groups");
  return *u.tpr - *p.tpr;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ArgumentError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

int minority_class(const LabelsRef& labels) {
  const auto ones = (labels.array() == 1).count();
  const auto zeros = labels.size() - ones;
  return zeros < ones ? 0 : 1;
}

double f1_minority(const LabelsRef& truth, const LabelsRef& predicted, int minority) {
  if (minority != 0 && minority != 1) throw ArgumentError("minority class must be 0 or 1");
  ConfusionMatrix cm = confusion(truth, predicted);
  if (minority == 0) cm = {cm.tn, cm.fn, cm.tp, cm.fp};  // relabel so the minority is positive
  const double recall = cm.tp + cm.fn ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn) : 0.0;
  const double precision = cm.tp + cm.fp ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp) : 0.0;
  if (recall + precision == 0.0) return 0.0;
  return 2.0 * recall * precision / (recall + precision);
}

}  // namespace fairbalance
