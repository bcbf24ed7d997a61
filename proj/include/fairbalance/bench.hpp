#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fairbalance/csv.hpp"
#include "fairbalance/dataset.hpp"
#include "fairbalance/logistic.hpp"
#include "fairbalance/metrics.hpp"
#include "fairbalance/seed.hpp"
#include "fairbalance/stats.hpp"
#include "fairbalance/synth.hpp"
#include "fairbalance/weights.hpp"

namespace fairbalance::bench {

enum class Metric { accuracy, f1_minority, meod, maod, aod, eod, runtime };

[[nodiscard]] std::string_view to_string(Metric m) noexcept;
/// Throws ConfigError on an unknown name.
[[nodiscard]] Metric parse_metric(std::string_view name);
/// Lower is better for the fairness metrics and runtime, higher for
/// accuracy and F1. AOD and EOD are signed; they rank by value as given.
[[nodiscard]] stats::Direction direction(Metric m) noexcept;

struct CsvSource {
  std::filesystem::path data;
  std::filesystem::path schema;
};

using DataSource = std::variant<CsvSource, synth::SynthConfig>;

/// Plain-text form:
///
///     data = adult.csv                 # CSV source, paths relative to the file
///     schema = adult.schema
///     synth.preset = 1                 # or a synthetic source: preset index,
///     synth.l = 6                      #   optionally overridden field by field
///     treatments = none, fairbalance
///     metrics = accuracy, f1_minority, meod, maod
///     repeats = 50
///     train_fraction = 0.5
///     seed = 0
///     threads = 1
///     fit.l2_strength = 1.0            # also fit.solver (newton, lbfgs),
///                                      # fit.max_iterations,
///                                      # fit.gradient_tolerance, fit.threshold
struct ExperimentConfig {
  DataSource source = synth::SynthConfig{};
  std::vector<Treatment> treatments{Treatment::none, Treatment::reweighing, Treatment::fair_balance,
                                    Treatment::fair_balance_variant};
  std::vector<Metric> metrics{Metric::accuracy, Metric::f1_minority, Metric::meod, Metric::maod};
  int repeats = 50;
  double train_fraction = 0.5;
  std::uint64_t master_seed = 0;
  FitConfig fit;
  unsigned threads = 1;

  /// Throws ConfigError.
  void validate() const;

  static ExperimentConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

struct CellSummary {
  std::vector<double> observations;  // indexed by repeat
  double median = 0.0;
  double iqr = 0.0;
  int rank = 0;
};

/// Per (treatment, metric) summaries. `metrics` always ends with runtime.
struct ResultTable {
  std::vector<Treatment> treatments;
  std::vector<Metric> metrics;
  std::vector<std::vector<CellSummary>> cells;  // [metric][treatment]

  [[nodiscard]] const CellSummary& at(Treatment t, Metric m) const;
  [[nodiscard]] bool has(Metric m) const;
};

/// Fills medians, IQRs and ranks from the observation lists.
void summarize(ResultTable& table);

/// Loads (CSV) or generates (synthetic) the source table.
[[nodiscard]] Table load_source(const DataSource& source);

/// Repeat k splits with derive_seed(master_seed, k); every treatment sees the
/// same split. On the training side the encoder is fitted, weights computed
/// and the model fitted; all metrics come from the test side. Runtime is the
/// wall clock of weighting + fitting + predicting. Results are assembled by
/// repeat index, so the thread count never changes a metric value. A failing
/// repeat aborts the run with a RepeatError.
[[nodiscard]] ResultTable run_experiment(const ExperimentConfig& config);
[[nodiscard]] ResultTable run_experiment(const ExperimentConfig& config, const Table& data);

enum class ReportFormat { text, csv, markdown };

[[nodiscard]] ReportFormat parse_report_format(std::string_view name);

/// Cells read "rK: median (IQR)", two decimals in text and markdown. The CSV
/// form is long (treatment,metric,rank,median,iqr) at full precision.
[[nodiscard]] std::string report(const ResultTable& table, ReportFormat format);

/// Long-form raw observations: treatment,metric,repeat,value.
void write_observations(std::ostream& out, const ResultTable& table);

/// Samples per metric from a CSV with `treatment` and `value` columns and
/// optional `metric` (missing -> "value") and `repeat` columns.
[[nodiscard]] std::map<std::string, std::vector<stats::NamedSamples>> read_observations(const csv::Document& doc);

/// Metrics of fixed predictions: accuracy, f1_minority, meod, maod, plus
/// aod and eod when there are exactly two groups.
struct AuditResult {
  ConfusionMatrix confusion;
  GroupedRates groups;
  int minority = 1;
  std::map<std::string, double> metrics;
};

[[nodiscard]] AuditResult audit(const LabelsRef& truth, const LabelsRef& predicted,
                                std::span<const GroupKey> groups, std::optional<int> minority = std::nullopt);

}  // namespace fairbalance::bench
