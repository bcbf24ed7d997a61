#pragma once

#include <Eigen/Core>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairbalance/csv.hpp"

namespace fairbalance {

using Index = Eigen::Index;

/// Demographic group: one privileged/unprivileged bit per sensitive
/// attribute, in schema order. Bit i set means attribute i is privileged.
class GroupKey {
 public:
  static constexpr std::size_t max_attributes = 16;

  constexpr GroupKey() = default;
  GroupKey(std::uint32_t bits, std::size_t arity);
  static GroupKey from_flags(std::span<const bool> privileged);

  [[nodiscard]] constexpr std::uint32_t bits() const noexcept { return bits_; }
  [[nodiscard]] constexpr std::size_t arity() const noexcept { return arity_; }
  [[nodiscard]] constexpr bool privileged(std::size_t attribute) const noexcept {
    return (bits_ >> attribute) & 1U;
  }

  /// "(1,0)" for a privileged first and unprivileged second attribute.
  [[nodiscard]] std::string to_string() const;

  constexpr auto operator<=>(const GroupKey&) const = default;

 private:
  std::uint32_t bits_ = 0;
  std::uint8_t arity_ = 0;
};

/// Binarizing test on a raw column value: `col == value`, `col != value`,
/// or an ordering against a number (`col > 25`, `col <= 60`, ...).
struct Predicate {
  enum class Op { equal, not_equal, greater, greater_equal, less, less_equal };

  std::string column;
  Op op = Op::equal;
  std::string value;
  double number = 0.0;

  /// Parses "age > 25", "sex == Male". Throws SchemaError.
  static Predicate parse(std::string_view text);

  /// Throws ParseError (at `row`) if an ordering test meets a non-number.
  [[nodiscard]] bool evaluate(std::string_view raw, std::size_t row = 0) const;
  [[nodiscard]] std::string to_string() const;
};

enum class FeatureKind { numeric, categorical };

struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
};

struct SensitiveAttribute {
  Predicate privileged;
  /// Whether the binarized attribute is appended to the model features.
  bool as_feature = true;

  [[nodiscard]] const std::string& column() const noexcept { return privileged.column; }
};

/// Which columns are the label, the sensitive attributes and the features.
///
/// Plain-text form, one `key = value` per line:
///
///     label = income
///     favorable = >50K
///     sensitive = sex == Male
///     sensitive = race == White
///     numeric = age, hours-per-week
///     categorical = workclass, education
///     exclude = fnlwgt
///     sensitive_as_features = true      # or false, or a list of columns
///     missing = ?, NA
///
/// With no `numeric`/`categorical` lines every remaining column (other than
/// the label, sensitive and excluded ones) is a feature and its kind is
/// inferred from its values.
struct DatasetSchema {
  std::string label_column;
  std::string favorable_label;
  std::vector<SensitiveAttribute> sensitive_attributes;
  std::vector<FeatureColumn> feature_columns;
  std::vector<std::string> excluded_columns;
  std::vector<std::string> missing_tokens{"", "?"};

  /// Throws SchemaError on a violated invariant.
  void validate() const;

  [[nodiscard]] bool is_missing(std::string_view raw) const;

  static DatasetSchema parse(std::string_view text);
  static DatasetSchema from_file(const std::filesystem::path& path);
};

/// Encoded data: row-aligned features, binary labels and group keys.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXi labels;
  std::vector<GroupKey> groups;
  std::vector<std::string> feature_names;

  [[nodiscard]] Index rows() const noexcept { return labels.size(); }
  [[nodiscard]] Index cols() const noexcept { return features.cols(); }

  [[nodiscard]] Dataset subset(std::span<const Index> rows) const;

  /// Throws ArgumentError unless sizes agree, n >= 1 and features are finite.
  void validate() const;
};

/// Cleaned, typed columns of a tabular source before encoding. Rows with a
/// missing value in any used column have already been dropped.
struct Table {
  std::vector<std::string> numeric_names;
  Eigen::MatrixXd numeric;  // n x p raw values

  std::vector<std::string> categorical_names;
  std::vector<std::vector<std::string>> categorical;  // [column][row]

  /// Binary columns passed through unchanged (binarized sensitive attributes).
  std::vector<std::string> indicator_names;
  Eigen::MatrixXd indicators;  // n x q, entries 0/1

  Eigen::VectorXi labels;
  std::vector<GroupKey> groups;
  std::vector<std::string> sensitive_names;
  std::size_t dropped_rows = 0;

  [[nodiscard]] Index rows() const noexcept { return labels.size(); }
  [[nodiscard]] std::vector<Index> all_rows() const;
};

[[nodiscard]] Table make_table(const csv::Document& doc, const DatasetSchema& schema);
[[nodiscard]] Table load_table(const std::filesystem::path& path, const DatasetSchema& schema);

struct EncoderOptions {
  bool standardize = true;
};

/// Feature encoder fitted on training rows: numeric columns are standardized
/// with training mean and (population) standard deviation, categorical
/// columns are one-hot encoded over the categories seen in training, in
/// first-appearance order. Categories unseen at fit time encode as zeros.
class Encoder {
 public:
  static Encoder fit(const Table& table, std::span<const Index> rows, EncoderOptions options = {});

  [[nodiscard]] Eigen::MatrixXd transform(const Table& table, std::span<const Index> rows) const;
  [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return names_; }
  [[nodiscard]] Index width() const noexcept { return static_cast<Index>(names_.size()); }

  /// Category recovered from the one-hot block of categorical column `column`
  /// in an encoded row, or nullopt if the block is all zeros.
  [[nodiscard]] std::optional<std::string> decode(
      std::size_t column, const Eigen::Ref<const Eigen::RowVectorXd>& encoded) const;

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
  std::vector<std::vector<std::string>> vocabulary_;
  std::vector<Index> block_offset_;
  std::vector<std::string> names_;
};

[[nodiscard]] Dataset encode(const Table& table, std::span<const Index> rows, const Encoder& encoder);

/// Reads, cleans and encodes a CSV; the encoder is fitted on all rows.
/// Reports the number of dropped rows through the warning log.
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema);

/// Row indices of a train/test partition, each sorted ascending.
struct Partition {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Uniform random partition without replacement. The training side gets
/// round-half-up(fraction * n) rows, clamped to [1, n - 1]. Deterministic in
/// `seed` (Fisher-Yates over a seeded 64-bit Mersenne twister).
[[nodiscard]] Partition partition(Index n, double fraction, std::uint64_t seed);

[[nodiscard]] std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                                std::uint64_t seed);

}  // namespace fairbalance
