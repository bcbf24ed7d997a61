#include "fairbalance/dataset.hpp"

#include <algorithm>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fairbalance/error.hpp"
#include "fairbalance/keyvalue.hpp"
#include "fairbalance/log.hpp"

namespace fairbalance {

// ---------------------------------------------------------------------------
// GroupKey

GroupKey::GroupKey(std::uint32_t bits, std::size_t arity)
    : bits_(bits), arity_(static_cast<std::uint8_t>(arity)) {
  if (arity > max_attributes) throw ArgumentError("too many sensitive attributes");
  if (arity < 32 && (bits >> arity) != 0) throw ArgumentError("group key bits exceed arity");
}

GroupKey GroupKey::from_flags(std::span<const bool> privileged) {
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < privileged.size(); ++i) {
    if (privileged[i]) bits |= 1U << i;
  }
  return GroupKey(bits, privileged.size());
}

std::string GroupKey::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < arity(); ++i) {
    if (i) out += ',';
    out += privileged(i) ? '1' : '0';
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// Predicate

namespace {

std::optional<double> to_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

constexpr std::pair<std::string_view, Predicate::Op> kOperators[] = {
    {"==", Predicate::Op::equal},       {"!=", Predicate::Op::not_equal},
    {">=", Predicate::Op::greater_equal}, {"<=", Predicate::Op::less_equal},
    {">", Predicate::Op::greater},      {"<", Predicate::Op::less},
};

}  // namespace

Predicate Predicate::parse(std::string_view text) {
  // Leftmost operator wins; at a given position two-character operators are
  // tried first.
  std::size_t best = std::string_view::npos;
  std::string_view best_token;
  Op best_op = Op::equal;
  for (const auto& [token, op] : kOperators) {
    const auto at = text.find(token);
    if (at < best) {
      best = at;
      best_token = token;
      best_op = op;
    }
  }
  if (best == std::string_view::npos) {
    throw SchemaError("predicate '" + std::string(text) + "' has no comparison operator");
  }
  Predicate p;
  p.column = std::string(trim(text.substr(0, best)));
  p.op = best_op;
  p.value = std::string(trim(text.substr(best + best_token.size())));
  if (p.column.empty() || p.value.empty()) {
    throw SchemaError("predicate '" + std::string(text) + "' needs a column and a value");
  }
  if (p.op != Op::equal && p.op != Op::not_equal) {
    const auto number = to_number(p.value);
    if (!number) throw SchemaError("predicate '" + std::string(text) + "' compares against a non-number");
    p.number = *number;
  }
  return p;
}

bool Predicate::evaluate(std::string_view raw, std::size_t row) const {
  raw = trim(raw);
  if (op == Op::equal || op == Op::not_equal) {
    bool same = raw == value;
    if (!same) {
      const auto a = to_number(raw);
      const auto b = to_number(value);
      same = a && b && *a == *b;
    }
    return op == Op::equal ? same : !same;
  }
  const auto x = to_number(raw);
  if (!x) throw ParseError("column '" + column + "': '" + std::string(raw) + "' is not a number", row);
  switch (op) {
    case Op::greater: return *x > number;
    case Op::greater_equal: return *x >= number;
    case Op::less: return *x < number;
    case Op::less_equal: return *x <= number;
    default: return false;
  }
}

std::string Predicate::to_string() const {
  for (const auto& [token, o] : kOperators) {
    if (o == op) return column + " " + std::string(token) + " " + value;
  }
  return column;
}

// ---------------------------------------------------------------------------
// DatasetSchema

void DatasetSchema::validate() const {
  if (label_column.empty()) throw SchemaError("schema has no label column");
  if (favorable_label.empty()) throw SchemaError("schema has no favorable label");
  if (sensitive_attributes.empty()) throw SchemaError("schema has no sensitive attribute");
  if (sensitive_attributes.size() > GroupKey::max_attributes) {
    throw SchemaError("at most 16 sensitive attributes are supported");
  }
  for (const auto& f : feature_columns) {
    if (f.name == label_column) throw SchemaError("label column '" + label_column + "' is listed as a feature");
    if (std::find(excluded_columns.begin(), excluded_columns.end(), f.name) != excluded_columns.end()) {
      throw SchemaError("column '" + f.name + "' is both a feature and excluded");
    }
  }
  for (const auto& s : sensitive_attributes) {
    if (s.column() == label_column) throw SchemaError("label column '" + label_column + "' is a sensitive attribute");
  }
}

bool DatasetSchema::is_missing(std::string_view raw) const {
  raw = trim(raw);
  return std::find(missing_tokens.begin(), missing_tokens.end(), raw) != missing_tokens.end();
}

DatasetSchema DatasetSchema::parse(std::string_view text) {
  DatasetSchema schema;
  std::optional<std::string> sensitive_features;
  for (const auto& kv : parse_key_values(text)) {
    if (kv.key == "label") {
      schema.label_column = kv.value;
    } else if (kv.key == "favorable") {
      schema.favorable_label = kv.value;
    } else if (kv.key == "sensitive") {
      schema.sensitive_attributes.push_back({Predicate::parse(kv.value), true});
    } else if (kv.key == "numeric" || kv.key == "categorical") {
      const auto kind = kv.key == "numeric" ? FeatureKind::numeric : FeatureKind::categorical;
      for (auto& name : split_list(kv.value)) schema.feature_columns.push_back({std::move(name), kind});
    } else if (kv.key == "exclude") {
      for (auto& name : split_list(kv.value)) schema.excluded_columns.push_back(std::move(name));
    } else if (kv.key == "sensitive_as_features") {
      sensitive_features = kv.value;
    } else if (kv.key == "missing") {
      schema.missing_tokens = {""};
      for (auto& token : split_list(kv.value)) schema.missing_tokens.push_back(std::move(token));
    } else {
      throw SchemaError("line " + std::to_string(kv.line) + ": unknown schema key '" + kv.key + "'");
    }
  }
  if (sensitive_features) {
    const auto& v = *sensitive_features;
    if (v == "true" || v == "false") {
      for (auto& s : schema.sensitive_attributes) s.as_feature = v == "true";
    } else {
      const auto names = split_list(v);
      for (auto& s : schema.sensitive_attributes) {
        s.as_feature = std::find(names.begin(), names.end(), s.column()) != names.end();
      }
      for (const auto& name : names) {
        const bool known = std::any_of(schema.sensitive_attributes.begin(), schema.sensitive_attributes.end(),
                                       [&](const SensitiveAttribute& s) { return s.column() == name; });
        if (!known) throw SchemaError("sensitive_as_features names unknown attribute '" + name + "'");
      }
    }
  }
  schema.validate();
  return schema;
}

DatasetSchema DatasetSchema::from_file(const std::filesystem::path& path) {
  return parse(read_text_file(path.string()));
}

// ---------------------------------------------------------------------------
// Dataset

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  out.labels.resize(static_cast<Index>(rows.size()));
  out.groups.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    out.features.row(static_cast<Index>(i)) = features.row(r);
    out.labels(static_cast<Index>(i)) = labels(r);
    out.groups.push_back(groups[static_cast<std::size_t>(r)]);
  }
  out.feature_names = feature_names;
  return out;
}

void Dataset::validate() const {
  if (rows() < 1) throw ArgumentError("dataset is empty");
  if (features.rows() != rows() || static_cast<Index>(groups.size()) != rows()) {
    throw ArgumentError("dataset containers are not row-aligned");
  }
  if (static_cast<Index>(feature_names.size()) != features.cols()) {
    throw ArgumentError("feature name count does not match feature columns");
  }
  if (!features.allFinite()) throw ArgumentError("dataset features contain non-finite values");
}

// ---------------------------------------------------------------------------
// Table

std::vector<Index> Table::all_rows() const {
  std::vector<Index> rows(static_cast<std::size_t>(this->rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  return rows;
}

Table make_table(const csv::Document& doc, const DatasetSchema& schema) {
  schema.validate();

  auto require = [&](const std::string& name) {
    const auto at = doc.column(name);
    if (!at) throw SchemaError("column '" + name + "' not found in header");
    return *at;
  };

  const std::size_t label_at = require(schema.label_column);
  std::vector<std::size_t> sensitive_at;
  for (const auto& s : schema.sensitive_attributes) sensitive_at.push_back(require(s.column()));
  for (const auto& name : schema.excluded_columns) (void)require(name);

  // Feature columns: declared, or everything not otherwise claimed.
  std::vector<FeatureColumn> features = schema.feature_columns;
  const bool infer_kinds = features.empty();
  if (infer_kinds) {
    for (const auto& name : doc.header) {
      const bool claimed =
          name == schema.label_column ||
          std::find(schema.excluded_columns.begin(), schema.excluded_columns.end(), name) !=
              schema.excluded_columns.end() ||
          std::any_of(schema.sensitive_attributes.begin(), schema.sensitive_attributes.end(),
                      [&](const SensitiveAttribute& s) { return s.column() == name; });
      const bool duplicate = std::any_of(features.begin(), features.end(),
                                         [&](const FeatureColumn& f) { return f.name == name; });
      if (!claimed && !duplicate) features.push_back({name, FeatureKind::numeric});
    }
  }
  std::vector<std::size_t> feature_at;
  for (const auto& f : features) feature_at.push_back(require(f.name));

  // Keep rows complete in every used column.
  std::vector<std::size_t> kept;
  kept.reserve(doc.rows.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& rec = doc.rows[r];
    if (rec.size() != doc.header.size()) {
      throw ParseError("expected " + std::to_string(doc.header.size()) + " fields, found " +
                           std::to_string(rec.size()),
                       r);
    }
    bool complete = !schema.is_missing(rec[label_at]);
    for (auto c : sensitive_at) complete = complete && !schema.is_missing(rec[c]);
    for (auto c : feature_at) complete = complete && !schema.is_missing(rec[c]);
    if (complete) kept.push_back(r);
  }
  if (kept.empty()) throw EmptyDataError("no complete rows after dropping missing values");

  if (infer_kinds) {
    for (std::size_t j = 0; j < features.size(); ++j) {
      const bool numeric = std::all_of(kept.begin(), kept.end(), [&](std::size_t r) {
        return to_number(doc.rows[r][feature_at[j]]).has_value();
      });
      features[j].kind = numeric ? FeatureKind::numeric : FeatureKind::categorical;
    }
  }

  Table t;
  const auto n = static_cast<Index>(kept.size());
  t.dropped_rows = doc.rows.size() - kept.size();

  std::vector<std::size_t> numeric_at, categorical_at;
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j].kind == FeatureKind::numeric) {
      t.numeric_names.push_back(features[j].name);
      numeric_at.push_back(feature_at[j]);
    } else {
      t.categorical_names.push_back(features[j].name);
      categorical_at.push_back(feature_at[j]);
    }
  }

  t.numeric.resize(n, static_cast<Index>(numeric_at.size()));
  t.categorical.assign(categorical_at.size(), std::vector<std::string>(kept.size()));
  t.labels.resize(n);
  t.groups.reserve(kept.size());

  std::vector<std::size_t> indicator_attr;
  for (std::size_t a = 0; a < schema.sensitive_attributes.size(); ++a) {
    const auto& s = schema.sensitive_attributes[a];
    t.sensitive_names.push_back(s.privileged.to_string());
    if (s.as_feature) {
      t.indicator_names.push_back(s.privileged.to_string());
      indicator_attr.push_back(a);
    }
  }
  t.indicators.resize(n, static_cast<Index>(indicator_attr.size()));

  bool any_favorable = false;
  bool flag_buffer[GroupKey::max_attributes] = {};
  for (Index i = 0; i < n; ++i) {
    const std::size_t r = kept[static_cast<std::size_t>(i)];
    const auto& rec = doc.rows[r];

    const bool favorable = trim(rec[label_at]) == schema.favorable_label;
    any_favorable = any_favorable || favorable;
    t.labels(i) = favorable ? 1 : 0;

    for (std::size_t j = 0; j < numeric_at.size(); ++j) {
      const auto value = to_number(rec[numeric_at[j]]);
      if (!value) {
        throw ParseError("column '" + t.numeric_names[j] + "': '" + rec[numeric_at[j]] +
                             "' is not a number",
                         r);
      }
      t.numeric(i, static_cast<Index>(j)) = *value;
    }
    for (std::size_t j = 0; j < categorical_at.size(); ++j) {
      t.categorical[j][static_cast<std::size_t>(i)] = std::string(trim(rec[categorical_at[j]]));
    }
    for (std::size_t a = 0; a < sensitive_at.size(); ++a) {
      flag_buffer[a] = schema.sensitive_attributes[a].privileged.evaluate(rec[sensitive_at[a]], r);
    }
    t.groups.push_back(GroupKey::from_flags(std::span<const bool>(flag_buffer, sensitive_at.size())));
    for (std::size_t q = 0; q < indicator_attr.size(); ++q) {
      t.indicators(i, static_cast<Index>(q)) = flag_buffer[indicator_attr[q]] ? 1.0 : 0.0;
    }
  }
  if (!any_favorable) {
    throw LabelMappingError("favorable label '" + schema.favorable_label + "' never occurs in column '" +
                            schema.label_column + "'");
  }
  return t;
}

Table load_table(const std::filesystem::path& path, const DatasetSchema& schema) {
  return make_table(csv::read(path), schema);
}

// ---------------------------------------------------------------------------
// Encoder

Encoder Encoder::fit(const Table& table, std::span<const Index> rows, EncoderOptions options) {
  if (rows.empty()) throw ArgumentError("cannot fit an encoder on zero rows");
  Encoder enc;
  const Index p = table.numeric.cols();
  enc.mean_ = Eigen::RowVectorXd::Zero(p);
  enc.scale_ = Eigen::RowVectorXd::Ones(p);
  if (options.standardize) {
    const double count = static_cast<double>(rows.size());
    for (Index r : rows) enc.mean_ += table.numeric.row(r);
    enc.mean_ /= count;
    Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(p);
    for (Index r : rows) sq += (table.numeric.row(r) - enc.mean_).array().square().matrix();
    for (Index j = 0; j < p; ++j) {
      const double sd = std::sqrt(sq(j) / count);
      enc.scale_(j) = sd > 0.0 ? sd : 1.0;
    }
  }
  enc.names_ = table.numeric_names;

  Index offset = p;
  for (std::size_t c = 0; c < table.categorical.size(); ++c) {
    std::vector<std::string> vocab;
    std::unordered_map<std::string_view, bool> seen;
    for (Index r : rows) {
      const auto& v = table.categorical[c][static_cast<std::size_t>(r)];
      if (seen.emplace(v, true).second) vocab.push_back(v);
    }
    enc.block_offset_.push_back(offset);
    offset += static_cast<Index>(vocab.size());
    for (const auto& v : vocab) enc.names_.push_back(table.categorical_names[c] + "=" + v);
    enc.vocabulary_.push_back(std::move(vocab));
  }
  for (const auto& name : table.indicator_names) enc.names_.push_back(name);
  return enc;
}

Eigen::MatrixXd Encoder::transform(const Table& table, std::span<const Index> rows) const {
  const auto n = static_cast<Index>(rows.size());
  const Index p = mean_.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, width());

  for (Index i = 0; i < n; ++i) {
    out.row(i).head(p) = (table.numeric.row(rows[static_cast<std::size_t>(i)]) - mean_).cwiseQuotient(scale_);
  }
  for (std::size_t c = 0; c < vocabulary_.size(); ++c) {
    std::unordered_map<std::string_view, Index> lookup;
    for (std::size_t k = 0; k < vocabulary_[c].size(); ++k) lookup.emplace(vocabulary_[c][k], static_cast<Index>(k));
    for (Index i = 0; i < n; ++i) {
      const auto& v = table.categorical[c][static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
      if (const auto it = lookup.find(v); it != lookup.end()) out(i, block_offset_[c] + it->second) = 1.0;
    }
  }
  const Index q = table.indicators.cols();
  for (Index i = 0; i < n; ++i) {
    out.row(i).tail(q) = table.indicators.row(rows[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::optional<std::string> Encoder::decode(std::size_t column,
                                           const Eigen::Ref<const Eigen::RowVectorXd>& encoded) const {
  const auto& vocab = vocabulary_.at(column);
  for (std::size_t k = 0; k < vocab.size(); ++k) {
    if (encoded(block_offset_[column] + static_cast<Index>(k)) == 1.0) return vocab[k];
  }
  return std::nullopt;
}

Dataset encode(const Table& table, std::span<const Index> rows, const Encoder& encoder) {
  Dataset d;
  d.features = encoder.transform(table, rows);
  d.labels.resize(static_cast<Index>(rows.size()));
  d.groups.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.labels(static_cast<Index>(i)) = table.labels(rows[i]);
    d.groups.push_back(table.groups[static_cast<std::size_t>(rows[i])]);
  }
  d.feature_names = encoder.feature_names();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  const Table table = load_table(path, schema);
  if (table.dropped_rows > 0) {
    log::warn(path.filename().string() + ": dropped " + std::to_string(table.dropped_rows) +
              " rows with missing values");
  }
  const auto rows = table.all_rows();
  return encode(table, rows, Encoder::fit(table, rows));
}

// ---------------------------------------------------------------------------
// Splitting

Partition partition(Index n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("split fraction must lie in (0, 1)");
  if (n < 2) throw ArgumentError("cannot split fewer than two rows");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  boost::random::mt19937_64 engine(seed);
  for (Index i = n - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<Index> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(engine))]);
  }

  const auto wanted = static_cast<Index>(std::floor(fraction * static_cast<double>(n) + 0.5));
  const Index train_size = std::clamp<Index>(wanted, 1, n - 1);

  Partition p;
  p.train.assign(order.begin(), order.begin() + train_size);
  p.test.assign(order.begin() + train_size, order.end());
  std::sort(p.train.begin(), p.train.end());
  std::sort(p.test.begin(), p.test.end());
  return p;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  const auto p = partition(data.rows(), fraction, seed);
  return {data.subset(p.train), data.subset(p.test)};
}

}  // namespace fairbalance
