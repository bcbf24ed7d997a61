#include "fairbalance/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "fairbalance/error.hpp"
#include "fairbalance/keyvalue.hpp"

namespace fairbalance::bench {

namespace {

constexpr Metric kAllMetrics[] = {Metric::accuracy, Metric::f1_minority, Metric::meod, Metric::maod,
                                  Metric::aod,      Metric::eod,         Metric::runtime};

std::string full_precision(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string cell_text(const CellSummary& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "r%d: %.2f (%.2f)", c.rank, c.median, c.iqr);
  return buf;
}

}  // namespace

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::f1_minority: return "f1_minority";
    case Metric::meod: return "meod";
    case Metric::maod: return "maod";
    case Metric::aod: return "aod";
    case Metric::eod: return "eod";
    case Metric::runtime: return "runtime";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  for (auto m : kAllMetrics) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

stats::Direction direction(Metric m) noexcept {
  return m == Metric::accuracy || m == Metric::f1_minority ? stats::Direction::higher_is_better
                                                           : stats::Direction::lower_is_better;
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (treatments.empty()) throw ConfigError("no treatments configured");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  try {
    fit.validate();
    if (const auto* s = std::get_if<synth::SynthConfig>(&source)) s->validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t i = 0; i < treatments.size(); ++i) {
    if (std::count(treatments.begin(), treatments.end(), treatments[i]) > 1) {
      throw ConfigError("treatment '" + std::string(to_string(treatments[i])) + "' listed twice");
    }
  }
  for (auto m : metrics) {
    if (m == Metric::runtime) throw ConfigError("runtime is always reported; do not list it in metrics");
    if (std::count(metrics.begin(), metrics.end(), m) > 1) {
      throw ConfigError("metric '" + std::string(to_string(m)) + "' listed twice");
    }
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  CsvSource csv_source;
  std::optional<synth::SynthConfig> synthetic;
  auto synth_config = [&]() -> synth::SynthConfig& {
    if (!synthetic) synthetic = synth::presets().front();
    return *synthetic;
  };
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  auto non_negative = [](long long v, const std::string& key) {
    if (v < 0) throw ConfigError(key + " must be >= 0");
    return v;
  };

  for (const auto& [key, value, line] : parse_key_values(text)) {
    if (key == "data") {
      csv_source.data = resolve(value);
    } else if (key == "schema") {
      csv_source.schema = resolve(value);
    } else if (key == "synth.preset") {
      const auto all = synth::presets();
      const auto index = parse_integer(value, key);
      if (index < 0 || index >= static_cast<long long>(all.size())) throw ConfigError("synth.preset must be 0, 1 or 2");
      const auto seed = synthetic ? synthetic->seed : 0;
      synthetic = all[static_cast<std::size_t>(index)];
      synthetic->seed = seed;
    } else if (key == "synth.l") {
      synth_config().l = parse_double(value, key);
    } else if (key == "synth.r") {
      synth_config().r = parse_double(value, key);
    } else if (key == "synth.n") {
      synth_config().n = static_cast<std::size_t>(non_negative(parse_integer(value, key), key));
    } else if (key == "synth.seed") {
      synth_config().seed = static_cast<std::uint64_t>(non_negative(parse_integer(value, key), key));
    } else if (key == "treatments") {
      config.treatments.clear();
      for (const auto& name : split_list(value)) config.treatments.push_back(parse_treatment(name));
    } else if (key == "metrics") {
      config.metrics.clear();
      for (const auto& name : split_list(value)) config.metrics.push_back(parse_metric(name));
    } else if (key == "repeats") {
      config.repeats = static_cast<int>(parse_integer(value, key));
    } else if (key == "train_fraction") {
      config.train_fraction = parse_double(value, key);
    } else if (key == "seed") {
      config.master_seed = static_cast<std::uint64_t>(non_negative(parse_integer(value, key), key));
    } else if (key == "threads") {
      config.threads = static_cast<unsigned>(non_negative(parse_integer(value, key), key));
    } else if (key == "fit.solver") {
      if (value == "newton") {
        config.fit.solver = Solver::newton;
      } else if (value == "lbfgs") {
        config.fit.solver = Solver::lbfgs;
      } else {
        throw ConfigError("fit.solver must be newton or lbfgs");
      }
    } else if (key == "fit.l2_strength") {
      config.fit.l2_strength = parse_double(value, key);
    } else if (key == "fit.max_iterations") {
      config.fit.max_iterations = static_cast<int>(parse_integer(value, key));
    } else if (key == "fit.gradient_tolerance") {
      config.fit.gradient_tolerance = parse_double(value, key);
    } else if (key == "fit.threshold") {
      config.fit.threshold = parse_double(value, key);
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }

  const bool has_csv = !csv_source.data.empty() || !csv_source.schema.empty();
  if (has_csv && synthetic) throw ConfigError("configure either data/schema or synth.*, not both");
  if (has_csv) {
    if (csv_source.data.empty() || csv_source.schema.empty()) throw ConfigError("data and schema must both be set");
    config.source = csv_source;
  } else if (synthetic) {
    config.source = *synthetic;
  } else {
    throw ConfigError("no data source: set data/schema or synth.*");
  }
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  return parse(read_text_file(path.string()), path.parent_path());
}

// ---------------------------------------------------------------------------
// Results

const CellSummary& ResultTable::at(Treatment t, Metric m) const {
  const auto mi = std::find(metrics.begin(), metrics.end(), m);
  const auto ti = std::find(treatments.begin(), treatments.end(), t);
  if (mi == metrics.end() || ti == treatments.end()) throw ArgumentError("no such result cell");
  return cells[static_cast<std::size_t>(mi - metrics.begin())][static_cast<std::size_t>(ti - treatments.begin())];
}

bool ResultTable::has(Metric m) const { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); }

void summarize(ResultTable& table) {
  for (std::size_t mi = 0; mi < table.metrics.size(); ++mi) {
    auto& row = table.cells[mi];
    std::vector<stats::NamedSamples> samples;
    for (std::size_t ti = 0; ti < table.treatments.size(); ++ti) {
      auto& c = row[ti];
      c.median = stats::median(c.observations);
      c.iqr = stats::iqr(c.observations);
      samples.push_back({std::string(to_string(table.treatments[ti])), c.observations});
    }
    if (row.empty()) continue;
    if (row.front().observations.size() < 2) {
      for (auto& c : row) c.rank = 0;  // ranking needs two observations per treatment
      continue;
    }
    const auto ranks = stats::rank_treatments(samples, direction(table.metrics[mi]));
    for (std::size_t ti = 0; ti < table.treatments.size(); ++ti) row[ti].rank = ranks.at(samples[ti].name);
  }
}

Table load_source(const DataSource& source) {
  if (const auto* s = std::get_if<synth::SynthConfig>(&source)) return synth::generate_table(*s).table;
  const auto& c = std::get<CsvSource>(source);
  return load_table(c.data, DatasetSchema::from_file(c.schema));
}

namespace {

struct RepeatOutcome {
  // [metric][treatment]
  std::vector<std::vector<double>> values;
  std::exception_ptr error;
};

RepeatOutcome run_repeat(const ExperimentConfig& config, const std::vector<Metric>& metrics, const Table& data,
                         int k) {
  RepeatOutcome out;
  out.values.assign(metrics.size(), std::vector<double>(config.treatments.size()));

  const auto part = partition(data.rows(), config.train_fraction, derive_seed(config.master_seed, k));
  const Encoder encoder = Encoder::fit(data, part.train);
  const Dataset train = encode(data, part.train, encoder);
  const Dataset test = encode(data, part.test, encoder);
  const int minority = minority_class(train.labels);
  const std::size_t arity = data.groups.empty() ? 0 : data.groups.front().arity();
  const GroupKey privileged(arity >= 32 ? ~0U : (1U << arity) - 1U, arity);

  for (std::size_t ti = 0; ti < config.treatments.size(); ++ti) {
    const auto start = std::chrono::steady_clock::now();
    const auto weights = compute_weights(train, config.treatments[ti]);
    const auto model = fit(train.features, train.labels, weights.values, config.fit);
    const Eigen::VectorXi predicted = predict(model, test.features, config.fit.threshold);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto cm = confusion(test.labels, predicted);
    const auto grouped = grouped_rates(test.labels, predicted, test.groups);
    for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
      double v = 0.0;
      switch (metrics[mi]) {
        case Metric::accuracy: v = accuracy(cm); break;
        case Metric::f1_minority: v = f1_minority(test.labels, predicted, minority); break;
        case Metric::meod: v = meod(grouped); break;
        case Metric::maod: v = maod(grouped); break;
        case Metric::aod: v = aod_binary(grouped, privileged); break;
        case Metric::eod: v = eod_binary(grouped, privileged); break;
        case Metric::runtime: v = seconds; break;
      }
      out.values[mi][ti] = v;
    }
  }
  return out;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) { return run_experiment(config, load_source(config.source)); }

ResultTable run_experiment(const ExperimentConfig& config, const Table& data) {
  config.validate();
  ResultTable table;
  table.treatments = config.treatments;
  table.metrics = config.metrics;
  table.metrics.push_back(Metric::runtime);

  const bool two_group_metric = std::any_of(config.metrics.begin(), config.metrics.end(),
                                            [](Metric m) { return m == Metric::aod || m == Metric::eod; });
  if (two_group_metric && !data.groups.empty() && data.groups.front().arity() != 1) {
    throw ConfigError("aod/eod need exactly one sensitive attribute; use meod/maod otherwise");
  }

  const auto repeats = static_cast<std::size_t>(config.repeats);
  std::vector<RepeatOutcome> outcomes(repeats);
  auto work = [&](std::size_t k) {
    try {
      outcomes[k] = run_repeat(config, table.metrics, data, static_cast<int>(k));
    } catch (...) {
      outcomes[k].error = std::current_exception();
    }
  };

  const unsigned workers = std::min<unsigned>(config.threads, static_cast<unsigned>(repeats));
  if (workers <= 1) {
    for (std::size_t k = 0; k < repeats; ++k) {
      work(k);
      if (outcomes[k].error) break;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < repeats; k = next++) work(k);
      });
    }
  }

  for (std::size_t k = 0; k < repeats; ++k) {
    if (!outcomes[k].error) continue;
    try {
      std::rethrow_exception(outcomes[k].error);
    } catch (const Error& e) {
      throw RepeatError(static_cast<int>(k), e.what(), e.exit_code());
    } catch (const std::exception& e) {
      throw RepeatError(static_cast<int>(k), e.what(), 1);
    }
  }

  table.cells.assign(table.metrics.size(), std::vector<CellSummary>(table.treatments.size()));
  for (std::size_t mi = 0; mi < table.metrics.size(); ++mi) {
    for (std::size_t ti = 0; ti < table.treatments.size(); ++ti) {
      auto& obs = table.cells[mi][ti].observations;
      obs.reserve(repeats);
      for (const auto& o : outcomes) obs.push_back(o.values[mi][ti]);
    }
  }
  summarize(table);
  return table;
}

// ---------------------------------------------------------------------------
// Reporting

ReportFormat parse_report_format(std::string_view name) {
  if (name == "text") return ReportFormat::text;
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

std::string report(const ResultTable& table, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    csv::write_record(out, {"treatment", "metric", "rank", "median", "iqr"});
    for (std::size_t ti = 0; ti < table.treatments.size(); ++ti) {
      for (std::size_t mi = 0; mi < table.metrics.size(); ++mi) {
        const auto& c = table.cells[mi][ti];
        csv::write_record(out, {std::string(display_name(table.treatments[ti])), std::string(to_string(table.metrics[mi])),
                                std::to_string(c.rank), full_precision(c.median), full_precision(c.iqr)});
      }
    }
    return out.str();
  }

  std::vector<std::string> header{"Treatment"};
  for (auto m : table.metrics) header.emplace_back(to_string(m));
  std::vector<std::vector<std::string>> rows;
  if (!table.metrics.empty()) {
    for (std::size_t ti = 0; ti < table.treatments.size(); ++ti) {
      std::vector<std::string> row{std::string(display_name(table.treatments[ti]))};
      for (std::size_t mi = 0; mi < table.metrics.size(); ++mi) row.push_back(cell_text(table.cells[mi][ti]));
      rows.push_back(std::move(row));
    }
  }

  if (format == ReportFormat::markdown) {
    auto line = [&](const std::vector<std::string>& cells) {
      out << '|';
      for (const auto& c : cells) out << ' ' << c << " |";
      out << '\n';
    };
    line(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& r : rows) line(r);
    return out.str();
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += "  ";
      s += cells[i];
      if (i + 1 < cells.size()) s.append(width[i] - cells[i].size(), ' ');
    }
    out << s << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

void write_observations(std::ostream& out, const ResultTable& table) {
  csv::write_record(out, {"treatment", "metric", "repeat", "value"});
  for (std::size_t ti = 0; ti < table.treatments.size(); ++ti) {
    for (std::size_t mi = 0; mi < table.metrics.size(); ++mi) {
      const auto& obs = table.cells[mi][ti].observations;
      for (std::size_t k = 0; k < obs.size(); ++k) {
        csv::write_record(out, {std::string(to_string(table.treatments[ti])), std::string(to_string(table.metrics[mi])),
                                std::to_string(k), full_precision(obs[k])});
      }
    }
  }
}

std::map<std::string, std::vector<stats::NamedSamples>> read_observations(const csv::Document& doc) {
  const auto treatment_at = doc.column("treatment");
  const auto value_at = doc.column("value");
  if (!treatment_at || !value_at) throw SchemaError("observations need 'treatment' and 'value' columns");
  const auto metric_at = doc.column("metric");

  std::map<std::string, std::vector<stats::NamedSamples>> out;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& rec = doc.rows[r];
    if (rec.size() != doc.header.size()) throw ParseError("ragged observation row", r);
    const std::string metric = metric_at ? rec[*metric_at] : "value";
    const std::string name(trim(rec[*treatment_at]));
    double v = 0.0;
    const auto field = trim(rec[*value_at]);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      throw ParseError("value '" + std::string(field) + "' is not a number", r);
    }
    auto& samples = out[metric];
    auto it = std::find_if(samples.begin(), samples.end(), [&](const auto& s) { return s.name == name; });
    if (it == samples.end()) {
      samples.push_back({name, {}});
      it = samples.end() - 1;
    }
    it->values.push_back(v);
  }
  return out;
}

AuditResult audit(const LabelsRef& truth, const LabelsRef& predicted, std::span<const GroupKey> groups,
                  std::optional<int> minority) {
  AuditResult out;
  out.confusion = confusion(truth, predicted);
  out.groups = grouped_rates(truth, predicted, groups);
  out.minority = minority.value_or(minority_class(truth));
  out.metrics["accuracy"] = accuracy(out.confusion);
  out.metrics["f1_minority"] = f1_minority(truth, predicted, out.minority);
  out.metrics["meod"] = meod(out.groups);
  out.metrics["maod"] = maod(out.groups);
  if (out.groups.size() == 2 && !groups.empty() && groups.front().arity() == 1) {
    const GroupKey privileged(1, 1);
    if (out.groups.contains(privileged)) {
      try {
        out.metrics["aod"] = aod_binary(out.groups, privileged);
        out.metrics["eod"] = eod_binary(out.groups, privileged);
      } catch (const ArgumentError&) {
        // undefined rate in one group: leave aod/eod out
      }
    }
  }
  return out;
}

}  // namespace fairbalance::bench
