#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fairbalance/bench.hpp"
#include "fairbalance/error.hpp"
#include "fairbalance/keyvalue.hpp"

namespace fb = fairbalance;

namespace {

// 0/1 entries of the first column of a CSV with a header row.
Eigen::VectorXi read_binary_column(const std::string& path) {
  const auto doc = fb::csv::read(path);
  Eigen::VectorXi out(static_cast<Eigen::Index>(doc.rows.size()));
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto v = doc.rows[r].empty() ? std::string_view{} : fb::trim(doc.rows[r][0]);
    if (v != "0" && v != "1") throw fb::ParseError("expected 0 or 1 in " + path, r);
    out[static_cast<Eigen::Index>(r)] = v == "1";
  }
  return out;
}

// One 0/1 column per sensitive attribute, 1 = privileged.
std::vector<fb::GroupKey> read_groups(const std::string& path) {
  const auto doc = fb::csv::read(path);
  if (doc.header.empty() || doc.header.size() > fb::GroupKey::max_attributes) {
    throw fb::SchemaError("groups file needs 1 to 16 columns");
  }
  std::vector<fb::GroupKey> out;
  out.reserve(doc.rows.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    if (doc.rows[r].size() != doc.header.size()) throw fb::ParseError("ragged row in " + path, r);
    std::uint32_t bits = 0;
    for (std::size_t c = 0; c < doc.header.size(); ++c) {
      const auto v = fb::trim(doc.rows[r][c]);
      if (v != "0" && v != "1") throw fb::ParseError("expected 0 or 1 in " + path, r);
      if (v == "1") bits |= 1U << c;
    }
    out.emplace_back(bits, doc.header.size());
  }
  return out;
}

fb::stats::Direction direction_for(const std::string& metric, const std::string& flag) {
  if (flag == "lower") return fb::stats::Direction::lower_is_better;
  if (flag == "higher") return fb::stats::Direction::higher_is_better;
  try {
    return fb::bench::direction(fb::bench::parse_metric(metric));
  } catch (const fb::ConfigError&) {
    return fb::stats::Direction::lower_is_better;
  }
}

std::string format_rate(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness preprocessing benchmark"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path, format = "text", observations_path;
  unsigned threads = 0;
  run->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--format", format, "text, csv or markdown");
  run->add_option("--observations", observations_path, "Write raw observations to this CSV");
  run->add_option("--threads", threads, "Worker threads (overrides the config)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic hiring dataset");
  fb::synth::SynthConfig synth_config;
  std::string synth_out;
  synth->add_option("--l", synth_config.l, "Work-experience gap imposed on women");
  synth->add_option("--r", synth_config.r, "Share of men");
  synth->add_option("--n", synth_config.n, "Rows");
  synth->add_option("--seed", synth_config.seed, "Seed");
  synth->add_option("--out", synth_out, "Output CSV (stdout if omitted)");

  auto* rank = app.add_subcommand("rank", "Rank treatments from an observations CSV");
  std::string rank_in, rank_direction = "auto";
  rank->add_option("--in", rank_in, "CSV with treatment,value (and optional metric) columns")
      ->required()
      ->check(CLI::ExistingFile);
  rank->add_option("--direction", rank_direction, "lower, higher or auto (by metric name)")
      ->check(CLI::IsMember({"lower", "higher", "auto"}));

  auto* audit = app.add_subcommand("audit", "Fairness metrics of fixed predictions");
  std::string truth_path, pred_path, groups_path;
  std::optional<int> minority;
  audit->add_option("--truth", truth_path, "CSV, one 0/1 column")->required()->check(CLI::ExistingFile);
  audit->add_option("--pred", pred_path, "CSV, one 0/1 column")->required()->check(CLI::ExistingFile);
  audit->add_option("--groups", groups_path, "CSV, one 0/1 column per attribute (1 = privileged)")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--minority", minority, "Positive class for F1 (default: rarer label)")
      ->check(CLI::IsMember({0, 1}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      auto config = fb::bench::ExperimentConfig::from_file(config_path);
      if (threads > 0) config.threads = threads;
      const auto report_format = fb::bench::parse_report_format(format);
      const auto table = fb::bench::run_experiment(config);
      std::cout << fb::bench::report(table, report_format);
      if (!observations_path.empty()) {
        std::ofstream out(observations_path);
        if (!out) throw fb::ConfigError("cannot write " + observations_path);
        fb::bench::write_observations(out, table);
      }
    } else if (*synth) {
      const auto generated = fb::synth::generate_table(synth_config);
      if (synth_out.empty()) {
        fb::synth::write_csv(std::cout, generated.table);
      } else {
        std::ofstream out(synth_out);
        if (!out) throw fb::ConfigError("cannot write " + synth_out);
        fb::synth::write_csv(out, generated.table);
      }
    } else if (*rank) {
      const auto samples = fb::bench::read_observations(fb::csv::read(rank_in));
      fb::csv::write_record(std::cout, {"metric", "treatment", "rank", "median", "iqr"});
      for (const auto& [metric, list] : samples) {
        const auto ranks = fb::stats::rank_treatments(list, direction_for(metric, rank_direction));
        for (const auto& s : list) {
          char med[32], spread[32];
          std::snprintf(med, sizeof med, "%.6g", fb::stats::median(s.values));
          std::snprintf(spread, sizeof spread, "%.6g", fb::stats::iqr(s.values));
          fb::csv::write_record(std::cout, {metric, s.name, std::to_string(ranks.at(s.name)), med, spread});
        }
      }
    } else if (*audit) {
      const auto truth = read_binary_column(truth_path);
      const auto pred = read_binary_column(pred_path);
      const auto groups = read_groups(groups_path);
      const auto result = fb::bench::audit(truth, pred, groups, minority);
      std::cout << "minority_class: " << result.minority << '\n';
      for (const auto& [name, value] : result.metrics) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", value);
        std::cout << name << ": " << buf << '\n';
      }
      for (const auto& [key, g] : result.groups) {
        std::cout << "group " << key.to_string() << " n=" << g.count << " tpr=" << format_rate(g.rates.tpr)
                  << " fpr=" << format_rate(g.rates.fpr) << '\n';
      }
    }
  } catch (const fb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
