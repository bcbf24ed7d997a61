#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fairbalance/dataset.hpp"

namespace fairbalance::synth {

/// Hiring scenario: r is the share of men (sex = 1), l the work-experience
/// gap imposed on women.
struct SynthConfig {
  std::size_t n = 5000;
  double r = 0.5;
  double l = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// (l=0, r=0.5), (l=6, r=0.5), (l=6, r=0.95), each with n = 5000.
[[nodiscard]] std::vector<SynthConfig> presets();

struct SynthTable {
  Table table;
  /// Rows whose Poisson rate was non-positive and got clamped to 1e-6.
  std::size_t clamped_rates = 0;
};

/// Per row:
///
///   sex       ~ Bernoulli(r)
///   age       ~ Normal(25, 3)
///   hair      ~ 35 * Beta(2, 2 + 5 sex)
///   work_exp  ~ Poisson(age + 6 - l (1 - sex)) - Normal(20, 0.2)
///   y         ~ Bernoulli(1 / (1 + exp(25.5 - 2.5 work_exp)))
///
/// Numeric columns age, hair_length, work_exp; indicator column sex; groups
/// from (sex == 1, age > 25). Each attribute draws from its own
/// mt19937_64 stream seeded with derive_seed(seed, stream), so adding an
/// attribute never shifts the draws of another.
[[nodiscard]] SynthTable generate_table(const SynthConfig& config);

/// Unstandardized features {age, hair_length, work_exp, sex}.
[[nodiscard]] Dataset generate(const SynthConfig& config);

/// Header `sex,age,hair_length,work_exp,y`, full precision.
void write_csv(std::ostream& out, const Table& table);

/// Schema that loads write_csv output back into the same table layout.
[[nodiscard]] DatasetSchema schema();

}  // namespace fairbalance::synth
