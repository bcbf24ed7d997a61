#include "fairbalance/synth.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <charconv>
#include <cmath>
#include <ostream>

#include "fairbalance/error.hpp"
#include "fairbalance/seed.hpp"

namespace fairbalance::synth {

namespace {

enum Stream : std::uint64_t { sex_stream, age_stream, hair_stream, poisson_stream, offset_stream, label_stream };

boost::random::mt19937_64 engine(std::uint64_t seed, Stream stream) {
  return boost::random::mt19937_64(derive_seed(seed, stream));
}

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

void SynthConfig::validate() const {
  if (n < 1) throw ArgumentError("synthetic n must be >= 1");
  if (!(r >= 0.0 && r <= 1.0)) throw ArgumentError("synthetic r must lie in [0, 1]");
  if (!(l >= 0.0) || !std::isfinite(l)) throw ArgumentError("synthetic l must be >= 0");
}

std::vector<SynthConfig> presets() {
  return {{5000, 0.5, 0.0, 0}, {5000, 0.5, 6.0, 0}, {5000, 0.95, 6.0, 0}};
}

SynthTable generate_table(const SynthConfig& config) {
  config.validate();
  const auto n = static_cast<Index>(config.n);

  auto sex_rng = engine(config.seed, sex_stream);
  auto age_rng = engine(config.seed, age_stream);
  auto hair_rng = engine(config.seed, hair_stream);
  auto poisson_rng = engine(config.seed, poisson_stream);
  auto offset_rng = engine(config.seed, offset_stream);
  auto label_rng = engine(config.seed, label_stream);

  boost::random::bernoulli_distribution<double> sex_dist(config.r);
  boost::random::normal_distribution<double> age_dist(25.0, 3.0);
  boost::random::beta_distribution<double> hair_female(2.0, 2.0);
  boost::random::beta_distribution<double> hair_male(2.0, 7.0);
  boost::random::normal_distribution<double> offset_dist(20.0, 0.2);

  SynthTable out;
  Table& t = out.table;
  t.numeric_names = {"age", "hair_length", "work_exp"};
  t.numeric.resize(n, 3);
  t.indicator_names = {"sex"};
  t.indicators.resize(n, 1);
  t.sensitive_names = {"sex == 1", "age > 25"};
  t.labels.resize(n);
  t.groups.reserve(config.n);

  for (Index i = 0; i < n; ++i) {
    const int sex = sex_dist(sex_rng) ? 1 : 0;
    const double age = age_dist(age_rng);
    const double hair = 35.0 * (sex ? hair_male(hair_rng) : hair_female(hair_rng));

    double rate = age + 6.0 - config.l * (1 - sex);
    if (!(rate > 0.0)) {
      rate = 1e-6;
      ++out.clamped_rates;
    }
    boost::random::poisson_distribution<long, double> poisson(rate);
    const double work_exp = static_cast<double>(poisson(poisson_rng)) - offset_dist(offset_rng);

    const double p = 1.0 / (1.0 + std::exp(25.5 - 2.5 * work_exp));
    boost::random::bernoulli_distribution<double> label(p);

    t.numeric(i, 0) = age;
    t.numeric(i, 1) = hair;
    t.numeric(i, 2) = work_exp;
    t.indicators(i, 0) = sex;
    t.labels(i) = label(label_rng) ? 1 : 0;
    const bool flags[] = {sex == 1, age > 25.0};
    t.groups.push_back(GroupKey::from_flags(flags));
  }
  return out;
}

Dataset generate(const SynthConfig& config) {
  const auto generated = generate_table(config);
  const auto rows = generated.table.all_rows();
  return encode(generated.table, rows, Encoder::fit(generated.table, rows, {.standardize = false}));
}

void write_csv(std::ostream& out, const Table& t) {
  out << "sex,age,hair_length,work_exp,y\n";
  for (Index i = 0; i < t.rows(); ++i) {
    out << static_cast<int>(t.indicators(i, 0)) << ',' << shortest(t.numeric(i, 0)) << ','
        << shortest(t.numeric(i, 1)) << ',' << shortest(t.numeric(i, 2)) << ',' << t.labels(i) << '\n';
  }
}

DatasetSchema schema() {
  return DatasetSchema::parse(
      "label = y\n"
      "favorable = 1\n"
      "sensitive = sex == 1\n"
      "sensitive = age > 25\n"
      "numeric = age, hair_length, work_exp\n"
      "sensitive_as_features = sex\n");
}

}  // namespace fairbalance::synth
