#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <vector>

#include "fairbalance/error.hpp"
#include "fairbalance/stats.hpp"

using namespace fairbalance;
using namespace fairbalance::stats;

namespace {

// Two-sided exact p by visiting every assignment of |x| pooled values to x.
double brute_force_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::size_t n = pooled.size(), m = x.size();
  auto u_of = [&](unsigned mask) {
    double u = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1U)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask >> j & 1U) continue;
        u += pooled[i] > pooled[j] ? 1.0 : pooled[i] == pooled[j] ? 0.5 : 0.0;
      }
    }
    return u;
  };
  const double mean = static_cast<double>(m * (n - m)) / 2.0;
  const double observed = std::abs(u_of((1U << m) - 1U) - mean);
  double extreme = 0, all = 0;
  for (unsigned mask = 0; mask < (1U << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != m) continue;
    all += 1;
    if (std::abs(u_of(mask) - mean) >= observed - 1e-9) extreme += 1;
  }
  return extreme / all;
}

double brute_force_delta(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (double a : x) {
    for (double b : y) s += (a > b) - (a < b);
  }
  return s / static_cast<double>(x.size() * y.size());
}

std::vector<double> draws(boost::random::mt19937_64& rng, std::size_t n, int levels) {
  boost::random::uniform_int_distribution<int> v(0, levels - 1);
  std::vector<double> out(n);
  for (auto& x : out) x = v(rng);
  return out;
}

}  // namespace

TEST_CASE("summary statistics") {
  const std::vector<double> v{4, 1, 3, 2};
  CHECK(median(v) == 2.5);
  CHECK(percentile(v, 0.25) == doctest::Approx(1.75));
  CHECK(percentile(v, 0.75) == doctest::Approx(3.25));
  CHECK(iqr(v) == doctest::Approx(1.5));
  const std::vector<double> one{7};
  CHECK(median(one) == 7);
  CHECK(iqr(one) == 0);
}

TEST_CASE("Mann-Whitney exact") {
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  const auto r = mann_whitney(x, y);
  CHECK(r.exact);
  CHECK(r.u == 0);
  CHECK(r.p_value == doctest::Approx(0.1));
  CHECK(brute_force_p(x, y) == doctest::Approx(0.1));
  CHECK(mann_whitney_u(x, x) == 1.0);

  const std::vector<double> same(5, 2.0);
  CHECK(mann_whitney_u(same, same) == 1.0);
}

TEST_CASE("exact path agrees with enumeration, ties included") {
  boost::random::mt19937_64 rng(21);
  MannWhitneyOptions exact{MwuMethod::exact, 12};
  for (int trial = 0; trial < 60; ++trial) {
    const auto m = static_cast<std::size_t>(1 + trial % 6);
    const auto n = static_cast<std::size_t>(1 + (trial / 6) % 6);
    const auto x = draws(rng, m, 5), y = draws(rng, n, 5);
    CHECK(mann_whitney(x, y, exact).p_value == doctest::Approx(brute_force_p(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("forced exact on 10 vs 10") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) x.push_back(i), y.push_back(i + 3.5);
  const auto r = mann_whitney(x, y, {MwuMethod::exact, 12});
  CHECK(r.exact);
  CHECK(r.p_value == doctest::Approx(brute_force_p(x, y)).epsilon(1e-12));
  const auto a = mann_whitney(x, y, {MwuMethod::asymptotic, 12});
  CHECK_FALSE(a.exact);
  CHECK(std::abs(r.p_value - a.p_value) < 0.01);
  CHECK_THROWS_AS((void)mann_whitney(std::vector<double>(30, 1.0), std::vector<double>(30, 2.0), {MwuMethod::exact, 12}),
                  ArgumentError);
}

TEST_CASE("asymptotic path") {
  boost::random::mt19937_64 rng(4);
  boost::random::normal_distribution<double> normal;
  std::vector<double> x(50), y(50);
  for (auto& v : x) v = normal(rng);
  for (auto& v : y) v = normal(rng) + 1.0;
  const auto r = mann_whitney(x, y);
  CHECK_FALSE(r.exact);
  CHECK(r.p_value < 1e-4);
  CHECK(mann_whitney_u(x, y) == doctest::Approx(mann_whitney_u(y, x)));
}

TEST_CASE("Cliff's delta") {
  CHECK(cliffs_delta(std::vector<double>{3, 4}, std::vector<double>{1, 2}) == 1.0);
  CHECK(cliffs_delta(std::vector<double>{1, 3}, std::vector<double>{2, 4}) == -0.5);
  const std::vector<double> x{1, 2, 2, 5};
  CHECK(cliffs_delta(x, x) == 0.0);

  boost::random::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = draws(rng, 1 + trial % 9, 6), b = draws(rng, 1 + trial % 7, 6);
    const double d = cliffs_delta(a, b);
    CHECK(d == brute_force_delta(a, b));
    CHECK(cliffs_delta(b, a) == -d);
    CHECK(std::abs(d) <= 1.0);
  }
}

TEST_CASE("ranking follows the step-by-step trace") {
  // Sorted by median: T1 (3.5), T2 (9.5), T3 (10.5).
  // T2 vs base T1: p = 2/924, delta = 1 -> new rank 1, base T2.
  // T3 vs base T2: delta = 11/36 < 0.33 -> stays at rank 1.
  const std::vector<NamedSamples> s{{"T3", {8, 9, 10, 11, 12, 13}},
                                    {"T1", {1, 2, 3, 4, 5, 6}},
                                    {"T2", {7, 8, 9, 10, 11, 12}}};
  const auto r = rank_treatments(s, Direction::lower_is_better);
  CHECK(r.at("T1") == 0);
  CHECK(r.at("T2") == 1);
  CHECK(r.at("T3") == 1);

  // Higher is better reverses the order.
  const auto h = rank_treatments(s, Direction::higher_is_better);
  CHECK(h.at("T3") == 0);
  CHECK(h.at("T2") == 0);
  CHECK(h.at("T1") == 1);
}

TEST_CASE("separated and shared distributions") {
  boost::random::mt19937_64 rng(2);
  boost::random::normal_distribution<double> noise(0.0, 0.01);
  std::vector<NamedSamples> s{{"A", {}}, {"B", {}}, {"C", {}}};
  for (int i = 0; i < 30; ++i) {
    s[0].values.push_back(0.1 + noise(rng));
    s[1].values.push_back(0.1 + noise(rng));
    s[2].values.push_back(0.5 + noise(rng));
  }
  const auto r = rank_treatments(s, Direction::lower_is_better);
  CHECK(r.at("A") == 0);
  CHECK(r.at("B") == 0);
  CHECK(r.at("C") == 1);

  std::vector<NamedSamples> same{{"x", {}}, {"y", {}}, {"z", {}}};
  for (int i = 0; i < 30; ++i) {
    for (auto& t : same) t.values.push_back(noise(rng));
  }
  for (const auto& [name, rank] : rank_treatments(same, Direction::lower_is_better)) CHECK(rank == 0);
}

TEST_CASE("ranking input errors") {
  const std::vector<NamedSamples> dup{{"a", {1, 2}}, {"a", {3, 4}}};
  CHECK_THROWS_AS((void)rank_treatments(dup, Direction::lower_is_better), ArgumentError);
  const std::vector<NamedSamples> short_sample{{"a", {1}}, {"b", {3, 4}}};
  CHECK_THROWS_AS((void)rank_treatments(short_sample, Direction::lower_is_better), ArgumentError);
}
