#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fairbalance/csv.hpp"
#include "fairbalance/error.hpp"
#include "fairbalance/dataset.hpp"
#include "fairbalance/seed.hpp"

using namespace fairbalance;

namespace {

Table table_of(std::string_view csv_text, std::string_view schema_text) {
  return make_table(csv::parse(csv_text), DatasetSchema::parse(schema_text));
}

constexpr std::string_view kPeople =
    "name,age,color,sex,hired\n"
    "a,30,red,M,yes\n"
    "b,22,blue,F,no\n"
    "c,41,red,F,yes\n"
    "d,35,?,M,no\n";

constexpr std::string_view kPeopleSchema =
    "label = hired\n"
    "favorable = yes\n"
    "sensitive = sex == M\n"
    "sensitive = age > 25\n"
    "numeric = age\n"
    "categorical = color\n"
    "sensitive_as_features = false\n";

}  // namespace

TEST_CASE("csv parsing") {
  const auto doc = csv::parse("\xEF\xBB\xBFh1,h2\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n\r\n\"multi\nline\",x\n");
  REQUIRE(doc.header == csv::Record{"h1", "h2"});
  REQUIRE(doc.rows.size() == 2);
  CHECK(doc.rows[0][0] == "a,b");
  CHECK(doc.rows[0][1] == "say \"hi\"");
  CHECK(doc.rows[1][0] == "multi\nline");
  CHECK(doc.column("h2") == 1);
  CHECK_FALSE(doc.column("h3").has_value());
  CHECK_THROWS_AS((void)csv::parse("a\n\"open"), ParseError);

  std::ostringstream out;
  csv::write_record(out, {"plain", "with,comma", "q\"uote"});
  CHECK(out.str() == "plain,\"with,comma\",\"q\"\"uote\"\n");
  CHECK(csv::parse("x,y,z\n" + out.str()).rows[0] == csv::Record{"plain", "with,comma", "q\"uote"});
}

TEST_CASE("predicates") {
  const auto eq = Predicate::parse("sex == Male");
  CHECK(eq.column == "sex");
  CHECK(eq.evaluate("Male"));
  CHECK_FALSE(eq.evaluate("Female"));
  const auto gt = Predicate::parse("age > 25");
  CHECK(gt.evaluate("26"));
  CHECK_FALSE(gt.evaluate("25"));
  CHECK(Predicate::parse("age >= 25").evaluate("25"));
  CHECK(Predicate::parse("x != 1").evaluate("2"));
  CHECK(Predicate::parse("x == 1").evaluate("1.0"));
  CHECK_THROWS_AS((void)gt.evaluate("old", 4), ParseError);
  CHECK_THROWS_AS((void)Predicate::parse("age 25"), SchemaError);
}

TEST_CASE("labels map by row order and groups are bit keys") {
  const auto t = table_of(kPeople, kPeopleSchema);
  CHECK(t.rows() == 3);
  CHECK(t.dropped_rows == 1);
  CHECK(t.labels == Eigen::Vector3i(1, 0, 1));
  CHECK(t.groups[0] == GroupKey(3, 2));
  CHECK(t.groups[1] == GroupKey(0, 2));
  CHECK(t.groups[2] == GroupKey(2, 2));
  CHECK(t.groups[0].to_string() == "(1,1)");
  CHECK(t.indicators.cols() == 0);
}

TEST_CASE("yes/no labels") {
  const auto t = table_of("x,y,g\n1,yes,a\n2,no,a\n3,no,b\n4,yes,b\n",
                          "label = y\nfavorable = yes\nsensitive = g == a\nnumeric = x\n");
  CHECK(t.labels == Eigen::Vector4i(1, 0, 0, 1));
}

TEST_CASE("two binary attributes give four possible groups") {
  const auto t = table_of("s,r,y\nM,W,1\nM,B,0\nF,W,1\nF,B,0\nM,W,0\n",
                          "label = y\nfavorable = 1\nsensitive = s == M\nsensitive = r == W\n");
  std::set<GroupKey> keys(t.groups.begin(), t.groups.end());
  CHECK(keys.size() == 4);
  CHECK(t.indicator_names == std::vector<std::string>{"s == M", "r == W"});
}

TEST_CASE("schema and data errors") {
  CHECK_THROWS_AS((void)table_of("a,b\n1,2\n", "label = y\nfavorable = 1\nsensitive = a == 1\n"), SchemaError);
  try {
    (void)table_of("a,b\n1,2\n", "label = y\nfavorable = 1\nsensitive = a == 1\n");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
  CHECK_THROWS_AS((void)table_of("a,y\n1,?\n", "label = y\nfavorable = 1\nsensitive = a == 1\n"), EmptyDataError);
  CHECK_THROWS_AS((void)table_of("a,y\n1,0\n2,0\n", "label = y\nfavorable = 1\nsensitive = a == 1\n"),
                  LabelMappingError);
  try {
    (void)table_of("a,x,y\n1,3,1\n0,oops,0\n", "label = y\nfavorable = 1\nsensitive = a == 1\nnumeric = x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
  }
  CHECK_THROWS_AS((void)DatasetSchema::parse("label = y\nfavorable = 1\nbogus = 3\n"), SchemaError);
  CHECK_THROWS_AS((void)DatasetSchema::parse("label = y\nfavorable = 1\n").validate(), SchemaError);
}

TEST_CASE("features are inferred when none are declared") {
  const auto t = table_of("n,c,g,y,skip\n1.5,u,a,1,z\n2,v,b,0,z\n", "label = y\nfavorable = 1\nsensitive = g == a\nexclude = skip\n");
  CHECK(t.numeric_names == std::vector<std::string>{"n"});
  CHECK(t.categorical_names == std::vector<std::string>{"c"});
}

TEST_CASE("encoder") {
  const auto t = table_of("v,c,g,y\n1,red,a,1\n2,blue,b,0\n3,red,a,1\n4,green,b,0\n",
                          "label = y\nfavorable = 1\nsensitive = g == a\nnumeric = v\ncategorical = c\n");
  const std::vector<Index> train{0, 1, 2};
  const auto enc = Encoder::fit(t, train);
  CHECK(enc.feature_names() == std::vector<std::string>{"v", "c=red", "c=blue", "g == a"});
  const auto x = enc.transform(t, t.all_rows());
  CHECK(x.block(0, 0, 3, 1).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(x(0, 1) == 1);
  CHECK(x(0, 2) == 0);
  CHECK(x(1, 1) == 0);
  CHECK(x(1, 2) == 1);
  CHECK(x(2, 1) == 1);
  // Unseen category.
  CHECK(x(3, 1) == 0);
  CHECK(x(3, 2) == 0);
  CHECK(enc.decode(0, x.row(1)) == "blue");
  CHECK_FALSE(enc.decode(0, x.row(3)).has_value());
  CHECK(x.col(3) == Eigen::Vector4d(1, 0, 1, 0));

  const auto d = encode(t, train, enc);
  CHECK(d.rows() == 3);
  CHECK(d.feature_names == enc.feature_names());
  CHECK_NOTHROW(d.validate());

  const auto raw = Encoder::fit(t, train, {false}).transform(t, train);
  CHECK(raw.col(0) == Eigen::Vector3d(1, 2, 3));
}

TEST_CASE("partition sizes and determinism") {
  const auto p = partition(100, 0.5, 1);
  CHECK(p.train.size() == 50);
  CHECK(p.test.size() == 50);
  std::vector<Index> all(p.train);
  all.insert(all.end(), p.test.begin(), p.test.end());
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < 100; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
  CHECK(std::is_sorted(p.train.begin(), p.train.end()));

  const auto q = partition(100, 0.5, 1);
  CHECK(q.train == p.train);
  CHECK(partition(100, 0.5, 2).train != p.train);

  const auto seven = partition(7, 0.5, 3);
  CHECK(seven.train.size() == 4);
  CHECK(seven.test.size() == 3);

  CHECK(partition(10, 0.01, 0).train.size() == 1);
  CHECK(partition(10, 0.99, 0).test.size() == 1);
  CHECK_THROWS_AS((void)partition(10, 1.0, 0), ArgumentError);
  CHECK_THROWS_AS((void)partition(10, 0.0, 0), ArgumentError);
}

TEST_CASE("split datasets") {
  Dataset d;
  d.features = Eigen::MatrixXd(6, 1);
  d.features << 0, 1, 2, 3, 4, 5;
  d.labels = Eigen::VectorXi::LinSpaced(6, 0, 5).unaryExpr([](int v) { return v % 2; });
  d.groups.assign(6, GroupKey(1, 1));
  d.feature_names = {"x"};
  const auto [train, test] = split(d, 0.5, 9);
  CHECK(train.rows() == 3);
  CHECK(test.rows() == 3);
  for (Index i = 0; i < train.rows(); ++i) CHECK(train.labels[i] == static_cast<int>(train.features(i, 0)) % 2);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) {
    CHECK(derive_seed(s, 0) != derive_seed(s, 1));
    for (std::uint64_t k = 0; k < 100; ++k) seen.insert(derive_seed(s * 7919 + 1, k));
  }
  CHECK(seen.size() == 10000);
}
