#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "hdb/blocking.hpp"
#include "hdb/errors.hpp"
#include "support/synth.hpp"

using namespace hdb;

namespace {

RecordTable tiny_table() {
  RecordTable t;
  t.columns = {"name", "city", "notes"};
  auto row = [&](RecordId rid, std::string name, std::string city, std::string notes) {
    size_t r = t.add_row(rid);
    if (!name.empty()) t.cells[r][0].push_back(std::move(name));
    if (!city.empty()) t.cells[r][1].push_back(std::move(city));
    if (!notes.empty()) t.cells[r][2].push_back(std::move(notes));
  };
  row(0, "Ann Smith", "Berlin", "foo bar");
  row(1, "ann  SMITH", "berlin", "bar");
  row(2, "Bob Jones", "Paris", "");
  row(3, "", "PARIS", "foo");
  return t;
}

}  // namespace

TEST_CASE("config parsing accepts the documented schema") {
  BlockingConfig c = parse_blocking_config(R"({
    "seed": 7,
    "strategies": [
      {"column": "year", "kind": "identity"},
      {"kind": "token", "tokenizer": "word"},
      {"column": "title", "kind": "lsh", "bands": 6, "band_width": 7,
       "tokenizer": "char-qgram", "gram": 3}
    ]})");
  CHECK(c.seed == 7);
  REQUIRE(c.strategies.size() == 3);
  CHECK(c.strategies[0].kind == StrategyKind::Identity);
  CHECK(c.strategies[0].column == "year");
  CHECK(c.strategies[1].kind == StrategyKind::Token);
  CHECK(c.strategies[1].tokenizer.kind == TokenizerKind::Word);
  CHECK(c.strategies[2].kind == StrategyKind::Lsh);
  CHECK(c.strategies[2].lsh_bands == 6);
  CHECK(c.strategies[2].lsh_band_width == 7);
  CHECK(c.strategies[2].tokenizer.kind == TokenizerKind::CharQgram);
  CHECK(c.strategies[2].tokenizer.n == 3);
}

TEST_CASE("config parsing rejects junk") {
  CHECK_THROWS_AS(parse_blocking_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_blocking_config(R"(["strategies"])"), ConfigError);
  CHECK_THROWS_AS(parse_blocking_config(R"({"seed": 1})"), ConfigError);
  CHECK_THROWS_AS(
      parse_blocking_config(R"({"strategies": [{"column": "x", "kind": "wat"}]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_blocking_config(
          R"({"strategies": [{"column": "x", "kind": "identity", "tokenizer": "wat"}]})"),
      ConfigError);
  CHECK_THROWS_AS(parse_blocking_config(R"({"strategies": [{"column": "x"}]})"),
                  ConfigError);  // kind is mandatory
  CHECK_THROWS_AS(
      parse_blocking_config(
          R"({"strategies": [{"kind": "token", "tokenizer": "char-qgram", "gram": 0}]})"),
      ConfigError);
}

TEST_CASE("config validation resolves columns and rejects duplicates") {
  std::vector<std::string> columns{"name", "city"};
  BlockingConfig ok = parse_blocking_config(
      R"({"strategies": [{"column": "name", "kind": "identity"},
                         {"column": "city", "kind": "identity"}]})");
  validate_blocking_config(ok, columns);

  BlockingConfig missing = parse_blocking_config(
      R"({"strategies": [{"column": "nope", "kind": "identity"}]})");
  try {
    validate_blocking_config(missing, columns);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    // The message names the available columns to make typos findable.
    CHECK(std::string(e.what()).find("name") != std::string::npos);
  }

  BlockingConfig dup = parse_blocking_config(
      R"({"strategies": [{"column": "name", "kind": "identity"},
                         {"column": "name", "kind": "identity"}]})");
  CHECK_THROWS_AS(validate_blocking_config(dup, columns), ConfigError);

  BlockingConfig two_token = parse_blocking_config(
      R"({"strategies": [{"kind": "token"}, {"kind": "token"}]})");
  CHECK_THROWS_AS(validate_blocking_config(two_token, columns), ConfigError);

  BlockingConfig empty = parse_blocking_config(R"({"strategies": []})");
  CHECK_THROWS_AS(validate_blocking_config(empty, columns), ConfigError);

  BlockingConfig no_column = parse_blocking_config(R"({"strategies": [{"kind": "identity"}]})");
  CHECK_THROWS_AS(validate_blocking_config(no_column, columns), ConfigError);

  BlockingConfig zero_bands = parse_blocking_config(
      R"({"strategies": [{"column": "name", "kind": "lsh", "bands": 0, "band_width": 4}]})");
  CHECK_THROWS_AS(validate_blocking_config(zero_bands, columns), ConfigError);
}

TEST_CASE("identity keys normalize and deduplicate") {
  std::vector<std::string> values{"Ann  SMITH", "ann smith", "", "  "};
  auto keys = identity_keys("name", values);
  REQUIRE(keys.size() == 1);  // both spellings normalize to one value
  CHECK(keys[0] == hash_key("name", "ann smith"));

  // Same value in another column produces a different key.
  CHECK(identity_keys("city", values)[0] != keys[0]);

  CHECK(identity_keys("name", std::vector<std::string>{}).empty());
  CHECK(identity_keys("name", std::vector<std::string>{"", " "}).empty());

  std::vector<std::string> multi{"x", "y"};
  auto two = identity_keys("name", multi);
  CHECK(two.size() == 2);
  CHECK(std::is_sorted(two.begin(), two.end()));
}

TEST_CASE("token keys span all columns without an attribute id") {
  std::vector<std::vector<std::string>> cells{{"foo bar"}, {"bar"}, {}};
  auto keys = token_keys(cells, Tokenizer{TokenizerKind::Word, 1});
  REQUIRE(keys.size() == 2);  // {"foo", "bar"}, "bar" deduped across columns
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  CHECK(std::count(keys.begin(), keys.end(), token_key("foo")) == 1);
  CHECK(std::count(keys.begin(), keys.end(), token_key("bar")) == 1);

  std::vector<std::vector<std::string>> empty_cells{{}, {}};
  CHECK(token_keys(empty_cells, Tokenizer{TokenizerKind::Word, 1}).empty());
}

TEST_CASE("column tokens dedupe across values in first-seen order") {
  std::vector<std::string> values{"foo Bar", "bar baz", "FOO qux"};
  std::vector<std::string> want{"foo", "bar", "baz", "qux"};
  CHECK(column_tokens(values, Tokenizer{TokenizerKind::Word, 1}) == want);

  // Many values, heavy overlap: the output must stay duplicate-free while
  // its backing vector grows.
  std::vector<std::string> many;
  std::vector<std::string> expect;
  for (int v = 0; v < 40; v++) {
    std::string line;
    for (int t = 0; t < 8; t++) {
      int id = (v * 3 + t * 5) % 60;
      std::string tok = "tok" + std::to_string(id);
      if (std::find(expect.begin(), expect.end(), tok) == expect.end()) {
        expect.push_back(tok);
      }
      if (t) line += ' ';
      line += tok;
    }
    many.push_back(std::move(line));
  }
  CHECK(column_tokens(many, Tokenizer{TokenizerKind::Word, 1}) == expect);
}

TEST_CASE("lsh keys band the minhash signature per column") {
  ColumnStrategy strat;
  strat.column = "title";
  strat.kind = StrategyKind::Lsh;
  strat.lsh_bands = 4;
  strat.lsh_band_width = 3;

  std::vector<std::string> tokens{"deep", "learning", "for", "ducks"};
  auto keys = lsh_keys(tokens, strat, 42);
  CHECK(keys.size() == 4);
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  CHECK(lsh_keys(tokens, strat, 42) == keys);  // deterministic
  CHECK(lsh_keys(tokens, strat, 43) != keys);  // seed matters

  // Same tokens under another column never collide.
  ColumnStrategy other = strat;
  other.column = "authors";
  auto other_keys = lsh_keys(tokens, other, 42);
  for (const Hash128& k : other_keys) {
    CHECK(std::find(keys.begin(), keys.end(), k) == keys.end());
  }

  CHECK(lsh_keys(std::vector<std::string>{}, strat, 42).empty());
}

TEST_CASE("lsh probability closed form") {
  for (double j : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    CHECK(lsh_probability(1, 1, j) == doctest::Approx(j));
  }
  CHECK(lsh_probability(14, 4, 0.0) == 0.0);
  CHECK(lsh_probability(14, 4, 1.0) == 1.0);
  CHECK(lsh_probability(14, 4, 0.8) == doctest::Approx(0.99937).epsilon(1e-4));
  CHECK(lsh_probability(3, 8, 0.9) == doctest::Approx(0.8153).epsilon(1e-3));
  CHECK(lsh_probability(14, 4, 0.3) == doctest::Approx(0.1076).epsilon(1e-3));

  // Monotone nondecreasing in j on a fine grid.
  double prev = -1.0;
  for (int i = 0; i <= 100; i++) {
    double p = lsh_probability(6, 7, 0.01 * i);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("monte-carlo band sharing tracks the closed form") {
  double mc = lsh_band_share_rate(14, 4, 0.8, 4000, 42);
  CHECK(std::abs(mc - lsh_probability(14, 4, 0.8)) <= 0.03);
  double mc2 = lsh_band_share_rate(3, 8, 0.5, 4000, 42);
  CHECK(std::abs(mc2 - lsh_probability(3, 8, 0.5)) <= 0.03);
  CHECK(lsh_band_share_rate(6, 7, 1.0, 500, 1) == 1.0);
  CHECK(lsh_band_share_rate(6, 7, 0.0, 500, 1) <= 0.01);
  // Deterministic in the seed.
  CHECK(lsh_band_share_rate(3, 8, 0.5, 2000, 9) == lsh_band_share_rate(3, 8, 0.5, 2000, 9));
}

TEST_CASE("build_index unions strategies per record") {
  RecordTable t = tiny_table();
  BlockingConfig config = parse_blocking_config(
      R"({"strategies": [{"column": "name", "kind": "identity"},
                         {"column": "city", "kind": "identity"},
                         {"kind": "token"}]})");
  auto index = build_index(t, config);
  REQUIRE(index.size() == 4);  // one KeyedRecord per record, even empty ones

  // Record 0: name key, city key, tokens {ann, smith, berlin, foo, bar}.
  CHECK(index[0].rid == 0);
  CHECK(index[0].keys.size() == 7);
  // Records 0 and 1 share the normalized name and city keys.
  Hash128 name_key = hash_key("name", "ann smith");
  auto has = [](const KeyedRecord& r, const Hash128& k) {
    return std::any_of(r.keys.begin(), r.keys.end(),
                       [&](const AnnotatedKey& a) { return a.key == k; });
  };
  CHECK(has(index[0], name_key));
  CHECK(has(index[1], name_key));
  CHECK(has(index[2], hash_key("city", "paris")));
  CHECK(has(index[3], hash_key("city", "paris")));
  // The word "foo" has one token key regardless of source column.
  CHECK(has(index[0], token_key("foo")));
  CHECK(has(index[3], token_key("foo")));

  for (const KeyedRecord& rec : index) {
    CHECK(std::is_sorted(rec.keys.begin(), rec.keys.end(),
                         [](const AnnotatedKey& a, const AnnotatedKey& b) {
                           return a.key < b.key;
                         }));
    for (const AnnotatedKey& k : rec.keys) {
      CHECK(k.size == 0);
      CHECK(k.psize == kNoParent);
    }
  }
}

TEST_CASE("build_index is independent of partition count") {
  testing::TableProfile p;
  p.records = 3000;
  p.city_repeat = 100;
  p.state_repeat = 500;
  RecordTable t = testing::synth_table(p, 5);
  BlockingConfig config = parse_blocking_config(
      R"({"strategies": [{"column": "name", "kind": "identity"},
                         {"column": "city", "kind": "identity"},
                         {"column": "title", "kind": "lsh", "bands": 3, "band_width": 4},
                         {"kind": "token"}]})");
  auto one = build_index(t, config, 1);
  auto four = build_index(t, config, 4);
  auto many = build_index(t, config, 16);
  REQUIRE(one.size() == four.size());
  REQUIRE(one.size() == many.size());
  for (size_t i = 0; i < one.size(); i++) {
    CHECK(one[i].rid == four[i].rid);
    CHECK(one[i].keys.size() == four[i].keys.size());
    for (size_t k = 0; k < one[i].keys.size(); k++) {
      CHECK(one[i].keys[k].key == four[i].keys[k].key);
      CHECK(one[i].keys[k].key == many[i].keys[k].key);
    }
  }
}

TEST_CASE("build_index validates the config against the table") {
  RecordTable t = tiny_table();
  BlockingConfig bad = parse_blocking_config(
      R"({"strategies": [{"column": "year", "kind": "identity"}]})");
  CHECK_THROWS_AS(build_index(t, bad), ConfigError);
}
