#include "hdb/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hdb/errors.hpp"
#include "hdb/minhash.hpp"
#include "hdb/parallel.hpp"

namespace hdb {

namespace {

StrategyKind parse_kind(const std::string& s) {
  if (s == "identity") return StrategyKind::Identity;
  if (s == "token") return StrategyKind::Token;
  if (s == "lsh") return StrategyKind::Lsh;
  throw ConfigError("unknown strategy kind \"" + s + "\" (expected identity, token or lsh)");
}

Tokenizer parse_tokenizer(const nlohmann::json& strat) {
  Tokenizer tok;
  std::string name = strat.value("tokenizer", std::string("word"));
  if (name == "word") {
    tok.kind = TokenizerKind::Word;
    tok.n = 1;
  } else if (name == "word-ngram") {
    tok.kind = TokenizerKind::WordNgram;
    tok.n = strat.value("gram", 2u);
  } else if (name == "char-qgram") {
    tok.kind = TokenizerKind::CharQgram;
    tok.n = strat.value("gram", 3u);
  } else {
    throw ConfigError("unknown tokenizer \"" + name +
                      "\" (expected word, word-ngram or char-qgram)");
  }
  if (tok.n < 1) throw ConfigError("tokenizer gram size must be >= 1");
  return tok;
}

}  // namespace

BlockingConfig parse_blocking_config(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ConfigError("blocking config is not a JSON object");
  }
  BlockingConfig config;
  config.seed = doc.value("seed", uint64_t(42));
  if (!doc.contains("strategies") || !doc["strategies"].is_array()) {
    throw ConfigError("blocking config needs a \"strategies\" array");
  }
  for (const auto& s : doc["strategies"]) {
    if (!s.is_object()) throw ConfigError("each strategy must be a JSON object");
    ColumnStrategy strat;
    strat.kind = parse_kind(s.value("kind", std::string()));
    strat.column = s.value("column", std::string());
    strat.tokenizer = parse_tokenizer(s);
    if (strat.kind == StrategyKind::Lsh) {
      strat.lsh_bands = s.value("bands", 0u);
      strat.lsh_band_width = s.value("band_width", 0u);
    }
    config.strategies.push_back(std::move(strat));
  }
  return config;
}

BlockingConfig load_blocking_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open blocking config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_blocking_config(buf.str());
}

void validate_blocking_config(const BlockingConfig& config,
                              const std::vector<std::string>& columns) {
  if (config.strategies.empty()) {
    throw ConfigError("blocking config has no strategies");
  }
  auto columns_hint = [&columns] {
    std::string hint = " (available columns:";
    for (const auto& c : columns) hint += " " + c;
    return hint + ")";
  };
  std::unordered_set<std::string> seen;
  bool have_token = false;
  for (const auto& s : config.strategies) {
    switch (s.kind) {
      case StrategyKind::Token:
        if (have_token) throw ConfigError("more than one token strategy configured");
        have_token = true;
        break;
      case StrategyKind::Identity:
      case StrategyKind::Lsh: {
        if (s.column.empty()) throw ConfigError("identity/lsh strategy needs a column");
        if (std::find(columns.begin(), columns.end(), s.column) == columns.end()) {
          throw ConfigError("strategy column \"" + s.column + "\" not in input" +
                            columns_hint());
        }
        std::string tag = (s.kind == StrategyKind::Identity ? "identity:" : "lsh:") + s.column;
        if (!seen.insert(tag).second) {
          throw ConfigError("duplicate strategy for column \"" + s.column + "\"");
        }
        if (s.kind == StrategyKind::Lsh && (s.lsh_bands < 1 || s.lsh_band_width < 1)) {
          throw ConfigError("lsh strategy for \"" + s.column +
                            "\" needs bands >= 1 and band_width >= 1");
        }
        break;
      }
    }
  }
}

std::vector<Hash128> identity_keys(std::string_view column,
                                   std::span<const std::string> raw_values) {
  std::vector<Hash128> keys;
  for (const std::string& raw : raw_values) {
    std::string norm = normalize(raw);
    if (norm.empty()) continue;
    keys.push_back(hash_key(column, norm));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::vector<Hash128> token_keys(std::span<const std::vector<std::string>> record_cells,
                                const Tokenizer& tok) {
  std::unordered_set<std::string> tokens;
  for (const auto& cell : record_cells) {
    for (const std::string& raw : cell) {
      for (auto& t : tokenize(normalize(raw), tok)) tokens.insert(std::move(t));
    }
  }
  std::vector<Hash128> keys;
  keys.reserve(tokens.size());
  for (const std::string& t : tokens) keys.push_back(token_key(t));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::vector<std::string> column_tokens(std::span<const std::string> raw_values,
                                       const Tokenizer& tok) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const std::string& raw : raw_values) {
    for (auto& t : tokenize(normalize(raw), tok)) {
      if (seen.insert(t).second) out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<Hash128> lsh_keys(std::span<const std::string> tokens,
                              const ColumnStrategy& strategy, uint64_t seed) {
  std::vector<Hash128> keys;
  if (tokens.empty()) return keys;
  const uint32_t b = strategy.lsh_bands;
  const uint32_t w = strategy.lsh_band_width;
  std::vector<uint64_t> sig = minhash_signature(tokens, b * w, seed);
  keys.reserve(b);
  for (uint32_t band = 0; band < b; band++) {
    Hash128 digest =
        murmur3_x64_128(sig.data() + size_t(band) * w, size_t(w) * sizeof(uint64_t),
                        kBandDigestSeed);
    std::string attribute = strategy.column;
    attribute.push_back(kFieldSep);
    attribute += std::to_string(band);
    keys.push_back(hash_key(attribute, to_hex(digest)));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

double lsh_probability(uint32_t bands, uint32_t band_width, double jaccard) {
  if (jaccard <= 0.0) return 0.0;
  if (jaccard >= 1.0) return 1.0;
  double band_match = std::pow(jaccard, double(band_width));
  return 1.0 - std::pow(1.0 - band_match, double(bands));
}

double lsh_band_share_rate(uint32_t bands, uint32_t band_width, double jaccard,
                           uint32_t samples, uint64_t seed) {
  if (bands < 1 || band_width < 1) throw ConfigError("bands and band_width must be >= 1");
  if (!(jaccard >= 0.0 && jaccard <= 1.0)) throw ConfigError("jaccard must be in [0, 1]");
  if (samples < 1) throw ConfigError("samples must be >= 1");

  // Quantize j to an exact small fraction I/U so each sampled pair can be
  // built with intersection I and union U precisely.
  uint64_t universe = 1000;
  for (uint64_t u : {10, 20, 25, 50, 100}) {
    double scaled = jaccard * double(u);
    if (std::abs(scaled - std::round(scaled)) < 1e-9) {
      universe = u;
      break;
    }
  }
  const uint64_t common = uint64_t(std::llround(jaccard * double(universe)));
  const uint64_t only_a = (universe - common + 1) / 2;

  const uint32_t m = bands * band_width;
  std::mt19937_64 rng(mix64(seed ^ 0x5bd1e995u));
  std::vector<std::string> tokens(universe);
  std::vector<std::string> set_a, set_b;
  uint64_t shared = 0;
  for (uint32_t s = 0; s < samples; s++) {
    for (auto& t : tokens) t = std::to_string(rng());
    set_a.assign(tokens.begin(), tokens.begin() + common + only_a);
    set_b.assign(tokens.begin(), tokens.begin() + common);
    set_b.insert(set_b.end(), tokens.begin() + common + only_a, tokens.end());
    std::vector<uint64_t> sig_a = minhash_signature(set_a, m, seed);
    std::vector<uint64_t> sig_b = minhash_signature(set_b, m, seed);
    for (uint32_t band = 0; band < bands; band++) {
      if (std::equal(sig_a.begin() + size_t(band) * band_width,
                     sig_a.begin() + size_t(band + 1) * band_width,
                     sig_b.begin() + size_t(band) * band_width)) {
        shared++;
        break;
      }
    }
  }
  return double(shared) / double(samples);
}

std::vector<KeyedRecord> build_index(const RecordTable& table, const BlockingConfig& config,
                                     uint32_t partitions) {
  validate_blocking_config(config, table.columns);

  // Resolve columns once; per-record work below is pure.
  std::vector<size_t> strategy_col(config.strategies.size(), size_t(-1));
  for (size_t s = 0; s < config.strategies.size(); s++) {
    if (config.strategies[s].kind != StrategyKind::Token) {
      strategy_col[s] = *table.column_index(config.strategies[s].column);
    }
  }

  std::vector<KeyedRecord> index(table.num_records());
  for_each_partition(table.num_records(), partitions, [&](uint32_t, size_t begin, size_t end) {
    for (size_t row = begin; row < end; row++) {
      std::vector<Hash128> keys;
      for (size_t s = 0; s < config.strategies.size(); s++) {
        const ColumnStrategy& strat = config.strategies[s];
        std::vector<Hash128> part;
        switch (strat.kind) {
          case StrategyKind::Identity:
            part = identity_keys(strat.column, table.cells[row][strategy_col[s]]);
            break;
          case StrategyKind::Token:
            part = token_keys(table.cells[row], strat.tokenizer);
            break;
          case StrategyKind::Lsh: {
            std::vector<std::string> tokens =
                column_tokens(table.cells[row][strategy_col[s]], strat.tokenizer);
            part = lsh_keys(tokens, strat, config.seed);
            break;
          }
        }
        keys.insert(keys.end(), part.begin(), part.end());
      }
      std::sort(keys.begin(), keys.end());
      keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

      KeyedRecord& rec = index[row];
      rec.rid = table.rids[row];
      rec.keys.reserve(keys.size());
      for (const Hash128& k : keys) rec.keys.push_back(AnnotatedKey{k, 0, kNoParent});
    }
  });
  return index;
}

}  // namespace hdb
