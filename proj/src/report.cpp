#include "hdb/report.hpp"

#include <fstream>

#include "hdb/errors.hpp"

namespace hdb {

nlohmann::json to_json(const EngineParams& params) {
  return {
      {"max_block_size", params.max_block_size},
      {"max_keys", params.max_keys},
      {"max_similarity", params.max_similarity},
      {"max_iterations", params.max_iterations},
      {"bloom_target_fpr", params.bloom_target_fpr},
      {"cms_width", params.cms_width},
      {"cms_depth", params.cms_depth},
      {"seed", params.seed},
  };
}

namespace {

const char* kind_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Identity: return "identity";
    case StrategyKind::Token: return "token";
    case StrategyKind::Lsh: return "lsh";
  }
  return "?";
}

const char* tokenizer_name(TokenizerKind kind) {
  switch (kind) {
    case TokenizerKind::Word: return "word";
    case TokenizerKind::WordNgram: return "word-ngram";
    case TokenizerKind::CharQgram: return "char-qgram";
  }
  return "?";
}

}  // namespace

nlohmann::json to_json(const BlockingConfig& config) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const ColumnStrategy& s : config.strategies) {
    nlohmann::json j = {{"kind", kind_name(s.kind)}};
    if (s.kind != StrategyKind::Token) j["column"] = s.column;
    if (s.kind != StrategyKind::Identity) {
      j["tokenizer"] = tokenizer_name(s.tokenizer.kind);
      if (s.tokenizer.kind != TokenizerKind::Word) j["gram"] = s.tokenizer.n;
    }
    if (s.kind == StrategyKind::Lsh) {
      j["bands"] = s.lsh_bands;
      j["band_width"] = s.lsh_band_width;
    }
    strategies.push_back(std::move(j));
  }
  return {{"seed", config.seed}, {"strategies", std::move(strategies)}};
}

nlohmann::json to_json(const IterationStats& it) {
  return {
      {"iteration", it.iteration},
      {"records_in", it.intersect.records_in},
      {"records_dropped_max_keys", it.intersect.records_dropped_max_keys},
      {"child_assignments", it.intersect.child_assignments_out},
      {"candidate_assignments", it.rough.assignments_in},
      {"right_assignments", it.rough.right_assignments},
      {"possibly_oversized_assignments", it.rough.oversized_assignments},
      {"similarity_discarded_assignments", it.rough.discarded_assignments},
      {"distinct_keys_counted", it.exact.distinct_keys},
      {"truly_oversized_keys", it.exact.truly_oversized_keys},
      {"duplicate_keys_dropped", it.exact.duplicate_keys_dropped},
      {"surviving_oversized_keys", it.exact.surviving_oversized_keys},
      {"corrected_right_assignments", it.exact.corrected_right_assignments},
      {"oversized_assignments_out", it.exact.oversized_assignments_out},
      {"duplicate_assignments_dropped", it.exact.duplicate_assignments_dropped},
  };
}

nlohmann::json to_json(const EngineStats& stats) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const IterationStats& it : stats.iterations) iterations.push_back(to_json(it));
  return {
      {"iterations", std::move(iterations)},
      {"iteration_cap_hit", stats.iteration_cap_hit},
      {"cap_dropped_keys", stats.cap_dropped_keys},
      {"singleton_keys_dropped", stats.singleton_keys_dropped},
      {"final_blocks", stats.final_blocks},
      {"final_assignments", stats.final_assignments},
      {"records_with_keys", stats.records_with_keys},
  };
}

nlohmann::json to_json(const PairStats& stats) {
  return {
      {"blocks_materialized", stats.blocks_materialized},
      {"raw_pairs", stats.raw_pairs},
      {"distinct_pairs", stats.distinct_pairs},
      {"blocks_emitted", stats.blocks_emitted},
      {"blocks_with_bitmap", stats.blocks_with_bitmap},
  };
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write report: " + path);
  out << doc.dump(2) << "\n";
  out.flush();
  if (!out) throw DataError("error while writing report: " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open report: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DataError("malformed JSON in " + path);
  return doc;
}

}  // namespace hdb
