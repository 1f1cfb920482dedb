#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdb/blocking.hpp"
#include "hdb/dataset.hpp"
#include "hdb/engine.hpp"
#include "hdb/errors.hpp"
#include "hdb/evaluation.hpp"
#include "hdb/pairs.hpp"
#include "hdb/parallel.hpp"
#include "hdb/report.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int64_t ms_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

struct IngestOptions {
  std::vector<std::string> inputs;
  std::string format;  // "", "csv" or "jsonl"; "" = by extension
  std::string delimiter = ",";
  std::string id_column;
};

void add_ingest_flags(CLI::App* cmd, IngestOptions& opt) {
  cmd->add_option("-i,--input", opt.inputs, "input file (repeatable)")
      ->required()
      ->type_name("FILE");
  cmd->add_option("--format", opt.format, "input format: csv or jsonl (default: by extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--delimiter", opt.delimiter, "field delimiter for csv (default ,)");
  cmd->add_option("--id-column", opt.id_column,
                  "column supplying record ids (default: 0-based input order)");
}

std::string detect_format(const IngestOptions& opt, const std::string& path) {
  if (!opt.format.empty()) return opt.format;
  std::string ext = fs::path(path).extension().string();
  if (ext == ".csv" || ext == ".tsv" || ext == ".txt") return "csv";
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return "jsonl";
  throw hdb::ConfigError("cannot infer format of \"" + path + "\"; pass --format");
}

hdb::RecordTable ingest(const IngestOptions& opt) {
  if (opt.delimiter.size() != 1) {
    throw hdb::ConfigError("--delimiter must be a single character");
  }
  for (const std::string& path : opt.inputs) {
    if (!fs::exists(path)) throw hdb::DataError("input path does not exist: " + path);
  }
  hdb::RecordTable table;
  for (const std::string& path : opt.inputs) {
    hdb::RecordTable part;
    if (detect_format(opt, path) == "csv") {
      hdb::CsvOptions copt;
      copt.delimiter = opt.delimiter[0];
      copt.id_column = opt.id_column;
      part = hdb::read_csv(path, copt);
    } else {
      hdb::JsonlOptions jopt;
      jopt.id_column = opt.id_column;
      part = hdb::read_jsonl(path, jopt);
    }
    if (opt.id_column.empty()) {
      // Ordinal ids restart per file; keep them unique across the run.
      hdb::RecordId offset = table.num_records();
      for (auto& rid : part.rids) rid += offset;
    }
    hdb::merge_tables(table, std::move(part));
  }
  return table;
}

void write_bare_pair_file(const std::string& path,
                          const std::vector<std::pair<hdb::RecordId, hdb::RecordId>>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hdb::DataError("cannot write pair file: " + path);
  out << "# hdb-pairs v1\n";
  for (const auto& [a, b] : pairs) out << a << ',' << b << '\n';
  out.flush();
  if (!out) throw hdb::DataError("error while writing pair file: " + path);
}

int cmd_block(const IngestOptions& ingest_opt, const std::string& config_path,
              const std::string& out_dir, const hdb::EngineParams& params, uint32_t threads,
              bool exact_membership, bool threshold_baseline, bool naive_count) {
  auto t_total = Clock::now();
  params.validate();  // fail before reading anything
  hdb::BlockingConfig config = hdb::load_blocking_config(config_path);

  auto t_read = Clock::now();
  hdb::RecordTable table = ingest(ingest_opt);
  int64_t read_ms = ms_since(t_read);

  auto t_index = Clock::now();
  std::vector<hdb::KeyedRecord> index = hdb::build_index(table, config, threads);
  int64_t index_ms = ms_since(t_index);
  table = hdb::RecordTable{};  // attributes are no longer needed

  nlohmann::json baselines = nlohmann::json::object();
  fs::create_directories(out_dir);
  int64_t baseline_ms = 0;
  if (threshold_baseline || naive_count) {
    auto t_base = Clock::now();
    if (threshold_baseline) {
      auto thr = hdb::threshold_blocking(index, params.max_block_size, threads);
      baselines["threshold_pairs"] = thr.size();
      write_bare_pair_file((fs::path(out_dir) / "threshold_pairs.csv").string(), thr);
    }
    if (naive_count) {
      baselines["naive_pairs"] = hdb::naive_pair_count(index, threads);
    }
    baseline_ms = ms_since(t_base);
  }

  auto t_engine = Clock::now();
  hdb::EngineOptions opts;
  opts.partitions = threads;
  opts.exact_membership = exact_membership;
  opts.log = &std::cerr;
  size_t input_records = index.size();
  hdb::EngineResult engine = hdb::hashed_dynamic_blocking(std::move(index), params, opts);
  int64_t engine_ms = ms_since(t_engine);

  auto t_pairs = Clock::now();
  hdb::PairResult pairs = hdb::remove_dupe_pairs(engine.right_sized, threads);
  int64_t pairs_ms = ms_since(t_pairs);

  hdb::write_pair_file((fs::path(out_dir) / "pairs.csv").string(), pairs.pairs);
  hdb::write_block_pair_file((fs::path(out_dir) / "block_pairs.csv").string(), pairs.blocks);

  nlohmann::json stats = {
      {"version", 1},
      {"command", "block"},
      {"inputs", ingest_opt.inputs},
      {"records", input_records},
      {"threads", threads},
      {"exact_membership", exact_membership},
      {"params", hdb::to_json(params)},
      {"blocking_config", hdb::to_json(config)},
      {"engine", hdb::to_json(engine.stats)},
      {"pairs", hdb::to_json(pairs.stats)},
      {"timings_ms",
       {{"read", read_ms},
        {"build_index", index_ms},
        {"baselines", baseline_ms},
        {"engine", engine_ms},
        {"pairs", pairs_ms},
        {"total", ms_since(t_total)}}},
  };
  if (!baselines.empty()) stats["baselines"] = baselines;
  hdb::write_json_file((fs::path(out_dir) / "stats.json").string(), stats);

  std::cerr << "records=" << input_records << " blocks=" << engine.stats.final_blocks
            << " pairs=" << pairs.stats.distinct_pairs << " out=" << out_dir << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pairs_path, const std::string& labels_path, bool complete,
                 const std::string& out_path) {
  auto pairs = hdb::read_pair_file(pairs_path);
  hdb::LabelSet labels = hdb::read_labels(labels_path, complete);
  if (labels.positives.empty()) {
    throw hdb::DataError("label file has no pairs: " + labels_path);
  }

  double pc = hdb::pair_completeness(pairs, labels);
  nlohmann::json report = {
      {"version", 1},
      {"command", "evaluate"},
      {"pairs_file", pairs_path},
      {"labels_file", labels_path},
      {"pairs", pairs.size()},
      {"labels", labels.positives.size()},
      {"labels_complete", labels.complete},
      {"pair_completeness", pc},
  };
  std::cout << "pairs=" << pairs.size() << " labels=" << labels.positives.size() << "\n";
  std::cout << "pair_completeness=" << pc << "\n";
  if (labels.complete) {
    double pq = hdb::pair_quality(pairs, labels);
    report["pair_quality"] = pq;
    std::cout << "pair_quality=" << pq << "\n";
  } else {
    report["pair_quality"] = nullptr;
    report["pair_quality_omitted"] =
        "labels are not complete ground truth; pass --complete if they are";
    std::cout << "pair_quality omitted: labels not marked complete\n";
  }
  if (!out_path.empty()) hdb::write_json_file(out_path, report);
  return 0;
}

int cmd_lsh_curve(uint32_t bands, uint32_t band_width, double step, uint32_t mc_samples,
                  uint64_t seed, const std::string& out_path) {
  if (bands < 1 || band_width < 1) throw hdb::ConfigError("bands and band-width must be >= 1");
  if (!(step > 0.0 && step <= 1.0)) throw hdb::ConfigError("step must be in (0, 1]");

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw hdb::DataError("cannot write curve file: " + out_path);
    out = &file;
  }
  (*out) << "jaccard,probability";
  if (mc_samples > 0) (*out) << ",monte_carlo";
  (*out) << "\n";
  char buf[64];
  for (uint64_t i = 0;; i++) {
    double j = double(i) * step;
    if (j > 1.0 + 1e-12) break;
    if (j > 1.0) j = 1.0;
    std::snprintf(buf, sizeof(buf), "%.4f,%.8f", j, hdb::lsh_probability(bands, band_width, j));
    (*out) << buf;
    if (mc_samples > 0) {
      std::snprintf(buf, sizeof(buf), ",%.8f",
                    hdb::lsh_band_share_rate(bands, band_width, j, mc_samples, seed));
      (*out) << buf;
    }
    (*out) << "\n";
  }
  out->flush();
  if (!*out) throw hdb::DataError("error while writing curve");
  return 0;
}

int cmd_stats(const std::string& report_path) {
  nlohmann::json doc = hdb::read_json_file(report_path);
  if (!doc.contains("engine")) {
    throw hdb::DataError("not a block-run stats report: " + report_path);
  }
  const auto& engine = doc["engine"];
  std::cout << "records: " << doc.value("records", uint64_t(0)) << "\n";
  std::cout << "iterations:\n";
  std::cout << "  it    candidates         right     oversized     corrected        deduped\n";
  for (const auto& it : engine["iterations"]) {
    char line[160];
    std::snprintf(line, sizeof(line), "  %2u %13llu %13llu %13llu %13llu %14llu",
                  it.value("iteration", 0u),
                  (unsigned long long)it.value("candidate_assignments", 0ull),
                  (unsigned long long)it.value("right_assignments", 0ull),
                  (unsigned long long)it.value("oversized_assignments_out", 0ull),
                  (unsigned long long)it.value("corrected_right_assignments", 0ull),
                  (unsigned long long)it.value("duplicate_keys_dropped", 0ull));
    std::cout << line << "\n";
  }
  std::cout << "final blocks: " << engine.value("final_blocks", 0ull)
            << " (assignments " << engine.value("final_assignments", 0ull)
            << ", singletons dropped " << engine.value("singleton_keys_dropped", 0ull) << ")\n";
  if (engine.value("iteration_cap_hit", false)) {
    std::cout << "iteration cap hit; " << engine.value("cap_dropped_keys", 0ull)
              << " over-sized keys dropped\n";
  }
  if (doc.contains("pairs")) {
    std::cout << "pairs: " << doc["pairs"].value("distinct_pairs", 0ull) << " distinct from "
              << doc["pairs"].value("blocks_emitted", 0ull) << " blocks\n";
  }
  if (doc.contains("timings_ms")) {
    std::cout << "total ms: " << doc["timings_ms"].value("total", int64_t(0)) << "\n";
  }
  return 0;
}

int cmd_prep_labels(const IngestOptions& ingest_opt, const std::string& entity_column,
                    const std::string& out_path) {
  hdb::RecordTable table = ingest(ingest_opt);
  hdb::LabelSet labels = hdb::labels_from_entity_column(table, entity_column);
  write_bare_pair_file(out_path, labels.positives);
  std::cerr << "records=" << table.num_records() << " label_pairs=" << labels.positives.size()
            << " out=" << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdb: hashed dynamic blocking for database deduplication"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hdb 1.0.0");

  uint32_t threads = hdb::default_threads_from_env();
  app.add_option("-t,--threads", threads,
                 "worker partitions (default: HDB_THREADS env or hardware)")
      ->check(CLI::Range(1u, 4096u));

  // block
  auto* block = app.add_subcommand("block", "build blocks and emit candidate pairs");
  IngestOptions block_ingest;
  add_ingest_flags(block, block_ingest);
  std::string config_path, out_dir;
  block->add_option("-c,--config", config_path, "blocking config JSON")->required();
  block->add_option("-o,--out", out_dir, "output directory")->required();
  hdb::EngineParams params;
  block->add_option("--max-block-size", params.max_block_size, "largest emitted block (500)");
  block->add_option("--max-keys", params.max_keys,
                    "drop records with more over-sized keys than this (80)");
  block->add_option("--max-similarity", params.max_similarity,
                    "discard intersected blocks too close to their parent size (0.9)");
  block->add_option("--max-iterations", params.max_iterations, "intersection round cap (20)");
  block->add_option("--bloom-fpr", params.bloom_target_fpr,
                    "false-positive target of the over-sized key filter (1e-8)");
  block->add_option("--cms-width", params.cms_width, "count-min sketch width (2^20)");
  block->add_option("--cms-depth", params.cms_depth, "count-min sketch depth (5)");
  block->add_option("--seed", params.seed, "engine seed (42)");
  bool exact_membership = false, threshold_baseline = false, naive_count = false;
  block->add_flag("--exact-membership", exact_membership,
                  "debug: exact over-sized membership set instead of a Bloom filter");
  block->add_flag("--threshold-baseline", threshold_baseline,
                  "also compute the discard-over-sized baseline pair set");
  block->add_flag("--naive-count", naive_count,
                  "also count distinct pairs sharing any key, no size cutoff");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a pair file against labels");
  std::string pairs_path, labels_path, eval_out;
  bool labels_complete = false;
  evaluate->add_option("-p,--pairs", pairs_path, "pair file from block")->required();
  evaluate->add_option("-l,--labels", labels_path, "positive-pair label file")->required();
  evaluate->add_flag("--complete", labels_complete, "labels are complete ground truth");
  evaluate->add_option("-o,--out", eval_out, "also write the report as JSON");

  // lsh-curve
  auto* curve = app.add_subcommand("lsh-curve", "tabulate band-sharing probability vs Jaccard");
  uint32_t curve_bands = 0, curve_width = 0, mc_samples = 0;
  double curve_step = 0.01;
  uint64_t curve_seed = 42;
  std::string curve_out;
  curve->add_option("-b,--bands", curve_bands, "number of bands")->required();
  curve->add_option("-w,--band-width", curve_width, "minhashes per band")->required();
  curve->add_option("--step", curve_step, "jaccard grid step (0.01)");
  curve->add_option("--mc-samples", mc_samples, "add a Monte-Carlo column with this many samples");
  curve->add_option("--seed", curve_seed, "Monte-Carlo seed (42)");
  curve->add_option("-o,--out", curve_out, "output file (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "summarize a stats.json report");
  std::string report_path;
  stats->add_option("report", report_path, "stats.json from a block run")->required();

  // prep-labels
  auto* prep = app.add_subcommand("prep-labels",
                                  "derive positive pairs from a shared entity-id column");
  IngestOptions prep_ingest;
  add_ingest_flags(prep, prep_ingest);
  std::string entity_column, prep_out;
  prep->add_option("--entity-column", entity_column, "column holding the entity id")->required();
  prep->add_option("-o,--out", prep_out, "label file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(block)) {
      return cmd_block(block_ingest, config_path, out_dir, params, threads, exact_membership,
                       threshold_baseline, naive_count);
    }
    if (app.got_subcommand(evaluate)) {
      return cmd_evaluate(pairs_path, labels_path, labels_complete, eval_out);
    }
    if (app.got_subcommand(curve)) {
      return cmd_lsh_curve(curve_bands, curve_width, curve_step, mc_samples, curve_seed,
                           curve_out);
    }
    if (app.got_subcommand(stats)) {
      return cmd_stats(report_path);
    }
    if (app.got_subcommand(prep)) {
      return cmd_prep_labels(prep_ingest, entity_column, prep_out);
    }
  } catch (const hdb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const hdb::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
