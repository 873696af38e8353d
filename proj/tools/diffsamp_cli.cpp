/**
 * diffsamp command-line toolkit.
 *
 * Subcommands:
 *   truncate         apply one strategy to a distribution file (JSONL out)
 *   compare          side-by-side renormalized percentages for several
 *                    strategies on the same distributions (CSV out)
 *   sample           replay trace files under a strategy + temperature
 *   simulate-safety  Monte-Carlo sweep of the mixture-safety conditions
 *   metrics          diversity / accuracy / noun-list reports
 *
 * Every flag can also be set through an environment variable with the
 * DIFFSAMP_ prefix (e.g. DIFFSAMP_SEED). Exit codes: 0 success, 1 usage
 * error, 2 data error in strict mode.
 */

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diffsamp/diffsamp.hpp"

using nlohmann::json;
using namespace diffsamp;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct CommonOpts {
  std::string input;
  std::string output;
  bool strict = false;
  unsigned jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_input = true) {
  auto* in = cmd->add_option("-i,--input", opts.input, "input file")
                 ->envname("DIFFSAMP_INPUT");
  if (needs_input) {
    in->required()->check(CLI::ExistingFile);
  }
  cmd->add_option("-o,--output", opts.output, "output file (default: stdout)")
      ->envname("DIFFSAMP_OUTPUT");
  cmd->add_flag("--strict", opts.strict, "abort on the first malformed record")
      ->envname("DIFFSAMP_STRICT");
  cmd->add_option("--jobs", opts.jobs, "worker threads (never changes output)")
      ->default_val(1)
      ->check(CLI::Range(1u, 256u))
      ->envname("DIFFSAMP_JOBS");
}

void add_strategy_params(CLI::App* cmd, StrategyConfig& cfg) {
  cmd->add_option("--p-lb", cfg.p_lb, "mass lower bound for diff_lb")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("DIFFSAMP_P_LB");
  cmd->add_option("--p-min", cfg.p_min, "ratio upper bound for diff_minp")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("DIFFSAMP_P_MIN");
  cmd->add_option("--top-p", cfg.top_p, "nucleus mass for top_p")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("DIFFSAMP_TOP_P");
  cmd->add_option("--min-p", cfg.min_p, "ratio threshold for min_p")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("DIFFSAMP_MIN_P");
  cmd->add_option("--eta", cfg.eta, "eta-sampling threshold parameter")
      ->envname("DIFFSAMP_ETA");
  cmd->add_option("--typical-p", cfg.typical_p, "mass bound for locally typical")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("DIFFSAMP_TYPICAL_P");
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty()) {
    return std::cout;
  }
  file.open(path, std::ios::binary);  // binary keeps byte-identical newlines
  if (!file) {
    throw DataError("cannot open output file: " + path);
  }
  return file;
}

void report_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    std::cerr << "warning: line " << d.line << ": " << d.reason << "\n";
  }
}

// Lenient runs keep going; the skipped records surface as error rows at the
// head of the JSONL output so downstream tooling sees them in-band.
void write_error_rows(std::ostream& out, const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    json row;
    row["error"] = d.reason;
    row["line"] = d.line;
    out << row.dump() << "\n";
  }
}

// Deterministic parallel map: the output slot for record i never depends on
// scheduling, only on i.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, unsigned jobs, Fn&& fn)
    -> std::vector<decltype(fn(items.front()))> {
  using Out = decltype(fn(items.front()));
  std::vector<Out> results(items.size());
  if (items.empty()) {
    return results;
  }
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(items.size()));
  if (jobs <= 1) {
    for (size_t i = 0; i < items.size(); ++i) {
      results[i] = fn(items[i]);
    }
    return results;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w]() {
      try {
        for (size_t i = w; i < items.size(); i += jobs) {
          results[i] = fn(items[i]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) {
    t.join();
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
  return results;
}

std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", 100.0 * fraction);
  return buf;
}

// RFC-4180 quoting for fields that contain separators (token labels can be
// punctuation, including the comma itself).
std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) {
    return value;
  }
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') {
      quoted += '"';
    }
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

// ---------------------------------------------------------------------------
// truncate / compare
// ---------------------------------------------------------------------------

struct TruncateArgs {
  CommonOpts common;
  std::string strategy = "diff_cut";
  std::vector<std::string> compare;
  StrategyConfig cfg;
};

json truncation_to_json(const std::string& id, const std::string& strategy,
                        const TruncationResult& r) {
  json obj;
  obj["id"] = id;
  obj["strategy"] = strategy;
  obj["cut_idx"] = r.cut_idx;
  obj["kept"] = r.kept;
  obj["renorm"] = r.renorm.probs;
  return obj;
}

void write_compare_csv(std::ostream& out, const std::vector<DistRecord>& records,
                       const std::vector<std::string>& strategies,
                       const StrategyConfig& cfg) {
  out << "id,token,label,prob_pct";
  for (const auto& name : strategies) {
    out << "," << name;
  }
  out << "\n";
  for (const auto& rec : records) {
    const SortedView s = sort_desc(rec.dist);
    std::vector<TruncationResult> results;
    results.reserve(strategies.size());
    for (const auto& name : strategies) {
      results.push_back(truncate(parse_strategy(name), s, cfg));
    }
    for (size_t pos = 0; pos < s.size(); ++pos) {
      const size_t token = s.perm[pos];
      out << csv_field(rec.id) << "," << token << ",";
      if (!rec.labels.empty()) {
        out << csv_field(rec.labels[token]);
      }
      out << "," << format_pct(s.sorted_probs[pos]);
      for (const auto& r : results) {
        out << ",";
        if (r.renorm[token] > 0.0) {
          out << format_pct(r.renorm[token]);
        }
      }
      out << "\n";
    }
  }
}

int run_truncate(const TruncateArgs& args, bool compare_layout) {
  ParseOptions opts;
  opts.strict = args.common.strict;
  std::vector<Diagnostic> diags;
  std::vector<DistRecord> records = load_distributions(args.common.input, opts, &diags);
  report_diagnostics(diags);
  std::sort(records.begin(), records.end(),
            [](const DistRecord& a, const DistRecord& b) { return a.id < b.id; });

  std::ofstream file;
  std::ostream& out = open_output(args.common.output, file);

  if (compare_layout) {
    std::vector<std::string> strategies = args.compare;
    if (strategies.empty()) {
      strategies = {"top_p", "min_p", "diff_cut", "diff_lb", "diff_minp"};
    }
    for (const auto& name : strategies) {
      parse_strategy(name);  // validate before writing anything
    }
    write_compare_csv(out, records, strategies, args.cfg);
    return 0;
  }

  const Strategy strategy = parse_strategy(args.strategy);
  const bool strict = args.common.strict;
  const auto rows = parallel_map(records, args.common.jobs, [&](const DistRecord& rec) {
    try {
      const TruncationResult r = truncate(strategy, sort_desc(rec.dist), args.cfg);
      return truncation_to_json(rec.id, args.strategy, r).dump();
    } catch (const Error& e) {
      if (strict) {
        throw DataError(std::string("record '") + rec.id + "': " + e.what());
      }
      json row;
      row["id"] = rec.id;
      row["error"] = e.what();
      return row.dump();
    }
  });
  write_error_rows(out, diags);
  for (const auto& row : rows) {
    out << row << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

struct SampleArgs {
  CommonOpts common;
  std::string strategy = "diff_cut";
  StrategyConfig cfg;
  double tau = 1.0;
  std::string temp_position = "after";
  uint64_t seed = 0;
};

int run_sample(const SampleArgs& args) {
  ParseOptions opts;
  opts.strict = args.common.strict;
  std::vector<Diagnostic> diags;
  std::vector<Trace> traces = load_traces(args.common.input, opts, &diags);
  report_diagnostics(diags);
  std::sort(traces.begin(), traces.end(),
            [](const Trace& a, const Trace& b) { return a.id < b.id; });

  const Strategy strategy = parse_strategy(args.strategy);
  TemperatureSpec temp;
  temp.tau = args.tau;
  temp.position = args.temp_position == "before" ? TemperatureSpec::Position::Before
                                                 : TemperatureSpec::Position::After;

  const bool strict = args.common.strict;
  const auto rows = parallel_map(traces, args.common.jobs, [&](const Trace& trace) {
    try {
      const std::vector<size_t> tokens =
          run_trace(trace, strategy, args.cfg, temp, args.seed);
      json obj;
      obj["id"] = trace.id;
      obj["seed"] = args.seed;
      obj["strategy"] = args.strategy;
      obj["tau"] = args.tau;
      obj["tokens"] = tokens;
      return obj.dump();
    } catch (const Error& e) {
      if (strict) {
        throw DataError(e.what());
      }
      json row;
      row["id"] = trace.id;
      row["error"] = e.what();
      return row.dump();
    }
  });

  std::ofstream file;
  std::ostream& out = open_output(args.common.output, file);
  write_error_rows(out, diags);
  for (const auto& row : rows) {
    out << row << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate-safety
// ---------------------------------------------------------------------------

struct SafetyArgs {
  CommonOpts common;
  SamplerSpec spec;
  uint64_t trials = 100000;
  uint64_t seed = 0;
  std::string csv;
};

json safety_report_to_json(const SafetyReport& report, const SafetyArgs& args) {
  json cells = json::array();
  for (const auto& [key, cell] : report.cells) {
    cells.push_back({{"prop1", key.first},
                     {"prop2", key.second},
                     {"safe", cell.safe},
                     {"unsafe", cell.unsafe}});
  }
  json vocab_rows = json::array();
  for (const auto& [key, cell] : report.by_vocab) {
    vocab_rows.push_back({{"vocab", key.first},
                          {"condition_holds", key.second},
                          {"safe", cell.safe},
                          {"unsafe", cell.unsafe}});
  }
  return json{{"trials", report.trials},
              {"violations", report.violations},
              {"covered_trials", report.covered()},
              {"outside_safety_rate", report.outside_safety_rate()},
              {"cells", cells},
              {"by_vocab", vocab_rows},
              {"seed", args.seed},
              {"vocab_sizes", args.spec.vocab_sizes}};
}

void write_safety_csv(std::ostream& out, const SafetyReport& report) {
  out << "vocab,condition_holds,safe,unsafe,total,safety_rate\n";
  for (const auto& [key, cell] : report.by_vocab) {
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.6f",
                  cell.total() == 0
                      ? 1.0
                      : static_cast<double>(cell.safe) / static_cast<double>(cell.total()));
    out << key.first << "," << (key.second ? "yes" : "no") << "," << cell.safe
        << "," << cell.unsafe << "," << cell.total() << "," << rate << "\n";
  }
}

int run_safety(const SafetyArgs& args) {
  validate_spec(args.spec);
  const unsigned jobs = std::max(1u, args.common.jobs);
  SafetyReport report;
  if (jobs <= 1 || args.trials < 2 * static_cast<uint64_t>(jobs)) {
    report = monte_carlo_safety(args.spec, args.trials, args.seed);
  } else {
    // Fixed index-based chunks + associative count merge: the report is
    // identical for any job count.
    const uint64_t chunk = (args.trials + jobs - 1) / jobs;
    std::vector<SafetyReport> parts(jobs);
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      const uint64_t first = w * chunk;
      const uint64_t count = first >= args.trials ? 0 : std::min(chunk, args.trials - first);
      if (count == 0) {
        continue;
      }
      workers.emplace_back([&, w, first, count]() {
        parts[w] = monte_carlo_safety(args.spec, count, args.seed, first);
      });
    }
    for (auto& t : workers) {
      t.join();
    }
    for (const auto& part : parts) {
      report.merge(part);
    }
  }

  std::ofstream file;
  std::ostream& out = open_output(args.common.output, file);
  out << safety_report_to_json(report, args).dump(2) << "\n";
  if (!args.csv.empty()) {
    std::ofstream csv(args.csv, std::ios::binary);
    if (!csv) {
      throw DataError("cannot open csv file: " + args.csv);
    }
    write_safety_csv(csv, report);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

struct MetricsArgs {
  CommonOpts common;
  std::string mode = "cross_input";
  std::string embeddings;
  std::string nouns;
  size_t vocab = 0;
  size_t dat_n = 7;
  std::string csv;
};

std::vector<const GenerationRecord*> non_empty(
    const std::vector<const GenerationRecord*>& records) {
  std::vector<const GenerationRecord*> out;
  for (const auto* rec : records) {
    if (!rec->tokens.empty()) {
      out.push_back(rec);
    }
  }
  return out;
}

json run_cross_input(const GenerationSet& set, size_t vocab) {
  std::vector<TokenSeq> seqs;
  std::vector<std::vector<double>> vectors;
  for (const auto& rec : set.records) {
    if (rec.tokens.empty()) {
      continue;
    }
    seqs.push_back(rec.tokens);
    if (rec.vector.has_value()) {
      vectors.push_back(*rec.vector);
    }
  }
  json out;
  out["mode"] = "cross_input";
  out["records"] = seqs.size();
  out["empty_sequences"] = set.empty_sequences;
  bool degenerate = false;
  out["ead"] = ead(seqs, vocab, 1, 5, &degenerate);
  out["ead_degenerate"] = degenerate;
  if (vectors.size() >= 2) {
    out["cosine_diversity"] = cosine_diversity(vectors);
    out["cosine_records"] = vectors.size();
  }
  return out;
}

json run_per_input(const GenerationSet& set, size_t vocab) {
  const auto groups = set.by_prompt();
  double ead_sum = 0.0;
  size_t ead_count = 0;
  double cos_sum = 0.0;
  size_t cos_count = 0;
  for (const auto& [prompt, records] : groups) {
    const auto usable = non_empty(records);
    if (!usable.empty()) {
      std::vector<TokenSeq> seqs;
      for (const auto* rec : usable) {
        seqs.push_back(rec->tokens);
      }
      ead_sum += ead(seqs, vocab);
      ++ead_count;
    }
    std::vector<std::vector<double>> vectors;
    for (const auto* rec : usable) {
      if (rec->vector.has_value()) {
        vectors.push_back(*rec->vector);
      }
    }
    if (vectors.size() >= 2) {
      cos_sum += cosine_diversity(vectors);
      ++cos_count;
    }
  }
  json out;
  out["mode"] = "per_input";
  out["prompts"] = groups.size();
  out["empty_sequences"] = set.empty_sequences;
  if (ead_count > 0) {
    out["ead"] = ead_sum / static_cast<double>(ead_count);
    out["ead_prompts"] = ead_count;
  }
  if (cos_count > 0) {
    out["cosine_diversity"] = cos_sum / static_cast<double>(cos_count);
    out["cosine_prompts"] = cos_count;
  }
  return out;
}

json run_against_greedy(const GenerationSet& set, size_t vocab) {
  double ead_sum = 0.0;
  size_t ead_count = 0;
  double cos_sum = 0.0;
  size_t cos_count = 0;
  size_t skipped = 0;
  for (const auto& rec : set.records) {
    if (rec.is_greedy || rec.tokens.empty()) {
      continue;
    }
    const GenerationRecord* greedy = set.greedy_for(rec.prompt_id);
    if (greedy == nullptr || greedy->tokens.empty()) {
      ++skipped;
      continue;
    }
    ead_sum += ead_against_greedy(rec.tokens, greedy->tokens, vocab);
    ++ead_count;
    if (rec.vector.has_value() && greedy->vector.has_value()) {
      cos_sum += against_greedy_cosine(*rec.vector, *greedy->vector);
      ++cos_count;
    }
  }
  json out;
  out["mode"] = "against_greedy";
  out["samples"] = ead_count;
  out["skipped_no_greedy"] = skipped;
  out["empty_sequences"] = set.empty_sequences;
  if (ead_count > 0) {
    out["ead"] = ead_sum / static_cast<double>(ead_count);
  }
  if (cos_count > 0) {
    out["cosine"] = cos_sum / static_cast<double>(cos_count);
    out["cosine_samples"] = cos_count;
  }
  return out;
}

json run_dat(const MetricsArgs& args) {
  if (args.embeddings.empty()) {
    throw DataError("dat mode requires --embeddings");
  }
  const std::string noun_path = args.nouns.empty() ? args.common.input : args.nouns;
  ParseOptions opts;
  opts.strict = args.common.strict;
  std::vector<Diagnostic> diags;
  const auto lists = load_noun_lists(noun_path, opts, &diags);
  report_diagnostics(diags);
  const EmbeddingTable table = load_embeddings(args.embeddings);

  json rows = json::array();
  size_t valid = 0;
  double score_sum = 0.0;
  for (const auto& rec : lists) {
    const DatResult r = dat_score(rec.nouns, table, args.dat_n);
    json row;
    row["id"] = rec.id;
    row["valid"] = r.valid();
    row["distinct_resolved"] = r.distinct_resolved;
    if (r.valid()) {
      row["score"] = *r.score;
      score_sum += *r.score;
      ++valid;
    }
    rows.push_back(row);
  }
  json out;
  out["mode"] = "dat";
  out["n"] = args.dat_n;
  out["records"] = lists.size();
  out["valid"] = valid;
  out["invalid"] = lists.size() - valid;
  out["validity_rate"] =
      lists.empty() ? 0.0 : static_cast<double>(valid) / static_cast<double>(lists.size());
  if (valid > 0) {
    out["mean_score"] = score_sum / static_cast<double>(valid);
  }
  out["lists"] = rows;
  return out;
}

void write_metrics_csv(std::ostream& out, const json& report) {
  out << "key,value\n";
  for (const auto& [key, value] : report.items()) {
    if (value.is_number() || value.is_boolean() || value.is_string()) {
      out << key << "," << value.dump() << "\n";
    }
  }
}

int run_metrics(const MetricsArgs& args) {
  json report;
  if (args.mode == "dat") {
    report = run_dat(args);
  } else {
    ParseOptions opts;
    opts.strict = args.common.strict;
    std::vector<Diagnostic> diags;
    const GenerationSet set = load_generation_set(args.common.input, opts, &diags);
    report_diagnostics(diags);
    if (args.mode == "cross_input") {
      report = run_cross_input(set, args.vocab);
    } else if (args.mode == "per_input") {
      report = run_per_input(set, args.vocab);
    } else if (args.mode == "against_greedy") {
      report = run_against_greedy(set, args.vocab);
    } else {
      throw CLI::ValidationError("--mode", "unknown mode: " + args.mode);
    }
  }
  std::ofstream file;
  std::ostream& out = open_output(args.common.output, file);
  out << report.dump(2) << "\n";
  if (!args.csv.empty()) {
    std::ofstream csv(args.csv, std::ios::binary);
    if (!csv) {
      throw DataError("cannot open csv file: " + args.csv);
    }
    write_metrics_csv(csv, report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truncation-based decoding toolkit"};
  app.require_subcommand(1);

  TruncateArgs trunc;
  auto* trunc_cmd = app.add_subcommand("truncate", "truncate distributions");
  add_common(trunc_cmd, trunc.common);
  trunc_cmd->add_option("--strategy", trunc.strategy, "strategy name")
      ->envname("DIFFSAMP_STRATEGY");
  trunc_cmd
      ->add_option("--compare", trunc.compare,
                   "comma-separated strategies; switches to CSV comparison layout")
      ->delimiter(',');
  add_strategy_params(trunc_cmd, trunc.cfg);

  TruncateArgs cmp;
  auto* cmp_cmd = app.add_subcommand(
      "compare", "CSV comparison table across strategies");
  add_common(cmp_cmd, cmp.common);
  cmp_cmd
      ->add_option("--strategies", cmp.compare,
                   "comma-separated strategies (default: the five table columns)")
      ->delimiter(',');
  add_strategy_params(cmp_cmd, cmp.cfg);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "replay traces into token sequences");
  add_common(sample_cmd, sample.common);
  sample_cmd->add_option("--strategy", sample.strategy, "strategy name")
      ->envname("DIFFSAMP_STRATEGY");
  sample_cmd->add_option("--tau", sample.tau, "temperature (0 = greedy)")
      ->check(CLI::Range(0.0, 1000.0))
      ->envname("DIFFSAMP_TAU");
  sample_cmd
      ->add_option("--temp-position", sample.temp_position,
                   "apply temperature before or after truncation")
      ->check(CLI::IsMember({"before", "after"}))
      ->envname("DIFFSAMP_TEMP_POSITION");
  sample_cmd->add_option("--seed", sample.seed, "base seed")
      ->envname("DIFFSAMP_SEED");
  add_strategy_params(sample_cmd, sample.cfg);

  SafetyArgs safety;
  auto* safety_cmd =
      app.add_subcommand("simulate-safety", "Monte-Carlo mixture safety sweep");
  add_common(safety_cmd, safety.common, /*needs_input=*/false);
  safety_cmd->add_option("--trials", safety.trials, "number of trials")
      ->required()
      ->check(CLI::PositiveNumber)
      ->envname("DIFFSAMP_TRIALS");
  safety_cmd->add_option("--seed", safety.seed, "base seed")
      ->envname("DIFFSAMP_SEED");
  safety_cmd
      ->add_option("--vocab", safety.spec.vocab_sizes,
                   "vocabulary sizes cycled across trials")
      ->delimiter(',')
      ->envname("DIFFSAMP_VOCAB");
  safety_cmd->add_option("--support-min", safety.spec.support_min, "minimum support size");
  safety_cmd->add_option("--support-max", safety.spec.support_max,
                         "maximum support size (0 = vocab)");
  safety_cmd->add_option("--delta-min", safety.spec.delta_min, "noise amplitude lower bound");
  safety_cmd->add_option("--delta-max", safety.spec.delta_max, "noise amplitude upper bound");
  safety_cmd->add_option("--alpha", safety.spec.alpha, "smoothing contribution scale");
  safety_cmd->add_option("--lambda-bar", safety.spec.lambda_bar,
                         "constant lower bound for the mixing weight");
  safety_cmd->add_option("--csv", safety.csv, "also write the (vocab, condition) CSV grid");

  MetricsArgs metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "evaluation metric reports");
  add_common(metrics_cmd, metrics.common);
  metrics_cmd
      ->add_option("--mode", metrics.mode,
                   "cross_input | per_input | against_greedy | dat")
      ->check(CLI::IsMember({"cross_input", "per_input", "against_greedy", "dat"}))
      ->envname("DIFFSAMP_MODE");
  metrics_cmd->add_option("--embeddings", metrics.embeddings, "word-embedding text file")
      ->envname("DIFFSAMP_EMBEDDINGS");
  metrics_cmd->add_option("--nouns", metrics.nouns,
                          "noun-list file for dat mode (defaults to --input)");
  metrics_cmd->add_option("--vocab", metrics.vocab,
                          "vocabulary constant for EAD (0 = observed)")
      ->envname("DIFFSAMP_VOCAB");
  metrics_cmd->add_option("--n", metrics.dat_n, "nouns per DAT score (7 or 10)")
      ->check(CLI::IsMember({7, 10}));
  metrics_cmd->add_option("--csv", metrics.csv, "also write a flat CSV summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;  // --help stays 0, all errors map to 1
  }

  try {
    if (trunc_cmd->parsed()) {
      return run_truncate(trunc, !trunc.compare.empty());
    }
    if (cmp_cmd->parsed()) {
      return run_truncate(cmp, /*compare_layout=*/true);
    }
    if (sample_cmd->parsed()) {
      return run_sample(sample);
    }
    if (safety_cmd->parsed()) {
      return run_safety(safety);
    }
    if (metrics_cmd->parsed()) {
      return run_metrics(metrics);
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvalidParamError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
