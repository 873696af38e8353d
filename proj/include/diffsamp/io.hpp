#pragma once

/**
 * Line-delimited JSON record streams and report writers.
 *
 * Every record stream is one JSON object per line. In lenient mode malformed
 * lines are collected as diagnostics and the run continues; strict mode turns
 * the first malformed line into a DataError.
 *
 *   distributions   {"id": "...", "probs": [...]} or {"id": "...", "logits": [...]}
 *                   optional "labels": ["...", ...]
 *   traces          {"id": "...", "steps": [[...], ...]} or "logit_steps"
 *   generations     {"prompt_id": "...", "sample_id": "...", "tokens": [...],
 *                    "greedy": bool, optional "vector": [...]}
 *   noun lists      {"id": "...", "nouns": ["...", ...]}
 */

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffsamp/common.hpp"
#include "diffsamp/distribution.hpp"
#include "diffsamp/metrics.hpp"
#include "diffsamp/sampling.hpp"

namespace diffsamp {

// Strict-mode abort: maps to CLI exit code 2.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

struct Diagnostic {
  size_t line = 0;
  std::string reason;
};

struct ParseOptions {
  bool strict = false;
};

struct DistRecord {
  std::string id;
  ProbDist dist;
  std::vector<std::string> labels;  // optional, empty when absent
};

struct GenerationRecord {
  std::string prompt_id;
  std::string sample_id;
  TokenSeq tokens;
  bool is_greedy = false;
  std::optional<std::vector<double>> vector;
};

struct GenerationSet {
  std::vector<GenerationRecord> records;
  size_t empty_sequences = 0;  // counted and excluded from diversity aggregates

  std::map<std::string, std::vector<const GenerationRecord*>> by_prompt() const {
    std::map<std::string, std::vector<const GenerationRecord*>> groups;
    for (const auto& rec : records) {
      groups[rec.prompt_id].push_back(&rec);
    }
    return groups;
  }

  const GenerationRecord* greedy_for(const std::string& prompt_id) const {
    for (const auto& rec : records) {
      if (rec.prompt_id == prompt_id && rec.is_greedy) {
        return &rec;
      }
    }
    return nullptr;
  }
};

struct NounRecord {
  std::string id;
  std::vector<std::string> nouns;
};

namespace detail {

template <typename Fn>
void for_each_jsonl(const std::string& path, const ParseOptions& opts,
                    std::vector<Diagnostic>* diags, Fn&& handle) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open input file: " + path);
  }
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const nlohmann::json obj = nlohmann::json::parse(line);
      handle(obj, lineno);
    } catch (const std::exception& e) {
      if (opts.strict) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
      }
      if (diags != nullptr) {
        diags->push_back({lineno, e.what()});
      }
    }
  }
}

inline std::vector<double> require_number_array(const nlohmann::json& obj,
                                                const char* field) {
  if (!obj.contains(field) || !obj[field].is_array()) {
    throw Error(std::string("missing or non-array field '") + field + "'");
  }
  std::vector<double> out;
  out.reserve(obj[field].size());
  for (const auto& v : obj[field]) {
    if (!v.is_number()) {
      throw Error(std::string("non-numeric entry in '") + field + "'");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::string require_string(const nlohmann::json& obj, const char* field) {
  if (!obj.contains(field) || !obj[field].is_string()) {
    throw Error(std::string("missing or non-string field '") + field + "'");
  }
  return obj[field].get<std::string>();
}

}  // namespace detail

inline std::vector<DistRecord> load_distributions(
    const std::string& path, const ParseOptions& opts = {},
    std::vector<Diagnostic>* diags = nullptr) {
  std::vector<DistRecord> records;
  detail::for_each_jsonl(path, opts, diags, [&records](const nlohmann::json& obj, size_t) {
    DistRecord rec;
    rec.id = detail::require_string(obj, "id");
    if (obj.contains("probs")) {
      rec.dist = normalize(detail::require_number_array(obj, "probs"));
    } else if (obj.contains("logits")) {
      rec.dist = from_logits(detail::require_number_array(obj, "logits"));
    } else {
      throw Error("record needs either 'probs' or 'logits'");
    }
    if (obj.contains("labels")) {
      for (const auto& v : obj["labels"]) {
        rec.labels.push_back(v.get<std::string>());
      }
      if (rec.labels.size() != rec.dist.size()) {
        throw Error("labels length does not match distribution length");
      }
    }
    records.push_back(std::move(rec));
  });
  return records;
}

inline std::vector<Trace> load_traces(const std::string& path,
                                      const ParseOptions& opts = {},
                                      std::vector<Diagnostic>* diags = nullptr) {
  std::vector<Trace> traces;
  detail::for_each_jsonl(path, opts, diags, [&traces](const nlohmann::json& obj, size_t) {
    Trace trace;
    trace.id = detail::require_string(obj, "id");
    const bool log_space = obj.contains("logit_steps");
    const char* field = log_space ? "logit_steps" : "steps";
    if (!obj.contains(field) || !obj[field].is_array()) {
      throw Error("record needs either 'steps' or 'logit_steps'");
    }
    size_t width = 0;
    for (const auto& step : obj[field]) {
      std::vector<double> values;
      values.reserve(step.size());
      for (const auto& v : step) {
        if (!v.is_number()) {
          throw Error("non-numeric entry in trace step");
        }
        values.push_back(v.get<double>());
      }
      if (log_space) {
        values = from_logits(values).probs;
      }
      if (width == 0) {
        width = values.size();
      } else if (values.size() != width) {
        throw Error("trace steps disagree on vocabulary size");
      }
      trace.steps.push_back(std::move(values));
    }
    traces.push_back(std::move(trace));
  });
  return traces;
}

inline GenerationSet load_generation_set(const std::string& path,
                                         const ParseOptions& opts = {},
                                         std::vector<Diagnostic>* diags = nullptr) {
  GenerationSet set;
  std::map<std::string, size_t> greedy_seen;
  detail::for_each_jsonl(path, opts, diags, [&](const nlohmann::json& obj, size_t) {
    GenerationRecord rec;
    rec.prompt_id = detail::require_string(obj, "prompt_id");
    rec.sample_id = detail::require_string(obj, "sample_id");
    if (!obj.contains("tokens") || !obj["tokens"].is_array()) {
      throw Error("missing or non-array field 'tokens'");
    }
    for (const auto& v : obj["tokens"]) {
      if (!v.is_number_integer()) {
        throw Error("non-integer entry in 'tokens'");
      }
      rec.tokens.push_back(v.get<int64_t>());
    }
    rec.is_greedy = obj.value("greedy", false);
    if (rec.is_greedy) {
      if (++greedy_seen[rec.prompt_id] > 1) {
        throw Error("multiple greedy records for prompt '" + rec.prompt_id + "'");
      }
    }
    if (obj.contains("vector")) {
      rec.vector = detail::require_number_array(obj, "vector");
    }
    if (rec.tokens.empty()) {
      set.empty_sequences += 1;
    }
    set.records.push_back(std::move(rec));
  });
  return set;
}

inline std::vector<NounRecord> load_noun_lists(const std::string& path,
                                               const ParseOptions& opts = {},
                                               std::vector<Diagnostic>* diags = nullptr) {
  std::vector<NounRecord> records;
  detail::for_each_jsonl(path, opts, diags, [&records](const nlohmann::json& obj, size_t) {
    NounRecord rec;
    rec.id = detail::require_string(obj, "id");
    if (!obj.contains("nouns") || !obj["nouns"].is_array()) {
      throw Error("missing or non-array field 'nouns'");
    }
    for (const auto& v : obj["nouns"]) {
      if (!v.is_string()) {
        throw Error("non-string entry in 'nouns'");
      }
      rec.nouns.push_back(v.get<std::string>());
    }
    records.push_back(std::move(rec));
  });
  return records;
}

}  // namespace diffsamp
