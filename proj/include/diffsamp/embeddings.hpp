#pragma once

/**
 * Word-embedding table loaded from whitespace-delimited text: one word
 * followed by d floats per line (the standard pretrained-embedding layout).
 * Keys are case-folded at load time and lookups fold the query, the first
 * occurrence of a folded key wins.
 */

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "diffsamp/common.hpp"

namespace diffsamp {

inline std::string fold_case(std::string word) {
  for (char& c : word) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return word;
}

class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  void insert(const std::string& word, std::vector<double> vec) {
    if (dim_ == 0) {
      dim_ = vec.size();
    } else if (vec.size() != dim_) {
      throw InvalidValueError("embedding dimension mismatch for '" + word + "'");
    }
    table_.emplace(fold_case(word), std::move(vec));
  }

  const std::vector<double>* find(const std::string& word) const {
    const auto it = table_.find(fold_case(word));
    return it == table_.end() ? nullptr : &it->second;
  }

  size_t size() const { return table_.size(); }
  size_t dim() const { return dim_; }

 private:
  std::unordered_map<std::string, std::vector<double>> table_;
  size_t dim_ = 0;
};

inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open embedding file: " + path);
  }
  EmbeddingTable table;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) {
      continue;
    }
    std::vector<double> vec;
    double value = 0.0;
    while (ss >> value) {
      vec.push_back(value);
    }
    if (!ss.eof()) {
      throw ParseError(lineno, "malformed embedding value");
    }
    if (vec.empty()) {
      throw ParseError(lineno, "embedding line has no values");
    }
    try {
      table.insert(word, std::move(vec));
    } catch (const InvalidValueError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return table;
}

}  // namespace diffsamp
