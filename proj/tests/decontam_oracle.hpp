#pragma once

// Synthetic decontamination corpus with planted overlaps, and a brute-force
// sliding-window oracle that shares no code with the hashed index.

#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "termgen/filters.hpp"
#include "termgen/random.hpp"

namespace termgen::testing {

struct DecontamCorpus {
  std::vector<std::string> benchmark;
  std::vector<TextItem> prompts;
  std::set<std::string> planted;  // prompt ids carrying a copied 14-token window
};

inline DecontamCorpus make_decontam_corpus(std::uint64_t seed, std::size_t n_benchmark = 200,
                                           std::size_t n_prompts = 1000, std::size_t n_planted = 50,
                                           std::size_t window = 14) {
  PortableRng rng(seed);
  std::vector<std::string> vocab;
  for (int i = 0; i < 4000; ++i) {
    std::string w;
    for (std::uint64_t k = 0, len = 3 + rng.below(6); k < len; ++k) w += static_cast<char>('a' + rng.below(26));
    vocab.push_back(w);
  }
  auto word = [&] { return vocab[rng.below(vocab.size())]; };
  auto styled = [&](std::string w) {
    if (rng.below(5) == 0) {
      for (auto& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return w;
  };
  auto sep = [&]() -> std::string {
    switch (rng.below(6)) {
      case 0: return "\t";
      case 1: return "  ";
      case 2: return "\n";
      default: return " ";
    }
  };
  auto join = [&](const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out += sep();
      out += styled(words[i]);
    }
    return out;
  };

  DecontamCorpus c;
  std::vector<std::vector<std::string>> bench_words;
  for (std::size_t i = 0; i < n_benchmark; ++i) {
    std::vector<std::string> words;
    for (std::uint64_t k = 0, len = 30 + rng.below(60); k < len; ++k) words.push_back(word());
    c.benchmark.push_back(join(words));
    bench_words.push_back(std::move(words));
  }
  std::vector<std::size_t> order(n_prompts);
  for (std::size_t i = 0; i < n_prompts; ++i) order[i] = i;
  rng.shuffle(order);
  std::set<std::size_t> planted_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_planted));
  for (std::size_t i = 0; i < n_prompts; ++i) {
    std::vector<std::string> words;
    for (std::uint64_t k = 0, len = 20 + rng.below(50); k < len; ++k) words.push_back(word());
    std::string id = "p" + std::to_string(i);
    if (planted_idx.count(i)) {
      const auto& src = bench_words[rng.below(bench_words.size())];
      std::size_t start = rng.below(src.size() - window + 1);
      std::size_t at = rng.below(words.size() + 1);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), src.begin() + static_cast<std::ptrdiff_t>(start),
                   src.begin() + static_cast<std::ptrdiff_t>(start + window));
      c.planted.insert(id);
    }
    c.prompts.push_back({id, join(words)});
  }
  return c;
}

inline std::vector<std::string> oracle_tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) {
    for (auto& ch : w) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    out.push_back(w);
  }
  return out;
}

// Ids of prompts sharing at least one n-token window with any benchmark text.
inline std::set<std::string> oracle_removed(const DecontamCorpus& c, std::size_t n) {
  std::set<std::vector<std::string>> windows;
  for (const auto& doc : c.benchmark) {
    auto t = oracle_tokens(doc);
    for (std::size_t i = 0; i + n <= t.size(); ++i) windows.emplace(t.begin() + i, t.begin() + i + n);
  }
  std::set<std::string> removed;
  for (const auto& p : c.prompts) {
    auto t = oracle_tokens(p.text);
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      if (windows.count(std::vector<std::string>(t.begin() + i, t.begin() + i + n))) {
        removed.insert(p.id);
        break;
      }
    }
  }
  return removed;
}

inline std::set<std::string> index_removed(const DecontamCorpus& c, std::size_t n) {
  DecontamConfig cfg;
  cfg.n = n;
  auto result = decontaminate(c.prompts, ngram_index(c.benchmark, cfg));
  std::set<std::string> out;
  for (const auto& r : result.removed) out.insert(r.id);
  return out;
}

}  // namespace termgen::testing
