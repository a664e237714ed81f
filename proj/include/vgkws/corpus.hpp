// vgkws/corpus.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Corpus ingestion and validation: utterance manifests, the fixed keyword
// vocabulary, evaluation alignments and precomputed visual soft labels.
// All loaded stores are immutable after construction.

#ifndef VGKWS_CORPUS_HPP_
#define VGKWS_CORPUS_HPP_

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vgkws/common.hpp"

namespace vgkws {

// The fixed keyword inventory pairing query-language words with
// target-language words. Keyword ids are 0..W-1 contiguous.
class Vocabulary {
 public:
  struct Entry {
    int keyword_id;
    std::string query_word;
    std::string target_word;
  };

  explicit Vocabulary(std::vector<Entry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  const Entry& entry(int keyword_id) const;
  const std::string& query_word(int keyword_id) const { return entry(keyword_id).query_word; }
  const std::string& target_word(int keyword_id) const { return entry(keyword_id).target_word; }
  std::optional<int> id_of_query(const std::string& query_word) const;
  const std::vector<Entry>& entries() const { return entries_; }

  // Fingerprint over (id, query, target) triples.
  std::uint64_t hash_full() const;
  // Fingerprint over query words only; this is what transfer mode compares,
  // since the query language is shared across corpora.
  std::uint64_t hash_query() const;

 private:
  std::vector<Entry> entries_;  // indexed by keyword_id
  std::unordered_map<std::string, int> query_index_;
};

struct UtteranceRecord {
  std::string utterance_id;
  std::string audio_path;
  Split split = Split::kTrain;
  std::string caption_query;   // manifest key "caption_en"
  std::string caption_target;  // manifest key "caption_yo"
  std::string visual_target_id;  // empty when absent
};

struct KeywordInterval {
  int keyword_id;
  double start_s;
  double end_s;
};

// Per-utterance annotated keyword intervals, one interval per keyword.
class AlignmentSet {
 public:
  AlignmentSet() = default;

  // Validates the interval invariants and the one-per-keyword rule.
  void add(const std::string& utterance_id, KeywordInterval interval);

  const std::vector<KeywordInterval>* find(const std::string& utterance_id) const;
  std::optional<KeywordInterval> find(const std::string& utterance_id, int keyword_id) const;
  const std::map<std::string, std::vector<KeywordInterval>>& entries() const { return entries_; }
  std::size_t interval_count() const;

 private:
  std::map<std::string, std::vector<KeywordInterval>> entries_;
};

// visual_target_id -> vector of W per-keyword probabilities.
class VisualTargetStore {
 public:
  explicit VisualTargetStore(int width) : width_(width) {}

  int width() const { return width_; }
  void add(const std::string& id, Eigen::VectorXd target);
  const Eigen::VectorXd* find(const std::string& id) const;
  std::size_t size() const { return targets_.size(); }
  const std::map<std::string, Eigen::VectorXd>& entries() const { return targets_; }

 private:
  int width_;
  std::map<std::string, Eigen::VectorXd> targets_;
};

Vocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);

std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path,
                   const std::vector<UtteranceRecord>& records);

AlignmentSet load_alignments(const std::filesystem::path& path, const Vocabulary& vocab);
void save_alignments(const std::filesystem::path& path, const AlignmentSet& alignments,
                     const Vocabulary& vocab);

VisualTargetStore load_visual_targets(const std::filesystem::path& path, int width);
void save_visual_targets(const std::filesystem::path& path, const VisualTargetStore& store);

struct SplitCounts {
  std::size_t train = 0, dev = 0, test = 0;
};
SplitCounts count_splits(const std::vector<UtteranceRecord>& records);

}  // namespace vgkws

#endif  // VGKWS_CORPUS_HPP_
