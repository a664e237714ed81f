// vgkws/corpus.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vgkws/csv.hpp"

namespace vgkws {

using nlohmann::json;

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw DataError("vocabulary must have at least one keyword");
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.keyword_id < b.keyword_id; });
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    if (entries_[i].keyword_id != i) {
      throw DataError("vocabulary keyword_ids must be 0.." +
                      std::to_string(entries_.size() - 1) +
                      " contiguous and unique; problem near id " +
                      std::to_string(entries_[i].keyword_id));
    }
    auto [it, inserted] = query_index_.emplace(entries_[i].query_word, i);
    if (!inserted) {
      throw DataError("duplicate query word in vocabulary: '" +
                      entries_[i].query_word + "'");
    }
  }
}

const Vocabulary::Entry& Vocabulary::entry(int keyword_id) const {
  if (keyword_id < 0 || keyword_id >= size()) {
    throw UsageError("keyword_id " + std::to_string(keyword_id) +
                     " out of range [0, " + std::to_string(size()) + ")");
  }
  return entries_[keyword_id];
}

std::optional<int> Vocabulary::id_of_query(const std::string& query_word) const {
  auto it = query_index_.find(query_word);
  if (it == query_index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::hash_full() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Entry& e : entries_) {
    h = fnv1a64(std::to_string(e.keyword_id), h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(e.query_word, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(e.target_word, h);
    h = fnv1a64("\x1e", h);
  }
  return h;
}

std::uint64_t Vocabulary::hash_query() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Entry& e : entries_) {
    h = fnv1a64(e.query_word, h);
    h = fnv1a64("\x1e", h);
  }
  return h;
}

void AlignmentSet::add(const std::string& utterance_id, KeywordInterval interval) {
  if (interval.start_s < 0.0 || !(interval.start_s < interval.end_s)) {
    std::ostringstream msg;
    msg << "bad interval for utterance '" << utterance_id << "' keyword "
        << interval.keyword_id << ": [" << interval.start_s << ", "
        << interval.end_s << ") requires 0 <= start < end";
    throw DataError(msg.str());
  }
  auto& list = entries_[utterance_id];
  for (const KeywordInterval& existing : list) {
    if (existing.keyword_id == interval.keyword_id) {
      throw DataError("keyword " + std::to_string(interval.keyword_id) +
                      " annotated more than once in utterance '" + utterance_id + "'");
    }
  }
  list.push_back(interval);
}

const std::vector<KeywordInterval>* AlignmentSet::find(
    const std::string& utterance_id) const {
  auto it = entries_.find(utterance_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<KeywordInterval> AlignmentSet::find(const std::string& utterance_id,
                                                  int keyword_id) const {
  const auto* list = find(utterance_id);
  if (list == nullptr) return std::nullopt;
  for (const KeywordInterval& iv : *list) {
    if (iv.keyword_id == keyword_id) return iv;
  }
  return std::nullopt;
}

std::size_t AlignmentSet::interval_count() const {
  std::size_t n = 0;
  for (const auto& [id, list] : entries_) n += list.size();
  return n;
}

void VisualTargetStore::add(const std::string& id, Eigen::VectorXd target) {
  if (target.size() != width_) {
    throw DataError("visual target '" + id + "' has dimension " +
                    std::to_string(target.size()) + ", expected " +
                    std::to_string(width_));
  }
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    double v = target[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw DataError("visual target '" + id + "' element " + std::to_string(i) +
                      " = " + std::to_string(v) + " outside [0, 1]");
    }
  }
  targets_[id] = std::move(target);
}

const Eigen::VectorXd* VisualTargetStore::find(const std::string& id) const {
  auto it = targets_.find(id);
  return it == targets_.end() ? nullptr : &it->second;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::vector<Vocabulary::Entry> entries;
  for (const CsvRow& row : read_csv(path, "keyword_id,query_word,target_word")) {
    if (row.fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(row.line_number) +
                      ": expected 3 fields");
    }
    Vocabulary::Entry e;
    e.keyword_id = static_cast<int>(
        parse_int_field(row.fields[0], path, row.line_number, "keyword_id"));
    e.query_word = row.fields[1];
    e.target_word = row.fields[2];
    if (e.query_word.empty() || e.target_word.empty()) {
      throw DataError(path.string() + ":" + std::to_string(row.line_number) +
                      ": empty word");
    }
    entries.push_back(std::move(e));
  }
  return Vocabulary(std::move(entries));
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::string out = "keyword_id,query_word,target_word\n";
  for (const auto& e : vocab.entries()) {
    out += std::to_string(e.keyword_id) + "," + e.query_word + "," + e.target_word + "\n";
  }
  write_file_atomic(path, out);
}

std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());

  std::vector<UtteranceRecord> records;
  std::set<std::string> seen_ids;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_number) +
                      ": JSON parse error: " + e.what());
    }
    if (!obj.is_object()) {
      throw DataError(path.string() + ":" + std::to_string(line_number) +
                      ": expected an object");
    }
    auto get_string = [&](const char* key, bool required) -> std::string {
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) {
        if (required) {
          throw DataError(path.string() + ":" + std::to_string(line_number) +
                          ": missing required key '" + key + "'");
        }
        return {};
      }
      if (!it->is_string()) {
        throw DataError(path.string() + ":" + std::to_string(line_number) +
                        ": key '" + key + "' must be a string");
      }
      return it->get<std::string>();
    };

    UtteranceRecord rec;
    rec.utterance_id = get_string("utterance_id", true);
    rec.audio_path = get_string("audio_path", true);
    try {
      rec.split = parse_split(get_string("split", true));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
    rec.caption_query = get_string("caption_en", false);
    rec.caption_target = get_string("caption_yo", false);
    rec.visual_target_id = get_string("visual_target_id", false);

    if (!seen_ids.insert(rec.utterance_id).second) {
      throw DataError(path.string() + ":" + std::to_string(line_number) +
                      ": duplicate utterance_id '" + rec.utterance_id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_manifest(const std::filesystem::path& path,
                   const std::vector<UtteranceRecord>& records) {
  std::string out;
  for (const UtteranceRecord& rec : records) {
    json obj;
    obj["utterance_id"] = rec.utterance_id;
    obj["audio_path"] = rec.audio_path;
    obj["split"] = to_string(rec.split);
    obj["caption_en"] = rec.caption_query;
    obj["caption_yo"] = rec.caption_target;
    obj["visual_target_id"] = rec.visual_target_id;
    out += obj.dump() + "\n";
  }
  write_file_atomic(path, out);
}

AlignmentSet load_alignments(const std::filesystem::path& path, const Vocabulary& vocab) {
  AlignmentSet set;
  for (const CsvRow& row : read_csv(path, "utterance_id,keyword,start_s,end_s")) {
    if (row.fields.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(row.line_number) +
                      ": expected 4 fields");
    }
    auto keyword_id = vocab.id_of_query(row.fields[1]);
    if (!keyword_id) {
      throw DataError(path.string() + ":" + std::to_string(row.line_number) +
                      ": keyword '" + row.fields[1] + "' not in vocabulary");
    }
    KeywordInterval iv;
    iv.keyword_id = *keyword_id;
    iv.start_s = parse_double_field(row.fields[2], path, row.line_number, "start_s");
    iv.end_s = parse_double_field(row.fields[3], path, row.line_number, "end_s");
    try {
      set.add(row.fields[0], iv);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(row.line_number) + ": " +
                      e.what());
    }
  }
  return set;
}

void save_alignments(const std::filesystem::path& path, const AlignmentSet& alignments,
                     const Vocabulary& vocab) {
  std::string out = "utterance_id,keyword,start_s,end_s\n";
  char buf[64];
  for (const auto& [utt, list] : alignments.entries()) {
    for (const KeywordInterval& iv : list) {
      std::snprintf(buf, sizeof(buf), ",%.3f,%.3f\n", iv.start_s, iv.end_s);
      out += utt + "," + vocab.query_word(iv.keyword_id) + buf;
    }
  }
  write_file_atomic(path, out);
}

VisualTargetStore load_visual_targets(const std::filesystem::path& path, int width) {
  std::string header = "visual_target_id";
  for (int i = 0; i < width; ++i) header += ",p_" + std::to_string(i);

  VisualTargetStore store(width);
  for (const CsvRow& row : read_csv(path, header)) {
    if (static_cast<int>(row.fields.size()) != width + 1) {
      throw DataError(path.string() + ":" + std::to_string(row.line_number) +
                      ": expected " + std::to_string(width + 1) + " fields, got " +
                      std::to_string(row.fields.size()));
    }
    Eigen::VectorXd v(width);
    for (int i = 0; i < width; ++i) {
      v[i] = parse_double_field(row.fields[i + 1], path, row.line_number, "probability");
    }
    try {
      store.add(row.fields[0], std::move(v));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(row.line_number) + ": " +
                      e.what());
    }
  }
  return store;
}

void save_visual_targets(const std::filesystem::path& path,
                         const VisualTargetStore& store) {
  std::string out = "visual_target_id";
  for (int i = 0; i < store.width(); ++i) out += ",p_" + std::to_string(i);
  out += "\n";
  char buf[32];
  for (const auto& [id, v] : store.entries()) {
    out += id;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.6f", v[i]);
      out += buf;
    }
    out += "\n";
  }
  write_file_atomic(path, out);
}

SplitCounts count_splits(const std::vector<UtteranceRecord>& records) {
  SplitCounts c;
  for (const UtteranceRecord& r : records) {
    switch (r.split) {
      case Split::kTrain: ++c.train; break;
      case Split::kDev: ++c.dev; break;
      case Split::kTest: ++c.test; break;
    }
  }
  return c;
}

}  // namespace vgkws
