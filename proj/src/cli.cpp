// vgkws/cli.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "vgkws/evaluate.hpp"
#include "vgkws/metrics.hpp"
#include "vgkws/plot.hpp"

namespace vgkws::cli {

namespace {

namespace fs = std::filesystem;

FeatureConfig feature_config_for(int input_dim) {
  FeatureConfig config;
  if (input_dim == 3 * config.n_cepstra) {
    config.deltas = true;
  } else if (input_dim == config.n_cepstra) {
    config.deltas = false;
  } else {
    throw UsageError("no feature configuration produces dimension " +
                     std::to_string(input_dim));
  }
  return config;
}

// Memoising feature provider; resolves audio paths against `base_dir` and
// consults the optional on-disk cache.
FeatureProvider make_feature_provider(const fs::path& base_dir, FeatureConfig config,
                                      std::optional<fs::path> cache_dir) {
  auto memo = std::make_shared<std::map<std::string, FeatureSequence>>();
  auto cache = cache_dir ? std::make_shared<FeatureCache>(*cache_dir) : nullptr;
  return [=](const UtteranceRecord& rec) -> FeatureSequence {
    if (auto it = memo->find(rec.utterance_id); it != memo->end()) return it->second;
    if (cache) {
      if (auto cached = cache->load(rec.utterance_id, config)) {
        memo->emplace(rec.utterance_id, *cached);
        return *cached;
      }
    }
    fs::path audio = rec.audio_path;
    if (audio.is_relative()) audio = base_dir / audio;
    FeatureSequence feats = compute_mfcc(read_wav(audio), config, rec.utterance_id);
    if (cache) cache->store(feats);
    memo->emplace(rec.utterance_id, feats);
    return feats;
  };
}

std::vector<UtteranceRecord> split_records(const std::vector<UtteranceRecord>& manifest,
                                           Split split) {
  std::vector<UtteranceRecord> out;
  for (const UtteranceRecord& r : manifest) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

int run_guarded(const char* command, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

std::optional<fs::path> env_cache_dir() {
  const char* dir = std::getenv("VGKWS_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return fs::path(dir);
}

ExperimentConfig parse_experiment_config(const fs::path& path) {
  std::istringstream in(read_file(path));
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  ExperimentConfig config;
  config.train.epochs = 100;
  std::string line;
  int line_number = 0;

  auto fail = [&](const std::string& msg) -> void {
    throw UsageError(path.string() + ":" + std::to_string(line_number) + ": " + msg);
  };
  auto to_double = [&](const std::string& v, const char* field) {
    try {
      return std::stod(v);
    } catch (...) {
      fail(std::string("bad value for field '") + field + "': " + v);
      return 0.0;
    }
  };
  auto to_int = [&](const std::string& v, const char* field) {
    try {
      return std::stoi(v);
    } catch (...) {
      fail(std::string("bad value for field '") + field + "': " + v);
      return 0;
    }
  };
  auto resolve = [&](const std::string& v) {
    fs::path p(v);
    return p.is_relative() ? base / p : p;
  };

  bool saw_manifest = false, saw_vocab = false, saw_targets = false, saw_out = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);

    if (key == "manifest") { config.manifest = resolve(value); saw_manifest = true; }
    else if (key == "vocab") { config.vocab = resolve(value); saw_vocab = true; }
    else if (key == "targets") { config.targets = resolve(value); saw_targets = true; }
    else if (key == "alignments") config.alignments = resolve(value);
    else if (key == "out_dir") { config.out_dir = resolve(value); saw_out = true; }
    else if (key == "theta") config.theta = to_double(value, "theta");
    else if (key == "seeds") {
      config.seeds.clear();
      for (const std::string& s : split_on(value, ',')) {
        if (s.empty()) continue;
        try {
          config.seeds.push_back(std::stoull(s));
        } catch (...) {
          fail("bad seed '" + s + "'");
        }
      }
      if (config.seeds.empty()) fail("field 'seeds' must list at least one seed");
    }
    else if (key == "learning_rate") config.train.learning_rate = to_double(value, "learning_rate");
    else if (key == "batch_size") config.train.batch_size = to_int(value, "batch_size");
    else if (key == "epochs") config.train.epochs = to_int(value, "epochs");
    else if (key == "theta_dev") config.train.theta_dev = to_double(value, "theta_dev");
    else if (key == "augment_time_masks") config.train.augment.n_time_masks = to_int(value, key.c_str());
    else if (key == "augment_time_mask_frames") config.train.augment.max_time_mask_frames = to_int(value, key.c_str());
    else if (key == "augment_freq_masks") config.train.augment.n_freq_masks = to_int(value, key.c_str());
    else if (key == "augment_freq_mask_bins") config.train.augment.max_freq_mask_bins = to_int(value, key.c_str());
    else if (key == "init_checkpoint") config.train.init_checkpoint = resolve(value);
    else if (key == "model_preset") {
      if (value == "small") config.model_is_preset_small = true;
      else if (value == "full") config.model_is_preset_small = false;
      else fail("field 'model_preset' must be 'small' or 'full'");
    }
    else if (key == "encoder") {
      config.model.encoder.clear();
      for (const std::string& l : split_on(value, ',')) {
        auto f = split_on(l, ':');
        if (f.size() != 3) fail("field 'encoder' layers must be out:kernel:stride");
        config.model.encoder.push_back({to_int(f[0], "encoder"), to_int(f[1], "encoder"),
                                        to_int(f[2], "encoder")});
      }
      config.model_is_preset_small = false;
    }
    else if (key == "keyword_dim") { config.model.keyword_dim = to_int(value, key.c_str()); config.model_is_preset_small = false; }
    else if (key == "attention_dim") { config.model.attention_dim = to_int(value, key.c_str()); config.model_is_preset_small = false; }
    else if (key == "classifier_hidden") {
      config.model.classifier_hidden.clear();
      for (const std::string& h : split_on(value, ',')) {
        if (!h.empty()) config.model.classifier_hidden.push_back(to_int(h, key.c_str()));
      }
      config.model_is_preset_small = false;
    }
    else if (key == "feature_deltas") {
      config.features.deltas = (value == "true" || value == "1");
    }
    else if (key == "cache_dir") config.cache_dir = resolve(value);
    else fail("unknown config field '" + key + "'");
  }
  if (!saw_manifest) throw UsageError(path.string() + ": missing required field 'manifest'");
  if (!saw_vocab) throw UsageError(path.string() + ": missing required field 'vocab'");
  if (!saw_targets) throw UsageError(path.string() + ": missing required field 'targets'");
  if (!saw_out) throw UsageError(path.string() + ": missing required field 'out_dir'");
  if (config.theta <= 0.0 || config.theta >= 1.0) {
    throw UsageError(path.string() + ": field 'theta' must be in (0, 1)");
  }
  if (!config.cache_dir) config.cache_dir = env_cache_dir();
  config.model.input_dim = config.features.dim();
  return config;
}

int cmd_synth(const SynthOptions& options) {
  return run_guarded("synth", [&] {
    SyntheticCorpus corpus = generate_synthetic_corpus(options.spec, options.seed);
    write_synthetic_corpus(corpus, options.out_dir);
    SplitCounts counts = count_splits(corpus.manifest);
    std::cout << "wrote " << corpus.manifest.size() << " utterances (train " << counts.train
              << ", dev " << counts.dev << ", test " << counts.test << ") with "
              << corpus.vocab.size() << " keywords to " << options.out_dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_validate(const ValidateOptions& options) {
  return run_guarded("validate", [&] {
    std::vector<UtteranceRecord> manifest = load_manifest(options.manifest);
    Vocabulary vocab = load_vocabulary(options.vocab);
    SplitCounts counts = count_splits(manifest);
    std::cout << "manifest: " << manifest.size() << " records (train " << counts.train
              << ", dev " << counts.dev << ", test " << counts.test << ")\n";
    std::cout << "vocabulary: " << vocab.size() << " keywords\n";

    std::optional<AlignmentSet> alignments;
    if (!options.alignments.empty()) {
      alignments = load_alignments(options.alignments, vocab);
      std::cout << "alignments: " << alignments->interval_count() << " intervals over "
                << alignments->entries().size() << " utterances\n";
    }
    std::optional<VisualTargetStore> targets;
    if (!options.targets.empty()) {
      targets = load_visual_targets(options.targets, vocab.size());
      std::cout << "visual targets: " << targets->size() << " vectors\n";
    }

    if (targets) {
      for (const UtteranceRecord& rec : manifest) {
        if (rec.split == Split::kTrain &&
            (rec.visual_target_id.empty() || targets->find(rec.visual_target_id) == nullptr)) {
          throw DataError("train utterance '" + rec.utterance_id +
                          "' does not resolve to a visual-target vector");
        }
      }
    }
    if (alignments) {
      long missing = 0;
      for (const UtteranceRecord& rec : manifest) {
        if (rec.split == Split::kTest && alignments->find(rec.utterance_id) == nullptr) {
          ++missing;
        }
      }
      if (missing > 0) {
        std::cout << "warning: " << missing
                  << " test utterances have no alignments (excluded from "
                     "localisation metrics)\n";
      }
    }
    if (options.check_audio) {
      const fs::path base =
          options.manifest.has_parent_path() ? options.manifest.parent_path() : fs::path(".");
      for (const UtteranceRecord& rec : manifest) {
        fs::path audio = rec.audio_path;
        if (audio.is_relative()) audio = base / audio;
        Waveform wav = read_wav(audio);
        if (alignments) {
          if (const auto* list = alignments->find(rec.utterance_id)) {
            for (const KeywordInterval& iv : *list) {
              if (iv.end_s > wav.duration_s() + 1e-9) {
                throw DataError("alignment for '" + rec.utterance_id + "' keyword " +
                                std::to_string(iv.keyword_id) + " ends at " +
                                std::to_string(iv.end_s) + " s beyond the " +
                                std::to_string(wav.duration_s()) + " s utterance");
              }
            }
          }
        }
      }
      std::cout << "audio: all files readable, alignments inside durations\n";
    }
    std::cout << "ok\n";
    return kExitOk;
  });
}

int cmd_train(const fs::path& config_path, const std::vector<std::uint64_t>& seed_override) {
  return run_guarded("train", [&] {
    ExperimentConfig config = parse_experiment_config(config_path);
    if (!seed_override.empty()) config.seeds = seed_override;

    std::vector<UtteranceRecord> manifest = load_manifest(config.manifest);
    Vocabulary vocab = load_vocabulary(config.vocab);
    VisualTargetStore targets = load_visual_targets(config.targets, vocab.size());
    std::optional<AlignmentSet> alignments;
    if (!config.alignments.empty()) alignments = load_alignments(config.alignments, vocab);

    ModelConfig model_config = config.model_is_preset_small
                                   ? small_model_config(config.features.dim(), vocab.size())
                                   : config.model;
    model_config.input_dim = config.features.dim();
    model_config.vocab_size = vocab.size();

    const fs::path base =
        config.manifest.has_parent_path() ? config.manifest.parent_path() : fs::path(".");
    FeatureProvider features =
        make_feature_provider(base, config.features, config.cache_dir);

    CorpusHandles handles{&manifest, &vocab, &targets, features};

    std::vector<double> best_f1s;
    bool any_failed = false;
    for (std::uint64_t seed : config.seeds) {
      TrainConfig train_config = config.train;
      train_config.seed = seed;
      try {
        auto [params, report] = train(handles, model_config, train_config, config.out_dir);
        save_report(config.out_dir / ("report_seed" + std::to_string(seed) + ".txt"),
                    report, train_config);
        double best = report.dev_f1_curve.empty()
                          ? 0.0
                          : report.dev_f1_curve[report.best_epoch - 1];
        best_f1s.push_back(best);
        std::cout << "seed " << seed << ": best dev F1 " << best << " at epoch "
                  << report.best_epoch << " (" << report.wall_clock_s << " s)\n";
      } catch (const std::exception& e) {
        std::cerr << "seed " << seed << " failed: " << e.what() << "\n";
        any_failed = true;
      }
    }
    if (!best_f1s.empty()) {
      double mean = 0.0;
      for (double f : best_f1s) mean += f;
      mean /= static_cast<double>(best_f1s.size());
      double sd = 0.0;
      if (best_f1s.size() > 1) {
        for (double f : best_f1s) sd += (f - mean) * (f - mean);
        sd = std::sqrt(sd / static_cast<double>(best_f1s.size() - 1));
      }
      char buf[160];
      std::snprintf(buf, sizeof(buf), "best_dev_f1: %.6f +- %.6f (n=%zu)\n", mean, sd,
                    best_f1s.size());
      write_file_atomic(config.out_dir / "aggregate.txt", buf);
      std::cout << buf;
    }
    return any_failed ? kExitRuntime : kExitOk;
  });
}

int cmd_eval(const EvalOptions& options) {
  return run_guarded("eval", [&] {
    if (options.baseline != "" && options.baseline != "random") {
      throw UsageError("--baseline must be 'random' when given");
    }
    Vocabulary vocab = load_vocabulary(options.vocab);
    std::vector<UtteranceRecord> manifest = load_manifest(options.manifest);
    AlignmentSet alignments = load_alignments(options.alignments, vocab);
    std::vector<UtteranceRecord> test_records = split_records(manifest, Split::kTest);
    if (test_records.empty()) throw DataError("manifest has no test-split records");

    std::vector<EvalPair> pairs;
    FeatureConfig feature_config;
    if (options.baseline == "random") {
      const fs::path base = options.manifest.has_parent_path()
                                ? options.manifest.parent_path()
                                : fs::path(".");
      FeatureProvider features =
          make_feature_provider(base, feature_config, options.cache_dir);
      pairs = random_baseline(build_eval_grid(test_records, vocab, alignments, features),
                              options.seed);
    } else {
      VgsModelParams params =
          load_checkpoint(options.checkpoint, vocab, options.allow_transfer_vocab);
      feature_config = feature_config_for(params.config.input_dim);
      const fs::path base = options.manifest.has_parent_path()
                                ? options.manifest.parent_path()
                                : fs::path(".");
      FeatureProvider features =
          make_feature_provider(base, feature_config, options.cache_dir);
      pairs = score_eval_grid(test_records, vocab, alignments, features, params,
                              options.theta);
    }

    MetricsReport report = evaluate_pairs(pairs, vocab, options.theta);
    fs::create_directories(options.out_dir);
    write_file_atomic(options.out_dir / "metrics.txt", metrics_report_text(report));
    write_file_atomic(options.out_dir / "metrics.csv", metrics_report_csv(report));

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "actual %.4f | oracle %.4f | detection %.4f (theta %.2f)\n",
                  report.actual_localisation_precision, report.oracle_localisation_accuracy,
                  report.detection_precision, options.theta);
    std::cout << buf;
    return kExitOk;
  });
}

int cmd_localise(const LocaliseOptions& options) {
  return run_guarded("localise", [&] {
    VgsModelParams params = load_checkpoint(options.checkpoint);
    int keyword_id = -1;
    for (std::size_t i = 0; i < params.query_words.size(); ++i) {
      if (params.query_words[i] == options.query_word) {
        keyword_id = static_cast<int>(i);
        break;
      }
    }
    if (keyword_id < 0) {
      std::string vocab_list;
      for (const std::string& w : params.query_words) {
        vocab_list += (vocab_list.empty() ? "" : ", ") + w;
      }
      throw UsageError("unknown query word '" + options.query_word +
                       "'; vocabulary: " + vocab_list);
    }

    Waveform wav = read_wav(options.audio);
    FeatureConfig feature_config = feature_config_for(params.config.input_dim);
    FeatureSequence feats =
        compute_mfcc(wav, feature_config, options.audio.stem().string());
    LocalisationResult result = localise(feats, keyword_id, params, options.theta);

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "query '%s': score %.4f, detected %s, predicted time %.3f s\n",
                  options.query_word.c_str(), result.detection_score,
                  result.detected ? "yes" : "no", result.predicted_time_s);
    std::cout << buf;

    std::ostringstream csv;
    csv << "frame,time_s,attention\n";
    for (Eigen::Index t = 0; t < result.attention.weights.size(); ++t) {
      double time = (t + 0.5) * params.downsample_factor * feats.frame_hop_s;
      char row[96];
      std::snprintf(row, sizeof(row), "%lld,%.4f,%.8f\n", static_cast<long long>(t), time,
                    result.attention.weights[t]);
      csv << row;
    }
    write_file_atomic(options.out_prefix + "_attention.csv", csv.str());
    if (options.plot) {
      plot_localisation(options.out_prefix + ".bmp", wav, feats, result,
                        params.downsample_factor);
    }
    return kExitOk;
  });
}

int cmd_cooccur(const CooccurOptions& options) {
  return run_guarded("cooccur", [&] {
    Vocabulary vocab = load_vocabulary(options.vocab);
    std::vector<UtteranceRecord> manifest = load_manifest(options.manifest);

    std::vector<std::string> captions_q, captions_t;
    long skipped = 0;
    for (const UtteranceRecord& rec : manifest) {
      if (rec.caption_query.empty() || rec.caption_target.empty()) {
        ++skipped;
        continue;
      }
      captions_q.push_back(rec.caption_query);
      captions_t.push_back(rec.caption_target);
    }
    if (skipped > 0) {
      std::cout << "warning: skipped " << skipped << " records with missing captions\n";
    }
    if (captions_q.empty()) throw DataError("no records with captions in both languages");

    CooccurrenceMatrix matrix = cooccurrence_kappa(captions_q, captions_t, vocab);
    fs::create_directories(options.out_dir);
    write_file_atomic(options.out_dir / "cooccurrence.csv",
                      cooccurrence_csv(matrix, vocab));
    write_file_atomic(options.out_dir / "cooccurrence_long.csv",
                      cooccurrence_long_csv(matrix, vocab));
    if (options.plot) {
      plot_heatmap(options.out_dir / "cooccurrence.bmp", matrix.kappa_normalised);
    }
    if (matrix.kappa.cwiseAbs().maxCoeff() == 0.0) {
      std::cout << "warning: all-zero co-occurrence matrix (no shared structure)\n";
    }
    std::cout << "wrote co-occurrence matrices for " << captions_q.size()
              << " caption pairs over " << vocab.size() << " keywords\n";
    return kExitOk;
  });
}

}  // namespace vgkws::cli
