// vgkws/synth.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace vgkws {

namespace {

double quantize(double v, double step) { return std::round(v / step) * step; }

Vocabulary make_vocab(int vocab_size) {
  std::vector<Vocabulary::Entry> entries;
  entries.reserve(vocab_size);
  for (int k = 0; k < vocab_size; ++k) {
    // Target words carry combining diacritics to exercise UTF-8 handling.
    entries.push_back({k, "kw" + std::to_string(k),
                       "\xe1\xbb\x8d\xcc\x80r\xe1\xbb\x8d" + std::to_string(k)});
  }
  return Vocabulary(std::move(entries));
}

void add_signature(Waveform& wav, int keyword_id, double start_s, double dur_s,
                   double amplitude, double pitch_shift_hz) {
  auto [f1, f2] = signature_frequencies(keyword_id, pitch_shift_hz);
  const int start = static_cast<int>(std::lround(start_s * wav.sample_rate));
  const int len = static_cast<int>(std::lround(dur_s * wav.sample_rate));
  for (int i = 0; i < len && start + i < static_cast<int>(wav.samples.size()); ++i) {
    double t = static_cast<double>(i) / wav.sample_rate;
    double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (len - 1));
    wav.samples[start + i] +=
        amplitude * env *
        (std::sin(2.0 * std::numbers::pi * f1 * t) +
         0.6 * std::sin(2.0 * std::numbers::pi * f2 * t));
  }
}

}  // namespace

std::pair<double, double> signature_frequencies(int keyword_id, double pitch_shift_hz) {
  double f1 = 320.0 + 150.0 * keyword_id + pitch_shift_hz;
  double f2 = 2.3 * f1;
  if (f2 >= 7800.0) {
    throw UsageError("keyword " + std::to_string(keyword_id) +
                     " signature exceeds the usable band; reduce vocab_size");
  }
  return {f1, f2};
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.vocab_size < 1) throw UsageError("vocab_size must be >= 1");
  if (spec.min_duration_s > spec.max_duration_s || spec.min_duration_s <= 0.0) {
    throw UsageError("bad duration range");
  }
  signature_frequencies(spec.vocab_size - 1, spec.pitch_shift_hz);  // band check
  const double margin = 0.1;
  // The expected keyword load has to fit the shortest utterance.
  const double expected_load =
      std::ceil(spec.vocab_size * spec.keyword_prior) * spec.signature_duration_s;
  if (expected_load > spec.min_duration_s - 2.0 * margin) {
    throw UsageError("duration too short for requested signatures: expected load " +
                     std::to_string(expected_load) + " s does not fit " +
                     std::to_string(spec.min_duration_s) + " s utterances");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int total = spec.n_train + spec.n_dev + spec.n_test;
  SyntheticCorpus corpus{make_vocab(spec.vocab_size), {}, {},
                         VisualTargetStore(spec.vocab_size), {}};
  corpus.manifest.reserve(total);
  corpus.audio.reserve(total);

  for (int n = 0; n < total; ++n) {
    Split split = n < spec.n_train            ? Split::kTrain
                  : n < spec.n_train + spec.n_dev ? Split::kDev
                                                  : Split::kTest;
    std::string uid = spec.id_prefix + "_" + to_string(split) + "_" + std::to_string(n);

    double duration =
        quantize(spec.min_duration_s +
                     unit(rng) * (spec.max_duration_s - spec.min_duration_s),
                 1e-3);

    std::vector<int> present;
    for (int k = 0; k < spec.vocab_size; ++k) {
      if (unit(rng) < spec.keyword_prior) present.push_back(k);
    }
    // Drop overflow keywords when a dense draw does not fit the utterance.
    double avail = duration - 2.0 * margin;
    while (!present.empty() &&
           static_cast<double>(present.size()) * spec.signature_duration_s > avail) {
      present.erase(present.begin() +
                    static_cast<std::ptrdiff_t>(unit(rng) * present.size()));
    }

    // Stick-breaking placement: random non-negative gaps around signatures.
    double slack = avail - static_cast<double>(present.size()) * spec.signature_duration_s;
    std::vector<double> gaps(present.size() + 1);
    double gap_sum = 0.0;
    for (double& g : gaps) {
      g = unit(rng);
      gap_sum += g;
    }
    for (double& g : gaps) g *= slack / gap_sum;

    Waveform wav;
    wav.samples.resize(static_cast<std::size_t>(std::lround(duration * kSampleRate)));
    for (double& s : wav.samples) s = spec.noise_level * (2.0 * unit(rng) - 1.0);

    double cursor = margin;
    std::shuffle(present.begin(), present.end(), rng);
    std::vector<KeywordInterval> intervals;
    for (std::size_t i = 0; i < present.size(); ++i) {
      cursor += gaps[i];
      double start = quantize(cursor, 1e-3);
      double end = quantize(start + spec.signature_duration_s, 1e-3);
      add_signature(wav, present[i], start, spec.signature_duration_s,
                    spec.signature_amplitude, spec.pitch_shift_hz);
      intervals.push_back({present[i], start, end});
      cursor += spec.signature_duration_s;
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const KeywordInterval& a, const KeywordInterval& b) {
                return a.keyword_id < b.keyword_id;
              });
    for (const KeywordInterval& iv : intervals) corpus.alignments.add(uid, iv);

    Eigen::VectorXd target = Eigen::VectorXd::Zero(spec.vocab_size);
    std::sort(present.begin(), present.end());
    for (int k : present) target[k] = 1.0;
    if (spec.target_noise > 0.0) {
      for (int k = 0; k < spec.vocab_size; ++k) {
        double jitter = unit(rng) * spec.target_noise;
        target[k] = quantize(target[k] > 0.5 ? 1.0 - jitter : jitter, 1e-6);
      }
    }

    std::string caption_q = "a scene with";
    std::string caption_t = "aworan ti";
    for (int k : present) {
      caption_q += " " + corpus.vocab.query_word(k);
      caption_t += " " + corpus.vocab.target_word(k);
    }

    UtteranceRecord rec;
    rec.utterance_id = uid;
    rec.audio_path = "audio/" + uid + ".wav";
    rec.split = split;
    rec.caption_query = caption_q;
    rec.caption_target = caption_t;
    rec.visual_target_id = "img_" + uid;
    corpus.targets.add(rec.visual_target_id, std::move(target));
    corpus.manifest.push_back(std::move(rec));
    corpus.audio.push_back(std::move(wav));
  }
  return corpus;
}

void write_synthetic_corpus(const SyntheticCorpus& corpus,
                            const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "audio");
  for (std::size_t i = 0; i < corpus.manifest.size(); ++i) {
    write_wav(out_dir / corpus.manifest[i].audio_path, corpus.audio[i]);
  }
  save_manifest(out_dir / "manifest.jsonl", corpus.manifest);
  save_vocabulary(out_dir / "vocab.csv", corpus.vocab);
  save_alignments(out_dir / "alignments.csv", corpus.alignments, corpus.vocab);
  save_visual_targets(out_dir / "visual_targets.csv", corpus.targets);
}

}  // namespace vgkws
