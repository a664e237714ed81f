// vgkws/synth.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Seeded synthetic corpus generator. Each utterance is background noise
// plus, for each present keyword, a keyword-specific two-tone signature
// placed at a known interval. Alignments record those intervals exactly
// and visual targets equal ground-truth presence (optionally noised).

#ifndef VGKWS_SYNTH_HPP_
#define VGKWS_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vgkws/corpus.hpp"
#include "vgkws/wav.hpp"

namespace vgkws {

struct SyntheticSpec {
  int vocab_size = 8;
  int n_train = 400;
  int n_dev = 50;
  int n_test = 50;
  double min_duration_s = 3.0;
  double max_duration_s = 5.0;
  double keyword_prior = 0.3;       // per-keyword presence probability
  double signature_duration_s = 0.4;
  double signature_amplitude = 0.35;
  double noise_level = 0.03;        // background noise amplitude
  double target_noise = 0.0;        // visual-target jitter in [0, 1)
  // Acoustic transform knobs, used to synthesise a second "language" that
  // shares signatures under different conditions (transfer experiments).
  double pitch_shift_hz = 0.0;
  std::string id_prefix = "utt";
};

struct SyntheticCorpus {
  Vocabulary vocab;
  std::vector<UtteranceRecord> manifest;
  AlignmentSet alignments;  // all splits
  VisualTargetStore targets;
  std::vector<Waveform> audio;  // parallel to manifest
};

// Deterministic given (spec, seed). Audio stays in memory; use
// write_synthetic_corpus to materialise the on-disk layout.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

// Writes manifest.jsonl, vocab.csv, alignments.csv, visual_targets.csv and
// audio/*.wav under out_dir; audio_path fields point at the written files.
void write_synthetic_corpus(const SyntheticCorpus& corpus,
                            const std::filesystem::path& out_dir);

// The two signature tone frequencies assigned to a keyword.
std::pair<double, double> signature_frequencies(int keyword_id, double pitch_shift_hz);

}  // namespace vgkws

#endif  // VGKWS_SYNTH_HPP_
