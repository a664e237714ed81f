// tests/test_features.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "vgkws/common.hpp"
#include "vgkws/features.hpp"

using namespace vgkws;

namespace {

Waveform tone(double freq_hz, double duration_s, double amplitude = 0.5) {
  Waveform wav;
  wav.samples.resize(static_cast<std::size_t>(duration_s * kSampleRate));
  for (std::size_t i = 0; i < wav.samples.size(); ++i) {
    wav.samples[i] =
        amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / kSampleRate);
  }
  return wav;
}

}  // namespace

TEST_CASE("compute_mfcc: 1.0 s at 16 kHz with 25 ms window and 10 ms hop gives 98 frames") {
  // 1 + floor((16000 - 400) / 160) = 98.
  FeatureConfig config;
  FeatureSequence seq = compute_mfcc(tone(440.0, 1.0), config, "u");
  CHECK(seq.num_frames() == 98);
  CHECK(seq.dim() == 39);
  CHECK(seq.frames.allFinite());
}

TEST_CASE("compute_mfcc: all-zero waveform stays finite via the log floor") {
  Waveform silence;
  silence.samples.assign(16000, 0.0);
  FeatureSequence seq = compute_mfcc(silence, FeatureConfig{}, "s");
  CHECK(seq.frames.allFinite());
}

TEST_CASE("compute_mfcc: distinct tones produce distinct features") {
  FeatureConfig config;
  FeatureSequence low = compute_mfcc(tone(440.0, 0.5), config, "low");
  FeatureSequence high = compute_mfcc(tone(4000.0, 0.5), config, "high");
  REQUIRE(low.frames.rows() == high.frames.rows());
  CHECK((low.frames - high.frames).norm() > 0.0);
}

TEST_CASE("compute_mfcc: purity, deterministic bit-identical outputs") {
  Waveform wav = tone(700.0, 0.4);
  FeatureSequence a = compute_mfcc(wav, FeatureConfig{}, "a");
  FeatureSequence b = compute_mfcc(wav, FeatureConfig{}, "a");
  CHECK(a.frames == b.frames);
}

TEST_CASE("compute_mfcc: rejects empty and too-short waveforms") {
  Waveform empty;
  CHECK_THROWS_AS(compute_mfcc(empty, FeatureConfig{}, "e"), UsageError);
  Waveform shorter;
  shorter.samples.assign(200, 0.1);  // < 400-sample frame
  CHECK_THROWS_AS(compute_mfcc(shorter, FeatureConfig{}, "s"), UsageError);
}

TEST_CASE("frame-time mapping stays inside the utterance") {
  FeatureSequence seq = compute_mfcc(tone(440.0, 1.0), FeatureConfig{}, "u");
  for (Eigen::Index t = 0; t < seq.num_frames(); ++t) {
    CHECK(t * seq.frame_hop_s >= 0.0);
    CHECK(t * seq.frame_hop_s < 1.0);
  }
}

TEST_CASE("spec_augment: identity policy returns the input exactly") {
  FeatureSequence seq = compute_mfcc(tone(440.0, 1.0), FeatureConfig{}, "u");
  AugmentPolicy identity{0, 0, 0, 0};
  FeatureSequence out = spec_augment(seq, identity, 123);
  CHECK(out.frames == seq.frames);
}

TEST_CASE("spec_augment: one time mask alters at most one contiguous range of <= 5 frames") {
  FeatureSequence seq = compute_mfcc(tone(440.0, 1.0), FeatureConfig{}, "u");
  REQUIRE(seq.num_frames() == 98);
  AugmentPolicy policy{1, 5, 0, 0};
  FeatureSequence out = spec_augment(seq, policy, 42);

  std::vector<Eigen::Index> changed;
  for (Eigen::Index t = 0; t < seq.num_frames(); ++t) {
    if (out.frames.row(t) != seq.frames.row(t)) changed.push_back(t);
  }
  CHECK(changed.size() <= 5);
  for (std::size_t i = 1; i < changed.size(); ++i) {
    CHECK(changed[i] == changed[i - 1] + 1);  // contiguous
  }
}

TEST_CASE("spec_augment: deterministic given seed; keeps shape and finiteness") {
  FeatureSequence seq = compute_mfcc(tone(440.0, 1.0), FeatureConfig{}, "u");
  AugmentPolicy policy;  // defaults: 2 time + 2 freq masks
  FeatureSequence a = spec_augment(seq, policy, 99);
  FeatureSequence b = spec_augment(seq, policy, 99);
  CHECK(a.frames == b.frames);
  CHECK(a.frames.rows() == seq.frames.rows());
  CHECK(a.frames.cols() == seq.frames.cols());
  CHECK(a.frames.allFinite());
  FeatureSequence c = spec_augment(seq, policy, 100);
  CHECK(a.frames != c.frames);
}

TEST_CASE("spec_augment: property over random seeds, never NaN, never resizes") {
  FeatureSequence seq = compute_mfcc(tone(900.0, 0.6), FeatureConfig{}, "u");
  AugmentPolicy policy{3, 1000, 3, 1000};  // clamps to sequence size
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    FeatureSequence out = spec_augment(seq, policy, seed);
    REQUIRE(out.frames.rows() == seq.frames.rows());
    REQUIRE(out.frames.cols() == seq.frames.cols());
    REQUIRE(out.frames.allFinite());
  }
}

TEST_CASE("feature cache round-trips bit-exactly") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vgkws_feature_cache";
  fs::remove_all(dir);

  FeatureConfig config;
  FeatureSequence seq = compute_mfcc(tone(523.0, 0.8), config, "cached_utt");
  FeatureCache cache(dir);
  cache.store(seq);
  auto loaded = cache.load("cached_utt", config);
  REQUIRE(loaded.has_value());
  CHECK(loaded->frames == seq.frames);
  CHECK(loaded->frame_hop_s == seq.frame_hop_s);

  CHECK(!cache.load("missing_utt", config).has_value());
  FeatureConfig other = config;
  other.deltas = false;
  CHECK(!cache.load("cached_utt", other).has_value());  // config mismatch
}
