// vgkws/features.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// MFCC frame extraction and SpecAugment masking. Both are pure functions;
// callers may parallelise over utterances freely.

#ifndef VGKWS_FEATURES_HPP_
#define VGKWS_FEATURES_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "vgkws/wav.hpp"

namespace vgkws {

struct FeatureConfig {
  double frame_length_s = 0.025;  // Hamming window
  double frame_hop_s = 0.010;
  int n_mels = 40;
  int n_cepstra = 13;
  bool deltas = true;  // appends deltas and delta-deltas (D = 39)
  double log_floor = 1e-10;

  int dim() const { return deltas ? 3 * n_cepstra : n_cepstra; }
};

struct FeatureSequence {
  Eigen::MatrixXd frames;  // T x D
  double frame_hop_s = 0.010;
  double frame_length_s = 0.025;
  std::string utterance_id;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
  double frame_center_time_s(Eigen::Index t) const {
    return t * frame_hop_s + frame_length_s / 2.0;
  }
};

struct AugmentPolicy {
  int n_time_masks = 2;
  int max_time_mask_frames = 20;
  int n_freq_masks = 2;
  int max_freq_mask_bins = 7;

  bool is_identity() const { return n_time_masks == 0 && n_freq_masks == 0; }
};

// T = 1 + floor((n_samples - frame_length) / hop).
FeatureSequence compute_mfcc(const Waveform& wav, const FeatureConfig& config,
                             const std::string& utterance_id = {});

// Masked regions are replaced by the per-utterance feature mean. Mask sizes
// clamp to the sequence dimensions; shape is never changed.
FeatureSequence spec_augment(const FeatureSequence& features, const AugmentPolicy& policy,
                             std::uint64_t seed);

// Optional on-disk cache: binary matrix per utterance plus a sidecar text
// header with T, D, hop and window. Purely an optimisation.
class FeatureCache {
 public:
  explicit FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<FeatureSequence> load(const std::string& utterance_id,
                                      const FeatureConfig& config) const;
  void store(const FeatureSequence& features) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace vgkws

#endif  // VGKWS_FEATURES_HPP_
