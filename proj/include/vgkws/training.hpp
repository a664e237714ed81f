// vgkws/training.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Training against visual soft targets: Adam on BCE averaged over the
// vocabulary, per-epoch dev F1 selection, seeded runs and transfer
// initialisation from a previous checkpoint.

#ifndef VGKWS_TRAINING_HPP_
#define VGKWS_TRAINING_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vgkws/corpus.hpp"
#include "vgkws/features.hpp"
#include "vgkws/model.hpp"

namespace vgkws {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 32;
  int epochs = 100;
  double theta_dev = 0.5;
  std::uint64_t seed = 0;
  AugmentPolicy augment;
  std::optional<std::filesystem::path> init_checkpoint;
  // Adam moment decay rates and epsilon.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct TrainReport {
  std::vector<double> loss_curve;    // per epoch
  std::vector<double> dev_f1_curve;  // per epoch
  int best_epoch = -1;               // 1-based; -1 when no epochs ran
  std::string best_checkpoint_path;
  double wall_clock_s = 0.0;
  std::uint64_t seed = 0;
  std::string init_checkpoint;  // provenance, empty for random init
};

// Resolves utterance_ids to feature sequences; implementations may cache.
using FeatureProvider = std::function<FeatureSequence(const UtteranceRecord&)>;

struct CorpusHandles {
  const std::vector<UtteranceRecord>* manifest = nullptr;
  const Vocabulary* vocab = nullptr;
  const VisualTargetStore* targets = nullptr;
  FeatureProvider features;
};

// (1/W) sum of -[y log p + (1-y) log(1-p)] with predictions clamped to
// [1e-7, 1 - 1e-7].
double bce_loss(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets);

// Detection F1 on the dev split; ground-truth presence is a token match of
// the target-language word in the target-language caption.
double dev_f1(const VgsModelParams& params, const std::vector<UtteranceRecord>& dev_records,
              const Vocabulary& vocab, const FeatureProvider& features, double theta);

bool caption_contains_word(const std::string& caption, const std::string& word);

// Loads a checkpoint for use as the starting point of a new run. The
// architecture must match `expected` exactly and the query-word set must
// match the vocabulary; the step counter is reset.
VgsModelParams transfer_init(const std::filesystem::path& checkpoint,
                             const Vocabulary& vocab, const ModelConfig& expected);

// Adam over mean batch BCE; per-epoch dev evaluation; returns the
// best-dev-F1 parameters. Checkpoints are written under `out_dir` when it
// is non-empty. Aborts with the offending batch id if the loss diverges.
std::pair<VgsModelParams, TrainReport> train(const CorpusHandles& corpus,
                                             const ModelConfig& model_config,
                                             const TrainConfig& config,
                                             const std::filesystem::path& out_dir = {});

std::string serialize_report(const TrainReport& report, const TrainConfig& config);
void save_report(const std::filesystem::path& path, const TrainReport& report,
                 const TrainConfig& config);

}  // namespace vgkws

#endif  // VGKWS_TRAINING_HPP_
