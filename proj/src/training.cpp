// vgkws/training.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace vgkws {

namespace {

constexpr double kProbClamp = 1e-7;

struct AdamState {
  VgsModelParams m;
  VgsModelParams v;
  std::int64_t step = 0;
};

void adam_update(VgsModelParams& params, const VgsModelParams& grads, AdamState& state,
                 const TrainConfig& config) {
  ++state.step;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  auto p_list = params.tensors();
  auto g_list = const_cast<VgsModelParams&>(grads).tensors();
  auto m_list = state.m.tensors();
  auto v_list = state.v.tensors();
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    Eigen::MatrixXd& p = *p_list[i];
    const Eigen::MatrixXd& g = *g_list[i];
    Eigen::MatrixXd& m = *m_list[i];
    Eigen::MatrixXd& v = *v_list[i];
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    p.array() -= config.learning_rate * (m.array() / bias1) /
                 ((v.array() / bias2).sqrt() + config.adam_epsilon);
  }
}

}  // namespace

double bce_loss(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
  if (predictions.size() != targets.size()) {
    throw UsageError("bce_loss: length mismatch " + std::to_string(predictions.size()) +
                     " vs " + std::to_string(targets.size()));
  }
  if (predictions.size() == 0) throw UsageError("bce_loss: empty inputs");
  if (!predictions.allFinite() || !targets.allFinite()) {
    throw UsageError("bce_loss: NaN input");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    double p = std::clamp(predictions[i], kProbClamp, 1.0 - kProbClamp);
    double y = targets[i];
    sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return sum / static_cast<double>(predictions.size());
}

bool caption_contains_word(const std::string& caption, const std::string& word) {
  std::vector<std::string> tokens = tokenize_caption(caption);
  std::vector<std::string> word_tokens = tokenize_caption(word);
  if (word_tokens.size() != 1) return false;
  return std::find(tokens.begin(), tokens.end(), word_tokens[0]) != tokens.end();
}

double dev_f1(const VgsModelParams& params, const std::vector<UtteranceRecord>& dev_records,
              const Vocabulary& vocab, const FeatureProvider& features, double theta) {
  if (dev_records.empty()) throw UsageError("dev_f1: empty dev set");
  long tp = 0, fp = 0, fn = 0;
  for (const UtteranceRecord& rec : dev_records) {
    Eigen::VectorXd scores = forward_all(features(rec), params);
    for (int w = 0; w < vocab.size(); ++w) {
      bool present = caption_contains_word(rec.caption_target, vocab.target_word(w));
      bool detected = scores[w] > theta;
      if (detected && present) ++tp;
      else if (detected) ++fp;
      else if (present) ++fn;
    }
  }
  if (tp == 0) return 0.0;
  double precision = static_cast<double>(tp) / (tp + fp);
  double recall = static_cast<double>(tp) / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

VgsModelParams transfer_init(const std::filesystem::path& checkpoint,
                             const Vocabulary& vocab, const ModelConfig& expected) {
  VgsModelParams params = load_checkpoint(checkpoint, vocab, /*allow_transfer_vocab=*/true);
  if (!params.config.same_architecture(expected)) {
    std::ostringstream msg;
    msg << "transfer_init: architecture mismatch (checkpoint W=" << params.config.vocab_size
        << " D=" << params.config.input_dim << " d_k=" << params.config.keyword_dim
        << " vs expected W=" << expected.vocab_size << " D=" << expected.input_dim
        << " d_k=" << expected.keyword_dim << ")";
    throw DataError(msg.str());
  }
  params.train_steps = 0;
  // Rebind the vocabulary fingerprints to the new corpus; the query words
  // were verified identical by load_checkpoint.
  params.vocab_hash_full = vocab.hash_full();
  params.vocab_hash_query = vocab.hash_query();
  return params;
}

std::pair<VgsModelParams, TrainReport> train(const CorpusHandles& corpus,
                                             const ModelConfig& model_config,
                                             const TrainConfig& config,
                                             const std::filesystem::path& out_dir) {
  if (corpus.manifest == nullptr || corpus.vocab == nullptr || corpus.targets == nullptr ||
      !corpus.features) {
    throw UsageError("train: incomplete corpus handles");
  }
  if (config.learning_rate <= 0.0) throw UsageError("learning_rate must be > 0");
  if (config.batch_size < 1) throw UsageError("batch_size must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  const Vocabulary& vocab = *corpus.vocab;

  std::vector<const UtteranceRecord*> train_set;
  std::vector<const UtteranceRecord*> dev_set;
  for (const UtteranceRecord& rec : *corpus.manifest) {
    if (rec.split == Split::kTrain) {
      if (rec.visual_target_id.empty() ||
          corpus.targets->find(rec.visual_target_id) == nullptr) {
        throw DataError("train utterance '" + rec.utterance_id +
                        "' has no visual-target vector");
      }
      train_set.push_back(&rec);
    } else if (rec.split == Split::kDev) {
      dev_set.push_back(&rec);
    }
  }
  if (train_set.empty()) throw DataError("train: no train-split utterances");

  VgsModelParams params =
      config.init_checkpoint
          ? transfer_init(*config.init_checkpoint, vocab, model_config)
          : init_params(model_config, vocab, config.seed);

  TrainReport report;
  report.seed = config.seed;
  if (config.init_checkpoint) report.init_checkpoint = config.init_checkpoint->string();

  VgsModelParams best_params = params;
  double best_f1 = -1.0;

  AdamState adam{zeros_like(params), zeros_like(params)};
  VgsModelParams grads = zeros_like(params);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5deece66dull);

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto dev_eval = [&](const VgsModelParams& p) {
    if (dev_set.empty()) return 0.0;
    std::vector<UtteranceRecord> recs;
    recs.reserve(dev_set.size());
    for (const UtteranceRecord* r : dev_set) recs.push_back(*r);
    return dev_f1(p, recs, vocab, corpus.features, config.theta_dev);
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t n_examples = 0;
    int batch_id = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (Eigen::MatrixXd* g : grads.tensors()) g->setZero();

      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const UtteranceRecord& rec = *train_set[order[i]];
        FeatureSequence feats = corpus.features(rec);
        if (!config.augment.is_identity()) {
          std::uint64_t aug_seed =
              fnv1a64(rec.utterance_id,
                      config.seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(epoch));
          feats = spec_augment(feats, config.augment, aug_seed);
        }
        const Eigen::VectorXd& target = *corpus.targets->find(rec.visual_target_id);
        batch_loss += loss_and_gradients(feats, target, params, grads);
      }
      const double batch_n = static_cast<double>(end - start);
      batch_loss /= batch_n;
      for (Eigen::MatrixXd* g : grads.tensors()) *g /= batch_n;

      if (!std::isfinite(batch_loss)) {
        throw DataError("training diverged (NaN loss) at epoch " + std::to_string(epoch) +
                        " batch " + std::to_string(batch_id));
      }
      adam_update(params, grads, adam, config);
      params.train_steps = adam.step;
      epoch_loss += batch_loss * batch_n;
      n_examples += end - start;
      ++batch_id;
    }

    report.loss_curve.push_back(epoch_loss / static_cast<double>(n_examples));
    double f1 = dev_eval(params);
    report.dev_f1_curve.push_back(f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_params = params;
      report.best_epoch = epoch;
    }
  }

  if (config.epochs == 0) {
    best_params = params;
    report.best_epoch = -1;
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    auto ckpt = out_dir / ("checkpoint_seed" + std::to_string(config.seed) + ".bin");
    save_checkpoint(ckpt, best_params);
    report.best_checkpoint_path = ckpt.string();
  }
  report.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(best_params), std::move(report)};
}

std::string serialize_report(const TrainReport& report, const TrainConfig& config) {
  std::ostringstream out;
  out << "seed: " << report.seed << "\n";
  out << "learning_rate: " << config.learning_rate << "\n";
  out << "batch_size: " << config.batch_size << "\n";
  out << "epochs: " << config.epochs << "\n";
  out << "theta_dev: " << config.theta_dev << "\n";
  out << "init_checkpoint: " << (report.init_checkpoint.empty() ? "(random)" : report.init_checkpoint)
      << "\n";
  out << "best_epoch: " << report.best_epoch << "\n";
  // Wall-clock time is reported on stdout only; keeping it out of the file
  // makes re-runs with the same seed byte-identical.
  out << "best_checkpoint: " << report.best_checkpoint_path << "\n";
  out << "epoch,loss,dev_f1\n";
  for (std::size_t i = 0; i < report.loss_curve.size(); ++i) {
    out << (i + 1) << "," << report.loss_curve[i] << "," << report.dev_f1_curve[i] << "\n";
  }
  return out.str();
}

void save_report(const std::filesystem::path& path, const TrainReport& report,
                 const TrainConfig& config) {
  write_file_atomic(path, serialize_report(report, config));
}

}  // namespace vgkws
