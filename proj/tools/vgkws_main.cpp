// tools/vgkws_main.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line entry point: synth, validate, train, eval, localise,
// cooccur. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <CLI11.hpp>

#include "vgkws/cli.hpp"

int main(int argc, char** argv) {
  using namespace vgkws::cli;

  CLI::App app{"Visually-grounded cross-lingual keyword detection and localisation"};
  app.require_subcommand(1);

  // synth
  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Generation seed");
  synth_cmd->add_option("--vocab-size", synth.spec.vocab_size, "Number of keywords");
  synth_cmd->add_option("--train", synth.spec.n_train, "Train utterance count");
  synth_cmd->add_option("--dev", synth.spec.n_dev, "Dev utterance count");
  synth_cmd->add_option("--test", synth.spec.n_test, "Test utterance count");
  synth_cmd->add_option("--min-duration", synth.spec.min_duration_s, "Minimum duration (s)");
  synth_cmd->add_option("--max-duration", synth.spec.max_duration_s, "Maximum duration (s)");
  synth_cmd->add_option("--prior", synth.spec.keyword_prior, "Per-keyword presence prior");
  synth_cmd->add_option("--target-noise", synth.spec.target_noise,
                        "Visual target jitter in [0,1)");
  synth_cmd->add_option("--pitch-shift", synth.spec.pitch_shift_hz,
                        "Signature pitch shift (Hz), for 'second language' corpora");
  synth_cmd->add_option("--id-prefix", synth.spec.id_prefix, "Utterance id prefix");

  // validate
  ValidateOptions validate;
  auto* validate_cmd = app.add_subcommand("validate", "Validate corpus files");
  validate_cmd->add_option("--manifest", validate.manifest, "Manifest JSONL")->required();
  validate_cmd->add_option("--vocab", validate.vocab, "Vocabulary CSV")->required();
  validate_cmd->add_option("--alignments", validate.alignments, "Alignments CSV");
  validate_cmd->add_option("--targets", validate.targets, "Visual targets CSV");
  validate_cmd->add_flag("--check-audio", validate.check_audio,
                         "Read every audio file and cross-check durations");

  // train
  std::string train_config_path;
  std::vector<std::uint64_t> train_seeds;
  auto* train_cmd = app.add_subcommand("train", "Train one run per seed from a config file");
  train_cmd->add_option("--config", train_config_path, "Experiment config file")->required();
  train_cmd->add_option("--seeds", train_seeds, "Override the config's seed list")
      ->delimiter(',');

  // eval
  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Model checkpoint");
  eval_cmd->add_option("--manifest", eval.manifest, "Manifest JSONL")->required();
  eval_cmd->add_option("--vocab", eval.vocab, "Vocabulary CSV")->required();
  eval_cmd->add_option("--alignments", eval.alignments, "Alignments CSV")->required();
  eval_cmd->add_option("--out", eval.out_dir, "Output directory")->required();
  eval_cmd->add_option("--theta", eval.theta, "Detection threshold (default 0.5)");
  eval_cmd->add_option("--baseline", eval.baseline, "'random' for the random baseline");
  eval_cmd->add_option("--seed", eval.seed, "Seed for the random baseline");
  eval_cmd->add_flag("--allow-transfer-vocab", eval.allow_transfer_vocab,
                     "Only require matching query words, not the full vocabulary");

  // localise
  LocaliseOptions localise;
  auto* localise_cmd = app.add_subcommand("localise", "Locate a query word in one utterance");
  localise_cmd->add_option("--checkpoint", localise.checkpoint, "Model checkpoint")->required();
  localise_cmd->add_option("--audio", localise.audio, "16 kHz mono WAV file")->required();
  localise_cmd->add_option("--query", localise.query_word, "Query-language keyword")->required();
  localise_cmd->add_option("--theta", localise.theta, "Detection threshold (default 0.5)");
  localise_cmd->add_option("--out", localise.out_prefix,
                           "Output prefix for the attention CSV and plot");
  localise_cmd->add_flag("--plot", localise.plot, "Also write a BMP plot");

  // cooccur
  CooccurOptions cooccur;
  auto* cooccur_cmd =
      app.add_subcommand("cooccur", "Keyword co-occurrence matrix from paired captions");
  cooccur_cmd->add_option("--manifest", cooccur.manifest, "Manifest JSONL")->required();
  cooccur_cmd->add_option("--vocab", cooccur.vocab, "Vocabulary CSV")->required();
  cooccur_cmd->add_option("--out", cooccur.out_dir, "Output directory")->required();
  cooccur_cmd->add_flag("--plot", cooccur.plot, "Also write a BMP heatmap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (synth_cmd->parsed()) return cmd_synth(synth);
  if (validate_cmd->parsed()) return cmd_validate(validate);
  if (train_cmd->parsed()) return cmd_train(train_config_path, train_seeds);
  if (eval_cmd->parsed()) return cmd_eval(eval);
  if (localise_cmd->parsed()) return cmd_localise(localise);
  if (cooccur_cmd->parsed()) return cmd_cooccur(cooccur);
  return kExitUsage;
}
