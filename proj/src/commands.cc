// src/commands.cc

// Copyright 2026  The DPLDA Backend Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dplda/commands.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "dplda/config.h"
#include "dplda/errors.h"
#include "dplda/metrics.h"
#include "dplda/model_store.h"

namespace dplda {

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

// Per-command path flags, keyed by config key.
using PathFlags = std::map<std::string, std::string>;

RunConfig EffectiveConfig(const Common &common, const PathFlags &paths) {
  RunConfig cfg = common.config_path.empty() ? RunConfig()
                                             : RunConfig::FromFile(common.config_path);
  for (const std::string &o : common.overrides) cfg.ApplyOverride(o);
  if (common.seed) cfg.Set("run.seed", std::to_string(*common.seed));
  for (const auto &[key, value] : paths)
    if (!value.empty()) cfg.Set(key, value);
  return cfg;
}

std::string Require(const RunConfig &cfg, const std::string &key, const std::string &flag) {
  const std::string &v = cfg.Get(key);
  if (v.empty()) throw ValidationError("missing " + flag + " (or " + key + " in the config)");
  return v;
}

std::string OutPath(const std::string &dir, const std::string &name) {
  return (std::filesystem::path(dir) / name).string();
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeError("cannot write '" + path + "'");
  os << text;
  if (!os) throw RuntimeError("write failed for '" + path + "'");
}

BundleInfo InfoFor(const RunConfig &cfg) {
  BundleInfo info;
  info.config = cfg.ToJson();
  return info;
}

// Within-domain trials, same-session pairs excluded, in domain order.
TrialSet EvaluationTrials(const Dataset &data) {
  TrialSet all;
  for (const std::string &dom : data.Domains()) {
    TrialSet t = BuildTrials(SubsetByDomain(data, dom),
                             TrialPolicy::kExhaustiveExcludingSameSession);
    all.insert(all.end(), t.begin(), t.end());
  }
  return all;
}

void CmdSynth(const RunConfig &cfg, const std::string &out) {
  const SynthSettings s = cfg.Synth();
  const Dataset all = Generate(cfg.MakeSynthSpec());
  const CorpusSplit split =
      SplitBySpeaker(all, s.dev_fraction, s.eval_fraction, cfg.Seed());
  SaveDataset(split.train, OutPath(out, "train.emb"), OutPath(out, "train.tsv"));
  SaveDataset(split.dev, OutPath(out, "dev.emb"), OutPath(out, "dev.tsv"));
  SaveDataset(split.eval, OutPath(out, "eval.emb"), OutPath(out, "eval.tsv"));
  WriteTrials(EvaluationTrials(split.dev), OutPath(out, "dev_trials.tsv"));
  WriteTrials(EvaluationTrials(split.eval), OutPath(out, "eval_trials.tsv"));
}

Dataset LoadTrain(const RunConfig &cfg) {
  return LoadDataset(Require(cfg, "paths.train_embeddings", "--train-emb"),
                     Require(cfg, "paths.train_metadata", "--train-meta"));
}

void CmdTrainCnet(const RunConfig &cfg, const std::string &out) {
  ConditionNetReport report;
  ConditionNet net = TrainConditionNet(LoadTrain(cfg), cfg.CnetConfig(), &report);
  SaveConditionNet(net, OutPath(out, "cnet.bundle"), InfoFor(cfg));
  nlohmann::json j = {{"epoch_loss", report.epoch_loss},
                      {"train_accuracy", report.train_accuracy}};
  WriteText(OutPath(out, "cnet_report.json"), j.dump(1) + "\n");
}

void CmdTrain(const RunConfig &cfg, const std::string &out) {
  const Dataset train = LoadTrain(cfg);
  DevSet dev{LoadDataset(Require(cfg, "paths.dev_embeddings", "--dev-emb"),
                         Require(cfg, "paths.dev_metadata", "--dev-meta")),
             ReadTrials(Require(cfg, "paths.dev_trials", "--dev-trials"))};
  const InitConfig init = cfg.Init();
  ConditionNet cnet;
  if (init.mode == CalibrationMode::kMeta)
    cnet = LoadConditionNet(Require(cfg, "paths.cnet", "--cnet"));
  else if (!cfg.Get("paths.cnet").empty())
    cnet = LoadConditionNet(cfg.Get("paths.cnet"));

  const int k = cfg.NumSeeds();
  if (k < 1) throw ValidationError("train.num_seeds must be >= 1");
  BackendModel model;
  TrainReport report;
  if (k == 1) {
    model = Train(InitializeBackend(train, cnet, init), train, dev, cfg.Train(), &report);
  } else {
    MultiseedResult r = MultiseedTrain(k, cfg.Train(), init, train, dev, cnet);
    model = r.best;
    report = r.reports[r.best_index];
    nlohmann::json j = {{"seeds", r.seeds},
                        {"dev_actual_cllr", r.dev_actual_cllr},
                        {"best_index", r.best_index},
                        {"dev_spread", r.DevSpread()}};
    WriteText(OutPath(out, "multiseed.json"), j.dump(1) + "\n");
  }
  SaveBackendModel(model, OutPath(out, "model.bundle"), InfoFor(cfg));
  WriteText(OutPath(out, "train_report.jsonl"), report.ToJsonLines());
}

void CmdBaseline(const RunConfig &cfg, const std::string &out) {
  const InitConfig init = cfg.Init();
  ConditionNet cnet;
  if (!cfg.Get("paths.cnet").empty()) cnet = LoadConditionNet(cfg.Get("paths.cnet"));
  BackendModel model = InitializeBackend(LoadTrain(cfg), cnet, init);
  SaveBackendModel(model, OutPath(out, "model.bundle"), InfoFor(cfg));
}

void CmdScore(const RunConfig &cfg, const std::string &out) {
  const BackendModel model = LoadBackendModel(Require(cfg, "paths.model", "--model"));
  const std::string emb = Require(cfg, "paths.eval_embeddings", "--emb");
  const std::string meta = cfg.Get("paths.eval_metadata");
  Dataset data;
  if (!meta.empty()) {
    data = LoadDataset(emb, meta);
  } else {
    // Scoring needs only the vectors; identities are placeholders.
    std::vector<SegmentRecord> records;
    for (auto &[id, x] : ReadEmbeddings(emb))
      records.push_back({id, id, id, "unknown", "", std::move(x)});
    data = Dataset(std::move(records));
  }
  const TrialSet trials = ReadTrials(Require(cfg, "paths.eval_trials", "--trials"));
  const std::string dest =
      cfg.Get("paths.scores").empty() ? OutPath(out, "scores.tsv") : cfg.Get("paths.scores");
  WriteScores(ScoreTrials(model, data, trials), dest);
}

nlohmann::json ReportJson(const EvalReport &r) {
  return {{"actual_cllr", r.actual_cllr}, {"min_cllr", r.min_cllr},
          {"calibration_gap", r.CalibrationGap()}, {"eer", r.eer},
          {"n_target", r.n_target}, {"n_impostor", r.n_impostor}};
}

void CmdEval(const RunConfig &cfg, const std::string &out) {
  const ScoreSet scores = ReadScores(Require(cfg, "paths.scores", "--scores"));
  if (scores.llr.empty()) throw ValidationError("score file carries no llr column");

  std::vector<std::pair<std::string, EvalReport>> rows;
  rows.emplace_back("all", Evaluate(SplitByLabel(scores.trials, scores.llr)));
  const std::string meta = cfg.Get("paths.eval_metadata");
  if (!meta.empty()) {
    // Per-domain breakdown over within-domain trials.
    std::map<std::string, std::string> domain_of;
    {
      std::ifstream is(meta);
      if (!is) throw ValidationError("metadata file not found: '" + meta + "'");
      std::string line;
      std::getline(is, line);
      while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string seg, spk, ses, dom;
        std::getline(ls, seg, '\t');
        std::getline(ls, spk, '\t');
        std::getline(ls, ses, '\t');
        std::getline(ls, dom, '\t');
        if (!seg.empty()) domain_of[seg] = dom;
      }
    }
    std::map<std::string, std::pair<TrialSet, std::vector<double>>> groups;
    for (std::size_t i = 0; i < scores.trials.size(); ++i) {
      auto a = domain_of.find(scores.trials[i].enroll_id);
      auto b = domain_of.find(scores.trials[i].test_id);
      if (a == domain_of.end() || b == domain_of.end() || a->second != b->second) continue;
      groups[a->second].first.push_back(scores.trials[i]);
      groups[a->second].second.push_back(scores.llr[i]);
    }
    for (const auto &[dom, g] : groups)
      rows.emplace_back("domain:" + dom, Evaluate(SplitByLabel(g.first, g.second)));
  }

  std::ostringstream tsv;
  tsv << "subset\tactual_cllr\tmin_cllr\tcalibration_gap\teer\tn_target\tn_impostor\n";
  nlohmann::json j = nlohmann::json::object();
  double summed_gap = 0.0;
  for (const auto &[name, r] : rows) {
    tsv << name << '\t' << r.actual_cllr << '\t' << r.min_cllr << '\t' << r.CalibrationGap()
        << '\t' << r.eer << '\t' << r.n_target << '\t' << r.n_impostor << '\n';
    j["subsets"][name] = ReportJson(r);
    if (name != "all") summed_gap += r.CalibrationGap();
  }
  if (rows.size() > 1) j["summed_domain_calibration_gap"] = summed_gap;
  WriteText(OutPath(out, "eval_report.tsv"), tsv.str());
  WriteText(OutPath(out, "eval_report.json"), j.dump(1) + "\n");
}

}  // namespace

int RunCli(int argc, const char *const *argv) {
  CLI::App app{"Discriminative PLDA speaker-verification backend"};
  app.fallthrough();
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Seed, overriding run.seed");
  app.add_option("--out-dir", common.out_dir, "Output directory");
  app.add_option("--set", common.overrides, "Config override section.key=value");

  PathFlags paths;
  auto path_flag = [&paths](CLI::App *cmd, const std::string &flag, const std::string &key,
                            const std::string &help) {
    cmd->add_option(flag, paths[key], help);
  };
  CLI::App *synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  CLI::App *cnet = app.add_subcommand("train-cnet", "Train the condition network");
  path_flag(cnet, "--train-emb", "paths.train_embeddings", "Training embeddings");
  path_flag(cnet, "--train-meta", "paths.train_metadata", "Training metadata");
  CLI::App *train = app.add_subcommand("train", "Initialize and discriminatively train");
  path_flag(train, "--train-emb", "paths.train_embeddings", "Training embeddings");
  path_flag(train, "--train-meta", "paths.train_metadata", "Training metadata");
  path_flag(train, "--dev-emb", "paths.dev_embeddings", "Development embeddings");
  path_flag(train, "--dev-meta", "paths.dev_metadata", "Development metadata");
  path_flag(train, "--dev-trials", "paths.dev_trials", "Development trials");
  path_flag(train, "--cnet", "paths.cnet", "Condition-network bundle");
  CLI::App *baseline = app.add_subcommand("baseline", "PLDA with global calibration");
  path_flag(baseline, "--train-emb", "paths.train_embeddings", "Training embeddings");
  path_flag(baseline, "--train-meta", "paths.train_metadata", "Training metadata");
  path_flag(baseline, "--cnet", "paths.cnet", "Condition-network bundle (optional)");
  CLI::App *score = app.add_subcommand("score", "Score a trial list");
  path_flag(score, "--model", "paths.model", "Model bundle");
  path_flag(score, "--emb", "paths.eval_embeddings", "Embeddings");
  path_flag(score, "--meta", "paths.eval_metadata", "Metadata (optional)");
  path_flag(score, "--trials", "paths.eval_trials", "Trial list");
  path_flag(score, "--output", "paths.scores", "Score file (default <out-dir>/scores.tsv)");
  CLI::App *eval = app.add_subcommand("eval", "Evaluate a labelled score file");
  path_flag(eval, "--scores", "paths.scores", "Score file with labels");
  path_flag(eval, "--meta", "paths.eval_metadata", "Metadata for a per-domain breakdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg = EffectiveConfig(common, paths);
    if (baseline->parsed()) cfg.Set("backend.mode", "global_cal");
    const std::string &out = common.out_dir;
    std::filesystem::create_directories(out);
    cfg.WriteEffective(out);
    if (synth->parsed()) CmdSynth(cfg, out);
    else if (cnet->parsed()) CmdTrainCnet(cfg, out);
    else if (train->parsed()) CmdTrain(cfg, out);
    else if (baseline->parsed()) CmdBaseline(cfg, out);
    else if (score->parsed()) CmdScore(cfg, out);
    else if (eval->parsed()) CmdEval(cfg, out);
  } catch (const ValidationError &e) {
    std::cerr << "dplda-backend: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception &e) {
    std::cerr << "dplda-backend: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int RunCli(const std::vector<std::string> &args) {
  std::vector<const char *> argv{"dplda-backend"};
  for (const std::string &a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace dplda
