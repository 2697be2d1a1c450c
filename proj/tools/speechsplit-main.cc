// tools/speechsplit-main.cc

// Copyright 2026  The SpeechSplit C++ Authors

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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "speechsplit/converter.h"
#include "speechsplit/dataset.h"
#include "speechsplit/evalrun.h"
#include "speechsplit/persistence.h"
#include "speechsplit/plot.h"
#include "speechsplit/probes.h"
#include "speechsplit/synthgen.h"
#include "speechsplit/trainer.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace speechsplit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

json full_default_config() {
  json j;
  j["format_version"] = 1;
  j["features"] = json::parse(feature_config_to_json(FeatureConfig{}));
  j["model"] = json::parse(model_config_to_json(default_model_config(0)));
  j["train"] = json::parse(train_config_to_json(TrainConfig{}));
  SynthConfig sc;
  j["synth"] = {{"n_templates", sc.n_templates},
                {"syllables_min", sc.syllables_min},
                {"syllables_max", sc.syllables_max},
                {"duration_min", sc.duration_min},
                {"duration_max", sc.duration_max},
                {"gap_frames", sc.gap_frames}};
  ProbeThresholds pt;
  j["probe_thresholds"] = {{"rhythm_energy_ratio", pt.rhythm_energy_ratio},
                           {"pitch_f0_var_ratio", pt.pitch_f0_var_ratio},
                           {"content_env_corr", pt.content_env_corr},
                           {"content_energy_min", pt.content_energy_min},
                           {"timbre_offset_shift", pt.timbre_offset_shift},
                           {"unused_path_mse", pt.unused_path_mse},
                           {"trained_recon_corr", pt.trained_recon_corr}};
  return j;
}

struct LoadedConfig {
  FeatureConfig features;
  ModelConfig model;
  TrainConfig train;
};

LoadedConfig load_config_file(const std::string& path) {
  json j = json::parse(read_file_bytes(path));
  if (j.contains("format_version") && j.at("format_version").get<int>() != 1)
    throw DataError(path + ": unsupported config format version");
  LoadedConfig cfg;
  json defaults = full_default_config();
  json merged = defaults;
  merged.merge_patch(j);
  cfg.features = feature_config_from_json(merged.at("features").dump());
  cfg.model = model_config_from_json(merged.at("model").dump());
  cfg.train = train_config_from_json(merged.at("train").dump());
  return cfg;
}

Checkpoint make_checkpoint(const std::string& kind, const ModelConfig& mcfg,
                           const FeatureConfig& fcfg, int64_t steps, uint64_t seed,
                           const ParamStore<float>& params, Adam<float>* opt) {
  Checkpoint ckpt;
  ckpt.kind = kind;
  ckpt.model_cfg = mcfg;
  ckpt.feat_cfg = fcfg;
  ckpt.steps_trained = steps;
  ckpt.seed = seed;
  ckpt.params = params;
  if (opt != nullptr) {
    AdamState st;
    st.step_count = opt->step_count();
    st.m = opt->moment1();
    st.v = opt->moment2();
    ckpt.optimizer = std::move(st);
  }
  return ckpt;
}

// Run-directory layout: resolved config + seed snapshot, append-only loss
// log, periodic checkpoints and a "latest" checkpoint for resuming.
template <typename ModelT, typename TrainFn>
int run_training(const std::string& kind, const std::string& config_path,
                 const std::string& data_dir, const std::string& run_dir,
                 const TrainFn& train_fn) {
  LoadedConfig cfg = config_path.empty() ? LoadedConfig{}
                                         : load_config_file(config_path);
  Corpus corpus = load_corpus(data_dir);
  if (cfg.model.n_speakers == 0)
    cfg.model.n_speakers = static_cast<int>(corpus.speaker_names.size());

  fs::create_directories(run_dir);
  json snapshot;
  snapshot["format_version"] = 1;
  snapshot["kind"] = kind;
  snapshot["seed"] = cfg.train.seed;
  snapshot["features"] = json::parse(feature_config_to_json(cfg.features));
  snapshot["model"] = json::parse(model_config_to_json(cfg.model));
  snapshot["train"] = json::parse(train_config_to_json(cfg.train));
  atomic_write_file((fs::path(run_dir) / "config.json").string(), snapshot.dump(2));

  ModelT model(cfg.model, cfg.train.seed);
  AdamConfig acfg;
  acfg.lr = cfg.train.learning_rate;
  acfg.weight_decay = cfg.train.weight_decay;
  acfg.grad_clip = cfg.train.grad_clip;
  Adam<float> opt(model.params(), acfg);

  int64_t start_step = 0;
  fs::path latest = fs::path(run_dir) / "ckpt_latest.ssck";
  if (fs::exists(latest)) {
    Checkpoint ckpt = read_checkpoint(latest.string());
    if (ckpt.kind != kind)
      throw DataError(latest.string() + ": checkpoint kind '" + ckpt.kind +
                      "' does not match this command");
    if (!(ckpt.model_cfg == cfg.model))
      throw DataError(latest.string() +
                      ": checkpoint model config does not match; refusing to load");
    model.params() = ckpt.params;
    if (ckpt.optimizer.has_value()) {
      opt.set_step_count(ckpt.optimizer->step_count);
      opt.moment1() = ckpt.optimizer->m;
      opt.moment2() = ckpt.optimizer->v;
    }
    start_step = ckpt.steps_trained;
    std::cout << "resuming from step " << start_step << "\n";
  }

  std::ofstream loss_log((fs::path(run_dir) / "loss_log.csv").string(),
                         std::ios::app);
  if (start_step == 0) loss_log << "step,loss,wall_time\n";
  auto t0 = std::chrono::steady_clock::now();

  TrainHooks hooks;
  hooks.on_step = [&](int64_t step, double loss, double smoothed) {
    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0).count();
    loss_log << step << "," << loss << "," << wall << "\n";
    if (cfg.train.log_every > 0 && step % cfg.train.log_every == 0) {
      loss_log.flush();
      std::cout << "step " << step << " loss " << loss << " smoothed " << smoothed
                << "\n";
    }
  };
  hooks.on_checkpoint = [&](int64_t step) {
    Checkpoint ckpt = make_checkpoint(kind, cfg.model, cfg.features, step,
                                      cfg.train.seed, model.params(), &opt);
    write_checkpoint(
        (fs::path(run_dir) / ("ckpt_" + std::to_string(step) + ".ssck")).string(),
        ckpt);
    write_checkpoint(latest.string(), ckpt);
  };

  TrainResult result = train_fn(model, corpus.train_items(), cfg.train, opt,
                                hooks, start_step);
  Checkpoint ckpt = make_checkpoint(kind, cfg.model, cfg.features,
                                    result.steps_run, cfg.train.seed,
                                    model.params(), &opt);
  write_checkpoint(latest.string(), ckpt);
  std::cout << "trained " << kind << " to step " << result.steps_run
            << ", final smoothed loss " << result.final_smoothed << "\n";
  return kExitOk;
}

uint16_t norm_to_canonical_bin(double u) {
  SynthConfig sc;
  double n = (u - sc.canonical_mean) / (4.0 * sc.canonical_std) + 0.5;
  n = std::clamp(n, 0.0, 1.0);
  return static_cast<uint16_t>(std::min(static_cast<int>(n * 256.0), 255));
}

std::vector<uint16_t> bins_from_output(const Matf& mel) {
  SynthAnalysisParams ap;
  std::vector<double> u = estimate_f0_norm(mel, ap);
  std::vector<uint16_t> bins(u.size(), kUnvoicedBin);
  for (size_t t = 0; t < u.size(); ++t)
    if (u[t] >= 0.0) bins[t] = norm_to_canonical_bin(u[t]);
  return bins;
}

int cmd_features(const std::string& audio_dir, const std::string& out_dir,
                 const std::string& speaker_map_path) {
  json map = json::parse(read_file_bytes(speaker_map_path));
  FeatureConfig fcfg;
  struct Raw {
    std::string id, speaker;
    Matf mel;
    PitchContour contour;
  };
  std::vector<Raw> raws;
  std::map<std::string, std::vector<PitchContour>> by_speaker;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(audio_dir))
    if (e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .wav files in " + audio_dir);
  for (const auto& path : files) {
    std::string stem = path.stem().string();
    std::string key = map.contains(path.filename().string())
                          ? path.filename().string()
                          : stem;
    if (!map.contains(key))
      throw DataError("speaker map has no entry for " + path.filename().string());
    Raw raw;
    raw.id = stem;
    raw.speaker = map.at(key).get<std::string>();
    Waveform wave = load_waveform(path.string());
    raw.mel = mel_spectrogram(wave, fcfg);
    raw.contour = extract_pitch(wave, fcfg);
    raw.contour.resize(static_cast<size_t>(raw.mel.rows), 0.0f);
    by_speaker[raw.speaker].push_back(raw.contour);
    raws.push_back(std::move(raw));
  }
  Corpus corpus;
  std::map<std::string, int> speaker_index;
  for (const auto& [spk, contours] : by_speaker) {
    speaker_index[spk] = static_cast<int>(corpus.speaker_names.size());
    corpus.speaker_names.push_back(spk);
    corpus.speaker_stats[spk] = compute_speaker_stats(spk, contours);
  }
  for (auto& raw : raws) {
    Utterance utt;
    utt.id = raw.id;
    utt.speaker = speaker_index.at(raw.speaker);
    utt.mel = std::move(raw.mel);
    utt.pitch_bins =
        normalize_and_quantize(raw.contour, corpus.speaker_stats.at(raw.speaker))
            .bins;
    corpus.utterances.push_back(std::move(utt));
  }
  save_corpus(out_dir, corpus);
  std::cout << "wrote " << corpus.utterances.size() << " utterances, "
            << corpus.speaker_names.size() << " speakers to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speechsplit: rhythm/pitch/timbre/content decomposition"};
  app.require_subcommand(1);

  // features
  auto* features_cmd =
      app.add_subcommand("features", "extract features from WAV files");
  std::string audio_dir, out_path, speaker_map;
  features_cmd->add_option("audio-dir", audio_dir)->required();
  features_cmd->add_option("--out", out_path)->required();
  features_cmd->add_option("--speaker-map", speaker_map)->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic corpus");
  int synth_speakers = 8, synth_utts = 32, synth_pairs = 20;
  uint64_t synth_seed = 1;
  std::string synth_out;
  synth_cmd->add_option("--speakers", synth_speakers);
  synth_cmd->add_option("--utterances", synth_utts);
  synth_cmd->add_option("--seed", synth_seed);
  synth_cmd->add_option("--pairs", synth_pairs);
  synth_cmd->add_option("--out", synth_out)->required();

  // train / train-pitch-mini
  std::string train_config, train_data, train_out;
  auto* train_cmd = app.add_subcommand("train", "train the main model");
  train_cmd->add_option("--config", train_config);
  train_cmd->add_option("--data", train_data)->required();
  train_cmd->add_option("--out", train_out)->required();
  auto* mini_cmd =
      app.add_subcommand("train-pitch-mini", "train the pitch-contour variant");
  mini_cmd->add_option("--config", train_config);
  mini_cmd->add_option("--data", train_data)->required();
  mini_cmd->add_option("--out", train_out)->required();

  // convert
  auto* convert_cmd = app.add_subcommand("convert", "style-transfer conversions");
  std::string conv_model, conv_mini, conv_source, conv_target, conv_aspects,
      conv_out, conv_data;
  convert_cmd->add_option("--model", conv_model)->required();
  convert_cmd->add_option("--mini", conv_mini);
  convert_cmd->add_option("--data", conv_data)->required();
  convert_cmd->add_option("--source", conv_source)->required();
  convert_cmd->add_option("--target", conv_target)->required();
  convert_cmd->add_option("--aspects", conv_aspects)->required();
  convert_cmd->add_option("--out", conv_out)->required();

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "component-removal diagnostics");
  std::string probe_model, probe_data, probe_out, probe_include;
  int probe_rr_steps = 600;
  probe_cmd->add_option("--model", probe_model)->required();
  probe_cmd->add_option("--data", probe_data)->required();
  probe_cmd->add_option("--out", probe_out)->required();
  probe_cmd->add_option("--include", probe_include);
  probe_cmd->add_option("--rr-steps", probe_rr_steps);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "metrics and factor recovery");
  std::string eval_model, eval_mini, eval_data, eval_pairs, eval_out;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--mini", eval_mini);
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--pairs", eval_pairs);
  eval_cmd->add_option("--out", eval_out)->required();

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "render a feature cache file");
  std::string plot_input, plot_out;
  plot_cmd->add_option("--input", plot_input)->required();
  plot_cmd->add_option("--out", plot_out)->required();

  // init-config
  auto* init_cmd =
      app.add_subcommand("init-config", "emit the full default configuration");
  std::string init_out;
  init_cmd->add_option("--out", init_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*features_cmd) return cmd_features(audio_dir, out_path, speaker_map);

    if (*synth_cmd) {
      Corpus corpus = sample_corpus(synth_speakers, synth_utts, synth_seed,
                                    SynthConfig{}, synth_pairs);
      save_corpus(synth_out, corpus);
      std::cout << "wrote " << corpus.utterances.size() << " utterances and "
                << corpus.pairs.size() << " pairs to " << synth_out << "\n";
      return kExitOk;
    }

    if (*train_cmd)
      return run_training<SpeechSplitModel<float>>(
          "main", train_config, train_data, train_out,
          [](SpeechSplitModel<float>& m, const std::vector<TrainItem>& items,
             const TrainConfig& tc, Adam<float>& opt, const TrainHooks& hooks,
             int64_t start) {
            return train_model(m, items, tc, opt, hooks, start);
          });

    if (*mini_cmd)
      return run_training<PitchMiniModel<float>>(
          "mini", train_config, train_data, train_out,
          [](PitchMiniModel<float>& m, const std::vector<TrainItem>& items,
             const TrainConfig& tc, Adam<float>& opt, const TrainHooks& hooks,
             int64_t start) {
            return train_mini(m, items, tc, opt, hooks, start);
          });

    if (*convert_cmd) {
      Checkpoint ckpt = read_checkpoint(conv_model);
      if (ckpt.kind != "main")
        throw DataError(conv_model + ": expected a main-model checkpoint");
      SpeechSplitModel<float> model(ckpt.model_cfg, ckpt.seed);
      model.params() = ckpt.params;
      std::unique_ptr<PitchMiniModel<float>> mini;
      int64_t mini_steps = 0;
      if (!conv_mini.empty()) {
        Checkpoint mc = read_checkpoint(conv_mini);
        if (mc.kind != "mini")
          throw DataError(conv_mini + ": expected a mini-model checkpoint");
        mini = std::make_unique<PitchMiniModel<float>>(mc.model_cfg, mc.seed);
        mini->params() = mc.params;
        mini_steps = mc.steps_trained;
      }
      Corpus corpus = load_corpus(conv_data);
      fs::create_directories(conv_out);
      std::vector<std::pair<std::string, Matf>> outputs;
      if (conv_aspects == "all7") {
        outputs = enumerate_conversions(conv_source, conv_target, model,
                                        ckpt.steps_trained, mini.get(),
                                        mini_steps, corpus);
      } else {
        ConversionRequest req{conv_source, conv_target,
                              parse_aspects(conv_aspects)};
        outputs.emplace_back(aspect_set_name(req.aspects),
                             convert(req, model, ckpt.steps_trained, mini.get(),
                                     mini_steps, corpus));
      }
      for (const auto& [name, mel] : outputs) {
        std::string base = conv_source + "_to_" + conv_target + "_" + name;
        FeatureRecord rec;
        rec.utterance_id = base;
        rec.speaker_id = "converted";
        rec.mel = mel;
        rec.pitch_bins = bins_from_output(mel);
        write_feature_record((fs::path(conv_out) / (base + ".ssfc")).string(), rec);
        render_feature_plot((fs::path(conv_out) / (base + ".bmp")).string(), mel,
                            rec.pitch_bins);
      }
      std::cout << "wrote " << outputs.size() << " conversions to " << conv_out
                << "\n";
      return kExitOk;
    }

    if (*probe_cmd) {
      Checkpoint ckpt = read_checkpoint(probe_model);
      if (ckpt.kind != "main")
        throw DataError(probe_model + ": expected a main-model checkpoint");
      SpeechSplitModel<float> model(ckpt.model_cfg, ckpt.seed);
      model.params() = ckpt.params;
      Corpus corpus = load_corpus(probe_data);
      std::vector<const Utterance*> val;
      for (const auto& u : corpus.utterances)
        if (!u.test_only && val.size() < 16) val.push_back(&u);
      SynthAnalysisParams ap;
      BottleneckReport report;
      if (ckpt.steps_trained <= 0) {
        report.inconclusive = true;
      } else {
        report = bottleneck_report(model, val, ProbeThresholds{}, ap);
      }
      std::string text = report.to_text();
      json j = json::parse(report.to_json());
      if (probe_include == "rr-recon") {
        RrReconConfig rc;
        rc.model = ckpt.model_cfg;
        rc.train.total_steps = probe_rr_steps;
        rc.train.batch_size = 8;
        rc.train.crop_len = 64;
        rc.train.learning_rate = 3e-4;
        RrReconReport rr = rr_recon_probe(corpus, rc, ap);
        j["rr_recon"] = {{"mean_abs_offset", rr.mean_abs_offset},
                         {"frac_within_8", rr.frac_within_8},
                         {"negative_control_offset", rr.negative_control_offset},
                         {"final_loss", rr.final_loss},
                         {"utterances", rr.utterances}};
        text += "rr-recon probe: mean |offset| " +
                std::to_string(rr.mean_abs_offset) + " frames, within 8: " +
                std::to_string(rr.frac_within_8) + ", shuffled control " +
                std::to_string(rr.negative_control_offset) + "\n";
      }
      atomic_write_file(probe_out, text);
      atomic_write_file(probe_out + ".json", j.dump(2));
      std::cout << text;
      return kExitOk;
    }

    if (*eval_cmd) {
      Checkpoint ckpt = read_checkpoint(eval_model);
      SpeechSplitModel<float> model(ckpt.model_cfg, ckpt.seed);
      model.params() = ckpt.params;
      std::unique_ptr<PitchMiniModel<float>> mini;
      int64_t mini_steps = 0;
      if (!eval_mini.empty()) {
        Checkpoint mc = read_checkpoint(eval_mini);
        mini = std::make_unique<PitchMiniModel<float>>(mc.model_cfg, mc.seed);
        mini->params() = mc.params;
        mini_steps = mc.steps_trained;
      }
      Corpus corpus = load_corpus(eval_data);
      if (!eval_pairs.empty()) {
        corpus.pairs.clear();
        json pj = json::parse(read_file_bytes(eval_pairs));
        for (const auto& p : pj)
          corpus.pairs.push_back({p.at("source").get<std::string>(),
                                  p.at("target").get<std::string>()});
      }
      std::vector<EvalRow> rows = evaluate_pairs(
          model, ckpt.steps_trained, mini.get(), mini_steps, corpus);
      write_eval_csv(eval_out, rows);
      std::cout << "wrote " << rows.size() << " rows to " << eval_out << "\n";
      return kExitOk;
    }

    if (*plot_cmd) {
      FeatureRecord rec = read_feature_record(plot_input);
      render_feature_plot(plot_out, rec.mel, rec.pitch_bins);
      std::cout << "wrote " << plot_out << "\n";
      return kExitOk;
    }

    if (*init_cmd) {
      std::string text = full_default_config().dump(2) + "\n";
      if (init_out.empty())
        std::cout << text;
      else
        atomic_write_file(init_out, text);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
