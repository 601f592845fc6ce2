// SPDX-License-Identifier: Apache-2.0
// Command-line front end: dataset synthesis, training, evaluation,
// prediction, gate statistics, and the ablation suite.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "grnet/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw grnet::DataError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw grnet::DataError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

grnet::StagePlan plan_by_name(const std::string& name) {
  if (name == "tiny") return grnet::StagePlan::tiny();
  if (name == "desk") return grnet::StagePlan::desk();
  if (name == "resnet50") return grnet::StagePlan::resnet50();
  throw grnet::ConfigError("unknown plan '" + name + "' (valid: tiny, desk, resnet50)");
}

// Shared option bundle; a JSON config file provides section defaults and
// explicit flags override individual keys.
struct CommonConfig {
  std::string config_file;
  std::string preset_name;
  std::string plan_name;
  grnet::ModelConfig model;
  grnet::TrainConfig train = grnet::TrainConfig::desk();
  grnet::SynthSpec synth;

  void load_file_sections() {
    if (config_file.empty()) return;
    json j;
    try {
      j = json::parse(read_text(config_file));
    } catch (const json::exception& e) {
      throw grnet::ConfigError("malformed config file: " + std::string(e.what()));
    }
    if (j.contains("model")) model = grnet::model_config_from_json(j.at("model").dump());
    if (j.contains("train")) train = grnet::train_config_from_json(j.at("train").dump());
    if (j.contains("synth")) {
      const json& s = j.at("synth");
      if (s.contains("n_samples")) synth.n_samples = s.at("n_samples").get<int64_t>();
      if (s.contains("image_size")) synth.image_size = s.at("image_size").get<int64_t>();
      if (s.contains("depth_mode"))
        synth.depth_mode = grnet::depth_mode_from_string(s.at("depth_mode").get<std::string>());
      if (s.contains("rgb_mode"))
        synth.rgb_mode = grnet::rgb_mode_from_string(s.at("rgb_mode").get<std::string>());
      if (s.contains("seed")) synth.seed = s.at("seed").get<uint64_t>();
    }
  }
};

void add_model_options(CLI::App* cmd, CommonConfig& cc) {
  cmd->add_option("--config", cc.config_file, "JSON config file (sections: model, train, synth)");
  cmd->add_option("--preset", cc.preset_name, "ablation preset name (see preset-list)");
  cmd->add_option("--plan", cc.plan_name, "stage plan: tiny, desk, resnet50");
  cmd->add_option("--size", cc.model.input_size, "network input size (multiple of 32)");
}

void add_train_options(CLI::App* cmd, CommonConfig& cc) {
  cmd->add_option("--seed", cc.train.seed, "run seed");
  cmd->add_option("--steps", cc.train.max_steps, "step cap (0 = epochs only)");
  cmd->add_option("--epochs", cc.train.max_epochs, "epoch cap");
  cmd->add_option("--batch", cc.train.batch_size, "batch size");
  cmd->add_flag("--edge-loss", cc.train.edge_loss, "supervise the edge stream");
}

void add_synth_options(CLI::App* cmd, grnet::SynthSpec& spec) {
  cmd->add_option("--n", spec.n_samples, "number of samples");
  cmd->add_option("--image-size", spec.image_size, "sample size (multiple of 32)");
  cmd->add_option("--depth-mode", [&spec](const std::vector<std::string>& v) {
    spec.depth_mode = grnet::depth_mode_from_string(v[0]);
    return true;
  }, "faithful, flat, or noise")->expected(1);
  cmd->add_option("--rgb-mode", [&spec](const std::vector<std::string>& v) {
    spec.rgb_mode = grnet::rgb_mode_from_string(v[0]);
    return true;
  }, "clean or cluttered")->expected(1);
  cmd->add_option("--synth-seed", spec.seed, "generator seed");
}

void finalize_config(CLI::App* cmd, CommonConfig& cc) {
  if (!cc.config_file.empty()) {
    const CommonConfig parsed = cc;  // defaults + explicit flags
    cc.load_file_sections();
    // The file replaces whole sections; lay explicitly passed flags back on top.
    const auto passed = [cmd](const char* name) { return cmd->count(name) > 0; };
    if (passed("--size")) cc.model.input_size = parsed.model.input_size;
    if (passed("--seed")) cc.train.seed = parsed.train.seed;
    if (passed("--steps")) cc.train.max_steps = parsed.train.max_steps;
    if (passed("--epochs")) cc.train.max_epochs = parsed.train.max_epochs;
    if (passed("--batch")) cc.train.batch_size = parsed.train.batch_size;
    if (passed("--edge-loss")) cc.train.edge_loss = parsed.train.edge_loss;
    if (passed("--n")) cc.synth.n_samples = parsed.synth.n_samples;
    if (passed("--image-size")) cc.synth.image_size = parsed.synth.image_size;
    if (passed("--depth-mode")) cc.synth.depth_mode = parsed.synth.depth_mode;
    if (passed("--rgb-mode")) cc.synth.rgb_mode = parsed.synth.rgb_mode;
    if (passed("--synth-seed")) cc.synth.seed = parsed.synth.seed;
  }
  if (!cc.plan_name.empty()) cc.model.plan = plan_by_name(cc.plan_name);
  if (!cc.preset_name.empty()) cc.model.flags = grnet::preset(cc.preset_name);
  if (cc.train.edge_loss) cc.model.edge_head = true;
  cc.model.validate();
  cc.train.validate();
}

json train_manifest(const CommonConfig& cc, const std::string& data_desc, uint64_t fingerprint) {
  return json{{"code_version", grnet::kVersion},
              {"model", json::parse(grnet::model_config_to_json(cc.model))},
              {"train", json::parse(grnet::train_config_to_json(cc.train))},
              {"data", data_desc},
              {"dataset_fingerprint", fingerprint},
              {"seed", cc.train.seed}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gated recoding network for RGB-D salient object detection"};
  app.set_version_flag("--version", std::string(grnet::kVersion));
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic RGB-D dataset");
  grnet::SynthSpec synth_spec;
  std::string synth_out;
  add_synth_options(synth_cmd, synth_spec);
  synth_cmd->add_option("--out", synth_out, "output dataset directory")->required();

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train a model");
  CommonConfig train_cc;
  std::string train_data, train_out;
  bool train_use_synth = false;
  train_cmd->add_option("--data", train_data, "dataset directory (rgb/, depth/, gt/)");
  train_cmd->add_flag("--synth", train_use_synth, "train on generated data (synth section/flags)");
  train_cmd->add_option("--out", train_out, "run directory")->required();
  add_model_options(train_cmd, train_cc);
  add_train_options(train_cmd, train_cc);
  add_synth_options(train_cmd, train_cc.synth);

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_data, eval_out, eval_dataset_name = "dataset",
                                               eval_model_name = "model";
  bool eval_maps = false;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--out", eval_out, "run directory")->required();
  eval_cmd->add_flag("--maps", eval_maps, "also export prediction maps");
  eval_cmd->add_option("--dataset-name", eval_dataset_name, "label for CSV rows");
  eval_cmd->add_option("--model-name", eval_model_name, "label for CSV rows");

  // ---- predict ----
  auto* predict_cmd = app.add_subcommand("predict", "write saliency maps for a directory");
  std::string pred_ckpt, pred_in, pred_out;
  predict_cmd->add_option("--ckpt", pred_ckpt, "checkpoint file")->required();
  predict_cmd->add_option("--in", pred_in, "input directory (rgb/, depth/)")->required();
  predict_cmd->add_option("--out", pred_out, "output directory")->required();

  // ---- gate-stats ----
  auto* gates_cmd = app.add_subcommand("gate-stats", "mean gate values per dataset");
  std::string gates_ckpt, gates_out;
  std::vector<std::string> gates_data;
  gates_cmd->add_option("--ckpt", gates_ckpt, "checkpoint file")->required();
  gates_cmd->add_option("--data", gates_data, "NAME=DIR dataset bindings (repeatable)")
      ->required();
  gates_cmd->add_option("--out", gates_out, "output CSV path");

  // ---- ablate ----
  auto* ablate_cmd = app.add_subcommand("ablate", "train + evaluate ablation rows");
  CommonConfig ablate_cc;
  std::string ablate_out, ablate_manifest, ablate_rows;
  ablate_cmd->add_option("--manifest", ablate_manifest, "replay an existing manifest JSON");
  ablate_cmd->add_option("--rows", ablate_rows, "comma-separated preset names");
  ablate_cmd->add_option("--out", ablate_out, "run directory")->required();
  add_model_options(ablate_cmd, ablate_cc);
  add_train_options(ablate_cmd, ablate_cc);
  add_synth_options(ablate_cmd, ablate_cc.synth);

  // ---- preset-list ----
  auto* preset_cmd = app.add_subcommand("preset-list", "list ablation presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth_cmd) {
      synth_spec.validate();
      auto samples = grnet::generate_synthetic(synth_spec);
      grnet::save_dataset(synth_out, samples);
      std::cout << "wrote " << samples.size() << " samples to " << synth_out << "\n";

    } else if (*train_cmd) {
      finalize_config(train_cmd, train_cc);
      if (train_data.empty() == !train_use_synth)
        throw grnet::ConfigError("pass exactly one of --data or --synth");
      std::vector<grnet::SamplePair> data;
      std::string data_desc;
      if (train_use_synth) {
        if (train_cc.synth.image_size != train_cc.model.input_size)
          train_cc.synth.image_size = train_cc.model.input_size;
        data = grnet::generate_synthetic(train_cc.synth);
        data_desc = "synthetic";
      } else {
        data = grnet::load_dataset(train_data, train_cc.model.input_size);
        data_desc = train_data;
      }

      fs::create_directories(train_out);
      grnet::TrainOptions opts;
      opts.progress = &std::cout;
      grnet::Checkpoint rescue;
      opts.rescue = &rescue;
      try {
        grnet::TrainResult result = grnet::train(train_cc.model, train_cc.train, data, opts);
        result.checkpoint.save(fs::path(train_out) / "checkpoint.ckpt");
        write_text(fs::path(train_out) / "loss.csv", result.loss_csv());
        write_text(fs::path(train_out) / "manifest.json",
                   train_manifest(train_cc, data_desc, grnet::dataset_fingerprint(data)).dump(2));
        std::cout << "final loss " << result.final_loss() << " after " << result.steps.size()
                  << " steps\n";
      } catch (const grnet::DivergenceError& e) {
        rescue.save(fs::path(train_out) / "diverged.ckpt");
        std::cerr << "error: " << e.what() << " (last finite state saved to diverged.ckpt)\n";
        return kExitDiverged;
      }

    } else if (*eval_cmd) {
      grnet::Checkpoint ckpt = grnet::Checkpoint::load(eval_ckpt);
      auto data = grnet::load_dataset(eval_data);
      fs::create_directories(eval_out);
      std::optional<fs::path> maps_dir;
      if (eval_maps) maps_dir = fs::path(eval_out) / "maps";
      grnet::MetricReport rep = grnet::evaluate(ckpt, data, maps_dir);
      write_text(fs::path(eval_out) / "metrics.txt", rep.to_kv());
      write_text(fs::path(eval_out) / "metrics.csv",
                 rep.to_csv(eval_dataset_name, eval_model_name));
      write_text(fs::path(eval_out) / "pr_curve.csv", rep.pr_to_csv());
      std::cout << rep.to_kv();

    } else if (*predict_cmd) {
      grnet::Checkpoint ckpt = grnet::Checkpoint::load(pred_ckpt);
      grnet::PredictResult res = grnet::predict_dir(ckpt, pred_in, pred_out);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "wrote " << res.written << " maps to " << pred_out << "\n";

    } else if (*gates_cmd) {
      grnet::Checkpoint ckpt = grnet::Checkpoint::load(gates_ckpt);
      std::vector<std::pair<std::string, std::vector<grnet::SamplePair>>> sets;
      for (const auto& binding : gates_data) {
        auto pos = binding.find('=');
        if (pos == std::string::npos)
          throw grnet::ConfigError("--data expects NAME=DIR, got '" + binding + "'");
        sets.emplace_back(binding.substr(0, pos), grnet::load_dataset(binding.substr(pos + 1)));
      }
      grnet::GateStatsReport rep = grnet::gate_stats(ckpt, sets);
      const std::string csv = rep.to_csv();
      if (!gates_out.empty()) write_text(gates_out, csv);
      std::cout << csv;

    } else if (*ablate_cmd) {
      grnet::RunManifest manifest;
      if (!ablate_manifest.empty()) {
        manifest = grnet::RunManifest::from_json(read_text(ablate_manifest));
      } else {
        finalize_config(ablate_cmd, ablate_cc);
        if (ablate_rows.empty()) throw grnet::ConfigError("pass --rows or --manifest");
        manifest.model = ablate_cc.model;
        manifest.train = ablate_cc.train;
        manifest.synth = ablate_cc.synth;
        manifest.synth.image_size = ablate_cc.model.input_size;
        std::string rest = ablate_rows;
        while (!rest.empty()) {
          auto pos = rest.find(',');
          manifest.rows.push_back(rest.substr(0, pos));
          rest = pos == std::string::npos ? "" : rest.substr(pos + 1);
        }
      }
      fs::create_directories(ablate_out);
      grnet::AblationSuiteResult suite = grnet::run_ablation_suite(manifest, &std::cout);
      manifest.dataset_fingerprint = suite.train_fingerprint;
      write_text(fs::path(ablate_out) / "suite.csv", suite.to_csv());
      write_text(fs::path(ablate_out) / "manifest.json", manifest.to_json());
      std::cout << suite.to_csv();

    } else if (*preset_cmd) {
      for (const auto& name : grnet::preset_names()) {
        const grnet::AblationFlags f = grnet::preset(name);
        std::cout << name << ": depth=" << f.use_depth << " mixer=" << f.use_mixer
                  << " mgu_gating=" << f.mgu_gating << " decoder=" << to_string(f.decoder_mode)
                  << " oegs_gating=" << f.oegs_gating << " wam=" << to_string(f.wam_variant)
                  << " loss=" << to_string(f.loss_mode) << "\n";
      }
    }
  } catch (const grnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const grnet::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const grnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
