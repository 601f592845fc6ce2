// SPDX-License-Identifier: Apache-2.0
#include "grnet/runner.hpp"

#include <cstdio>
#include <map>

#include <json.hpp>

#include "grnet/image_io.hpp"

namespace fs = std::filesystem;

namespace grnet {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json synth_to_json(const SynthSpec& s) {
  return json{{"n_samples", s.n_samples},
              {"image_size", s.image_size},
              {"depth_mode", to_string(s.depth_mode)},
              {"rgb_mode", to_string(s.rgb_mode)},
              {"seed", s.seed}};
}

SynthSpec synth_from_json(const json& j) {
  SynthSpec s;
  s.n_samples = j.at("n_samples").get<int64_t>();
  s.image_size = j.at("image_size").get<int64_t>();
  s.depth_mode = depth_mode_from_string(j.at("depth_mode").get<std::string>());
  s.rgb_mode = rgb_mode_from_string(j.at("rgb_mode").get<std::string>());
  s.seed = j.at("seed").get<uint64_t>();
  return s;
}

void hash_grid(const Grid& g, uint64_t& h) {
  h = fnv1a(g.data(), static_cast<size_t>(g.size()) * sizeof(double), h);
}

}  // namespace

std::string RunManifest::to_json() const {
  json j{{"code_version", code_version},
         {"model", json::parse(model_config_to_json(model))},
         {"train", json::parse(train_config_to_json(train))},
         {"synth", synth_to_json(synth)},
         {"rows", rows}};
  if (eval_synth) j["eval_synth"] = synth_to_json(*eval_synth);
  if (dataset_fingerprint) j["dataset_fingerprint"] = *dataset_fingerprint;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    RunManifest m;
    m.code_version = j.at("code_version").get<std::string>();
    m.model = model_config_from_json(j.at("model").dump());
    m.train = train_config_from_json(j.at("train").dump());
    m.synth = synth_from_json(j.at("synth"));
    m.rows = j.at("rows").get<std::vector<std::string>>();
    if (j.contains("eval_synth")) m.eval_synth = synth_from_json(j.at("eval_synth"));
    if (j.contains("dataset_fingerprint"))
      m.dataset_fingerprint = j.at("dataset_fingerprint").get<uint64_t>();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run manifest: ") + e.what());
  }
}

uint64_t dataset_fingerprint(const std::vector<SamplePair>& samples) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& s : samples) {
    h = fnv1a(s.id.data(), s.id.size(), h);
    for (const auto& p : s.rgb) hash_grid(p, h);
    hash_grid(s.depth, h);
    hash_grid(s.gt, h);
    hash_grid(s.edge, h);
  }
  return h;
}

std::string AblationSuiteResult::to_csv() const {
  std::string s = "row,status,mae,f_beta_max,f_beta_adaptive,f_w_beta\n";
  for (const auto& r : rows) {
    if (r.ok) {
      s += r.row + ",ok," + fmt_double(r.report.mae) + "," + fmt_double(r.report.f_beta_max) +
           "," + fmt_double(r.report.f_beta_adaptive) + "," + fmt_double(r.report.f_w_beta) + "\n";
    } else {
      s += r.row + ",error,,,,\n";
    }
  }
  return s;
}

AblationSuiteResult run_ablation_suite(const RunManifest& manifest, std::ostream* progress) {
  std::vector<SamplePair> train_data = generate_synthetic(manifest.synth);
  std::vector<SamplePair> eval_data =
      manifest.eval_synth ? generate_synthetic(*manifest.eval_synth) : train_data;

  AblationSuiteResult suite;
  suite.train_fingerprint = dataset_fingerprint(train_data);
  if (manifest.dataset_fingerprint && *manifest.dataset_fingerprint != suite.train_fingerprint)
    throw DataError("regenerated dataset does not match the manifest fingerprint");

  for (const std::string& row : manifest.rows) {
    AblationRowResult r;
    r.row = row;
    try {
      ModelConfig mc = manifest.model;
      mc.flags = preset(row);
      TrainConfig tc = manifest.train;
      if (progress) (*progress) << "[row " << row << "] training\n";
      TrainOptions opts;
      opts.progress = nullptr;
      TrainResult tr = train(mc, tc, train_data, opts);
      r.report = evaluate(tr.checkpoint, eval_data);
      r.ok = true;
      if (progress)
        (*progress) << "[row " << row << "] f_w_beta " << r.report.f_w_beta << " mae "
                    << r.report.mae << "\n";
    } catch (const Error& e) {
      r.error = e.what();
      if (progress) (*progress) << "[row " << row << "] failed: " << r.error << "\n";
    }
    suite.rows.push_back(std::move(r));
  }
  return suite;
}

PredictResult predict_dir(const Checkpoint& ckpt, const fs::path& input_dir,
                          const fs::path& output_dir) {
  const fs::path rgb_dir = input_dir / "rgb";
  if (!fs::is_directory(rgb_dir))
    throw DataError("prediction input lacks an rgb/ directory: " + input_dir.string());

  std::map<std::string, fs::path> rgb_files;
  for (const auto& e : fs::directory_iterator(rgb_dir))
    if (e.is_regular_file()) rgb_files[e.path().stem().string()] = e.path();

  auto model = ckpt.instantiate();
  const int64_t S = model->config().input_size;
  const bool needs_depth = ckpt.model.flags.use_depth;
  fs::create_directories(output_dir);

  PredictResult res;
  for (const auto& [stem, rgb_path] : rgb_files) {
    try {
      SamplePair s;
      s.id = stem;
      s.rgb = u8_to_rgb(read_pnm(rgb_path));
      for (auto& p : s.rgb) p = resize_bilinear(p, S, S);
      if (needs_depth) {
        fs::path dpath;
        for (const char* ext : {".pgm", ".ppm", ".pnm"}) {
          fs::path cand = input_dir / "depth" / (stem + ext);
          if (fs::exists(cand)) dpath = cand;
        }
        if (dpath.empty()) throw DataError("no depth raster for stem '" + stem + "'");
        s.depth = resize_bilinear(u8_to_gray(read_pnm(dpath)), S, S);
      } else {
        s.depth = Grid(S, S);
      }
      s.gt = Grid(S, S);
      s.edge = Grid(S, S);

      std::vector<Grid> maps = predict(*model, {s});
      write_pnm(output_dir / (stem + ".pgm"), gray_to_u8(maps[0]));
      ++res.written;
    } catch (const Error& e) {
      res.warnings.push_back(stem + ": " + e.what());
    }
  }
  if (res.written == 0 && !rgb_files.empty())
    throw DataError("failed to predict any of the " + std::to_string(rgb_files.size()) +
                    " input pairs");
  return res;
}

}  // namespace grnet
