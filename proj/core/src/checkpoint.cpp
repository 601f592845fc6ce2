// SPDX-License-Identifier: Apache-2.0
#include "grnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace grnet {

using nlohmann::json;

// Container layout (all integers little-endian):
//   magic "GRCKPT01" | u64 json_len | json bytes | u64 n_tensors |
//   per tensor: u32 name_len | name | 4 x i64 dims | f64 data
static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'G', 'R', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("truncated checkpoint while reading " + what);
  return v;
}

json flags_to_json(const AblationFlags& f) {
  return json{{"use_depth", f.use_depth},
              {"use_mixer", f.use_mixer},
              {"mgu_gating", f.mgu_gating},
              {"decoder_mode", to_string(f.decoder_mode)},
              {"oegs_gating", f.oegs_gating},
              {"wam_variant", to_string(f.wam_variant)},
              {"loss_mode", to_string(f.loss_mode)},
              {"augmentation", f.augmentation}};
}

AblationFlags flags_from_json(const json& j) {
  AblationFlags f;
  f.use_depth = j.at("use_depth").get<bool>();
  f.use_mixer = j.at("use_mixer").get<bool>();
  f.mgu_gating = j.at("mgu_gating").get<bool>();
  f.decoder_mode = decoder_mode_from_string(j.at("decoder_mode").get<std::string>());
  f.oegs_gating = j.at("oegs_gating").get<bool>();
  f.wam_variant = wam_variant_from_string(j.at("wam_variant").get<std::string>());
  f.loss_mode = loss_mode_from_string(j.at("loss_mode").get<std::string>());
  f.augmentation = j.at("augmentation").get<bool>();
  return f;
}

json model_to_json_obj(const ModelConfig& c) {
  return json{{"stage_widths", c.plan.stage_widths},
              {"blocks_per_stage", c.plan.blocks_per_stage},
              {"input_channels", c.plan.input_channels},
              {"input_size", c.input_size},
              {"flags", flags_to_json(c.flags)},
              {"mgu_concat_fusion", c.mgu_concat_fusion},
              {"edge_head", c.edge_head}};
}

ModelConfig model_from_json_obj(const json& j) {
  ModelConfig c;
  auto sw = j.at("stage_widths").get<std::vector<int64_t>>();
  auto bp = j.at("blocks_per_stage").get<std::vector<int>>();
  if (sw.size() != 5 || bp.size() != 5) throw DataError("stage plan must have 5 entries");
  std::copy(sw.begin(), sw.end(), c.plan.stage_widths.begin());
  std::copy(bp.begin(), bp.end(), c.plan.blocks_per_stage.begin());
  c.plan.input_channels = j.at("input_channels").get<int64_t>();
  c.input_size = j.at("input_size").get<int64_t>();
  c.flags = flags_from_json(j.at("flags"));
  c.mgu_concat_fusion = j.at("mgu_concat_fusion").get<bool>();
  c.edge_head = j.at("edge_head").get<bool>();
  return c;
}

json train_to_json_obj(const TrainConfig& c) {
  return json{{"max_epochs", c.max_epochs},
              {"max_steps", c.max_steps},
              {"batch_size", c.batch_size},
              {"lr_backbone_max", c.lr_backbone_max},
              {"lr_other_max", c.lr_other_max},
              {"weight_decay", c.weight_decay},
              {"momentum", c.momentum},
              {"warmup_fraction", c.warmup_fraction},
              {"seed", c.seed},
              {"edge_loss", c.edge_loss},
              {"crop_size", c.crop_size},
              {"snapshot_every", c.snapshot_every}};
}

TrainConfig train_from_json_obj(const json& j) {
  TrainConfig c;
  c.max_epochs = j.at("max_epochs").get<int>();
  c.max_steps = j.at("max_steps").get<int64_t>();
  c.batch_size = j.at("batch_size").get<int>();
  c.lr_backbone_max = j.at("lr_backbone_max").get<double>();
  c.lr_other_max = j.at("lr_other_max").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.warmup_fraction = j.at("warmup_fraction").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  c.edge_loss = j.at("edge_loss").get<bool>();
  c.crop_size = j.at("crop_size").get<int64_t>();
  c.snapshot_every = j.at("snapshot_every").get<int64_t>();
  return c;
}

}  // namespace

Checkpoint Checkpoint::from_model(const GrnetModel& m, const TrainConfig& train, int64_t step) {
  Checkpoint c;
  c.model = m.config();
  c.train = train;
  c.seed = train.seed;
  c.step = step;
  for (const auto& p : m.registry().params()) c.tensors.emplace(p.name, p.var.value());
  for (const auto& b : m.registry().buffers()) c.tensors.emplace(b.name, *b.tensor);
  return c;
}

void Checkpoint::apply_to(GrnetModel& m) const {
  if (!(m.config() == model))
    throw ConfigError("checkpoint was produced by a differently configured model");
  auto fetch = [&](const std::string& name, const Tensor& like) -> const Tensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError("checkpoint lacks tensor '" + name + "'");
    if (!it->second.same_shape(like))
      throw DataError("checkpoint tensor '" + name + "' has shape " + it->second.shape_str() +
                      ", model expects " + like.shape_str());
    return it->second;
  };
  for (auto& p : m.registry().params()) p.var.value() = fetch(p.name, p.var.value());
  for (const auto& b : m.registry().buffers()) *b.tensor = fetch(b.name, *b.tensor);
}

std::unique_ptr<GrnetModel> Checkpoint::instantiate() const {
  auto m = std::make_unique<GrnetModel>(model);
  apply_to(*m);
  return m;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);

  json meta{{"format_version", 1},
            {"library_version", kVersion},
            {"model", model_to_json_obj(model)},
            {"train", train_to_json_obj(train)},
            {"seed", seed},
            {"step", step}};
  const std::string js = meta.dump();
  put<uint64_t>(out, js.size());
  out.write(js.data(), static_cast<std::streamsize>(js.size()));

  put<uint64_t>(out, tensors.size());
  for (const auto& [name, t] : tensors) {
    put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (int64_t d : t.dims()) put<int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * static_cast<int64_t>(sizeof(double))));
  }
  if (!out) throw DataError("short write to checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw DataError(path.string() + " is not a recognized checkpoint (bad magic/version)");

  const auto js_len = take<uint64_t>(in, "metadata length");
  std::string js(js_len, '\0');
  in.read(js.data(), static_cast<std::streamsize>(js_len));
  if (!in) throw DataError("truncated checkpoint metadata in " + path.string());

  Checkpoint c;
  try {
    json meta = json::parse(js);
    if (meta.at("format_version").get<int>() != 1)
      throw DataError("unsupported checkpoint format version");
    c.model = model_from_json_obj(meta.at("model"));
    c.train = train_from_json_obj(meta.at("train"));
    c.seed = meta.at("seed").get<uint64_t>();
    c.step = meta.at("step").get<int64_t>();
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint metadata in " + path.string() + ": " + e.what());
  }

  const auto n_tensors = take<uint64_t>(in, "tensor count");
  for (uint64_t i = 0; i < n_tensors; ++i) {
    const auto name_len = take<uint32_t>(in, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("truncated tensor name in " + path.string());
    int64_t d[4];
    for (auto& v : d) v = take<int64_t>(in, "tensor dims");
    if (d[0] < 0 || d[1] < 0 || d[2] < 0 || d[3] < 0)
      throw DataError("negative tensor dimension in " + path.string());
    Tensor t(d[0], d[1], d[2], d[3]);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * static_cast<int64_t>(sizeof(double))));
    if (!in) throw DataError("truncated tensor data in " + path.string());
    c.tensors.emplace(std::move(name), std::move(t));
  }
  return c;
}

std::string model_config_to_json(const ModelConfig& c) { return model_to_json_obj(c).dump(2); }

ModelConfig model_config_from_json(const std::string& s) {
  try {
    return model_from_json_obj(json::parse(s));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config JSON: ") + e.what());
  }
}

std::string train_config_to_json(const TrainConfig& c) { return train_to_json_obj(c).dump(2); }

TrainConfig train_config_from_json(const std::string& s) {
  try {
    return train_from_json_obj(json::parse(s));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed train config JSON: ") + e.what());
  }
}

}  // namespace grnet
