// SPDX-License-Identifier: Apache-2.0
// End-to-end tests driving the installed command-line binary as a subprocess.
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "grnet/datamodel.hpp"
#include "grnet/image_io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct RunOutput {
  int exit_code = -1;
  std::string out;  // combined stdout + stderr
};

/// Runs the CLI with the given argument string, capturing output and status.
RunOutput run_cli(const std::string& args, const fs::path& capture_dir) {
  static int counter = 0;
  const fs::path log = capture_dir / ("cli_" + std::to_string(counter++) + ".log");
  const std::string cmd =
      std::string(GRNET_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunOutput r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_file(log);
  return r;
}

int count_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) return -1;
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("version and preset listing succeed") {
    testutil::TmpDir tmp;
    RunOutput v = run_cli("--version", tmp.path);
    CHECK(v.exit_code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);

    RunOutput p = run_cli("preset-list", tmp.path);
    CHECK(p.exit_code == 0);
    CHECK(std::count(p.out.begin(), p.out.end(), '\n') == 9);
    CHECK(p.out.find("w/o_depth:") != std::string::npos);
    CHECK(p.out.find("grnet_mlp:") != std::string::npos);
    CHECK(p.out.find("loss=structure") != std::string::npos);
  }

  TEST_CASE("bad invocations exit with the configuration code") {
    testutil::TmpDir tmp;
    CHECK(run_cli("", tmp.path).exit_code == 2);                    // no subcommand
    CHECK(run_cli("synth --out x --bogus-flag", tmp.path).exit_code == 2);
    CHECK(run_cli("frobnicate", tmp.path).exit_code == 2);          // unknown subcommand
    CHECK(run_cli("synth", tmp.path).exit_code == 2);               // missing required --out
    RunOutput r = run_cli("train --synth --out " + (tmp.path / "o").string() +
                              " --preset no_such --plan tiny --size 32 --steps 1 --n 2",
                          tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("no_such") != std::string::npos);
  }

  TEST_CASE("help exits cleanly") {
    testutil::TmpDir tmp;
    CHECK(run_cli("--help", tmp.path).exit_code == 0);
    CHECK(run_cli("train --help", tmp.path).exit_code == 0);
  }

  TEST_CASE("synth writes a loadable three-plane dataset") {
    testutil::TmpDir tmp;
    const fs::path ds = tmp.path / "ds";
    RunOutput r = run_cli("synth --n 3 --image-size 32 --synth-seed 5 --out " + ds.string(),
                          tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("wrote 3 samples") != std::string::npos);
    CHECK(count_files(ds / "rgb", ".ppm") == 3);
    CHECK(count_files(ds / "depth", ".pgm") == 3);
    CHECK(count_files(ds / "gt", ".pgm") == 3);
    auto loaded = grnet::load_dataset(ds);
    CHECK(loaded.size() == 3);
    for (const auto& s : loaded) s.validate();
  }

  TEST_CASE("train/eval/predict round trip through run directories") {
    testutil::TmpDir tmp;
    const fs::path ds = tmp.path / "ds";
    const fs::path run = tmp.path / "run";
    REQUIRE(run_cli("synth --n 3 --image-size 32 --synth-seed 6 --out " + ds.string(), tmp.path)
                .exit_code == 0);

    RunOutput tr = run_cli("train --data " + ds.string() + " --out " + run.string() +
                               " --preset en_fpn --plan tiny --size 32 --steps 3 --batch 2" +
                               " --seed 4",
                           tmp.path);
    CHECK(tr.exit_code == 0);
    CHECK(fs::exists(run / "checkpoint.ckpt"));
    CHECK(fs::exists(run / "loss.csv"));
    CHECK(fs::exists(run / "manifest.json"));
    CHECK(testutil::read_file(run / "loss.csv")
              .starts_with("step,lr_backbone,lr_other,bce,iou,total\n"));
    CHECK(testutil::read_file(run / "manifest.json").find("dataset_fingerprint") !=
          std::string::npos);

    const fs::path ev = tmp.path / "eval";
    RunOutput er = run_cli("eval --ckpt " + (run / "checkpoint.ckpt").string() + " --data " +
                               ds.string() + " --out " + ev.string() + " --maps",
                           tmp.path);
    CHECK(er.exit_code == 0);
    CHECK(er.out.find("mae ") != std::string::npos);
    CHECK(testutil::read_file(ev / "metrics.csv").starts_with("dataset,model,metric,value\n"));
    CHECK(testutil::read_file(ev / "pr_curve.csv").starts_with("threshold,precision,recall\n"));
    CHECK(count_files(ev / "maps", ".pgm") == 3);

    const fs::path maps = tmp.path / "maps";
    RunOutput pr = run_cli("predict --ckpt " + (run / "checkpoint.ckpt").string() + " --in " +
                               ds.string() + " --out " + maps.string(),
                           tmp.path);
    CHECK(pr.exit_code == 0);
    CHECK(pr.out.find("wrote 3 maps") != std::string::npos);
    CHECK(count_files(maps, ".pgm") == 3);
    grnet::ImageU8 img = grnet::read_pnm(maps / "s0000.pgm");
    CHECK(img.h == 32);
    CHECK(img.w == 32);
  }

  TEST_CASE("training on generated data needs exactly one source") {
    testutil::TmpDir tmp;
    const std::string common = " --preset en_fpn --plan tiny --size 32 --steps 2 --batch 2 --n 2";
    CHECK(run_cli("train --out " + (tmp.path / "a").string() + common, tmp.path).exit_code == 2);
    CHECK(run_cli("train --synth --data somewhere --out " + (tmp.path / "b").string() + common,
                  tmp.path)
              .exit_code == 2);
    RunOutput ok = run_cli("train --synth --out " + (tmp.path / "c").string() + common, tmp.path);
    CHECK(ok.exit_code == 0);
    CHECK(fs::exists(tmp.path / "c" / "checkpoint.ckpt"));
  }

  TEST_CASE("a missing dataset directory is a data error") {
    testutil::TmpDir tmp;
    RunOutput r = run_cli("train --data " + (tmp.path / "absent").string() + " --out " +
                              (tmp.path / "o").string() +
                              " --preset en_fpn --plan tiny --size 32 --steps 1",
                          tmp.path);
    CHECK(r.exit_code == 3);
  }

  TEST_CASE("config file keys yield to explicit flags") {
    testutil::TmpDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    std::ofstream(cfg) << R"({"train": {
      "max_epochs": 1048576, "max_steps": 2, "batch_size": 2,
      "lr_backbone_max": 0.005, "lr_other_max": 0.05, "weight_decay": 0.0005,
      "momentum": 0.9, "warmup_fraction": 0.1, "seed": 5,
      "edge_loss": false, "crop_size": 0, "snapshot_every": 0}})";

    const fs::path run = tmp.path / "run";
    RunOutput r = run_cli("train --synth --config " + cfg.string() + " --out " + run.string() +
                              " --preset en_fpn --plan tiny --size 32 --n 2 --seed 7",
                          tmp.path);
    CHECK(r.exit_code == 0);
    const std::string manifest = testutil::read_file(run / "manifest.json");
    CHECK(manifest.find("\"seed\": 7") != std::string::npos);       // flag wins
    CHECK(manifest.find("\"max_steps\": 2") != std::string::npos);  // file key kept
  }

  TEST_CASE("gate statistics demand a gated checkpoint and name=dir bindings") {
    testutil::TmpDir tmp;
    const fs::path ds = tmp.path / "ds";
    REQUIRE(run_cli("synth --n 2 --image-size 32 --synth-seed 8 --out " + ds.string(), tmp.path)
                .exit_code == 0);
    const std::string common = " --plan tiny --size 32 --steps 2 --batch 2 --seed 4";
    const fs::path gated = tmp.path / "gated";
    const fs::path plain = tmp.path / "plain";
    REQUIRE(run_cli("train --data " + ds.string() + " --out " + gated.string() +
                        " --preset en_mix_fpn" + common,
                    tmp.path)
                .exit_code == 0);
    REQUIRE(run_cli("train --data " + ds.string() + " --out " + plain.string() +
                        " --preset en_fpn" + common,
                    tmp.path)
                .exit_code == 0);

    const fs::path csv = tmp.path / "gates.csv";
    RunOutput ok = run_cli("gate-stats --ckpt " + (gated / "checkpoint.ckpt").string() +
                               " --data mine=" + ds.string() + " --out " + csv.string(),
                           tmp.path);
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.starts_with("dataset,n_samples,ga1"));
    CHECK(ok.out.find("mine,2,") != std::string::npos);
    CHECK(ok.out.find("ALL,2,") != std::string::npos);
    CHECK(testutil::read_file(csv) == ok.out);

    CHECK(run_cli("gate-stats --ckpt " + (gated / "checkpoint.ckpt").string() +
                      " --data missing_equals_sign",
                  tmp.path)
              .exit_code == 2);
    CHECK(run_cli("gate-stats --ckpt " + (plain / "checkpoint.ckpt").string() +
                      " --data mine=" + ds.string(),
                  tmp.path)
              .exit_code == 2);
  }

  TEST_CASE("the ablation driver replays its own manifest identically") {
    testutil::TmpDir tmp;
    const fs::path out1 = tmp.path / "ab1";
    const fs::path out2 = tmp.path / "ab2";
    RunOutput first = run_cli(
        "ablate --rows w/o_depth,en_fpn --out " + out1.string() +
            " --plan tiny --size 32 --steps 2 --batch 2 --seed 3 --n 2 --synth-seed 11",
        tmp.path);
    CHECK(first.exit_code == 0);
    const std::string csv1 = testutil::read_file(out1 / "suite.csv");
    CHECK(csv1.starts_with("row,status,mae,f_beta_max,f_beta_adaptive,f_w_beta\n"));
    CHECK(csv1.find("w/o_depth,ok,") != std::string::npos);
    CHECK(csv1.find("en_fpn,ok,") != std::string::npos);

    RunOutput replay = run_cli(
        "ablate --manifest " + (out1 / "manifest.json").string() + " --out " + out2.string(),
        tmp.path);
    CHECK(replay.exit_code == 0);
    CHECK(testutil::read_file(out2 / "suite.csv") == csv1);

    CHECK(run_cli("ablate --out " + (tmp.path / "ab3").string() +
                      " --plan tiny --size 32 --steps 1 --n 2",
                  tmp.path)
              .exit_code == 2);  // neither --rows nor --manifest
  }

  TEST_CASE("a diverging run saves the last finite state and exits distinctly") {
    testutil::TmpDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    std::ofstream(cfg) << R"({"train": {
      "max_epochs": 1048576, "max_steps": 6, "batch_size": 2,
      "lr_backbone_max": 0.005, "lr_other_max": 0.05, "weight_decay": 1e154,
      "momentum": 0.9, "warmup_fraction": 0.1, "seed": 5,
      "edge_loss": false, "crop_size": 0, "snapshot_every": 0}})";
    const fs::path run = tmp.path / "run";
    RunOutput r = run_cli("train --synth --config " + cfg.string() + " --out " + run.string() +
                              " --preset en_fpn --plan tiny --size 32 --n 2",
                          tmp.path);
    CHECK(r.exit_code == 4);
    CHECK(r.out.find("non-finite") != std::string::npos);
    CHECK(fs::exists(run / "diverged.ckpt"));
  }
}
