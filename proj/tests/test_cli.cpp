#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "naima/data.hpp"
#include "naima/trainer.hpp"
#include "test_util.hpp"

using testutil::read_file;
using testutil::TempDir;

namespace {

// compile definition set by the build: absolute path of the CLI binary
const std::string kCli = NAIMA_CLI_PATH;

const std::string kTinySets =
    " --set model.channels=8 --set model.rcab_per_level=1"
    " --set model.rgb_blocks_per_level=1 --set model.head_rcabs=1"
    " --set model.reduction=4 --set model.d_k=8"
    " --set semantic_encoder.embed_dim=16";

int run_cli(const std::string& args, const TempDir& scratch,
            std::string* output = nullptr) {
  static int counter = 0;
  const std::string cap = scratch.file("cli_out_" + std::to_string(counter++));
  const std::string cmd = kCli + " " + args + " >" + cap + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (output) *output = read_file(cap);
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

}  // namespace

TEST_CASE("bad invocations exit with the usage code") {
  TempDir dir("cli_usage");
  CHECK(run_cli("", dir) == 2);                   // a subcommand is required
  CHECK(run_cli("frobnicate", dir) == 2);         // unknown subcommand
  CHECK(run_cli("synth", dir) == 2);              // missing required --out
  CHECK(run_cli("--help", dir) == 0);
  std::string out;
  CHECK(run_cli("synth --help", dir, &out) == 0);
  CHECK(out.find("synthetic") != std::string::npos);
}

TEST_CASE("synth writes a loadable dataset and validates its geometry") {
  TempDir dir("cli_synth");
  const std::string data = dir.file("ds");
  std::string out;
  CHECK(run_cli("synth --count 2 --size 28 --seed 3 --out " + data, dir, &out) == 0);
  CHECK(out.find("wrote 2 samples") != std::string::npos);
  CHECK(std::filesystem::exists(data + "/run_config.txt"));

  const auto samples = naima::load_dataset(data, "train");
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].rgb.height() == 28);
  CHECK(samples[0].scale == 4);
  for (const auto& s : samples) s.validate();

  // geometry violations are usage errors
  CHECK(run_cli("synth --count 1 --size 57 --out " + dir.file("bad1"), dir) == 2);
  CHECK(run_cli("synth --count 0 --size 28 --out " + dir.file("bad2"), dir) == 2);
  CHECK(run_cli("synth --count 1 --size 28 --scale 16 --out " + dir.file("bad3"),
                dir) == 2);  // 28 is not divisible by 16
}

TEST_CASE("train produces artifacts and identical seeds reproduce them byte for byte") {
  TempDir dir("cli_train");
  const std::string data = dir.file("ds");
  REQUIRE(run_cli("synth --count 1 --size 28 --seed 11 --out " + data, dir) == 0);

  const std::string common = "train --data " + data +
                             " --split train --val-split train --epochs 3"
                             " --seed 21 --dtype double" +
                             kTinySets + " --set train.lr0=1e-3";
  std::string out1, out2;
  CHECK(run_cli(common + " --out " + dir.file("r1"), dir, &out1) == 0);
  CHECK(run_cli(common + " --out " + dir.file("r2"), dir, &out2) == 0);
  CHECK(out1.find("trained 3 epochs") != std::string::npos);
  CHECK(out1.find("final val rmse_cm") != std::string::npos);

  for (const char* name : {"loss.csv", "val.csv", "checkpoint.bin"}) {
    const std::string a = read_file(dir.file(std::string("r1/") + name));
    CHECK(!a.empty());
    CHECK(a == read_file(dir.file(std::string("r2/") + name)));
  }

  // the resolved snapshot records the overrides that shaped the run
  const std::string snap = read_file(dir.file("r1/run_config.txt"));
  CHECK(snap.find("model.channels = 8") != std::string::npos);
  CHECK(snap.find("train.seed = 21") != std::string::npos);
  CHECK(snap.find("train.epochs = 3") != std::string::npos);
  CHECK(snap.find("run.command = train") != std::string::npos);

  // a different seed changes the loss history
  std::string out3;
  CHECK(run_cli("train --data " + data +
                    " --split train --epochs 3 --seed 22 --dtype double" +
                    kTinySets + " --set train.lr0=1e-3 --out " + dir.file("r3"),
                dir, &out3) == 0);
  CHECK(read_file(dir.file("r1/loss.csv")) != read_file(dir.file("r3/loss.csv")));

  CHECK(run_cli(common + " --dtype quad --out " + dir.file("r4"), dir) == 2);
}

TEST_CASE("eval reads the architecture from the checkpoint and scores the split") {
  TempDir dir("cli_eval");
  const std::string data = dir.file("ds");
  REQUIRE(run_cli("synth --count 2 --size 28 --seed 12 --out " + data, dir) == 0);
  REQUIRE(run_cli("train --data " + data +
                      " --split train --epochs 1 --seed 5 --dtype double" +
                      kTinySets + " --out " + dir.file("run"),
                  dir) == 0);

  // no --set pairs needed: the tiny architecture comes from the snapshot
  std::string out;
  CHECK(run_cli("eval --checkpoint " + dir.file("run/checkpoint.bin") +
                    " --data " + data +
                    " --split train --dtype double --error-maps --out " +
                    dir.file("ev"),
                dir, &out) == 0);
  CHECK(out.find("aggregate_rmse_cm:") != std::string::npos);
  CHECK(read_file(dir.file("ev/report.csv")).rfind("id,rmse_cm\n", 0) == 0);
  CHECK(read_file(dir.file("ev/summary.txt")).find("samples: 2") !=
        std::string::npos);
  const auto samples = naima::load_dataset(data, "train");
  for (const auto& s : samples)
    CHECK(std::filesystem::exists(dir.file("ev/" + s.id + "_error.ppm")));

  // dataset at a different scale: a runtime failure, not a usage failure
  const std::string other = dir.file("ds8");
  REQUIRE(run_cli("synth --count 1 --size 56 --scale 8 --seed 13 --out " + other,
                  dir) == 0);
  std::string err;
  CHECK(run_cli("eval --checkpoint " + dir.file("run/checkpoint.bin") +
                    " --data " + other + " --split train --dtype double --out " +
                    dir.file("ev8"),
                dir, &err) == 1);
  CHECK(err.find("scale") != std::string::npos);

  CHECK(run_cli("eval --checkpoint " + dir.file("missing.bin") + " --data " +
                    data + " --split train --out " + dir.file("ev9"),
                dir) == 1);
}

TEST_CASE("viz emits feature and error figures for one sample") {
  TempDir dir("cli_viz");
  const std::string data = dir.file("ds");
  REQUIRE(run_cli("synth --count 1 --size 28 --seed 14 --out " + data, dir) == 0);
  REQUIRE(run_cli("train --data " + data +
                      " --split train --epochs 1 --seed 6 --dtype double" +
                      kTinySets + " --out " + dir.file("run"),
                  dir) == 0);
  const auto samples = naima::load_dataset(data, "train");
  REQUIRE(samples.size() == 1);
  const std::string id = samples[0].id;

  std::string out;
  CHECK(run_cli("viz --checkpoint " + dir.file("run/checkpoint.bin") +
                    " --data " + data + " --split train --sample " + id +
                    " --dtype double --out " + dir.file("fig"),
                dir, &out) == 0);
  CHECK(out.find("wrote 8 feature maps") != std::string::npos);
  int files = 0;
  for (int level = 1; level <= 4; ++level)
    for (const char* kind : {"rgb", "depth"})
      files += std::filesystem::exists(
          dir.file("fig/" + id + "_level" + std::to_string(level) + "_" + kind +
                   ".ppm"));
  CHECK(files == 8);
  CHECK(std::filesystem::exists(dir.file("fig/" + id + "_error.ppm")));

  CHECK(run_cli("viz --checkpoint " + dir.file("run/checkpoint.bin") +
                    " --data " + data + " --split train --sample nope --out " +
                    dir.file("fig2"),
                dir) == 2);
}

TEST_CASE("config files load with file-and-line diagnostics") {
  TempDir dir("cli_cfg");
  const std::string data = dir.file("ds");
  REQUIRE(run_cli("synth --count 1 --size 28 --seed 15 --out " + data, dir) == 0);

  testutil::write_file(dir.file("good.cfg"),
                       "train.epochs = 1\ntrain.lr0 = 2e-3\n");
  std::string out;
  CHECK(run_cli("train --config " + dir.file("good.cfg") + " --data " + data +
                    " --split train --dtype double" + kTinySets + " --out " +
                    dir.file("rc"),
                dir, &out) == 0);
  CHECK(out.find("trained 1 epochs") != std::string::npos);
  const auto rows = naima::parse_loss_history_csv(read_file(dir.file("rc/loss.csv")));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].lr == 2e-3);

  testutil::write_file(dir.file("bad.cfg"), "train.epochs = 1\nbogus line\n");
  std::string err;
  CHECK(run_cli("train --config " + dir.file("bad.cfg") + " --data " + data +
                    " --split train --out " + dir.file("rc2"),
                dir, &err) == 2);
  CHECK(err.find("bad.cfg") != std::string::npos);
  CHECK(err.find("2") != std::string::npos);  // the offending line number

  // malformed --set pairs are usage errors too
  CHECK(run_cli("synth --count 1 --size 28 --set model.channels --out " +
                    dir.file("ds2"),
                dir) == 2);
}
