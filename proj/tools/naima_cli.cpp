// Command-line entry point: dataset synthesis, training, evaluation, and
// figure emission. Batch-oriented; every run writes its resolved
// configuration next to its outputs so results can be reproduced from the
// artifacts alone.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "naima/config.hpp"
#include "naima/data.hpp"
#include "naima/error.hpp"
#include "naima/evaluator.hpp"
#include "naima/gta.hpp"
#include "naima/trainer.hpp"

namespace {

using naima::Config;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw naima::IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw naima::IoError("short write: " + path);
}

void write_snapshot(const std::string& out_dir, const Config& cfg) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir + "/run_config.txt", cfg.resolved_text());
}

// defaults <- config file (--config flag, else NAIMA_CONFIG) <- --set pairs
Config base_config(const std::string& config_path,
                   const std::vector<std::string>& sets) {
  Config cfg = Config::defaults();
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("NAIMA_CONFIG")) path = env;
  }
  if (!path.empty()) cfg.load_file(path);
  for (const std::string& kv : sets) cfg.set_kv(kv);
  return cfg;
}

struct SynthArgs {
  int count = 4;
  int size = 56;
  int scale = 0;  // 0 = take model.scale from the config
  std::uint64_t seed = 7;
  std::string out;
  std::string split = "train";
};

void cmd_synth(Config cfg, const SynthArgs& a) {
  const int scale = a.scale > 0 ? a.scale : cfg.get_int("model.scale");
  if (a.count <= 0) throw naima::UsageError("--count must be positive");
  if (a.size % 14 != 0)
    throw naima::UsageError("--size must be divisible by 14, got " +
                            std::to_string(a.size));
  if (a.size % scale != 0)
    throw naima::UsageError("--size must be divisible by the scale " +
                            std::to_string(scale));
  const auto samples = naima::generate_synthetic_dataset(
      a.count, a.size, a.size, scale, a.seed);
  naima::save_dataset(a.out, a.split, samples);

  cfg.set("run.command", "synth");
  cfg.set("synth.count", std::to_string(a.count));
  cfg.set("synth.size", std::to_string(a.size));
  cfg.set("synth.seed", std::to_string(a.seed));
  cfg.set("synth.split", a.split);
  cfg.set("model.scale", std::to_string(scale));
  write_snapshot(a.out, cfg);

  std::cout << "wrote " << samples.size() << " samples (" << a.size << "x"
            << a.size << ", scale " << scale << ") to " << a.out << "/"
            << a.split << "\n";
}

struct TrainArgs {
  std::string data;
  std::string split = "train";
  std::string val_split;  // empty = no validation passes
  std::string out;
  std::string dtype = "float";
};

template <typename T>
void run_train(const Config& cfg, const TrainArgs& a) {
  const naima::ModelConfig mc = naima::ModelConfig::from(cfg);
  const naima::LossConfig lc = naima::LossConfig::from(cfg);
  const naima::TrainConfig tc = naima::TrainConfig::from(cfg);

  const auto train_set = naima::load_dataset(a.data, a.split);
  std::vector<naima::SamplePair> val_set;
  if (!a.val_split.empty()) val_set = naima::load_dataset(a.data, a.val_split);

  naima::NaimaModel<T> model(mc);
  naima::Trainer<T> trainer(model, lc, tc);
  const auto res = trainer.run(train_set, a.val_split.empty() ? nullptr : &val_set,
                               a.out, cfg.resolved_text());

  std::cout << "trained " << tc.epochs << " epochs on " << train_set.size()
            << " samples (variant " << mc.variant << ")\n";
  if (!res.history.empty())
    std::cout << "final mean loss " << res.history.back().mean_loss << "\n";
  if (!res.val_history.empty())
    std::cout << "final val rmse_cm " << res.val_history.back().rmse_cm << "\n";
  std::cout << "checkpoint: " << a.out << "/checkpoint.bin\n";
}

void cmd_train(Config cfg, const TrainArgs& a) {
  cfg.set("run.command", "train");
  cfg.set("data.dir", a.data);
  cfg.set("data.split", a.split);
  cfg.set("data.val_split", a.val_split);
  write_snapshot(a.out, cfg);
  if (a.dtype == "float")
    run_train<float>(cfg, a);
  else if (a.dtype == "double")
    run_train<double>(cfg, a);
  else
    throw naima::UsageError("--dtype must be float or double");
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "val";
  std::string out;
  std::string dtype = "float";
  bool error_maps = false;
};

// The model architecture comes from the checkpoint's stored config snapshot;
// --set pairs still apply on top (e.g. to raise model.attention.max_n).
Config checkpoint_config(const std::string& path,
                         const std::vector<std::string>& sets) {
  const naima::BlobFile bf = naima::BlobFile::load(path);
  Config cfg = Config::defaults();
  cfg.load_text(bf.get_bytes("train/config"), path + ":train/config");
  for (const std::string& kv : sets) cfg.set_kv(kv);
  return cfg;
}

template <typename T>
void run_eval(const Config& cfg, const EvalArgs& a) {
  const naima::ModelConfig mc = naima::ModelConfig::from(cfg);
  naima::NaimaModel<T> model(mc);
  naima::load_checkpoint(a.checkpoint, model, static_cast<naima::Adam<T>*>(nullptr));

  const auto samples = naima::load_dataset(a.data, a.split);
  const naima::EvalReport rep = naima::evaluate(model, samples);

  write_text_file(a.out + "/report.csv", rep.csv());
  write_text_file(a.out + "/summary.txt", rep.summary());
  if (a.error_maps) {
    for (const auto& s : samples) {
      const auto pred = naima::predict_meters<T>(
          model, s, static_cast<naima::ForwardTrace<T>*>(nullptr), nullptr,
          nullptr);
      naima::emit_error_map(pred, s.depth_gt.cast<T>(),
                            a.out + "/" + s.id + "_error.ppm");
    }
  }
  std::cout << rep.summary();
}

void cmd_eval(const std::vector<std::string>& sets, const EvalArgs& a) {
  Config cfg = checkpoint_config(a.checkpoint, sets);
  cfg.set("run.command", "eval");
  cfg.set("data.dir", a.data);
  cfg.set("data.split", a.split);
  write_snapshot(a.out, cfg);
  if (a.dtype == "float")
    run_eval<float>(cfg, a);
  else if (a.dtype == "double")
    run_eval<double>(cfg, a);
  else
    throw naima::UsageError("--dtype must be float or double");
}

struct VizArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "train";
  std::string sample;
  std::string out;
  std::string dtype = "float";
};

template <typename T>
void run_viz(const Config& cfg, const VizArgs& a) {
  const naima::ModelConfig mc = naima::ModelConfig::from(cfg);
  naima::NaimaModel<T> model(mc);
  naima::load_checkpoint(a.checkpoint, model, static_cast<naima::Adam<T>*>(nullptr));

  const auto samples = naima::load_dataset(a.data, a.split);
  const naima::SamplePair* hit = nullptr;
  for (const auto& s : samples)
    if (s.id == a.sample) hit = &s;
  if (!hit)
    throw naima::UsageError("no sample named '" + a.sample + "' in " + a.data +
                            "/" + a.split);

  naima::emit_feature_maps(model, *hit, a.out + "/" + a.sample);
  const auto pred = naima::predict_meters<T>(
      model, *hit, static_cast<naima::ForwardTrace<T>*>(nullptr), nullptr,
      nullptr);
  naima::emit_error_map(pred, hit->depth_gt.cast<T>(),
                        a.out + "/" + a.sample + "_error.ppm");
  std::cout << "wrote 8 feature maps and 1 error map for " << a.sample
            << " to " << a.out << "\n";
}

void cmd_viz(const std::vector<std::string>& sets, const VizArgs& a) {
  Config cfg = checkpoint_config(a.checkpoint, sets);
  cfg.set("run.command", "viz");
  cfg.set("data.dir", a.data);
  cfg.set("data.split", a.split);
  cfg.set("viz.sample", a.sample);
  write_snapshot(a.out, cfg);
  if (a.dtype == "float")
    run_viz<float>(cfg, a);
  else if (a.dtype == "double")
    run_viz<double>(cfg, a);
  else
    throw naima::UsageError("--dtype must be float or double");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Guided depth super-resolution: semantic-token cross-attention model.\n"
      "Config precedence: defaults < --config file (or $NAIMA_CONFIG) < --set "
      "pairs < flags."};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--set", sets, "override, e.g. --set model.channels=32");

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->fallthrough();
  synth->add_option("--count", sa.count, "number of samples");
  synth->add_option("--size", sa.size, "square image size (multiple of 14 and of the scale)");
  synth->add_option("--scale", sa.scale, "downsampling factor (default: model.scale)");
  synth->add_option("--seed", sa.seed, "generator seed");
  synth->add_option("--split", sa.split, "split directory name");
  synth->add_option("--out", sa.out, "output dataset root")->required();

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "train a model");
  train->fallthrough();
  train->add_option("--data", ta.data, "dataset root")->required();
  train->add_option("--split", ta.split, "training split");
  train->add_option("--val-split", ta.val_split, "validation split (empty = none)");
  train->add_option("--out", ta.out, "output directory")->required();
  train->add_option("--dtype", ta.dtype, "float | double");
  int epochs = -1, scale = 0;
  std::uint64_t train_seed = 0;
  bool have_seed = false;
  std::string variant, loss_kind;
  train->add_option("--epochs", epochs, "override train.epochs");
  train->add_option("--scale", scale, "override model.scale");
  train->add_option("--variant", variant, "naima | naima_plus");
  train->add_option("--loss", loss_kind, "l1_grad | l1");
  train->add_option("--seed", train_seed, "override train.seed")
      ->each([&](const std::string&) { have_seed = true; });

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->fallthrough();
  eval->add_option("--checkpoint", ea.checkpoint, "checkpoint file")->required();
  eval->add_option("--data", ea.data, "dataset root")->required();
  eval->add_option("--split", ea.split, "evaluation split");
  eval->add_option("--out", ea.out, "output directory")->required();
  eval->add_option("--dtype", ea.dtype, "float | double");
  eval->add_flag("--error-maps", ea.error_maps, "write one error image per sample");

  VizArgs va;
  CLI::App* viz = app.add_subcommand("viz", "emit feature/error figures for one sample");
  viz->fallthrough();
  viz->add_option("--checkpoint", va.checkpoint, "checkpoint file")->required();
  viz->add_option("--data", va.data, "dataset root")->required();
  viz->add_option("--split", va.split, "split containing the sample");
  viz->add_option("--sample", va.sample, "sample id")->required();
  viz->add_option("--out", va.out, "output directory")->required();
  viz->add_option("--dtype", va.dtype, "float | double");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;
  }

  try {
    if (*synth) {
      cmd_synth(base_config(config_path, sets), sa);
    } else if (*train) {
      Config cfg = base_config(config_path, sets);
      if (epochs >= 0) cfg.set("train.epochs", std::to_string(epochs));
      if (scale > 0) cfg.set("model.scale", std::to_string(scale));
      if (!variant.empty()) cfg.set("model.variant", variant);
      if (!loss_kind.empty()) cfg.set("loss.kind", loss_kind);
      if (have_seed) cfg.set("train.seed", std::to_string(train_seed));
      cmd_train(cfg, ta);
    } else if (*eval) {
      cmd_eval(sets, ea);
    } else if (*viz) {
      cmd_viz(sets, va);
    }
  } catch (const naima::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
