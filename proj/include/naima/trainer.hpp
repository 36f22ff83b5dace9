#pragma once

#include <string>
#include <vector>

#include "naima/config.hpp"
#include "naima/data.hpp"
#include "naima/gta.hpp"
#include "naima/loss.hpp"
#include "naima/optim.hpp"

namespace naima {

struct EpochRow {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

struct ValRow {
  int epoch = 0;
  double rmse_cm = 0.0;
};

// "epoch,mean_loss,lr" header plus one row per epoch
std::string loss_history_csv(const std::vector<EpochRow>& rows);
std::vector<EpochRow> parse_loss_history_csv(const std::string& text);

template <typename T>
struct TrainResult {
  std::vector<EpochRow> history;
  std::vector<ValRow> val_history;
};

// Single-sample training loop: per-epoch seeded shuffle, optional fresh random
// crops each epoch, per-sample normalization from GT statistics, Adam with
// step-decay. Aborts with context on any non-finite loss. Zero epochs is
// legal: the checkpoint then holds the untouched initialization.
template <typename T>
class Trainer {
 public:
  Trainer(NaimaModel<T>& model, const LossConfig& loss, const TrainConfig& cfg)
      : model_(model), loss_(loss), cfg_(cfg) {}

  // out_dir == "" writes nothing; otherwise loss.csv, val.csv, checkpoint.bin
  TrainResult<T> run(const std::vector<SamplePair>& train_set,
                     const std::vector<SamplePair>* val_set,
                     const std::string& out_dir,
                     const std::string& config_snapshot);

  Adam<T>& optimizer() { return adam_; }

 private:
  NaimaModel<T>& model_;
  LossConfig loss_;
  TrainConfig cfg_;
  Adam<T> adam_;
};

struct CheckpointInfo {
  int epoch = 0;
  std::string config_snapshot;
  std::vector<EpochRow> history;
};

template <typename T>
void save_checkpoint(const std::string& path, NaimaModel<T>& model,
                     const Adam<T>& adam, int epoch,
                     const std::string& config_snapshot,
                     const std::vector<EpochRow>& history);

// Loads parameters (validating architecture compatibility first) and, when
// adam is non-null, the optimizer state.
template <typename T>
CheckpointInfo load_checkpoint(const std::string& path, NaimaModel<T>& model,
                               Adam<T>* adam);

}  // namespace naima
