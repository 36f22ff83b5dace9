#include "naima/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "naima/error.hpp"
#include "naima/evaluator.hpp"

namespace naima {

std::string loss_history_csv(const std::vector<EpochRow>& rows) {
  std::ostringstream out;
  out << "epoch,mean_loss,lr\n";
  char buf[96];
  for (const EpochRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.epoch, r.mean_loss, r.lr);
    out << buf;
  }
  return out.str();
}

std::vector<EpochRow> parse_loss_history_csv(const std::string& text) {
  std::vector<EpochRow> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    EpochRow r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &r.epoch, &r.mean_loss, &r.lr) != 3)
      throw FormatError("bad loss-history row: " + line, 0);
    rows.push_back(r);
  }
  return rows;
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("short write: " + path);
}

}  // namespace

template <typename T>
TrainResult<T> Trainer<T>::run(const std::vector<SamplePair>& train_set,
                               const std::vector<SamplePair>* val_set,
                               const std::string& out_dir,
                               const std::string& config_snapshot) {
  if (train_set.empty()) throw UsageError("training dataset is empty");
  for (const SamplePair& s : train_set)
    if (s.scale != cfg_.scale)
      throw UsageError("training sample " + s.id + " has scale " +
                       std::to_string(s.scale) + ", config expects " +
                       std::to_string(cfg_.scale));
  if (val_set)
    for (const SamplePair& s : *val_set)
      if (s.scale != cfg_.scale)
        throw UsageError("validation sample " + s.id + " has scale " +
                         std::to_string(s.scale) + ", config expects " +
                         std::to_string(cfg_.scale));

  const std::uint64_t encoder_before = model_.provider().fingerprint();

  TrainResult<T> res;
  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, cfg_);
    Rng shuffle_rng(hash_combine(hash_combine(cfg_.seed, 0x50FFull),
                                 static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order.begin(), order.end());

    double loss_acc = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const SamplePair& base = train_set[static_cast<std::size_t>(order[k])];
      SamplePair s = base;
      if (cfg_.patch > 0 &&
          (base.rgb.height() > cfg_.patch || base.rgb.width() > cfg_.patch)) {
        Rng crop_rng(hash_combine(
            hash_combine(hash_combine(cfg_.seed, 0xC209ull),
                         static_cast<std::uint64_t>(epoch)),
            static_cast<std::uint64_t>(order[k])));
        // Depth maps are full of flat regions; a crop that lands entirely
        // inside one leaves the per-sample min-max normalization with no
        // range. Redraw from the same stream (stays deterministic); a bounded
        // number of tries keeps fully flat images failing loudly below.
        for (int attempt = 0;; ++attempt) {
          s = crop_training_patch(base, cfg_.patch, crop_rng);
          const auto [lo, hi] =
              std::minmax_element(s.depth_gt.data(),
                                  s.depth_gt.data() + s.depth_gt.size());
          if (*hi > *lo || attempt >= 15) break;
        }
      }

      // Training normalizes against GT statistics (they are available here,
      // unlike at inference).
      const NormalizationState st = make_normalization(s, /*from_gt=*/true);
      const Tensor<T> rgb_n = normalize_rgb(s.rgb.cast<T>(), st);
      const Tensor<T> lr_n = normalize_depth(s.depth_lr.cast<T>(), st);
      const Tensor<T> gt_n = normalize_depth(s.depth_gt.cast<T>(), st);

      Tensor<T> pred = model_.forward(rgb_n, lr_n, /*training=*/true);
      Tensor<T> dpred;
      const LossParts parts = total_loss_backward(pred, gt_n, loss_, dpred);
      if (!std::isfinite(parts.total))
        throw NumericError("epoch " + std::to_string(epoch) + ", sample " +
                           s.id + ": loss is not finite");
      model_.zero_grads();
      model_.backward(dpred);
      adam_.step(model_.params(), lr);
      loss_acc += parts.total;
    }

    res.history.push_back(
        {epoch, loss_acc / static_cast<double>(train_set.size()), lr});

    if (val_set && !val_set->empty() &&
        ((epoch + 1) % cfg_.val_every == 0 || epoch + 1 == cfg_.epochs)) {
      const EvalReport rep = evaluate(model_, *val_set);
      res.val_history.push_back({epoch, rep.aggregate_rmse_cm});
    }
  }

  if (model_.provider().fingerprint() != encoder_before)
    throw Error("frozen semantic encoder changed during training");

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/loss.csv", loss_history_csv(res.history));
    if (!res.val_history.empty()) {
      std::ostringstream v;
      v << "epoch,val_rmse_cm\n";
      char buf[64];
      for (const ValRow& r : res.val_history) {
        std::snprintf(buf, sizeof buf, "%d,%.6f\n", r.epoch, r.rmse_cm);
        v << buf;
      }
      write_text_file(out_dir + "/val.csv", v.str());
    }
    save_checkpoint(out_dir + "/checkpoint.bin", model_, adam_, cfg_.epochs,
                    config_snapshot, res.history);
  }
  return res;
}

template <typename T>
void save_checkpoint(const std::string& path, NaimaModel<T>& model,
                     const Adam<T>& adam, int epoch,
                     const std::string& config_snapshot,
                     const std::vector<EpochRow>& history) {
  BlobFile bf;
  model.save_params(bf);
  adam.save(bf, model.params());
  bf.put_scalar("train/epoch", static_cast<double>(epoch));
  bf.put_bytes("train/config", config_snapshot);
  bf.put_bytes("train/history", loss_history_csv(history));
  bf.save(path);
}

template <typename T>
CheckpointInfo load_checkpoint(const std::string& path, NaimaModel<T>& model,
                               Adam<T>* adam) {
  const BlobFile bf = BlobFile::load(path);
  model.load_params(bf);
  if (adam) adam->load(bf, model.params());
  CheckpointInfo info;
  info.epoch = static_cast<int>(bf.get_scalar("train/epoch"));
  info.config_snapshot = bf.get_bytes("train/config");
  info.history = parse_loss_history_csv(bf.get_bytes("train/history"));
  return info;
}

#define NAIMA_INSTANTIATE_TRAINER(T)                                       \
  template class Trainer<T>;                                               \
  template void save_checkpoint<T>(const std::string&, NaimaModel<T>&,     \
                                   const Adam<T>&, int, const std::string&, \
                                   const std::vector<EpochRow>&);          \
  template CheckpointInfo load_checkpoint<T>(const std::string&,           \
                                             NaimaModel<T>&, Adam<T>*);

NAIMA_INSTANTIATE_TRAINER(float)
NAIMA_INSTANTIATE_TRAINER(double)

#undef NAIMA_INSTANTIATE_TRAINER

}  // namespace naima
