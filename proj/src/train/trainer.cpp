#include "afnet/train/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "afnet/train/loss.hpp"

namespace afnet::train {

std::string format_log_line(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,", r.epoch, r.lr, r.train_loss);
  std::string line = buf;
  if (r.val_loss) {
    std::snprintf(buf, sizeof buf, "%.9g", *r.val_loss);
    line += buf;
  }
  line += ",";
  if (r.val_acc) {
    std::snprintf(buf, sizeof buf, "%.9g", *r.val_acc);
    line += buf;
  }
  return line;
}

std::string variant_signature(const arch::ModelVariant& v) {
  std::string s = arch::to_string(v.tag);
  s += " main=" + arch::to_string(v.main.kind) + "/" + std::to_string(v.main.in_channels);
  if (v.multipath) s += " aux=" + arch::to_string(v.aux.kind) + "/" + std::to_string(v.aux.in_channels);
  s += " width=" + std::to_string(v.decoder_width);
  s += " classes=" + std::to_string(v.num_classes);
  s += " reduction=" + std::to_string(v.attention_reduction);
  if (v.rafb_caption_order) s += " rafb=caption";
  if (v.upsample == nn::UpsampleMapping::kAlignCorners) s += " upsample=align_corners";
  return s;
}

template <typename T>
std::pair<double, double> evaluate(const arch::AfNetModel<T>& model, const std::vector<Sample>& samples,
                                   int batch_size) {
  NoGradGuard guard;
  double loss_sum = 0.0;
  std::int64_t hits = 0, counted = 0, batches = 0;
  for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch_size)) {
    std::vector<const Sample*> group;
    for (std::size_t i = start; i < std::min(samples.size(), start + batch_size); ++i) group.push_back(&samples[i]);
    auto batch = make_batch<T>(group);
    auto logits = model.forward(batch.image, batch.aux, nn::NormMode::kEval);
    loss_sum += static_cast<double>(deep_supervision_loss(logits, batch.labels).item());
    ++batches;
    const auto pred = argmax_classes(logits.back());
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
      if (batch.labels.values[i] == kIgnoreLabel) continue;
      ++counted;
      hits += pred.values[i] == batch.labels.values[i];
    }
  }
  if (batches == 0) throw DegenerateInputError("evaluate: no samples");
  const double acc = counted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(counted);
  return {loss_sum / static_cast<double>(batches), acc};
}

template <typename T>
TrainResult train_loop(const arch::AfNetModel<T>& model, AdamState& state, const std::vector<Sample>& train,
                       const std::vector<Sample>* validation, const TrainOptions& options,
                       const EpochCallback& on_epoch) {
  if (train.empty()) throw DegenerateInputError("train_loop: training set is empty");
  if (options.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  LrSchedule schedule = options.schedule;
  // A trailing partial batch is dropped (its samples rotate in through the
  // shuffle); a set smaller than one batch trains as a single batch.
  const std::size_t batch_size = std::min(train.size(), static_cast<std::size_t>(options.batch_size));
  schedule.iters_per_epoch = static_cast<int>(train.size() / batch_size);
  auto problems = schedule.violations();
  if (!problems.empty()) throw ValidationError("learning-rate schedule: " + problems.front());

  std::ofstream log;
  if (!options.log_path.empty()) {
    if (options.log_path.has_parent_path()) std::filesystem::create_directories(options.log_path.parent_path());
    log.open(options.log_path, std::ios::app);
    if (!log) throw IoError("cannot open training log " + options.log_path.string());
  }
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);

  TrainResult result;
  double best_acc = -1.0;
  std::vector<std::size_t> order(train.size());
  for (int epoch = options.start_epoch; epoch < options.start_epoch + options.epochs; ++epoch) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr_schedule(epoch, 0, schedule);
    double loss_sum = 0.0;
    for (int it = 0; it < schedule.iters_per_epoch; ++it) {
      std::vector<Sample> augmented;
      const std::size_t begin = static_cast<std::size_t>(it) * batch_size;
      const std::size_t end = begin + batch_size;
      for (std::size_t i = begin; i < end; ++i) augmented.push_back(augment(train[order[i]], rng, options.augment));
      std::vector<const Sample*> group;
      for (const auto& s : augmented) group.push_back(&s);
      auto batch = make_batch<T>(group);

      auto loss = deep_supervision_loss(model.forward(batch.image, batch.aux, nn::NormMode::kTrain), batch.labels);
      backward(loss);
      adam_step(model.params(), state, lr_schedule(epoch, it, schedule));
      loss_sum += static_cast<double>(loss.item());
      ++rec.steps;
    }
    rec.train_loss = loss_sum / rec.steps;

    if (validation && !validation->empty()) {
      auto [vl, va] = evaluate(model, *validation, options.batch_size);
      rec.val_loss = vl;
      rec.val_acc = va;
      if (va > best_acc) {
        best_acc = va;
        result.best_epoch = epoch;
        if (!options.checkpoint_dir.empty()) {
          save_training_checkpoint(options.checkpoint_dir / "best.afck", model, state, epoch + 1);
        }
      }
    }
    if (log.is_open()) {
      log << format_log_line(rec) << '\n';
      log.flush();
      if (!log) throw IoError("failed writing training log " + options.log_path.string());
    }
    result.history.push_back(rec);
    const bool keep_going = !on_epoch || on_epoch(rec);
    if (!keep_going) break;
  }
  if (!options.checkpoint_dir.empty() && !result.history.empty()) {
    save_training_checkpoint(options.checkpoint_dir / "last.afck", model, state, result.history.back().epoch + 1);
  }
  return result;
}

template <typename T>
void save_training_checkpoint(const std::filesystem::path& path, const arch::AfNetModel<T>& model,
                              const AdamState& state, int epoch) {
  auto records = nn::params_to_records(model.params());
  auto adam = adam_to_records(state);
  records.insert(records.end(), adam.begin(), adam.end());
  records.push_back({"meta.variant/" + variant_signature(model.variant()), RawTensor{{0}, {}}});
  records.push_back({"meta.epoch", RawTensor{{1}, {static_cast<float>(epoch)}}});
  nn::write_checkpoint(path, records);
}

template <typename T>
int load_training_checkpoint(const std::filesystem::path& path, const arch::AfNetModel<T>& model, AdamState* state) {
  const auto records = nn::read_checkpoint(path);
  const std::string expected = variant_signature(model.variant());
  std::string found;
  for (const auto& r : records) {
    if (r.name.rfind("meta.variant/", 0) == 0) found = r.name.substr(13);
  }
  if (found != expected) {
    throw ContractError("variant mismatch: checkpoint " + path.string() + " holds '" +
                        (found.empty() ? std::string("<none>") : found) + "' but the configuration builds '" +
                        expected + "'");
  }
  nn::load_params(model.params(), records);
  if (state) adam_from_records(*state, records);
  const auto* epoch = nn::find_record(records, "meta.epoch");
  return epoch && epoch->tensor.values.size() == 1 ? static_cast<int>(epoch->tensor.values[0]) : 0;
}

#define AFNET_INSTANTIATE(T)                                                                                      \
  template TrainResult train_loop(const arch::AfNetModel<T>&, AdamState&, const std::vector<Sample>&,              \
                                  const std::vector<Sample>*, const TrainOptions&, const EpochCallback&);          \
  template std::pair<double, double> evaluate(const arch::AfNetModel<T>&, const std::vector<Sample>&, int);       \
  template void save_training_checkpoint(const std::filesystem::path&, const arch::AfNetModel<T>&,                \
                                         const AdamState&, int);                                                  \
  template int load_training_checkpoint(const std::filesystem::path&, const arch::AfNetModel<T>&, AdamState*);

AFNET_INSTANTIATE(float)
AFNET_INSTANTIATE(double)

#undef AFNET_INSTANTIATE

}  // namespace afnet::train
