#include "gnnpool/train/cross_validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "gnnpool/autodiff/ops.hpp"
#include "gnnpool/errors.hpp"
#include "gnnpool/log.hpp"
#include "gnnpool/train/optim.hpp"

namespace gnnpool {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GraphBatch make_batch(const Dataset& dataset, std::span<const std::size_t> idx) {
  std::vector<const Graph*> graphs;
  graphs.reserve(idx.size());
  for (std::size_t i : idx) graphs.push_back(&dataset.graphs.at(i));
  return batch_graphs(graphs);
}

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
  std::vector<std::size_t> out(logits.rows());
  const auto v = logits.values();
  const std::size_t c = logits.cols();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* row = v.data() + i * c;
    out[i] = static_cast<std::size_t>(std::max_element(row, row + c) - row);
  }
  return out;
}

}  // namespace

std::vector<FoldSplit> kfold_split(std::span<const std::size_t> labels, std::size_t folds,
                                   std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (folds < 2) throw ArgumentError("kfold_split: at least 2 folds required");
  if (n < folds) {
    throw ArgumentError("kfold_split: " + std::to_string(n) + " graphs cannot fill " +
                        std::to_string(folds) + " folds");
  }
  std::mt19937_64 rng(seed);

  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  bool stratified = true;
  for (const auto& [label, members] : by_class) {
    if (members.size() < folds) {
      log_warning("kfold_split: class " + std::to_string(label) + " has " +
                  std::to_string(members.size()) + " members for " + std::to_string(folds) +
                  " folds, using an unstratified split");
      stratified = false;
    }
  }
  if (!stratified) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    by_class = {{0, std::move(all)}};
  }

  // Deal each class's shuffled members round-robin, continuing the fold
  // offset from class to class so fold sizes differ by at most one.
  std::vector<std::vector<std::size_t>> partition(folds);
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t m : members) partition[next++ % folds].push_back(m);
  }

  std::vector<FoldSplit> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    FoldSplit& split = out[f];
    split.test = partition[f];
    for (const auto& [label, members] : by_class) {
      std::vector<std::size_t> pool;
      for (std::size_t g = 0; g < folds; ++g) {
        if (g == f) continue;
        for (std::size_t m : partition[g])
          if (stratified ? labels[m] == label : true) pool.push_back(m);
      }
      std::sort(pool.begin(), pool.end());
      std::shuffle(pool.begin(), pool.end(), rng);
      std::size_t n_val = static_cast<std::size_t>(
          std::llround(kValidationFraction * static_cast<double>(pool.size())));
      if (n_val == 0 && pool.size() >= 2) n_val = 1;
      split.validation.insert(split.validation.end(), pool.begin(), pool.begin() + n_val);
      split.train.insert(split.train.end(), pool.begin() + n_val, pool.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
  }
  return out;
}

std::vector<FoldSplit> kfold_split(const Dataset& dataset, std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> labels;
  labels.reserve(dataset.graphs.size());
  for (const Graph& g : dataset.graphs) labels.push_back(g.label());
  return kfold_split(labels, folds, seed);
}

Evaluation evaluate_model(const GraphClassifier& model, const Dataset& dataset,
                          std::span<const std::size_t> idx, std::size_t batch_size) {
  Evaluation out;
  if (idx.empty()) return out;
  NoGradGuard no_grad;
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const auto chunk = idx.subspan(start, std::min(batch_size, idx.size() - start));
    const GraphBatch batch = make_batch(dataset, chunk);
    const Tensor logits = model.forward(batch);
    loss += cross_entropy_loss(logits, batch.labels).item() * static_cast<double>(chunk.size());
    const auto predicted = argmax_rows(logits);
    for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == batch.labels[i];
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  out.loss = loss / static_cast<double>(idx.size());
  return out;
}

double evaluate(const GraphClassifier& model, const Dataset& dataset,
                std::span<const std::size_t> idx, std::size_t batch_size) {
  return evaluate_model(model, dataset, idx, batch_size).accuracy;
}

TrainResult train_model(const HyperParams& hp, const Dataset& dataset,
                        std::span<const std::size_t> train_idx,
                        std::span<const std::size_t> val_idx) {
  hp.validate();
  if (dataset.graphs.empty()) throw ArgumentError("train_model: empty dataset");
  std::mt19937_64 rng(hp.seed);
  const ModelShape shape{dataset.feature_width, dataset.num_classes, dataset.max_nodes()};

  TrainResult result;
  result.model = std::make_unique<GraphClassifier>(hp, shape, rng);
  GraphClassifier& model = *result.model;
  auto params = model.parameters();
  AdamState adam;

  const Evaluation initial = evaluate_model(model, dataset, val_idx);
  result.best_val_accuracy = initial.accuracy;
  result.best_val_loss = initial.loss;
  auto best = model.snapshot();

  std::vector<std::size_t> order(train_idx.begin(), train_idx.end());
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    const double lr = lr_at_epoch(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::span<const std::size_t> chunk(
          order.data() + start, std::min(hp.batch_size, order.size() - start));
      const GraphBatch batch = make_batch(dataset, chunk);
      Tensor loss = cross_entropy_loss(model.forward(batch, &rng), batch.labels);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << " (lr " << lr << ") for " << hp.to_string();
        throw TrainingError(msg.str());
      }
      for (Tensor& p : params) p.zero_grad();
      loss.backward();
      adam_step(adam, params, lr);
      loss_sum += value;
      ++batches;
    }
    result.train_loss.push_back(batches ? loss_sum / static_cast<double>(batches) : 0.0);

    const Evaluation val = evaluate_model(model, dataset, val_idx);
    result.val_accuracy.push_back(val.accuracy);
    if (val.accuracy > result.best_val_accuracy ||
        (val.accuracy == result.best_val_accuracy && val.loss < result.best_val_loss)) {
      result.best_val_accuracy = val.accuracy;
      result.best_val_loss = val.loss;
      result.best_epoch = epoch + 1;
      best = model.snapshot();
    }
  }
  model.restore(best);
  return result;
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / n)};
}

CVReport cross_validate(std::span<const HyperParams> grid, const Dataset& dataset,
                        const CVOptions& options) {
  if (grid.empty()) throw ArgumentError("cross_validate: empty hyperparameter grid");
  for (const HyperParams& hp : grid) hp.validate();
  const auto splits = kfold_split(dataset, options.folds, options.seed);
  const std::size_t folds = splits.size();
  const std::size_t total = grid.size() * folds;

  struct Run {
    double val = 0.0;
    double test = 0.0;
    std::vector<double> curve;
  };
  std::vector<Run> runs(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex mu;
  std::exception_ptr failure;

  // Every run is trained and tested; only the winner's test scores are used.
  const auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      const std::size_t g = task / folds, f = task % folds;
      try {
        HyperParams hp = grid[g];
        hp.seed = mix_seed(hp.seed, f);
        TrainResult r = train_model(hp, dataset, splits[f].train, splits[f].validation);
        runs[task].val = r.best_val_accuracy;
        runs[task].test = evaluate(*r.model, dataset, splits[f].test);
        runs[task].curve = std::move(r.train_loss);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
      const std::size_t completed = ++done;
      if (options.progress) {
        std::lock_guard lock(mu);
        options.progress(completed, total);
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, total));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  CVReport report;
  report.grid_val_means.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (std::size_t f = 0; f < folds; ++f) s += runs[g * folds + f].val;
    report.grid_val_means[g] = s / static_cast<double>(folds);
    if (report.grid_val_means[g] > report.grid_val_means[report.winner_index])
      report.winner_index = g;
  }
  report.winner = grid[report.winner_index];
  std::vector<double> tests;
  for (std::size_t f = 0; f < folds; ++f) {
    Run& r = runs[report.winner_index * folds + f];
    report.folds.push_back({std::move(r.curve), r.val, r.test});
    tests.push_back(r.test);
  }
  std::tie(report.mean, report.std) = mean_std(tests);
  return report;
}

}  // namespace gnnpool
