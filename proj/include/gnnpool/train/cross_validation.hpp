#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gnnpool/data/tu_dataset.hpp"
#include "gnnpool/train/hyperparams.hpp"
#include "gnnpool/train/model.hpp"

namespace gnnpool {

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

inline constexpr std::size_t kDefaultFolds = 5;
inline constexpr double kValidationFraction = 0.1;

// Stratified by class with a seeded shuffle. Fold f's test set is partition f;
// the validation set is 10% of each class of the remaining pool. Falls back to
// an unstratified split (with a warning) when a class has fewer members than
// folds. Index lists are sorted ascending.
std::vector<FoldSplit> kfold_split(std::span<const std::size_t> labels, std::size_t folds,
                                   std::uint64_t seed);
std::vector<FoldSplit> kfold_split(const Dataset& dataset, std::size_t folds, std::uint64_t seed);

struct TrainResult {
  std::unique_ptr<GraphClassifier> model;  // parameters of the best validation epoch
  std::vector<double> train_loss;          // mean batch loss per epoch
  std::vector<double> val_accuracy;        // per epoch
  double best_val_accuracy = 0.0;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;              // 0 means the initial parameters
};

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;  // mean cross-entropy
};

// Trains hp.epochs mini-batch epochs with Adam and the step-decay schedule.
// Keeps the epoch with the best validation accuracy, lower validation loss
// breaking ties. Throws TrainingError on a non-finite loss.
TrainResult train_model(const HyperParams& hp, const Dataset& dataset,
                        std::span<const std::size_t> train_idx,
                        std::span<const std::size_t> val_idx);

// Accuracy is the fraction of graphs whose arg-max logit equals the label.
// Both fields are 0 for an empty set.
Evaluation evaluate_model(const GraphClassifier& model, const Dataset& dataset,
                          std::span<const std::size_t> idx, std::size_t batch_size = 128);
double evaluate(const GraphClassifier& model, const Dataset& dataset,
                std::span<const std::size_t> idx, std::size_t batch_size = 128);

struct FoldReport {
  std::vector<double> train_curve;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct CVReport {
  std::vector<FoldReport> folds;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
  HyperParams winner;
  std::size_t winner_index = 0;
  std::vector<double> grid_val_means;  // mean validation accuracy per grid point
};

struct CVOptions {
  std::size_t folds = kDefaultFolds;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  // Called after every (grid point, fold) run with (completed, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

// Every grid point is trained on every fold and scored on validation. The
// point with the best mean validation accuracy (first on ties) is scored on
// each fold's test set. Results do not depend on jobs.
CVReport cross_validate(std::span<const HyperParams> grid, const Dataset& dataset,
                        const CVOptions& options = {});

// Mean and population standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

}  // namespace gnnpool
