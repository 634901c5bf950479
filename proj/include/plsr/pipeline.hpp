#pragma once

#include "plsr/models.hpp"

#include <cstdint>
#include <vector>

namespace plsr {

/// Epoched multichannel recording: trials x channels x samples, stored
/// trial-major, then channel, then sample.
struct EpochDataset {
  std::vector<double> data;
  int n_trials = 0;
  int n_channels = 0;
  int n_samples = 0;
  double fs = 0;  // Hz
  int class_count = 0;
  std::vector<int> labels;  // per trial, 0-based

  double& at(int t, int c, int s) {
    return data[(static_cast<std::size_t>(t) * n_channels + c) * n_samples + s];
  }
  double at(int t, int c, int s) const {
    return data[(static_cast<std::size_t>(t) * n_channels + c) * n_samples + s];
  }

  void validate() const;
};

/// Order-4 Butterworth band-pass applied forward-backward (zero phase) per
/// channel per trial. Defaults follow the 7-35 Hz protocol.
EpochDataset bandpass(const EpochDataset& ds, double lo = 7.0, double hi = 35.0);

/// Zero-phase band-pass of a single series; exposed for testing and reuse.
std::vector<double> bandpass_series(const std::vector<double>& x, double fs,
                                    double lo, double hi);

/// Integer decimation to target_fs. The band must already be limited.
EpochDataset downsample(const EpochDataset& ds, double target_fs);

/// X row i = channels-major concatenation of trial i (N = channels*samples);
/// Y = one-hot labels (M = class_count).
DataMatrixPair flatten(const EpochDataset& ds);

/// Inverse of flatten given the original shape metadata.
EpochDataset unflatten(const Matrix& x, int n_channels, int n_samples, double fs,
                       const std::vector<int>& labels, int class_count);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // per trial fold index in [0, k)
  std::uint64_t seed = 0;
  bool stratified = true;  // false when some class had fewer than k trials
};

/// Seeded stratified k-fold assignment; fold sizes differ by at most one,
/// overall and within each class.
FoldPlan kfold(const EpochDataset& ds, int k, std::uint64_t seed);

/// Keeps the selected trials (in the given order).
EpochDataset subset(const EpochDataset& ds, const std::vector<int>& trials);

struct CrossvalResult {
  std::vector<double> fold_accuracy;
  std::vector<double> fold_seconds;  // wall-clock per fold (fit + predict)
  double mean = 0;
  double stddev = 0;  // sample standard deviation over folds
  bool stratified = true;
};

/// Fits on k-1 folds, classifies the held-out fold, and aggregates
/// accuracy = correct/total. The fold plan and the fits share config.seed.
CrossvalResult crossval_accuracy(const EpochDataset& ds, int k, int rank,
                                 Variant variant, const OptimConfig& config);

/// "0.8487±0.0148"
std::string format_mean_std(double mean, double stddev);

/// Synthetic epochs: per class a fixed random spatial pattern modulating a
/// class-specific sinusoid (frequencies spread across 10-20 Hz) plus white
/// noise scaled to the requested SNR. snr = inf gives noiseless trials.
EpochDataset synth_epochs(int trials, int channels, int samples, int classes,
                          double snr, std::uint64_t seed, double fs = 200.0);

}  // namespace plsr
