#include "plsr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

namespace plsr {

void EpochDataset::validate() const {
  if (n_trials < 1 || n_channels < 1 || n_samples < 1)
    throw DataError("epoch dataset: non-positive dimensions");
  if (fs <= 0) throw DataError("epoch dataset: sampling rate must be positive");
  if (class_count < 1) throw DataError("epoch dataset: class_count must be positive");
  if (static_cast<std::size_t>(n_trials) != labels.size())
    throw DataError("epoch dataset: label count does not match trials");
  const std::size_t expect =
      static_cast<std::size_t>(n_trials) * n_channels * n_samples;
  if (data.size() != expect) throw DataError("epoch dataset: sample count mismatch");
  for (int l : labels)
    if (l < 0 || l >= class_count) throw DataError("epoch dataset: label out of range");
  for (double v : data)
    if (!std::isfinite(v)) throw DataError("epoch dataset: non-finite sample");
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 = 1
};

// Order-4 Butterworth band-pass as a cascade of four biquads, designed by
// pole placement of the analog prototype, band transform, and bilinear
// transform. Unit gain at the (warped) center frequency.
std::vector<Biquad> butter4_bandpass(double lo, double hi, double fs) {
  using cd = std::complex<double>;
  constexpr int order = 4;
  const double k = 2.0 * fs;
  const double w1 = k * std::tan(M_PI * lo / fs);
  const double w2 = k * std::tan(M_PI * hi / fs);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);

  std::vector<cd> zpoles;
  for (int i = 0; i < order; ++i) {
    const double theta = M_PI * (2.0 * i + 1.0) / (2.0 * order) + M_PI / 2.0;
    const cd proto(std::cos(theta), std::sin(theta));
    const cd disc = std::sqrt(proto * proto * bw * bw - 4.0 * w0 * w0);
    for (const cd s : {0.5 * (bw * proto + disc), 0.5 * (bw * proto - disc)})
      zpoles.push_back((k + s) / (k - s));
  }

  // pair conjugate poles into sections; each takes one zero at +1 and -1
  std::vector<Biquad> sections;
  std::vector<bool> used(zpoles.size(), false);
  for (std::size_t i = 0; i < zpoles.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    std::size_t match = i;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < zpoles.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(zpoles[j] - std::conj(zpoles[i]));
      if (d < best) {
        best = d;
        match = j;
      }
    }
    used[match] = true;
    const double a1 = -std::real(zpoles[i] + zpoles[match]);
    const double a2 = std::real(zpoles[i] * zpoles[match]);
    sections.push_back(Biquad{1.0, 0.0, -1.0, a1, a2});
  }

  // normalize to unit gain at the warped center frequency
  const double wc = 2.0 * std::atan(w0 / k);
  const cd zc(std::cos(wc), std::sin(wc));
  cd h(1.0, 0.0);
  for (const Biquad& s : sections)
    h *= (s.b0 * zc * zc + s.b1 * zc + s.b2) / (zc * zc + s.a1 * zc + s.a2);
  const double gain = 1.0 / std::abs(h);
  sections.front().b0 *= gain;
  sections.front().b1 *= gain;
  sections.front().b2 *= gain;
  return sections;
}

// Steady-state direct-form-II-transposed state for a unit step input.
std::pair<double, double> step_state(const Biquad& s) {
  const double denom = 1.0 + s.a1 + s.a2;
  const double h1 = (s.b0 + s.b1 + s.b2) / denom;
  return {h1 - s.b0, s.b2 - s.a2 * h1};
}

void sosfilt(const std::vector<Biquad>& sections, std::vector<double>& x,
             const std::vector<std::pair<double, double>>& zi, double x0) {
  std::vector<double> z1(sections.size()), z2(sections.size());
  double level = x0;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    z1[s] = zi[s].first * level;
    z2[s] = zi[s].second * level;
    const Biquad& b = sections[s];
    level *= (b.b0 + b.b1 + b.b2) / (1.0 + b.a1 + b.a2);
  }
  for (double& sample : x) {
    double v = sample;
    for (std::size_t s = 0; s < sections.size(); ++s) {
      const Biquad& b = sections[s];
      const double y = b.b0 * v + z1[s];
      z1[s] = b.b1 * v - b.a1 * y + z2[s];
      z2[s] = b.b2 * v - b.a2 * y;
      v = y;
    }
    sample = v;
  }
}

}  // namespace

std::vector<double> bandpass_series(const std::vector<double>& x, double fs,
                                    double lo, double hi) {
  if (!(lo > 0) || !(lo < hi) || !(hi < fs / 2.0))
    throw DataError("invalid band: need 0 < lo < hi < fs/2");
  if (x.size() < 2) return x;

  const std::vector<Biquad> sections = butter4_bandpass(lo, hi, fs);
  std::vector<std::pair<double, double>> zi;
  zi.reserve(sections.size());
  for (const Biquad& s : sections) zi.push_back(step_state(s));

  const std::size_t n = x.size();
  const std::size_t padlen =
      std::min(n - 1, static_cast<std::size_t>(3 * (2 * sections.size() + 1)));

  // odd extension at both ends damps the startup transient
  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < padlen; ++i)
    ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  sosfilt(sections, ext, zi, ext.front());
  std::reverse(ext.begin(), ext.end());
  sosfilt(sections, ext, zi, ext.front());
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(padlen),
                             ext.begin() + static_cast<std::ptrdiff_t>(padlen + n));
}

EpochDataset bandpass(const EpochDataset& ds, double lo, double hi) {
  ds.validate();
  EpochDataset out = ds;
  std::vector<double> series(static_cast<std::size_t>(ds.n_samples));
  for (int t = 0; t < ds.n_trials; ++t) {
    for (int c = 0; c < ds.n_channels; ++c) {
      for (int s = 0; s < ds.n_samples; ++s) series[static_cast<std::size_t>(s)] = ds.at(t, c, s);
      const std::vector<double> filtered = bandpass_series(series, ds.fs, lo, hi);
      for (int s = 0; s < ds.n_samples; ++s) out.at(t, c, s) = filtered[static_cast<std::size_t>(s)];
    }
  }
  return out;
}

EpochDataset downsample(const EpochDataset& ds, double target_fs) {
  ds.validate();
  if (target_fs <= 0) throw DataError("target sampling rate must be positive");
  const double ratio = ds.fs / target_fs;
  const long step = std::lround(ratio);
  if (step < 1 || std::abs(ratio - static_cast<double>(step)) > 1e-9 * ratio)
    throw DataError("fs/target_fs is not an integer; resample offline first");
  if (step == 1) return ds;

  EpochDataset out;
  out.n_trials = ds.n_trials;
  out.n_channels = ds.n_channels;
  out.n_samples = static_cast<int>((ds.n_samples + step - 1) / step);
  out.fs = target_fs;
  out.class_count = ds.class_count;
  out.labels = ds.labels;
  out.data.resize(static_cast<std::size_t>(out.n_trials) * out.n_channels * out.n_samples);
  for (int t = 0; t < ds.n_trials; ++t)
    for (int c = 0; c < ds.n_channels; ++c)
      for (int s = 0; s < out.n_samples; ++s)
        out.at(t, c, s) = ds.at(t, c, static_cast<int>(s * step));
  return out;
}

DataMatrixPair flatten(const EpochDataset& ds) {
  ds.validate();
  const int n = ds.n_channels * ds.n_samples;
  Matrix x(ds.n_trials, n);
  Matrix y = Matrix::Zero(ds.n_trials, ds.class_count);
  for (int t = 0; t < ds.n_trials; ++t) {
    for (int c = 0; c < ds.n_channels; ++c)
      for (int s = 0; s < ds.n_samples; ++s) x(t, c * ds.n_samples + s) = ds.at(t, c, s);
    y(t, ds.labels[static_cast<std::size_t>(t)]) = 1.0;
  }
  return DataMatrixPair{std::move(x), std::move(y)};
}

EpochDataset unflatten(const Matrix& x, int n_channels, int n_samples, double fs,
                       const std::vector<int>& labels, int class_count) {
  if (x.cols() != static_cast<Eigen::Index>(n_channels) * n_samples)
    throw DataError("unflatten: column count does not match channels*samples");
  EpochDataset out;
  out.n_trials = static_cast<int>(x.rows());
  out.n_channels = n_channels;
  out.n_samples = n_samples;
  out.fs = fs;
  out.class_count = class_count;
  out.labels = labels;
  out.data.resize(static_cast<std::size_t>(out.n_trials) * n_channels * n_samples);
  for (int t = 0; t < out.n_trials; ++t)
    for (int c = 0; c < n_channels; ++c)
      for (int s = 0; s < n_samples; ++s) out.at(t, c, s) = x(t, c * n_samples + s);
  out.validate();
  return out;
}

FoldPlan kfold(const EpochDataset& ds, int k, std::uint64_t seed) {
  ds.validate();
  if (k < 2) throw std::invalid_argument("kfold: need k >= 2");
  if (k > ds.n_trials) throw std::invalid_argument("kfold: k exceeds trial count");

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.class_count));
  for (int t = 0; t < ds.n_trials; ++t)
    by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(t)])].push_back(t);

  bool stratified = true;
  for (const auto& members : by_class)
    if (!members.empty() && static_cast<int>(members.size()) < k) stratified = false;

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = stratified;
  plan.assignments.assign(static_cast<std::size_t>(ds.n_trials), -1);

  std::mt19937_64 rng(seed);
  int cursor = 0;  // global round-robin keeps overall fold sizes within one
  const auto deal = [&](std::vector<int>& members) {
    std::shuffle(members.begin(), members.end(), rng);
    for (int t : members) plan.assignments[static_cast<std::size_t>(t)] = cursor++ % k;
  };
  if (stratified) {
    for (auto& members : by_class) deal(members);
  } else {
    std::vector<int> all(static_cast<std::size_t>(ds.n_trials));
    std::iota(all.begin(), all.end(), 0);
    deal(all);
  }
  return plan;
}

EpochDataset subset(const EpochDataset& ds, const std::vector<int>& trials) {
  EpochDataset out;
  out.n_trials = static_cast<int>(trials.size());
  out.n_channels = ds.n_channels;
  out.n_samples = ds.n_samples;
  out.fs = ds.fs;
  out.class_count = ds.class_count;
  out.labels.reserve(trials.size());
  out.data.reserve(trials.size() * static_cast<std::size_t>(ds.n_channels) * ds.n_samples);
  const std::size_t block = static_cast<std::size_t>(ds.n_channels) * ds.n_samples;
  for (int t : trials) {
    if (t < 0 || t >= ds.n_trials) throw std::invalid_argument("subset: trial out of range");
    out.labels.push_back(ds.labels[static_cast<std::size_t>(t)]);
    const auto begin = ds.data.begin() + static_cast<std::ptrdiff_t>(block * t);
    out.data.insert(out.data.end(), begin, begin + static_cast<std::ptrdiff_t>(block));
  }
  return out;
}

CrossvalResult crossval_accuracy(const EpochDataset& ds, int k, int rank,
                                 Variant variant, const OptimConfig& config) {
  const FoldPlan plan = kfold(ds, k, config.seed);
  const DataMatrixPair flat = flatten(ds);

  CrossvalResult out;
  out.stratified = plan.stratified;
  for (int fold = 0; fold < k; ++fold) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> train, test;
    for (int t = 0; t < ds.n_trials; ++t)
      (plan.assignments[static_cast<std::size_t>(t)] == fold ? test : train).push_back(t);

    Matrix x_train(train.size(), flat.x.cols()), y_train(train.size(), flat.y.cols());
    for (std::size_t i = 0; i < train.size(); ++i) {
      x_train.row(static_cast<Eigen::Index>(i)) = flat.x.row(train[i]);
      y_train.row(static_cast<Eigen::Index>(i)) = flat.y.row(train[i]);
    }
    Matrix x_test(test.size(), flat.x.cols());
    for (std::size_t i = 0; i < test.size(); ++i)
      x_test.row(static_cast<Eigen::Index>(i)) = flat.x.row(test[i]);

    const DataMatrixPair train_pair =
        DataMatrixPair::from(std::move(x_train), std::move(y_train));
    PlsrModel model;
    switch (variant) {
      case Variant::bigr_preconditioned:
        model = fit_plsr_bigr(train_pair, rank, config, MetricMode::preconditioned);
        break;
      case Variant::bigr_identity:
        model = fit_plsr_bigr(train_pair, rank, config, MetricMode::identity);
        break;
      case Variant::simpls:
        model = fit_simpls(train_pair, rank);
        break;
    }
    const std::vector<int> predicted = classify(predict(model, x_test));
    int correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
      if (predicted[i] == ds.labels[static_cast<std::size_t>(test[i])]) ++correct;
    out.fold_accuracy.push_back(static_cast<double>(correct) /
                                static_cast<double>(test.size()));
    out.fold_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  const double n = static_cast<double>(out.fold_accuracy.size());
  out.mean = std::accumulate(out.fold_accuracy.begin(), out.fold_accuracy.end(), 0.0) / n;
  double ss = 0;
  for (double a : out.fold_accuracy) ss += (a - out.mean) * (a - out.mean);
  out.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return out;
}

std::string format_mean_std(double mean, double stddev) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f±%.4f", mean, stddev);
  return buf;
}

EpochDataset synth_epochs(int trials, int channels, int samples, int classes,
                          double snr, std::uint64_t seed, double fs) {
  if (trials < 1 || channels < 1 || samples < 1)
    throw std::invalid_argument("synth_epochs: dimensions must be positive");
  if (classes < 2) throw std::invalid_argument("synth_epochs: need classes >= 2");
  if (!(snr > 0)) throw std::invalid_argument("synth_epochs: snr must be positive");
  if (fs <= 0) throw std::invalid_argument("synth_epochs: fs must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * M_PI);

  // class-specific spatial patterns and sinusoid frequencies across 10-20 Hz
  Matrix patterns(channels, classes);
  for (int c = 0; c < classes; ++c)
    for (int ch = 0; ch < channels; ++ch) patterns(ch, c) = gauss(rng);
  std::vector<double> freq(static_cast<std::size_t>(classes)), phase(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    freq[static_cast<std::size_t>(c)] = 10.0 + 10.0 * c / (classes - 1);
    phase[static_cast<std::size_t>(c)] = uniform(rng);
  }

  EpochDataset ds;
  ds.n_trials = trials;
  ds.n_channels = channels;
  ds.n_samples = samples;
  ds.fs = fs;
  ds.class_count = classes;
  ds.labels.resize(static_cast<std::size_t>(trials));
  ds.data.resize(static_cast<std::size_t>(trials) * channels * samples);

  double signal_power = 0;
  for (int t = 0; t < trials; ++t) {
    const int cls = t % classes;
    ds.labels[static_cast<std::size_t>(t)] = cls;
    for (int ch = 0; ch < channels; ++ch) {
      for (int s = 0; s < samples; ++s) {
        const double wave =
            std::sin(2.0 * M_PI * freq[static_cast<std::size_t>(cls)] * s / fs +
                     phase[static_cast<std::size_t>(cls)]);
        const double v = patterns(ch, cls) * wave;
        ds.at(t, ch, s) = v;
        signal_power += v * v;
      }
    }
  }
  signal_power /= static_cast<double>(ds.data.size());

  if (std::isfinite(snr)) {
    const double sigma = std::sqrt(signal_power / snr);
    for (double& v : ds.data) v += sigma * gauss(rng);
  }
  return ds;
}

}  // namespace plsr
