#include "affect/audio/mel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "affect/errors.hpp"

namespace affect::audio {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Integral of the triangle (f0 rising to f1, falling to f2, peak 1) over
// [lo, hi], divided by (hi - lo).
double triangle_bin_weight(double f0, double f1, double f2, double lo, double hi) {
  const auto ramp_integral = [](double a, double b, double x_lo, double x_hi) {
    // integral of (x - a) / (b - a) over [x_lo, x_hi] clipped to [a, b]
    const double l = std::max(a, x_lo), h = std::min(b, x_hi);
    if (h <= l) return 0.0;
    const double scale = 1.0 / (b - a);
    return 0.5 * scale * ((h - a) * (h - a) - (l - a) * (l - a));
  };
  double area = 0.0;
  if (f1 > f0) area += ramp_integral(f0, f1, lo, hi);
  if (f2 > f1) {
    // falling side: 1 - rising ramp from f1 to f2
    const double l = std::max(f1, lo), h = std::min(f2, hi);
    if (h > l) area += (h - l) - ramp_integral(f1, f2, lo, hi);
  }
  return area / (hi - lo);
}

}  // namespace

void fft_radix2(std::vector<std::complex<double>>& buf) {
  const std::size_t n = buf.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ContractError("fft size must be a power of two");
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = buf[i + k];
        const auto v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

int mel_frame_count(std::int64_t num_samples, int window_samples, int stride_samples) {
  if (num_samples < window_samples) return 0;
  return static_cast<int>((num_samples - window_samples) / stride_samples) + 1;
}

Eigen::MatrixXd mel_filterbank(int n_mels, int n_fft, int sample_rate) {
  const int n_bins = n_fft / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / n_fft;
  const double mel_hi = hz_to_mel(sample_rate / 2.0);

  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[static_cast<std::size_t>(i)] = mel_to_hz(mel_hi * i / (n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double f0 = edges[static_cast<std::size_t>(m)];
    const double f1 = edges[static_cast<std::size_t>(m) + 1];
    const double f2 = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double lo = std::max(0.0, (k - 0.5) * bin_hz);
      const double hi = std::min(sample_rate / 2.0, (k + 0.5) * bin_hz);
      if (hi <= lo) continue;
      const double w = triangle_bin_weight(f0, f1, f2, lo, hi);
      if (w > 0.0) fb(m, k) = w;
    }
  }
  return fb;
}

MelSpectrogram compute_mel_spectrogram(const std::vector<float>& waveform,
                                       int sample_rate, const MelConfig& cfg) {
  if (sample_rate <= 0) throw ContractError("sample_rate must be positive");
  const int win = static_cast<int>(std::lround(cfg.window_sec * sample_rate));
  const int stride = static_cast<int>(std::lround(cfg.stride_sec * sample_rate));
  if (win <= 0 || stride <= 0) throw ContractError("window and stride must be positive");
  if (static_cast<std::int64_t>(waveform.size()) < win)
    throw DataError("waveform shorter than one analysis window (" +
                    std::to_string(waveform.size()) + " < " + std::to_string(win) +
                    " samples)");

  const int t_frames = mel_frame_count(static_cast<std::int64_t>(waveform.size()), win, stride);
  const int n_fft = next_pow2(win);
  const int n_bins = n_fft / 2 + 1;

  std::vector<double> hann(static_cast<std::size_t>(win));
  for (int i = 0; i < win; ++i)
    hann[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (win - 1));

  const Eigen::MatrixXd fb = mel_filterbank(cfg.n_mels, n_fft, sample_rate);

  MelSpectrogram spec;
  spec.n_mels = cfg.n_mels;
  spec.window_sec = cfg.window_sec;
  spec.stride_sec = cfg.stride_sec;
  spec.sample_rate = sample_rate;
  spec.values = Tensor({cfg.n_mels, t_frames});

  std::vector<std::complex<double>> fft_buf(static_cast<std::size_t>(n_fft));
  Eigen::VectorXd power(n_bins);
  for (int t = 0; t < t_frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * stride;
    for (int i = 0; i < win; ++i)
      fft_buf[static_cast<std::size_t>(i)] = {
          waveform[start + static_cast<std::size_t>(i)] * hann[static_cast<std::size_t>(i)],
          0.0};
    for (int i = win; i < n_fft; ++i) fft_buf[static_cast<std::size_t>(i)] = {0.0, 0.0};
    fft_radix2(fft_buf);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(fft_buf[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd mel = fb * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      spec.values[static_cast<std::int64_t>(m) * t_frames + t] =
          static_cast<float>(std::log(mel[m] + cfg.log_eps));
  }
  return spec;
}

void write_mel_csv(const MelSpectrogram& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  const int t = spec.num_frames();
  for (int m = 0; m < spec.n_mels; ++m) {
    for (int i = 0; i < t; ++i) {
      if (i) out << ',';
      out << spec.values[static_cast<std::int64_t>(m) * t + i];
    }
    out << '\n';
  }
}

}  // namespace affect::audio
