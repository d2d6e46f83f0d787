#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <vector>

#include "affect/tensor.hpp"

namespace affect::audio {

struct MelConfig {
  int n_mels = 64;
  double window_sec = 0.010;
  double stride_sec = 0.005;
  double log_eps = 1e-10;
};

struct MelSpectrogram {
  Tensor values;  // (n_mels, T) log-mel energies
  int n_mels = 64;
  double window_sec = 0.010;
  double stride_sec = 0.005;
  int sample_rate = 0;

  int num_frames() const { return values.ndim() == 2 ? values.dim(1) : 0; }
};

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& buf);

// Frame count for a waveform of num_samples: floor((N - win) / stride) + 1.
int mel_frame_count(std::int64_t num_samples, int window_samples, int stride_samples);

// Triangular filters equally spaced on the mel scale covering [0, rate/2].
// Weights are the triangle's average over each FFT bin interval, so every
// filter row has positive mass even when filters are narrower than a bin.
Eigen::MatrixXd mel_filterbank(int n_mels, int n_fft, int sample_rate);

// Hann-windowed framing, power spectrum via FFT (size = next power of two at
// or above the window), mel filtering, log compression.
MelSpectrogram compute_mel_spectrogram(const std::vector<float>& waveform,
                                       int sample_rate, const MelConfig& cfg = {});

void write_mel_csv(const MelSpectrogram& spec, const std::filesystem::path& path);

}  // namespace affect::audio
