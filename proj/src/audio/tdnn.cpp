#include "affect/audio/tdnn.hpp"

#include <cmath>

#include "affect/errors.hpp"
#include "affect/hash.hpp"

namespace affect::audio {

TdnnModel::TdnnModel(const TdnnConfig& cfg) : cfg_(cfg) {
  const std::vector<std::vector<int>> contexts = {
      {-1, 0, 1}, {-2, 0, 2}, {-3, 0, 3}, {0}, {0}};
  int in = cfg.in_dim;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const int out = (i + 1 == contexts.size()) ? cfg.out_dim : cfg.hidden;
    const std::string name = "tdnn.layer" + std::to_string(i);
    blocks_.push_back({nn::Conv1d(name, in, out, contexts[i]),
                       nn::BatchNorm(name + ".norm", out), nn::ReLU{}});
    in = out;
  }
}

void TdnnModel::init(Rng& rng) {
  for (auto& b : blocks_) b.conv.init(rng);
}

Tensor TdnnModel::forward(const Tensor& x, bool train) {
  if (x.ndim() != 3 || x.dim(1) != cfg_.in_dim)
    throw ContractError("tdnn input must be (N, n_mels, T)");
  Tensor h = x;
  for (auto& b : blocks_) {
    h = b.conv.forward(h);
    h = b.norm.forward(h, train);
    h = b.relu.forward(h);
  }
  return h;
}

Tensor TdnnModel::backward(const Tensor& dy) {
  Tensor g = dy;
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    g = it->relu.backward(g);
    g = it->norm.backward(g);
    g = it->conv.backward(g);
  }
  return g;
}

Tensor TdnnModel::features(const MelSpectrogram& spec) {
  const int t = spec.num_frames();
  Tensor x({1, cfg_.in_dim, t});
  x.raw() = spec.values.raw();
  const Tensor y = forward(x, /*train=*/false);  // (1, out, T)
  Tensor out({t, cfg_.out_dim});
  for (int s = 0; s < t; ++s)
    for (int c = 0; c < cfg_.out_dim; ++c)
      out[static_cast<std::int64_t>(s) * cfg_.out_dim + c] =
          y[static_cast<std::int64_t>(c) * t + s];
  return out;
}

Tensor TdnnModel::silence_features(int t_frames, const MelConfig& mel_cfg) {
  if (t_frames < 0) throw ContractError("silence_features length must be >= 0");
  if (t_frames == 0) return Tensor({0, cfg_.out_dim});
  MelSpectrogram spec;
  spec.n_mels = mel_cfg.n_mels;
  spec.window_sec = mel_cfg.window_sec;
  spec.stride_sec = mel_cfg.stride_sec;
  spec.values = Tensor({mel_cfg.n_mels, t_frames});
  spec.values.fill(static_cast<float>(std::log(mel_cfg.log_eps)));
  return features(spec);
}

void TdnnModel::params(nn::ParamRefs& out) {
  for (auto& b : blocks_) {
    b.conv.params(out);
    b.norm.params(out);
  }
}

void TdnnModel::state(nn::StateRefs& out) {
  for (auto& b : blocks_) {
    b.conv.state(out);
    b.norm.state(out);
  }
}

std::string TdnnModel::state_hash() const {
  nn::StateRefs refs;
  const_cast<TdnnModel*>(this)->state(refs);
  std::string blob;
  for (const auto& [name, tensor] : refs) {
    blob += name;
    blob.append(reinterpret_cast<const char*>(tensor->data()),
                static_cast<std::size_t>(tensor->size()) * sizeof(float));
  }
  return sha256_hex(blob);
}

}  // namespace affect::audio
