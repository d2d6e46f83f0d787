#include "affect/seq/model.hpp"

#include <cmath>

#include "affect/errors.hpp"
#include "affect/hash.hpp"
#include "affect/losses.hpp"

namespace affect::seq {

int audio_row_for_frame(int frame_index, double fps, double stride_sec, int t_rows) {
  if (!(fps > 0.0) || !(stride_sec > 0.0))
    throw ContractError("fps and stride must be positive");
  const double t = frame_index / fps;
  const auto row = static_cast<std::int64_t>(std::llround(t / stride_sec));
  return static_cast<int>(std::clamp<std::int64_t>(row, 0, t_rows - 1));
}

Tensor align_audio_to_frames(const Tensor& audio_feats, double fps, double stride_sec,
                             const std::vector<int>& frame_indices) {
  if (audio_feats.ndim() != 2) throw ContractError("audio features must be (T, D)");
  const int t_rows = audio_feats.dim(0), d = audio_feats.dim(1);
  if (t_rows == 0 && !frame_indices.empty())
    throw ContractError("no audio rows to align; substitute silence features first");
  Tensor out({static_cast<int>(frame_indices.size()), d});
  for (std::size_t i = 0; i < frame_indices.size(); ++i) {
    const int row = audio_row_for_frame(frame_indices[i], fps, stride_sec, t_rows);
    std::copy_n(audio_feats.data() + static_cast<std::ptrdiff_t>(row) * d, d,
                out.data() + static_cast<std::ptrdiff_t>(i) * d);
  }
  return out;
}

std::vector<std::pair<int, int>> chunk_video(int frame_count, int window) {
  if (frame_count < 0) throw ContractError("frame_count must be >= 0");
  if (window <= 0) throw ContractError("window must be positive");
  std::vector<std::pair<int, int>> chunks;
  for (int start = 0; start < frame_count; start += window)
    chunks.emplace_back(start, std::min(window, frame_count - start));
  return chunks;
}

Tensor fuse(const Tensor& visual_seq, const Tensor& audio_seq) {
  if (visual_seq.ndim() != 2 || audio_seq.ndim() != 2)
    throw ContractError("fuse expects (L, Dv) and (L, Da)");
  if (visual_seq.dim(0) != audio_seq.dim(0))
    throw ContractError("fuse: sequence lengths differ");
  const int l = visual_seq.dim(0), dv = visual_seq.dim(1), da = audio_seq.dim(1);
  Tensor out({l, dv + da});
  for (int i = 0; i < l; ++i) {
    std::copy_n(visual_seq.data() + static_cast<std::ptrdiff_t>(i) * dv, dv,
                out.data() + static_cast<std::ptrdiff_t>(i) * (dv + da));
    std::copy_n(audio_seq.data() + static_cast<std::ptrdiff_t>(i) * da, da,
                out.data() + static_cast<std::ptrdiff_t>(i) * (dv + da) + dv);
  }
  return out;
}

// ---------------------------------------------------------------- model

SequenceModel::EncoderLayer::EncoderLayer(const std::string& name,
                                          const SequenceModelConfig& cfg)
    : attn(name + ".attn", cfg.d_model, cfg.heads),
      drop_attn(cfg.dropout),
      ln1(name + ".ln1", cfg.d_model),
      ff1(name + ".ff1", cfg.d_model, cfg.ff_dim),
      ff2(name + ".ff2", cfg.ff_dim, cfg.d_model),
      drop_ff(cfg.dropout),
      ln2(name + ".ln2", cfg.d_model) {}

void SequenceModel::EncoderLayer::init(Rng& rng) {
  attn.init(rng);
  ff1.init(rng);
  ff2.init(rng);
}

Tensor SequenceModel::EncoderLayer::forward(const Tensor& x, const Tensor& mask,
                                            bool train, Rng* rng) {
  const auto shape = x.shape();
  Tensor a = attn.forward(x, mask);
  a = drop_attn.forward(a, train, rng);
  a.vec() += x.vec();                      // residual
  Tensor n1 = ln1.forward(a);              // rows of d_model
  Tensor f = ff1.forward(n1);
  f = relu.forward(f);
  f = ff2.forward(f);
  f = drop_ff.forward(f, train, rng);
  f.vec() += n1.vec();                     // residual
  return ln2.forward(f).reshaped(shape);
}

Tensor SequenceModel::EncoderLayer::backward(const Tensor& dy) {
  const auto shape = dy.shape();
  Tensor ds2 = ln2.backward(dy);
  Tensor df = drop_ff.backward(ds2);
  df = ff2.backward(df);
  df = relu.backward(df);
  df = ff1.backward(df);
  df.vec() += ds2.vec();                   // residual into n1
  Tensor ds1 = ln1.backward(df);
  Tensor da = drop_attn.backward(ds1);
  Tensor dx = attn.backward(da.reshaped(shape));
  dx.vec() += ds1.vec();                   // residual into x
  return dx.reshaped(shape);
}

void SequenceModel::EncoderLayer::params(nn::ParamRefs& out) {
  attn.params(out);
  ln1.params(out);
  ff1.params(out);
  ff2.params(out);
  ln2.params(out);
}

void SequenceModel::EncoderLayer::state(nn::StateRefs& out) {
  attn.state(out);
  ln1.state(out);
  ff1.state(out);
  ff2.state(out);
  ln2.state(out);
}

SequenceModel::SequenceModel(const SequenceModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      au_out_("seq.au_out", cfg.d_model, data::kNumAus),
      expr_out_("seq.expr_out", cfg.d_model, data::kNumExpressions) {
  if (cfg.encoder_layers < 1) throw ContractError("encoder needs at least one layer");
  for (int i = 0; i < cfg.encoder_layers; ++i)
    layers_.emplace_back("seq.encoder" + std::to_string(i), cfg);
  Rng rng(seed);
  for (auto& layer : layers_) layer.init(rng);
  au_out_.init(rng);
  expr_out_.init(rng);
}

Tensor SequenceModel::positional_table(int length) const {
  Tensor table({length, cfg_.d_model});
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < cfg_.d_model / 2; ++i) {
      const double angle =
          pos / std::pow(10000.0, 2.0 * i / static_cast<double>(cfg_.d_model));
      table[static_cast<std::int64_t>(pos) * cfg_.d_model + 2 * i] =
          static_cast<float>(std::sin(angle));
      table[static_cast<std::int64_t>(pos) * cfg_.d_model + 2 * i + 1] =
          static_cast<float>(std::cos(angle));
    }
  }
  return table;
}

Tensor SequenceModel::encode_batch(const Tensor& x, const Tensor& mask, bool train,
                                   Rng* rng) {
  if (x.ndim() != 3 || x.dim(2) != cfg_.d_model)
    throw ContractError("encode input must be (B, L, d_model)");
  const int b = x.dim(0), l = x.dim(1);
  last_batch_shape_ = {b, l, cfg_.d_model};
  Tensor h = x;
  if (cfg_.positional_encoding) {
    const Tensor table = positional_table(l);
    for (int i = 0; i < b; ++i) {
      VecMap(h.data() + static_cast<std::ptrdiff_t>(i) * l * cfg_.d_model,
             static_cast<Eigen::Index>(l) * cfg_.d_model) += table.vec();
    }
  }
  for (auto& layer : layers_) h = layer.forward(h, mask, train, rng);
  return h;
}

Tensor SequenceModel::encode(const FeatureSequence& seq) {
  const int l = seq.length();
  if (static_cast<int>(seq.mask.size()) != l)
    throw ContractError("feature sequence mask length mismatch");
  Tensor x = seq.fused.reshaped({1, l, cfg_.d_model});
  Tensor mask({1, l});
  for (int i = 0; i < l; ++i) mask[i] = seq.mask[static_cast<std::size_t>(i)] ? 1.0f : 0.0f;
  Tensor y = encode_batch(x, mask, /*train=*/false, nullptr);
  return y.reshaped({l, cfg_.d_model});
}

Tensor SequenceModel::au_logits(const Tensor& encoded) {
  last_task_ = Task::au;
  const auto shape = encoded.shape();
  Tensor out = au_out_.forward(encoded);
  if (shape.size() == 3) out = out.reshaped({shape[0], shape[1], data::kNumAus});
  return out;
}

Tensor SequenceModel::expr_logits(const Tensor& encoded) {
  last_task_ = Task::expression;
  const auto shape = encoded.shape();
  Tensor out = expr_out_.forward(encoded);
  if (shape.size() == 3) out = out.reshaped({shape[0], shape[1], data::kNumExpressions});
  return out;
}

Tensor SequenceModel::backward_task(const Tensor& dlogits, Task task) {
  if (task != last_task_)
    throw ContractError("backward_task must match the last head forward");
  Tensor denc =
      task == Task::au ? au_out_.backward(dlogits) : expr_out_.backward(dlogits);
  if (last_batch_shape_.empty()) throw ContractError("no cached encode to backpropagate");
  denc = denc.reshaped(last_batch_shape_);
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    denc = it->backward(denc);
  return denc;  // positional encoding is additive, gradient passes through
}

std::vector<FramePrediction> SequenceModel::predict_frames(
    const Tensor& encoded, const std::vector<std::uint8_t>& mask) {
  if (encoded.ndim() != 2 || encoded.dim(1) != cfg_.d_model)
    throw ContractError("predict_frames expects (L, d_model)");
  const int l = encoded.dim(0);
  if (static_cast<int>(mask.size()) != l)
    throw ContractError("mask length does not match encoded rows");

  Tensor au = au_out_.forward(encoded);      // (L, 12)
  Tensor expr = expr_out_.forward(encoded);  // (L, 7)

  std::vector<FramePrediction> out;
  out.reserve(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    FramePrediction pred;
    for (int j = 0; j < data::kNumAus; ++j)
      pred.au_probs[static_cast<std::size_t>(j)] = static_cast<float>(
          losses::sigmoid(au[static_cast<std::int64_t>(i) * data::kNumAus + j]));
    Eigen::VectorXd row(data::kNumExpressions);
    for (int j = 0; j < data::kNumExpressions; ++j)
      row[j] = expr[static_cast<std::int64_t>(i) * data::kNumExpressions + j];
    const Eigen::VectorXd probs = losses::softmax(row);
    for (int j = 0; j < data::kNumExpressions; ++j)
      pred.expr_probs[static_cast<std::size_t>(j)] = static_cast<float>(probs[j]);
    out.push_back(pred);
  }
  return out;
}

std::vector<FramePrediction> SequenceModel::predict_sequence(const FeatureSequence& seq) {
  return predict_frames(encode(seq), seq.mask);
}

nn::ParamRefs SequenceModel::params_for(Task task) {
  nn::ParamRefs refs;
  for (auto& layer : layers_) layer.params(refs);
  if (task == Task::au)
    au_out_.params(refs);
  else
    expr_out_.params(refs);
  return refs;
}

nn::ParamRefs SequenceModel::all_params() {
  nn::ParamRefs refs;
  for (auto& layer : layers_) layer.params(refs);
  au_out_.params(refs);
  expr_out_.params(refs);
  return refs;
}

nn::StateRefs SequenceModel::state() {
  nn::StateRefs refs;
  state(refs);
  return refs;
}

void SequenceModel::state(nn::StateRefs& out) {
  for (auto& layer : layers_) layer.state(out);
  au_out_.state(out);
  expr_out_.state(out);
}

namespace {

std::string hash_refs(const nn::StateRefs& refs) {
  std::string blob;
  for (const auto& [name, tensor] : refs) {
    blob += name;
    blob.append(reinterpret_cast<const char*>(tensor->data()),
                static_cast<std::size_t>(tensor->size()) * sizeof(float));
  }
  return sha256_hex(blob);
}

}  // namespace

std::string SequenceModel::state_hash() const {
  return hash_refs(const_cast<SequenceModel*>(this)->state());
}

std::string SequenceModel::head_hash(Task task) const {
  nn::StateRefs refs;
  auto* self = const_cast<SequenceModel*>(this);
  if (task == Task::au)
    self->au_out_.state(refs);
  else
    self->expr_out_.state(refs);
  return hash_refs(refs);
}

}  // namespace affect::seq
