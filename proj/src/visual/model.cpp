#include "affect/visual/model.hpp"

#include <nlohmann/json.hpp>

#include "affect/errors.hpp"
#include "affect/hash.hpp"

namespace affect::visual {

namespace {

std::string hash_state(const nn::StateRefs& refs) {
  std::string blob;
  for (const auto& [name, tensor] : refs) {
    blob += name;
    blob.append(reinterpret_cast<const char*>(tensor->data()),
                static_cast<std::size_t>(tensor->size()) * sizeof(float));
  }
  return sha256_hex(blob);
}

}  // namespace

VisualModel::VisualModel(const VisualModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      backbone_(make_backbone(cfg.backbone_kind, cfg.channels, cfg.embed_dim)),
      au_head_("au_head", cfg.embed_dim, data::kNumAus),
      expr_head_("expr_head", cfg.embed_dim, data::kNumExpressions) {
  Rng rng(seed);
  if (auto* resnet = dynamic_cast<SmallResNet*>(backbone_.get())) resnet->init(rng);
  if (auto* tiny = dynamic_cast<TinyLinearBackbone*>(backbone_.get())) tiny->init(rng);
  au_head_.init(rng);
  expr_head_.init(rng);
}

Tensor VisualModel::embed(const Tensor& images, bool train) {
  if (train && frozen_) throw ContractError("frozen visual model cannot run in train mode");
  return backbone_->forward(images, train);
}

Tensor VisualModel::task_logits(const Tensor& embeddings, Task task) {
  if (embeddings.ndim() != 2 || embeddings.dim(1) != cfg_.embed_dim)
    throw ContractError("embeddings must be (N, embed_dim)");
  last_task_ = task;
  return task == Task::au ? au_head_.forward(embeddings) : expr_head_.forward(embeddings);
}

void VisualModel::backward_task(const Tensor& dlogits, Task task) {
  if (frozen_) throw ContractError("frozen visual model cannot backpropagate");
  if (task != last_task_)
    throw ContractError("backward_task must match the last task_logits call");
  Tensor dembed =
      task == Task::au ? au_head_.backward(dlogits) : expr_head_.backward(dlogits);
  backbone_->backward(dembed);
}

nn::ParamRefs VisualModel::params_for(Task task) {
  nn::ParamRefs refs;
  backbone_->params(refs);
  if (task == Task::au)
    au_head_.params(refs);
  else
    expr_head_.params(refs);
  return refs;
}

nn::ParamRefs VisualModel::all_params() {
  nn::ParamRefs refs;
  backbone_->params(refs);
  au_head_.params(refs);
  expr_head_.params(refs);
  return refs;
}

nn::StateRefs VisualModel::state() {
  nn::StateRefs refs;
  backbone_->state(refs);
  au_head_.state(refs);
  expr_head_.state(refs);
  return refs;
}

std::string VisualModel::state_hash() const {
  return hash_state(const_cast<VisualModel*>(this)->state());
}

std::string VisualModel::backbone_hash() const {
  nn::StateRefs refs;
  const_cast<VisualModel*>(this)->backbone_->state(refs);
  return hash_state(refs);
}

std::string VisualModel::head_hash(Task task) const {
  nn::StateRefs refs;
  auto* self = const_cast<VisualModel*>(this);
  if (task == Task::au)
    self->au_head_.state(refs);
  else
    self->expr_head_.state(refs);
  return hash_state(refs);
}

void VisualModel::save(const std::filesystem::path& path) const {
  save(path, nlohmann::json::object());
}

void VisualModel::save(const std::filesystem::path& path,
                       const nlohmann::json& extra_meta) const {
  Checkpoint ckpt;
  ckpt.meta()["model"] = "visual";
  ckpt.meta()["backbone"] = {{"kind", cfg_.backbone_kind},
                             {"channels", cfg_.channels},
                             {"embed_dim", cfg_.embed_dim}};
  if (!extra_meta.is_null() && !extra_meta.empty()) ckpt.meta()["extra"] = extra_meta;
  for (const auto& [name, tensor] : const_cast<VisualModel*>(this)->state())
    ckpt.add(name, *tensor);
  ckpt.save(path);
}

VisualModel VisualModel::load(const std::filesystem::path& path) {
  return from_checkpoint(Checkpoint::load(path));
}

VisualModel VisualModel::from_checkpoint(const Checkpoint& ckpt) {
  const auto& meta = ckpt.meta();
  if (!meta.contains("model") || meta["model"] != "visual")
    throw CheckpointError("checkpoint does not hold a visual model");
  VisualModelConfig cfg;
  cfg.backbone_kind = meta["backbone"]["kind"].get<std::string>();
  cfg.channels = meta["backbone"]["channels"].get<std::vector<int>>();
  cfg.embed_dim = meta["backbone"]["embed_dim"].get<int>();
  VisualModel model(cfg, /*seed=*/0);
  for (auto& [name, tensor] : model.state()) {
    const Tensor& stored = ckpt.get(name);
    if (!stored.same_shape(*tensor))
      throw CheckpointError("tensor shape mismatch for " + name);
    *tensor = stored;
  }
  return model;
}

}  // namespace affect::visual
