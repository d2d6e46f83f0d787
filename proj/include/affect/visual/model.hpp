#pragma once

#include <filesystem>
#include <memory>

#include "affect/checkpoint.hpp"
#include "affect/data/types.hpp"
#include "affect/schedule.hpp"
#include "affect/visual/backbone.hpp"

namespace affect::visual {

struct VisualModelConfig {
  std::string backbone_kind = "small_resnet";
  std::vector<int> channels = {16, 32, 64, 128};
  int embed_dim = kEmbedDim;
};

// Shared frame backbone with one linear head per task (12 AU logits, 7
// expression logits). AU logits feed a sigmoid downstream, expression logits
// a softmax.
class VisualModel {
 public:
  explicit VisualModel(const VisualModelConfig& cfg, std::uint64_t seed);

  // images: (N, 3, 112, 112) in [0, 1] -> (N, embed_dim)
  Tensor embed(const Tensor& images, bool train = false);
  // embeddings: (N, embed_dim) -> logits (N, 12) or (N, 7)
  Tensor task_logits(const Tensor& embeddings, Task task);

  // Backpropagates the active head then the backbone; gradients accumulate
  // into the parameters visited.
  void backward_task(const Tensor& dlogits, Task task);

  nn::ParamRefs params_for(Task task);
  nn::ParamRefs all_params();
  nn::StateRefs state();

  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  FrameBackbone& backbone() { return *backbone_; }
  const VisualModelConfig& config() const { return cfg_; }

  std::string state_hash() const;
  std::string backbone_hash() const;
  std::string head_hash(Task task) const;

  void save(const std::filesystem::path& path) const;
  void save(const std::filesystem::path& path, const nlohmann::json& extra_meta) const;
  static VisualModel load(const std::filesystem::path& path);
  static VisualModel from_checkpoint(const Checkpoint& ckpt);

 private:
  VisualModelConfig cfg_;
  std::unique_ptr<FrameBackbone> backbone_;
  nn::Linear au_head_;
  nn::Linear expr_head_;
  bool frozen_ = false;
  Task last_task_ = Task::expression;
};

}  // namespace affect::visual
