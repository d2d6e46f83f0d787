#pragma once

#include "affect/data/media.hpp"
#include "affect/rng.hpp"

namespace affect::visual {

struct AugmentConfig {
  bool horizontal_flip = true;   // applied with probability 0.5
  int crop_min = 100;            // crop side sampled in [crop_min, width]
  float color_jitter = 0.1f;     // hue/saturation/lightness within +-10%

  static AugmentConfig disabled() { return {false, 112, 0.0f}; }
};

// Random flip, random crop rescaled to the input size, HSL jitter.
// Output values stay in [0, 1]; with flip off, crop_min == width and zero
// jitter this is the identity.
data::Image augment(const data::Image& image, Rng& rng, const AugmentConfig& cfg = {});

// Bilinear resize of a CHW image.
data::Image resize_bilinear(const data::Image& image, int out_h, int out_w);

}  // namespace affect::visual
