#include "affect/visual/augment.hpp"

#include <algorithm>
#include <cmath>

#include "affect/color.hpp"

namespace affect::visual {

using data::Image;

Image resize_bilinear(const Image& image, int out_h, int out_w) {
  if (image.height == out_h && image.width == out_w) return image;
  Image out = Image::blank(out_h, out_w);
  const float sy = static_cast<float>(image.height) / out_h;
  const float sx = static_cast<float>(image.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const float fy = std::min((y + 0.5f) * sy - 0.5f, static_cast<float>(image.height - 1));
    const int y0 = std::max(0, static_cast<int>(std::floor(fy)));
    const int y1 = std::min(image.height - 1, y0 + 1);
    const float wy = std::clamp(fy - y0, 0.0f, 1.0f);
    for (int x = 0; x < out_w; ++x) {
      const float fx = std::min((x + 0.5f) * sx - 0.5f, static_cast<float>(image.width - 1));
      const int x0 = std::max(0, static_cast<int>(std::floor(fx)));
      const int x1 = std::min(image.width - 1, x0 + 1);
      const float wx = std::clamp(fx - x0, 0.0f, 1.0f);
      for (int c = 0; c < 3; ++c) {
        const float top = image.at(c, y0, x0) * (1 - wx) + image.at(c, y0, x1) * wx;
        const float bot = image.at(c, y1, x0) * (1 - wx) + image.at(c, y1, x1) * wx;
        out.at(c, y, x) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Image augment(const Image& image, Rng& rng, const AugmentConfig& cfg) {
  Image img = image;

  if (cfg.horizontal_flip && rng.bernoulli(0.5)) {
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width / 2; ++x)
          std::swap(img.at(c, y, x), img.at(c, y, img.width - 1 - x));
  }

  const int crop_min = std::min(cfg.crop_min, img.width);
  if (crop_min < img.width) {
    const int size = rng.uniform_int(crop_min, img.width);
    if (size < img.width) {
      const int ox = rng.uniform_int(0, img.width - size);
      const int oy = rng.uniform_int(0, img.height - size);
      Image crop = Image::blank(size, size);
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < size; ++y)
          for (int x = 0; x < size; ++x) crop.at(c, y, x) = img.at(c, oy + y, ox + x);
      img = resize_bilinear(crop, image.height, image.width);
    }
  }

  if (cfg.color_jitter > 0.0f) {
    const float j = cfg.color_jitter;
    const float dh = rng.uniform(-j, j);
    const float sat_scale = 1.0f + rng.uniform(-j, j);
    const float light_scale = 1.0f + rng.uniform(-j, j);
    const int hw = img.height * img.width;
    for (int i = 0; i < hw; ++i) {
      Rgb rgb{img.chw[static_cast<std::size_t>(i)],
              img.chw[static_cast<std::size_t>(hw + i)],
              img.chw[static_cast<std::size_t>(2 * hw + i)]};
      Hsl hsl = rgb_to_hsl(rgb);
      hsl.h = hsl.h + dh;
      if (hsl.h < 0.0f) hsl.h += 1.0f;
      if (hsl.h >= 1.0f) hsl.h -= 1.0f;
      hsl.s = std::clamp(hsl.s * sat_scale, 0.0f, 1.0f);
      hsl.l = std::clamp(hsl.l * light_scale, 0.0f, 1.0f);
      rgb = hsl_to_rgb(hsl);
      img.chw[static_cast<std::size_t>(i)] = std::clamp(rgb.r, 0.0f, 1.0f);
      img.chw[static_cast<std::size_t>(hw + i)] = std::clamp(rgb.g, 0.0f, 1.0f);
      img.chw[static_cast<std::size_t>(2 * hw + i)] = std::clamp(rgb.b, 0.0f, 1.0f);
    }
  }

  return img;
}

}  // namespace affect::visual
