#pragma once

#include <algorithm>
#include <cmath>

namespace affect {

struct Rgb {
  float r = 0, g = 0, b = 0;
};
struct Hsl {
  float h = 0;  // [0, 1) fraction of the hue circle
  float s = 0;
  float l = 0;
};

inline Hsl rgb_to_hsl(const Rgb& in) {
  const float mx = std::max({in.r, in.g, in.b});
  const float mn = std::min({in.r, in.g, in.b});
  Hsl out;
  out.l = 0.5f * (mx + mn);
  const float d = mx - mn;
  if (d < 1e-12f) return out;  // achromatic
  out.s = out.l > 0.5f ? d / (2.0f - mx - mn) : d / (mx + mn);
  float h;
  if (mx == in.r)
    h = (in.g - in.b) / d + (in.g < in.b ? 6.0f : 0.0f);
  else if (mx == in.g)
    h = (in.b - in.r) / d + 2.0f;
  else
    h = (in.r - in.g) / d + 4.0f;
  out.h = h / 6.0f;
  return out;
}

namespace detail {
inline float hue_to_rgb(float p, float q, float t) {
  if (t < 0.0f) t += 1.0f;
  if (t > 1.0f) t -= 1.0f;
  if (t < 1.0f / 6.0f) return p + (q - p) * 6.0f * t;
  if (t < 0.5f) return q;
  if (t < 2.0f / 3.0f) return p + (q - p) * (2.0f / 3.0f - t) * 6.0f;
  return p;
}
}  // namespace detail

inline Rgb hsl_to_rgb(const Hsl& in) {
  if (in.s <= 0.0f) return {in.l, in.l, in.l};
  const float q = in.l < 0.5f ? in.l * (1.0f + in.s) : in.l + in.s - in.l * in.s;
  const float p = 2.0f * in.l - q;
  return {detail::hue_to_rgb(p, q, in.h + 1.0f / 3.0f), detail::hue_to_rgb(p, q, in.h),
          detail::hue_to_rgb(p, q, in.h - 1.0f / 3.0f)};
}

}  // namespace affect
