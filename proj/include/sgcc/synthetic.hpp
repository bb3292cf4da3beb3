#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgcc/core_types.hpp"
#include "sgcc/frame.hpp"

namespace sgcc {

// Built-in deterministic test clips, selected by name:
//   "static"              flat mid-gray frames (degenerate content)
//   "moving_gradient"     smooth gradient with a moving textured disc
//   "translating_texture" full-frame texture panning at sub-pixel speed,
//                         amplitude concentrated around a seed-chosen blob
// The same (name, size, frames, seed) always produces the same pixels.
Clip generate_clip(const std::string& name, int width, int height, int frames,
                   uint64_t seed);

// Per-CTU attention weights derived from content activity (spatial gradient
// energy plus frame difference), normalized per frame.
std::vector<SaliencyMap> derive_saliency(const Clip& clip,
                                         const FrameLayout& layout);

}  // namespace sgcc
