#pragma once

#include <span>
#include <string>

#include "puppetcast/rig/rig.hpp"

namespace puppetcast::rig {

/// Fixed three-decimal rendering; never produces "-0.000".
std::string format_coord(double v);

/// One <path> per styled path, deterministic byte-for-byte.
std::string emit_svg(const FrameGeometry& geometry);

/// Single document animating every path's "d" attribute through the frames (SMIL).
std::string emit_animated_svg(std::span<const FrameGeometry> frames, double fps);

}  // namespace puppetcast::rig
