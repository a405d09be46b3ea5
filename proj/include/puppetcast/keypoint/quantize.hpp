#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

namespace puppetcast::keypoint {

inline constexpr std::uint32_t kQuantMax = 65535;

/// Maps [0,1] onto the 16-bit lattice, rounding half away from zero.
/// Inputs are clamped first; NaN maps to 0.
inline std::uint16_t quantize_coord(double x) noexcept {
    if (!(x > 0.0)) {
        return 0;
    }
    x = std::min(x, 1.0);
    return static_cast<std::uint16_t>(std::round(x * kQuantMax));
}

inline double dequantize_coord(std::uint16_t q) noexcept {
    return static_cast<double>(q) / kQuantMax;
}

/// Checked variant for wider integers; values outside [0,65535] are rejected.
inline std::optional<double> dequantize_coord_checked(std::int64_t q) noexcept {
    if (q < 0 || q > static_cast<std::int64_t>(kQuantMax)) {
        return std::nullopt;
    }
    return dequantize_coord(static_cast<std::uint16_t>(q));
}

}  // namespace puppetcast::keypoint
