#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "puppetcast/metrics/ledger.hpp"

namespace puppetcast::metrics {

/// Median and p10/p90 by linear interpolation between order statistics.
struct Distribution {
    std::size_t count = 0;
    double median = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;

    static Distribution of(std::vector<double> samples);
};

double percentile(std::span<const double> sorted, double p);

/// Bits per frame of the keypoint stream against a conventional low-quality video stream.
struct BitsPerFrameComparison {
    double baseline_bps = 200'000.0;
    double baseline_fps = 15.0;
    double keypoint_bits_per_frame = 3200.0;  // pose + face payload

    double baseline_bits_per_frame() const noexcept { return baseline_bps / baseline_fps; }
    double ratio() const noexcept { return baseline_bits_per_frame() / keypoint_bits_per_frame; }
    bool holds(double claimed = 4.0) const noexcept { return ratio() >= claimed; }
};

struct ReportOptions {
    double window_ms = 2000.0;
};

struct Report {
    bool empty = true;
    double window_ms = 2000.0;
    std::string bitrate_basis;  // "recv" or "send": which stamps carried the byte counts
    std::size_t frames = 0;
    double mean_bitrate_bps = 0.0;
    double mean_fps = 0.0;
    Distribution bitrate_bps;
    Distribution net_ms;
    Distribution extraction_ms;
    Distribution transmission_ms;
    Distribution render_ms;
    std::uint64_t conflicts = 0;
    std::uint64_t monotonicity_violations = 0;
    BitsPerFrameComparison comparison;
};

Report report(const LatencyLedger& ledger, const ReportOptions& options = {});

enum class ReportFormat { Json, Csv, Table };
std::optional<ReportFormat> report_format_from(std::string_view s) noexcept;

std::string export_report(const Report& report, ReportFormat format);

}  // namespace puppetcast::metrics
