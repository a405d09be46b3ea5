#include "puppetcast/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "puppetcast/metrics/bitrate.hpp"

namespace puppetcast::metrics {

double percentile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        return 0.0;
    }
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Distribution Distribution::of(std::vector<double> samples) {
    Distribution d;
    d.count = samples.size();
    if (samples.empty()) {
        return d;
    }
    std::sort(samples.begin(), samples.end());
    d.median = percentile(samples, 0.5);
    d.p10 = percentile(samples, 0.1);
    d.p90 = percentile(samples, 0.9);
    return d;
}

Report report(const LatencyLedger& ledger, const ReportOptions& options) {
    Report out;
    out.window_ms = options.window_ms;
    out.conflicts = ledger.conflicts();
    out.monotonicity_violations = ledger.monotonicity_violations();
    const auto records = ledger.snapshot();

    std::vector<double> net, extraction, transmission, render;
    auto diff = [](const FrameRecord& r, Stage from, Stage to, std::vector<double>& sink) {
        if (r.at(from) && r.at(to)) {
            sink.push_back(to_ms(*r.at(to) - *r.at(from)));
        }
    };
    std::vector<std::pair<Micros, std::size_t>> by_recv, by_send;
    for (const auto& [key, r] : records) {
        diff(r, Stage::Capture, Stage::ExtractDone, extraction);
        diff(r, Stage::Send, Stage::Recv, transmission);
        diff(r, Stage::Recv, Stage::RenderDone, render);
        diff(r, Stage::Capture, Stage::RenderDone, net);
        if (r.bytes) {
            if (r.at(Stage::Recv)) {
                by_recv.emplace_back(*r.at(Stage::Recv), *r.bytes);
            }
            if (r.at(Stage::Send)) {
                by_send.emplace_back(*r.at(Stage::Send), *r.bytes);
            }
        }
    }
    auto& deliveries = by_recv.empty() ? by_send : by_recv;
    out.bitrate_basis = deliveries.empty() ? "" : (by_recv.empty() ? "send" : "recv");
    std::sort(deliveries.begin(), deliveries.end());
    out.frames = deliveries.size();

    std::vector<double> rates;
    SlidingBitrate window(options.window_ms);
    for (const auto& [ts, bytes] : deliveries) {
        window.add(to_ms(ts), bytes);
        if (auto r = window.rate_bps()) {
            rates.push_back(*r);
        }
    }
    if (deliveries.size() >= 2) {
        const double span_s = to_ms(deliveries.back().first - deliveries.front().first) / 1000.0;
        std::size_t bytes = 0;
        for (std::size_t i = 1; i < deliveries.size(); ++i) {
            bytes += deliveries[i].second;
        }
        if (span_s > 0.0) {
            out.mean_bitrate_bps = static_cast<double>(bytes) * 8.0 / span_s;
            out.mean_fps = static_cast<double>(deliveries.size() - 1) / span_s;
        }
    }

    out.bitrate_bps = Distribution::of(std::move(rates));
    out.net_ms = Distribution::of(std::move(net));
    out.extraction_ms = Distribution::of(std::move(extraction));
    out.transmission_ms = Distribution::of(std::move(transmission));
    out.render_ms = Distribution::of(std::move(render));
    out.empty = out.frames == 0 && out.bitrate_bps.count == 0 && out.net_ms.count == 0 &&
                out.extraction_ms.count == 0 && out.transmission_ms.count == 0 && out.render_ms.count == 0;
    return out;
}

std::optional<ReportFormat> report_format_from(std::string_view s) noexcept {
    if (s == "json") {
        return ReportFormat::Json;
    }
    if (s == "csv") {
        return ReportFormat::Csv;
    }
    if (s == "table") {
        return ReportFormat::Table;
    }
    return std::nullopt;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct Row {
    const char* csv_name;
    const char* label;
    const Distribution* d;
    double scale;
    const char* unit;
    int digits;
};

std::vector<Row> rows(const Report& r) {
    return {
        {"bitrate_bps", "Bitrate", &r.bitrate_bps, 1e-3, "kbps", 2},
        {"net_ms", "Net latency", &r.net_ms, 1.0, "ms", 1},
        {"extraction_ms", "Extraction latency", &r.extraction_ms, 1.0, "ms", 1},
        {"transmission_ms", "Transmission latency", &r.transmission_ms, 1.0, "ms", 1},
        {"render_ms", "Render latency", &r.render_ms, 1.0, "ms", 1},
    };
}

nlohmann::ordered_json dist_json(const Distribution& d) {
    nlohmann::ordered_json j;
    j["median"] = d.median;
    j["p10"] = d.p10;
    j["p90"] = d.p90;
    j["count"] = d.count;
    return j;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

}  // namespace

std::string export_report(const Report& r, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            nlohmann::ordered_json j;
            j["empty"] = r.empty;
            j["window_ms"] = r.window_ms;
            j["frames"] = r.frames;
            j["bitrate_basis"] = r.bitrate_basis;
            j["mean_bitrate_bps"] = r.mean_bitrate_bps;
            j["mean_fps"] = r.mean_fps;
            for (const auto& row : rows(r)) {
                j[row.csv_name] = dist_json(*row.d);
            }
            j["conflicts"] = r.conflicts;
            j["monotonicity_violations"] = r.monotonicity_violations;
            nlohmann::ordered_json c;
            c["baseline_bps"] = r.comparison.baseline_bps;
            c["baseline_fps"] = r.comparison.baseline_fps;
            c["baseline_bits_per_frame"] = r.comparison.baseline_bits_per_frame();
            c["keypoint_bits_per_frame"] = r.comparison.keypoint_bits_per_frame;
            c["ratio"] = r.comparison.ratio();
            c["at_least_4x"] = r.comparison.holds(4.0);
            j["bits_per_frame"] = c;
            return j.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::string out = "metric,median,p10,p90,count\n";
            if (r.empty) {
                return out;
            }
            for (const auto& row : rows(r)) {
                out += std::string(row.csv_name) + "," + fixed(row.d->median, 3) + "," + fixed(row.d->p10, 3) + "," +
                       fixed(row.d->p90, 3) + "," + std::to_string(row.d->count) + "\n";
            }
            return out;
        }
        case ReportFormat::Table: {
            std::string out = pad("Statistic", 22) + pad("Median", 14) + "p10-p90\n";
            for (const auto& row : rows(r)) {
                const Distribution& d = *row.d;
                out += pad(row.label, 22);
                if (d.count == 0) {
                    out += "-\n";
                    continue;
                }
                out += pad(fixed(d.median * row.scale, row.digits) + " " + row.unit, 14) +
                       fixed(d.p10 * row.scale, row.digits) + "-" + fixed(d.p90 * row.scale, row.digits) + " " +
                       row.unit + "\n";
            }
            out += "\nframes " + std::to_string(r.frames) + ", mean " + fixed(r.mean_bitrate_bps / 1000.0, 2) +
                   " kbps at " + fixed(r.mean_fps, 2) + " fps\n";
            out += "bits/frame: keypoints " + fixed(r.comparison.keypoint_bits_per_frame, 0) + " vs video " +
                   fixed(r.comparison.baseline_bits_per_frame(), 0) + " (" +
                   fixed(r.comparison.baseline_bps / 1000.0, 0) + " kbps at " + fixed(r.comparison.baseline_fps, 0) +
                   " fps): " + fixed(r.comparison.ratio(), 2) + "x fewer\n";
            if (r.conflicts || r.monotonicity_violations) {
                out += "warnings: " + std::to_string(r.conflicts) + " conflicting stamps, " +
                       std::to_string(r.monotonicity_violations) + " non-monotone records\n";
            }
            return out;
        }
    }
    return {};
}

}  // namespace puppetcast::metrics
