#include "puppetcast/rig/svg.hpp"

#include <cstdio>
#include <string>

namespace puppetcast::rig {

std::string format_coord(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    if (s == "-0.000") {
        s = "0.000";
    }
    return s;
}

namespace {

std::string path_data(const FrameGeometry& g, const PuppetPath& path) {
    std::string d;
    for (std::size_t k = 0; k < path.points.size(); ++k) {
        const Vec2& v = g.vertices[path.points[k]];
        d += k == 0 ? "M" : " L";
        d += format_coord(v.x);
        d += ' ';
        d += format_coord(v.y);
    }
    if (path.closed && !path.points.empty()) {
        d += " Z";
    }
    return d;
}

std::string style_attrs(const PathStyle& s) {
    return " fill=\"" + s.fill + "\" stroke=\"" + s.stroke + "\" stroke-width=\"" + format_coord(s.width) +
           "\" stroke-linejoin=\"round\" stroke-linecap=\"round\"";
}

std::string open_svg(const Viewport& v) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" +
           format_coord(v.x) + " " + format_coord(v.y) + " " + format_coord(v.width) + " " +
           format_coord(v.height) + "\" width=\"" + format_coord(v.width) + "\" height=\"" +
           format_coord(v.height) + "\">\n";
}

}  // namespace

std::string emit_svg(const FrameGeometry& geometry) {
    std::string out = open_svg(geometry.view);
    for (const auto& path : geometry.paths) {
        out += "  <path d=\"" + path_data(geometry, path) + "\"" + style_attrs(path.style) + "/>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string emit_animated_svg(std::span<const FrameGeometry> frames, double fps) {
    if (frames.empty()) {
        return open_svg(Viewport{}) + "</svg>\n";
    }
    const FrameGeometry& first = frames.front();
    std::string out = open_svg(first.view);
    const std::string dur = format_coord(static_cast<double>(frames.size()) / fps) + "s";
    for (std::size_t p = 0; p < first.paths.size(); ++p) {
        const auto& path = first.paths[p];
        out += "  <path d=\"" + path_data(first, path) + "\"" + style_attrs(path.style) + ">\n";
        out += "    <animate attributeName=\"d\" dur=\"" + dur + "\" repeatCount=\"indefinite\" calcMode=\"discrete\" values=\"";
        for (std::size_t f = 0; f < frames.size(); ++f) {
            if (f > 0) {
                out += ';';
            }
            out += path_data(frames[f], path);
        }
        out += "\"/>\n  </path>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace puppetcast::rig
