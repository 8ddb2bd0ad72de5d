#include "uca/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace uca {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* region_colour(Region region) { return region == Region::Thoracic ? "#1f77b4" : "#2ca02c"; }

}  // namespace

std::string render_overlay_svg(int width, int height, std::span<const Landmark> landmarks,
                               std::span<const VertebraLine> lines, const UcaResult& uca) {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" viewBox=\"-0.5 -0.5 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  out += "  <rect x=\"-0.5\" y=\"-0.5\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"black\"/>\n";

  std::set<std::size_t> highlighted;
  for (const Curve& c : uca.curves) {
    highlighted.insert(c.upper);
    highlighted.insert(c.lower);
  }

  out += "  <g id=\"lines\" stroke-width=\"1.5\" stroke-linecap=\"round\">\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const VertebraLine& l = lines[i];
    const bool hot = highlighted.count(i) > 0;
    out += "    <line x1=\"" + fmt(l.left.position.x) + "\" y1=\"" + fmt(l.left.position.y) + "\" x2=\"" +
           fmt(l.right.position.x) + "\" y2=\"" + fmt(l.right.position.y) + "\" stroke=\"" +
           (hot ? "#d62728" : region_colour(l.left.region)) + "\"" + (hot ? " stroke-width=\"2.5\"" : "") +
           "/>\n";
  }
  out += "  </g>\n";

  out += "  <g id=\"landmarks\">\n";
  for (const Landmark& m : landmarks) {
    out += "    <circle cx=\"" + fmt(m.position.x) + "\" cy=\"" + fmt(m.position.y) + "\" r=\"2\" fill=\"" +
           (m.side == Side::Left ? "#ff7f0e" : "#e377c2") + "\"/>\n";
  }
  out += "  </g>\n";

  out += "  <g id=\"curves\" font-family=\"sans-serif\" font-size=\"10\" fill=\"white\">\n";
  for (const Curve& c : uca.curves) {
    if (c.upper >= lines.size() || c.lower >= lines.size()) continue;
    const Point2 a = lines[c.upper].right.position;
    const Point2 b = lines[c.lower].right.position;
    out += "    <text x=\"" + fmt(std::max(a.x, b.x) + 6.0) + "\" y=\"" + fmt(0.5 * (a.y + b.y)) + "\">" +
           fmt(c.angle_deg) + "&#176; (" + std::string(to_string(c.span)) + ")</text>\n";
  }
  out += "  </g>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace uca
