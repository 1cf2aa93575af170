#include "ipwkit/svg_plot.hpp"

#include <sstream>

#include "format.hpp"

namespace ipwkit {

namespace {

using detail::fmt_fixed;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string px(double v) { return fmt_fixed(v, 2); }

constexpr double kPanelWidth = 220.0;
constexpr double kPanelHeight = 200.0;
constexpr double kMarginLeft = 40.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 40.0;
constexpr double kGap = 20.0;

}  // namespace

std::string render_overlap_svg(const OverlapSummary& summary,
                               const std::string& comment) {
  const int k = static_cast<int>(summary.scheme.size());
  const double width = kMarginLeft + k * (kPanelWidth + kGap);
  const double height = kMarginTop + kPanelHeight + kMarginBottom;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) out << "<!-- " << xml_escape(comment) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width)
      << "\" height=\"" << px(height) << "\" viewBox=\"0 0 " << px(width) << ' '
      << px(height) << "\" font-family=\"sans-serif\" font-size=\"10\">\n";

  auto ypos = [](double p) { return kMarginTop + (1.0 - p) * kPanelHeight; };
  for (int a = 0; a < k; ++a) {
    const double x0 = kMarginLeft + a * (kPanelWidth + kGap);
    out << "  <g class=\"panel\" data-assigned=\""
        << xml_escape(summary.scheme[static_cast<std::size_t>(a)]) << "\">\n";
    out << "    <rect x=\"" << px(x0) << "\" y=\"" << px(kMarginTop) << "\" width=\""
        << px(kPanelWidth) << "\" height=\"" << px(kPanelHeight)
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "    <text x=\"" << px(x0 + kPanelWidth / 2) << "\" y=\""
        << px(kMarginTop - 10) << "\" text-anchor=\"middle\">assigned: "
        << xml_escape(summary.scheme[static_cast<std::size_t>(a)]) << "</text>\n";
    if (a == 0) {
      for (int tick = 0; tick <= 4; ++tick) {
        const double p = tick / 4.0;
        out << "    <text x=\"" << px(x0 - 4) << "\" y=\"" << px(ypos(p) + 3)
            << "\" text-anchor=\"end\">" << fmt_fixed(p, 2) << "</text>\n";
      }
    }
    const double slot = kPanelWidth / k;
    for (int s = 0; s < k; ++s) {
      const auto& c = summary.at(a, s);
      const auto& f = c.summary;
      const double cx = x0 + slot * (s + 0.5);
      const double half = slot * 0.3;
      const bool own = a == s;
      out << "    <g class=\"box\" data-scored=\""
          << xml_escape(summary.scheme[static_cast<std::size_t>(s)])
          << "\" data-count=\"" << c.count << "\" data-median=\""
          << fmt_fixed(f.median, 6) << "\">\n";
      out << "      <line x1=\"" << px(cx) << "\" y1=\"" << px(ypos(f.max))
          << "\" x2=\"" << px(cx) << "\" y2=\"" << px(ypos(f.min))
          << "\" stroke=\"#333\"/>\n";
      out << "      <rect x=\"" << px(cx - half) << "\" y=\"" << px(ypos(f.q3))
          << "\" width=\"" << px(2 * half) << "\" height=\""
          << px(ypos(f.q1) - ypos(f.q3)) << "\" fill=\""
          << (own ? "#9ecae1" : "#e0e0e0") << "\" stroke=\"#333\"/>\n";
      out << "      <line x1=\"" << px(cx - half) << "\" y1=\"" << px(ypos(f.median))
          << "\" x2=\"" << px(cx + half) << "\" y2=\"" << px(ypos(f.median))
          << "\" stroke=\"#000\" stroke-width=\"2\"/>\n";
      out << "      <text x=\"" << px(cx) << "\" y=\""
          << px(kMarginTop + kPanelHeight + 14) << "\" text-anchor=\"middle\">"
          << xml_escape(summary.scheme[static_cast<std::size_t>(s)]) << "</text>\n";
      out << "    </g>\n";
    }
    out << "  </g>\n";
  }
  out << "  <text x=\"" << px(width / 2) << "\" y=\"" << px(height - 6)
      << "\" text-anchor=\"middle\">scored category</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace ipwkit
