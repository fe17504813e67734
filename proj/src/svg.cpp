#include "pumpdown/svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace pumpdown {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

SvgPlot::SvgPlot(double xmin, double xmax, double ymin, double ymax, int width_px,
                 int height_px)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), width_(width_px),
      height_(height_px) {
    if (xmax_ <= xmin_) xmax_ = xmin_ + 1.0;
    if (ymax_ <= ymin_) ymax_ = ymin_ + 1.0;
}

double SvgPlot::px(double x) const {
    const double t = (x - xmin_) / (xmax_ - xmin_);
    return margin_ + t * (width_ - 2 * margin_);
}

double SvgPlot::py(double y) const {
    const double t = (y - ymin_) / (ymax_ - ymin_);
    return height_ - margin_ - t * (height_ - 2 * margin_);
}

void SvgPlot::polyline(const std::vector<std::pair<double, double>>& points,
                       const std::string& color, double stroke_width) {
    if (points.size() < 2) return;
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
       << num(stroke_width) << "\" points=\"";
    for (const auto& [x, y] : points) os << num(px(x)) << "," << num(py(y)) << " ";
    os << "\"/>\n";
    body_ += os.str();
}

void SvgPlot::segment(double x1, double y1, double x2, double y2, const std::string& color,
                      double stroke_width) {
    std::ostringstream os;
    os << "<line x1=\"" << num(px(x1)) << "\" y1=\"" << num(py(y1)) << "\" x2=\""
       << num(px(x2)) << "\" y2=\"" << num(py(y2)) << "\" stroke=\"" << color
       << "\" stroke-width=\"" << num(stroke_width) << "\"/>\n";
    body_ += os.str();
}

void SvgPlot::label(double x, double y, const std::string& text, const std::string& color) {
    std::ostringstream os;
    os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(py(y))
       << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << color << "\">"
       << escape_text(text) << "</text>\n";
    body_ += os.str();
}

void SvgPlot::axes(const std::string& x_title, const std::string& y_title, double x_tick,
                   double y_tick) {
    std::ostringstream os;
    const double l = margin_, r = width_ - margin_, t = margin_, b = height_ - margin_;
    os << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << r - l << "\" height=\""
       << b - t << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    if (x_tick > 0.0) {
        const double first = std::ceil(xmin_ / x_tick) * x_tick;
        for (double x = first; x <= xmax_ + 1e-9; x += x_tick) {
            os << "<line x1=\"" << num(px(x)) << "\" y1=\"" << b << "\" x2=\"" << num(px(x))
               << "\" y2=\"" << b + 5 << "\" stroke=\"#000000\"/>\n";
            os << "<text x=\"" << num(px(x)) << "\" y=\"" << b + 18
               << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">"
               << num(x) << "</text>\n";
        }
    }
    if (y_tick > 0.0) {
        const double first = std::ceil(ymin_ / y_tick) * y_tick;
        for (double y = first; y <= ymax_ + 1e-9; y += y_tick) {
            os << "<line x1=\"" << l - 5 << "\" y1=\"" << num(py(y)) << "\" x2=\"" << l
               << "\" y2=\"" << num(py(y)) << "\" stroke=\"#000000\"/>\n";
            os << "<text x=\"" << l - 8 << "\" y=\"" << num(py(y) + 3)
               << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">"
               << num(y) << "</text>\n";
        }
    }
    os << "<text x=\"" << (l + r) / 2 << "\" y=\"" << height_ - 16
       << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">"
       << escape_text(x_title) << "</text>\n";
    os << "<text x=\"18\" y=\"" << (t + b) / 2
       << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\" "
          "transform=\"rotate(-90 18 "
       << (t + b) / 2 << ")\">" << escape_text(y_title) << "</text>\n";
    body_ += os.str();
}

std::string SvgPlot::render() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
       << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
       << body_ << "</svg>\n";
    return os.str();
}

}  // namespace pumpdown
