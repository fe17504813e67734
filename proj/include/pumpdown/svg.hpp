#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pumpdown {

/// Minimal dependency-free SVG line-plot emitter: a fixed pixel canvas with
/// a linear data-to-pixel mapping, polylines, segments, text and simple
/// axis furniture. Enough for static curve figures, nothing more.
class SvgPlot {
  public:
    SvgPlot(double xmin, double xmax, double ymin, double ymax, int width_px = 960,
            int height_px = 640);

    void polyline(const std::vector<std::pair<double, double>>& points,
                  const std::string& color, double stroke_width = 1.5);
    void segment(double x1, double y1, double x2, double y2, const std::string& color,
                 double stroke_width = 1.0);
    void label(double x, double y, const std::string& text,
               const std::string& color = "#333333");
    /// Frame, tick marks every x_tick/y_tick data units, numeric tick labels
    /// and centered axis titles.
    void axes(const std::string& x_title, const std::string& y_title, double x_tick,
              double y_tick);

    std::string render() const;

  private:
    double px(double x) const;
    double py(double y) const;

    double xmin_, xmax_, ymin_, ymax_;
    int width_, height_;
    int margin_ = 64;
    std::string body_;
};

}  // namespace pumpdown
