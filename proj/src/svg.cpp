#include "cogload/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cogload {

namespace {

// Fixed two-decimal coordinates keep the output byte-stable.
std::string coord(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

// Linear grayscale ramp: 0 is lightest, 1 is darkest.
std::string fill_for(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  const int c = static_cast<int>(std::lround(245.0 - 225.0 * clamped));
  const std::string s = std::to_string(c);
  return "rgb(" + s + "," + s + "," + s + ")";
}

void open_svg(std::ostringstream& out, int width, int height) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
}

struct Series {
  const char* label;
  const char* color;
  double TrendPoint::* field;
};

constexpr Series kTrendSeries[] = {
    {"diff_std", "#1f77b4", &TrendPoint::diff_std},
    {"il_reported", "#ff7f0e", &TrendPoint::il_reported},
    {"cl_reported", "#d62728", &TrendPoint::cl_reported},
    {"el_reported", "#2ca02c", &TrendPoint::el_std},
    {"combined_std", "#9467bd", &TrendPoint::combined_std},
};

}  // namespace

std::string heatmap_svg(std::span<const LearnerRow> rows) {
  struct Measure {
    const char* label;
    double LearnerRow::* field;
  };
  constexpr Measure measures[] = {
      {"diff_std", &LearnerRow::diff_std},
      {"il_reported", &LearnerRow::il_reported},
      {"cl_reported", &LearnerRow::cl_reported},
      {"combined_std", &LearnerRow::combined_std},
  };

  const int cell = 26;
  const int left = 110;
  const int top = 16;
  const int bottom = 90;
  const int n_cols = static_cast<int>(rows.size());
  const int width = left + cell * std::max(n_cols, 1) + 16;
  const int height = top + cell * 4 + bottom;

  std::ostringstream out;
  open_svg(out, width, height);
  out << "<!-- cell fill: linear grayscale ramp, value v in [0,1] maps to "
         "rgb(c,c,c) with c = round(245 - 225*v); 0 lightest, 1 darkest -->\n";
  out << "<!-- columns: learners ordered by mean reported cognitive load, "
         "ascending -->\n";
  out << "<style>text { font-family: sans-serif; font-size: 11px; }</style>\n";

  for (std::size_t r = 0; r < 4; ++r) {
    const double y = top + static_cast<double>(r) * cell;
    out << "<text x=\"" << coord(left - 8) << "\" y=\"" << coord(y + cell * 0.65)
        << "\" text-anchor=\"end\">" << measures[r].label << "</text>\n";
    for (std::size_t c = 0; c < rows.size(); ++c) {
      const double x = left + static_cast<double>(c) * cell;
      out << "<rect x=\"" << coord(x) << "\" y=\"" << coord(y) << "\" width=\""
          << cell << "\" height=\"" << cell << "\" fill=\""
          << fill_for(rows[c].*(measures[r].field)) << "\"/>\n";
    }
  }
  const double label_y = top + 4.0 * cell + 12;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const double x = left + static_cast<double>(c) * cell + cell * 0.5;
    out << "<text x=\"" << coord(x) << "\" y=\"" << coord(label_y)
        << "\" text-anchor=\"start\" transform=\"rotate(60 " << coord(x) << " "
        << coord(label_y) << ")\">" << rows[c].learner_id << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string trend_svg(std::span<const TrendPoint> points) {
  const int width = 680;
  const int height = 400;
  const double plot_left = 56;
  const double plot_top = 20;
  const double plot_right = 520;
  const double plot_bottom = 352;

  int min_index = 1;
  int max_index = 1;
  if (!points.empty()) {
    min_index = points.front().administration_index;
    max_index = points.back().administration_index;
  }
  const double index_span = std::max(1, max_index - min_index);

  const auto x_for = [&](int index) {
    return plot_left +
           (plot_right - plot_left) * (index - min_index) / index_span;
  };
  const auto y_for = [&](double v) {
    return plot_bottom - (plot_bottom - plot_top) * std::clamp(v, 0.0, 1.0);
  };

  std::ostringstream out;
  open_svg(out, width, height);
  out << "<!-- measure means per administration index; y axis is the "
         "standardized [0,1] scale -->\n";
  out << "<style>text { font-family: sans-serif; font-size: 11px; }</style>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double value = tick * 0.25;
    const double y = y_for(value);
    out << "<line x1=\"" << coord(plot_left) << "\" y1=\"" << coord(y) << "\" x2=\""
        << coord(plot_right) << "\" y2=\"" << coord(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << coord(plot_left - 8) << "\" y=\"" << coord(y + 4)
        << "\" text-anchor=\"end\">" << coord(value) << "</text>\n";
  }
  out << "<line x1=\"" << coord(plot_left) << "\" y1=\"" << coord(plot_top)
      << "\" x2=\"" << coord(plot_left) << "\" y2=\"" << coord(plot_bottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << coord(plot_left) << "\" y1=\"" << coord(plot_bottom)
      << "\" x2=\"" << coord(plot_right) << "\" y2=\"" << coord(plot_bottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  const int tick_step =
      std::max(1, (max_index - min_index + 1 + 11) / 12);
  for (int index = min_index; index <= max_index; index += tick_step) {
    const double x = x_for(index);
    out << "<text x=\"" << coord(x) << "\" y=\"" << coord(plot_bottom + 16)
        << "\" text-anchor=\"middle\">" << index << "</text>\n";
  }
  out << "<text x=\"" << coord((plot_left + plot_right) / 2) << "\" y=\""
      << coord(plot_bottom + 34)
      << "\" text-anchor=\"middle\">administration index</text>\n";

  for (std::size_t s = 0; s < std::size(kTrendSeries); ++s) {
    const auto& series = kTrendSeries[s];
    if (!points.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << series.color
          << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) out << ' ';
        out << coord(x_for(points[i].administration_index)) << ','
            << coord(y_for(points[i].*(series.field)));
      }
      out << "\"/>\n";
    }
    const double legend_y = plot_top + 18.0 * static_cast<double>(s);
    out << "<rect x=\"" << coord(plot_right + 20) << "\" y=\"" << coord(legend_y)
        << "\" width=\"12\" height=\"12\" fill=\"" << series.color << "\"/>\n";
    out << "<text x=\"" << coord(plot_right + 38) << "\" y=\""
        << coord(legend_y + 10) << "\">" << series.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace cogload
