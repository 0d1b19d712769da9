#include "dataclaw/tools/chart.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/tools/stats.hpp"

namespace dataclaw::tools {

namespace {

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 70, kRight = 30, kTop = 50, kBottom = 70;
constexpr double kPlotX0 = kLeft, kPlotX1 = kWidth - kRight;
constexpr double kPlotY0 = kTop, kPlotY1 = kHeight - kBottom;
constexpr std::size_t kMaxBins = 1000;
constexpr std::string_view kFont = "font-family=\"sans-serif\"";
constexpr std::string_view kBarFill = "#4e79a7";

[[noreturn]] void bad_spec(const std::string& message) { throw Error(ErrorCode::BadSpec, message); }

std::string coord(double v) {
  auto s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

std::string tick_label(double v, double step) {
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  auto s = fmt::format("{:.{}f}", v, decimals);
  if (s.find_first_not_of("-0.") == std::string::npos) s = decimals == 0 ? "0" : fmt::format("{:.{}f}", 0.0, decimals);
  return s;
}

std::string shorten(std::string s, std::size_t max_chars) {
  auto head = utf8_first_chars(s, max_chars);
  if (head.size() < s.size()) return std::string(utf8_first_chars(s, max_chars - 1)) + "\xE2\x80\xA6";
  return s;
}

struct Canvas {
  std::string out;

  void open(const std::string& title) {
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\">\n",
        kWidth, kHeight);
    out += fmt::format("<rect class=\"background\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
                       kWidth, kHeight);
    out += fmt::format("<text class=\"title\" x=\"{}\" y=\"30\" text-anchor=\"middle\" {} font-size=\"18\">{}</text>\n",
                       coord(kWidth / 2), kFont, escape_xml(title));
  }

  void close() { out += "</svg>\n"; }
};

double map_y(double v, const AxisScale& s) {
  return kPlotY1 - (v - s.lo) / (s.hi - s.lo) * (kPlotY1 - kPlotY0);
}

double map_x(double v, const AxisScale& s) {
  return kPlotX0 + (v - s.lo) / (s.hi - s.lo) * (kPlotX1 - kPlotX0);
}

void draw_y_axis(Canvas& c, const AxisScale& s, const std::string& label) {
  c.out += "<g class=\"y-axis\">\n";
  for (double t : s.ticks) {
    const auto y = coord(map_y(t, s));
    c.out += fmt::format("<line class=\"grid\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#e5e7eb\"/>\n",
                         coord(kPlotX0), y, coord(kPlotX1), y);
    c.out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" {} font-size=\"12\">{}</text>\n",
                         coord(kPlotX0 - 8), coord(map_y(t, s) + 4), kFont, tick_label(t, s.step));
  }
  c.out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#111827\"/>\n", coord(kPlotX0),
                       coord(kPlotY0), coord(kPlotY1));
  c.out += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\" {1} font-size=\"13\">{2}</text>\n",
      coord((kPlotY0 + kPlotY1) / 2), kFont, escape_xml(label));
  c.out += "</g>\n";
}

void draw_x_numeric_axis(Canvas& c, const AxisScale& s, const std::string& label) {
  c.out += "<g class=\"x-axis\">\n";
  c.out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#111827\"/>\n", coord(kPlotX0),
                       coord(kPlotY1), coord(kPlotX1));
  for (double t : s.ticks) {
    const auto x = coord(map_x(t, s));
    c.out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#111827\"/>\n", x, coord(kPlotY1),
                         coord(kPlotY1 + 5));
    c.out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {} font-size=\"12\">{}</text>\n", x,
                         coord(kPlotY1 + 20), kFont, tick_label(t, s.step));
  }
  c.out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {} font-size=\"13\">{}</text>\n",
                       coord((kPlotX0 + kPlotX1) / 2), coord(kHeight - 20), kFont, escape_xml(label));
  c.out += "</g>\n";
}

std::size_t numeric_column(const Dataset& ds, const std::string& name, const char* role) {
  auto idx = ds.find_column(name);
  if (!idx) bad_spec(fmt::format("unknown column '{}'", name));
  if (!is_numeric(ds.columns[*idx].dtype)) {
    bad_spec(fmt::format("{} column '{}' must be numeric, it is {}", role, name, to_string(ds.columns[*idx].dtype)));
  }
  return *idx;
}

std::string render_bar(const Dataset& ds, const ChartSpec& spec) {
  std::vector<std::string> labels;
  std::vector<double> values;
  std::string y_label;
  if (spec.y_aggregate) {
    QuerySpec q;
    q.group_by = {spec.x};
    Aggregate a = *spec.y_aggregate;
    a.alias = "__value";
    q.select = {spec.x, a};
    Dataset grouped;
    try {
      grouped = run_query(ds, q);
    } catch (const Error& e) {
      bad_spec(e.what());
    }
    if (!is_numeric(grouped.columns[1].dtype)) bad_spec("bar heights must be numeric");
    for (const auto& row : grouped.rows) {
      labels.push_back(is_null(row[0]) ? "(null)" : render(row[0]));
      values.push_back(as_number(row[1]).value_or(0.0));
    }
    y_label = fmt::format("{}({})", to_string(spec.y_aggregate->fn), spec.y_aggregate->column);
  } else {
    const auto xi = ds.find_column(spec.x);
    if (!xi) bad_spec(fmt::format("unknown column '{}'", spec.x));
    const auto yi = numeric_column(ds, *spec.y_column, "y");
    for (const auto& row : ds.rows) {
      labels.push_back(is_null(row[*xi]) ? "(null)" : render(row[*xi]));
      values.push_back(as_number(row[yi]).value_or(0.0));
    }
    y_label = *spec.y_column;
  }

  double lo = 0, hi = 0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const auto scale = nice_scale(lo, hi);
  Canvas c;
  c.open(spec.title);
  draw_y_axis(c, scale, y_label);

  const double band = values.empty() ? 0 : (kPlotX1 - kPlotX0) / static_cast<double>(values.size());
  const double zero_y = map_y(0, scale);
  c.out += "<g class=\"marks\">\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kPlotX0 + band * static_cast<double>(i) + band * 0.1;
    const double y = map_y(values[i], scale);
    c.out += fmt::format("<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", coord(x),
                         coord(std::min(y, zero_y)), coord(band * 0.8), coord(std::abs(zero_y - y)), kBarFill);
  }
  c.out += "</g>\n<g class=\"x-axis\">\n";
  c.out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#111827\"/>\n", coord(kPlotX0),
                       coord(zero_y), coord(kPlotX1));
  const std::size_t label_chars = values.size() > 12 ? 6 : 14;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    c.out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {} font-size=\"11\">{}</text>\n",
                         coord(kPlotX0 + band * (static_cast<double>(i) + 0.5)), coord(kPlotY1 + 18), kFont,
                         escape_xml(shorten(labels[i], label_chars)));
  }
  c.out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {} font-size=\"13\">{}</text>\n",
                       coord((kPlotX0 + kPlotX1) / 2), coord(kHeight - 20), kFont, escape_xml(spec.x));
  c.out += "</g>\n";
  c.close();
  return c.out;
}

std::string render_histogram(const Dataset& ds, const ChartSpec& spec) {
  const auto xi = numeric_column(ds, spec.x, "x");
  const auto values = numeric_values(ds, xi);
  double lo = 0, hi = 1;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  const double width = (hi - lo) / static_cast<double>(spec.bins);
  std::vector<std::int64_t> counts(spec.bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
    counts[std::min(b, spec.bins - 1)] += 1;
  }
  const auto max_count = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  const auto y_scale = nice_scale(0, static_cast<double>(max_count));
  AxisScale x_scale;
  x_scale.lo = lo;
  x_scale.hi = hi;
  {
    const auto nice = nice_scale(lo, hi);
    x_scale.step = nice.step;
    for (double t : nice.ticks) {
      if (t >= lo - 1e-9 * std::abs(hi - lo) && t <= hi + 1e-9 * std::abs(hi - lo)) x_scale.ticks.push_back(t);
    }
  }

  Canvas c;
  c.open(spec.title);
  draw_y_axis(c, y_scale, "count");
  c.out += "<g class=\"marks\">\n";
  const double zero_y = map_y(0, y_scale);
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double x0 = map_x(lo + width * static_cast<double>(b), x_scale);
    const double x1 = map_x(lo + width * static_cast<double>(b + 1), x_scale);
    const double y = map_y(static_cast<double>(counts[b]), y_scale);
    c.out += fmt::format(
        "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\" "
        "data-count=\"{}\"/>\n",
        coord(x0), coord(y), coord(x1 - x0), coord(zero_y - y), kBarFill, counts[b]);
  }
  c.out += "</g>\n";
  draw_x_numeric_axis(c, x_scale, spec.x);
  c.close();
  return c.out;
}

std::string render_xy(const Dataset& ds, const ChartSpec& spec) {
  const auto xi = numeric_column(ds, spec.x, "x");
  const auto yi = numeric_column(ds, *spec.y_column, "y");
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : ds.rows) {
    auto x = as_number(row[xi]);
    auto y = as_number(row[yi]);
    if (x && y) pts.emplace_back(*x, *y);
  }
  if (spec.kind == ChartKind::line) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!pts.empty()) {
    xmin = xmax = pts.front().first;
    ymin = ymax = pts.front().second;
    for (const auto& [x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  const auto xs = nice_scale(xmin, xmax);
  const auto ys = nice_scale(ymin, ymax);
  Canvas c;
  c.open(spec.title);
  draw_y_axis(c, ys, *spec.y_column);
  c.out += "<g class=\"marks\">\n";
  if (spec.kind == ChartKind::line) {
    std::string points;
    for (const auto& [x, y] : pts) {
      if (!points.empty()) points += ' ';
      points += coord(map_x(x, xs)) + "," + coord(map_y(y, ys));
    }
    c.out += fmt::format("<polyline class=\"line\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                         points, kBarFill);
  } else {
    for (const auto& [x, y] : pts) {
      c.out += fmt::format("<circle class=\"point\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
                           coord(map_x(x, xs)), coord(map_y(y, ys)), kBarFill);
    }
  }
  c.out += "</g>\n";
  draw_x_numeric_axis(c, xs, spec.x);
  c.close();
  return c.out;
}

}  // namespace

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += ch;
    }
  }
  return out;
}

double nice_step(double raw) {
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw * (1 - 1e-12)) return m * mag;
  }
  return 10 * mag;
}

AxisScale nice_scale(double min, double max) {
  AxisScale s;
  if (!(max > min)) {
    const double pad = min == 0 ? 1.0 : std::abs(min) * 0.5;
    min -= pad;
    max += pad;
    if (min < 0 && max > 0 && min >= -pad) min = std::min(0.0, min);
  }
  s.step = nice_step((max - min) / 5.0);
  s.lo = std::floor(min / s.step + 1e-9) * s.step;
  s.hi = std::ceil(max / s.step - 1e-9) * s.step;
  if (s.hi <= s.lo) s.hi = s.lo + s.step;
  const auto n = static_cast<int>(std::llround((s.hi - s.lo) / s.step));
  for (int i = 0; i <= n; ++i) s.ticks.push_back(s.lo + s.step * i);
  return s;
}

ChartSpec parse_chart_spec(const Json& j) {
  if (!j.is_object()) bad_spec("chart spec must be an object");
  ChartSpec spec;
  const auto kind = j.value("kind", std::string());
  if (kind == "bar") {
    spec.kind = ChartKind::bar;
  } else if (kind == "line") {
    spec.kind = ChartKind::line;
  } else if (kind == "scatter") {
    spec.kind = ChartKind::scatter;
  } else if (kind == "histogram") {
    spec.kind = ChartKind::histogram;
  } else {
    bad_spec(fmt::format("kind must be bar, line, scatter or histogram, got '{}'", kind));
  }
  if (!j.contains("x") || !j.at("x").is_string()) bad_spec("chart needs an 'x' column");
  spec.x = j.at("x").get<std::string>();
  spec.title = j.value("title", std::string());

  const bool has_y = j.contains("y") && !j.at("y").is_null();
  if (spec.kind == ChartKind::histogram) {
    if (has_y) bad_spec("histogram takes no 'y'");
    if (j.contains("bins")) {
      const auto& b = j.at("bins");
      if (!b.is_number_integer() || b.get<std::int64_t>() <= 0 || b.get<std::int64_t>() > static_cast<std::int64_t>(kMaxBins)) {
        bad_spec(fmt::format("bins must be an integer in 1..{}", kMaxBins));
      }
      spec.bins = b.get<std::size_t>();
    }
    return spec;
  }
  if (j.contains("bins")) bad_spec("bins only applies to histograms");
  if (!has_y) bad_spec("chart needs a 'y' column");
  const auto& y = j.at("y");
  if (y.is_string()) {
    spec.y_column = y.get<std::string>();
  } else if (y.is_object() && spec.kind == ChartKind::bar) {
    Json q = Json::object();
    q["select"] = Json::array({y});
    try {
      spec.y_aggregate = std::get<Aggregate>(parse_query(q).select.front());
    } catch (const Error& e) {
      bad_spec(e.what());
    }
  } else {
    bad_spec("y must be a column name (or {agg, col} for bar charts)");
  }
  return spec;
}

std::string render_chart(const Dataset& ds, const ChartSpec& spec) {
  switch (spec.kind) {
    case ChartKind::bar: return render_bar(ds, spec);
    case ChartKind::histogram:
      if (spec.bins == 0) bad_spec("bins must be positive");
      return render_histogram(ds, spec);
    case ChartKind::line:
    case ChartKind::scatter:
      if (!spec.y_column) bad_spec("chart needs a 'y' column");
      return render_xy(ds, spec);
  }
  bad_spec("unknown chart kind");
}

}  // namespace dataclaw::tools
