#include "sparseshield/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sparseshield/io.hpp"

namespace sparseshield {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 690.0;
constexpr double kTop = 48.0;
constexpr double kBottom = 420.0;

const char* kThrColor = "#1f77b4";
const char* kBpColor = "#ff7f0e";

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::vector<SweepRow> rows_for(const std::vector<SweepRow>& rows,
                               const std::string& pipeline) {
  std::vector<SweepRow> out;
  for (const auto& r : rows)
    if (r.pipeline == pipeline) out.push_back(r);
  std::sort(out.begin(), out.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.eps < b.eps; });
  return out;
}

}  // namespace

std::optional<double> first_eps_below(const std::vector<SweepRow>& rows,
                                      const std::string& pipeline,
                                      double threshold) {
  for (const auto& r : rows_for(rows, pipeline))
    if (r.accuracy < threshold) return r.eps;
  return std::nullopt;
}

std::string render_sweep_svg(const ReportInputs& inputs) {
  if (inputs.rows.empty()) throw invalid_input("render_sweep_svg: no rows");
  double eps_max = 0.0;
  for (const auto& r : inputs.rows) eps_max = std::max(eps_max, r.eps);
  if (eps_max <= 0.0) eps_max = 1.0;

  const auto to_x = [eps_max](double eps) {
    return kLeft + (eps / eps_max) * (kRight - kLeft);
  };
  const auto to_y = [](double acc) { return kBottom - acc * (kBottom - kTop); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
         "viewBox=\"0 0 720 480\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"720\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">Classification accuracy under attack</text>\n";

  // axes
  svg += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(kBottom) + "\" x2=\"" +
         coord(kRight) + "\" y2=\"" + coord(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(kTop) + "\" x2=\"" +
         coord(kLeft) + "\" y2=\"" + coord(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double acc = 0.25 * i;
    const double y = to_y(acc);
    svg += "<line x1=\"" + coord(kLeft - 4) + "\" y1=\"" + coord(y) + "\" x2=\"" +
           coord(kLeft) + "\" y2=\"" + coord(y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + coord(kLeft - 8) + "\" y=\"" + coord(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           format_double(acc) + "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double eps = eps_max * i / 5.0;
    const double x = to_x(eps);
    svg += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(kBottom) + "\" x2=\"" +
           coord(x) + "\" y2=\"" + coord(kBottom + 4) + "\" stroke=\"black\"/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%.3g", eps);
    svg += "<text x=\"" + coord(x) + "\" y=\"" + coord(kBottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           label + "</text>\n";
  }
  svg += "<text x=\"" + coord((kLeft + kRight) / 2) + "\" y=\"" +
         coord(kBottom + 40) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">attack "
         "budget (" + inputs.rows.front().norm_kind + ")</text>\n";
  svg += "<text x=\"20\" y=\"" + coord((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 20 " + coord((kTop + kBottom) / 2) +
         ")\">accuracy</text>\n";

  // bound markers (dashed)
  const auto vline = [&](const BoundReport& b, const char* color) {
    const double x = to_x(b.eps_max);
    svg += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(kTop) + "\" x2=\"" +
           coord(x) + "\" y2=\"" + coord(kBottom) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
  };
  if (inputs.thr_bound && inputs.thr_bound->feasible) vline(*inputs.thr_bound, kThrColor);
  if (inputs.bp_bound && inputs.bp_bound->feasible) vline(*inputs.bp_bound, kBpColor);

  // accuracy curves
  const auto polyline = [&](const std::string& pipeline, const char* color) {
    const auto rows = rows_for(inputs.rows, pipeline);
    if (rows.empty()) return;
    std::string points;
    for (const auto& r : rows) {
      points += coord(to_x(r.eps)) + "," + coord(to_y(r.accuracy)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
  };
  polyline("thr", kThrColor);
  polyline("bp", kBpColor);

  // legend
  double ly = kTop + 14;
  const auto legend_line = [&](const char* color, const std::string& label, bool dashed) {
    svg += "<line x1=\"" + coord(kRight - 190) + "\" y1=\"" + coord(ly) + "\" x2=\"" +
           coord(kRight - 160) + "\" y2=\"" + coord(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"" +
           (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    svg += "<text x=\"" + coord(kRight - 152) + "\" y=\"" + coord(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + label + "</text>\n";
    ly += 18;
  };
  legend_line(kThrColor, "THR (empirical)", false);
  legend_line(kBpColor, "BP (empirical)", false);
  if (inputs.thr_bound) {
    if (inputs.thr_bound->feasible)
      legend_line(kThrColor, "THR bound", true);
    else
      legend_line(kThrColor, "THR bound: collapsed to zero", true);
  }
  if (inputs.bp_bound) {
    if (inputs.bp_bound->feasible)
      legend_line(kBpColor, "BP bound", true);
    else
      legend_line(kBpColor, "BP bound: collapsed to zero", true);
  }

  svg += "</svg>\n";
  return svg;
}

std::string render_summary_md(const ReportInputs& inputs) {
  if (inputs.rows.empty()) throw invalid_input("render_summary_md: no rows");
  const auto thr = rows_for(inputs.rows, "thr");
  const auto bp = rows_for(inputs.rows, "bp");

  std::string md = "# Attack sweep summary\n\n";
  md += "- signals: " + std::to_string(inputs.rows.front().n_signals) + "\n";
  md += "- attack norm: " + inputs.rows.front().norm_kind + "\n";
  md += "- seed: " + std::to_string(inputs.rows.front().seed) + "\n\n";

  const auto bound_line = [&](const char* name, const std::optional<BoundReport>& b) {
    if (!b) return std::string();
    std::string s = std::string("- ") + name + ": ";
    if (b->degenerate)
      s += "degenerate";
    else if (b->feasible)
      s += "eps_max = " + format_double(b->eps_max) + " (" + to_string(b->eps_norm) + ")";
    else
      s += "collapsed to zero";
    return s + "\n";
  };
  md += "## Certificates\n\n";
  md += bound_line("THR", inputs.thr_bound);
  md += bound_line("BP", inputs.bp_bound);
  md += "\n## Breakdown\n\n";
  const auto breakdown = [&](const char* name, const std::string& pipeline) {
    const auto eps = first_eps_below(inputs.rows, pipeline, 0.95);
    return std::string("- ") + name + " first eps with accuracy < 95%: " +
           (eps ? format_double(*eps) : std::string("none in grid")) + "\n";
  };
  md += breakdown("THR", "thr");
  md += breakdown("BP", "bp");

  md += "\n## Accuracy\n\n| eps | THR | BP |\n|---|---|---|\n";
  for (size_t i = 0; i < thr.size(); ++i) {
    md += "| " + format_double(thr[i].eps) + " | " + format_double(thr[i].accuracy) +
          " | " + (i < bp.size() ? format_double(bp[i].accuracy) : std::string("-")) +
          " |\n";
  }
  return md;
}

}  // namespace sparseshield
