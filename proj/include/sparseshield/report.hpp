#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparseshield/attack.hpp"
#include "sparseshield/bounds.hpp"

namespace sparseshield {

struct ReportInputs {
  std::vector<SweepRow> rows;
  std::optional<BoundReport> thr_bound;
  std::optional<BoundReport> bp_bound;
};

// Self-contained SVG: one solid accuracy curve per pipeline, a dashed
// vertical line per feasible bound (an infeasible bound is omitted and
// noted in the legend). No timestamps; output is byte-deterministic.
std::string render_sweep_svg(const ReportInputs& inputs);

std::string render_summary_md(const ReportInputs& inputs);

// First eps in the rows of `pipeline` with accuracy < threshold.
std::optional<double> first_eps_below(const std::vector<SweepRow>& rows,
                                      const std::string& pipeline,
                                      double threshold);

}  // namespace sparseshield
