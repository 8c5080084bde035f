#pragma once

#include <string>

#include "covlab/harness.hpp"

namespace covlab {

// Hand-emitted, dependency-free SVG renderings of the experiment aggregates.
// Output is a deterministic byte stream for a fixed report: fixed layout,
// fixed decimal formatting, no timestamps.

// One panel per sigma; one polyline per n inside each panel, distinguished by
// line style (80 thin solid, 90 dashed, 100 dotted, 110 dash-dot, 120 thick
// solid; other n values fall back to a medium solid line).
void write_screening_svg(const ExperimentReport& report, const std::string& path);

// Two panels for one (c0, c) cell: sample quantiles against Exp(1) quantiles
// and against chi-squared(1) quantiles, each with a unit diagonal.
void write_qq_svg(const QQSeries& series, const std::string& path);

}  // namespace covlab
