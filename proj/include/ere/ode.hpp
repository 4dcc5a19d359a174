#pragma once

#include "ere/types.hpp"

#include <functional>
#include <vector>

namespace ere {

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double initial_step = 0.0;  // 0 -> automatic
    double max_step = 0.0;      // 0 -> interval length
    long max_steps = 200000000L;
};

// Right-hand side of a matrix-valued ODE Y' = f(t, Y).
using MatrixRhs = std::function<void(double, const Mat&, Mat&)>;

// Called after each accepted step with the raw step endpoint; may replace Y
// (renormalization) and/or stop the integration.
enum class StepAction { proceed, stop };
using StepMonitor = std::function<StepAction(double, Mat&)>;

// One accepted step with cubic Hermite data. y0/f0 are taken after any
// renormalization applied at t0, so in-segment evaluation is continuous and
// matches the segment start exactly.
struct OdeSegment {
    double t0 = 0, t1 = 0;
    Mat y0, y1;  // y1 is the raw (pre-renormalization) endpoint
    Mat f0, f1;
};

struct OdeSolution {
    double a = 0, b = 0;  // b is where integration actually stopped
    std::vector<OdeSegment> segments;
    std::vector<double> times;       // accepted times (segments.size() + 1)
    std::vector<Mat> checkpoints;    // renormalized states at `times`
    bool stopped_early = false;
    long n_steps = 0, n_rejected = 0;

    // Dense evaluation by cubic Hermite inside the containing segment.
    // Within a segment the value is gauge-consistent with the segment start.
    Mat eval(double t) const;
    int segment_index(double t) const;
};

// Dormand-Prince 5(4) with PI-free standard step control. Integrates from a
// to b (a < b required; callers reverse time through the RHS). Throws
// ConvergenceError on step-size underflow, reporting the location.
OdeSolution integrate_ode(const MatrixRhs& rhs, Mat y0, double a, double b,
                          const OdeOptions& opts = {}, const StepMonitor& monitor = nullptr);

} // namespace ere
