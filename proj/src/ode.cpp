#include "ere/ode.hpp"

#include <algorithm>
#include <cmath>

namespace ere {

namespace {

// Dormand-Prince 5(4) tableau. The propagating solution is 5th order; the
// embedded 4th-order difference drives the error estimate. FSAL: stage 7
// equals the derivative at the accepted endpoint.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const Mat& err, const Mat& y0, const Mat& y1, double atol, double rtol) {
    double acc = 0;
    const double* e = err.data();
    const double* p = y0.data();
    const double* q = y1.data();
    const long n = err.size();
    for (long i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(p[i]), std::abs(q[i]));
        const double r = e[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

} // namespace

int OdeSolution::segment_index(double t) const {
    if (segments.empty()) throw Error("OdeSolution: empty solution");
    // Binary search over accepted times.
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    long i = std::distance(times.begin(), it) - 1;
    i = std::clamp<long>(i, 0, static_cast<long>(segments.size()) - 1);
    return static_cast<int>(i);
}

Mat OdeSolution::eval(double t) const {
    const OdeSegment& s = segments[segment_index(t)];
    const double h = s.t1 - s.t0;
    const double th = (t - s.t0) / h;
    // Cubic Hermite in theta.
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
    const double h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th);
    const double h11 = th * th * (th - 1);
    return h00 * s.y0 + (h10 * h) * s.f0 + h01 * s.y1 + (h11 * h) * s.f1;
}

OdeSolution integrate_ode(const MatrixRhs& rhs, Mat y0, double a, double b,
                          const OdeOptions& opts, const StepMonitor& monitor) {
    if (!(b > a)) throw DomainError("integrate_ode: need b > a");
    OdeSolution sol;
    sol.a = a;
    sol.b = b;
    const double span = b - a;
    const double hmax = opts.max_step > 0 ? opts.max_step : span;
    const double hmin = 1e-14 * std::max({std::abs(a), std::abs(b), 1.0});

    Mat y = std::move(y0);
    Mat k1(y.rows(), y.cols()), k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1;
    Mat ytmp = k1, y1 = k1, err = k1;

    double t = a;
    rhs(t, y, k1);

    double h = opts.initial_step;
    if (h <= 0) {
        const double scale = 1.0 + k1.norm() / (1.0 + y.norm());
        h = std::min(span / 100.0, 0.01 / scale);
        h = std::max(h, 16 * hmin);
    }
    h = std::min(h, hmax);

    sol.times.push_back(t);
    sol.checkpoints.push_back(y);

    while (t < b) {
        if (sol.n_steps + sol.n_rejected >= opts.max_steps)
            throw ConvergenceError("integrate_ode: step budget exhausted at t = " +
                                   std::to_string(t));
        bool last = false;
        if (t + h >= b) {
            h = b - t;
            last = true;
        }

        ytmp = y + h * (a21 * k1);
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, y1, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = error_norm(err, y, y1, opts.abs_tol, opts.rel_tol);
        if (en <= 1.0) {
            OdeSegment seg;
            seg.t0 = t;
            seg.t1 = t + h;
            seg.y0 = y;
            seg.y1 = y1;
            seg.f0 = k1;
            seg.f1 = k7;
            sol.segments.push_back(std::move(seg));

            t += h;
            y = y1;
            k1 = k7;
            ++sol.n_steps;

            StepAction action = StepAction::proceed;
            if (monitor) {
                action = monitor(t, y);
                // The monitor may have renormalized y; refresh the cached
                // derivative so FSAL stays consistent.
                rhs(t, y, k1);
            }
            sol.times.push_back(t);
            sol.checkpoints.push_back(y);

            if (action == StepAction::stop) {
                sol.stopped_early = true;
                sol.b = t;
                break;
            }
            if (last) break;

            double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            fac = std::clamp(fac, 0.2, 5.0);
            h = std::min(h * fac, hmax);
        } else {
            ++sol.n_rejected;
            double fac = 0.9 * std::pow(en, -0.2);
            fac = std::clamp(fac, 0.1, 0.9);
            h *= fac;
        }
        if (h < hmin)
            throw ConvergenceError("integrate_ode: step size underflow near t = " +
                                   std::to_string(t));
    }
    return sol;
}

} // namespace ere
