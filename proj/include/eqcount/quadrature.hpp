#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace eqc {

// Globally adaptive Gauss-Kronrod 15(7): repeatedly bisect the panel with the
// largest embedded error estimate until the summed error drops below
// max(abs_tol, rel_tol * |integral|). Nodes never touch panel endpoints, so
// integrable endpoint singularities are safe; panels that can no longer be
// split in double precision are frozen as-is.
namespace detail {

inline constexpr double gk_x[8] = {
    0.9914553711208126392068547, 0.9491079123427585245261897,
    0.8648644233597690727897128, 0.7415311855993944398638648,
    0.5860872354676911302941448, 0.4058451513773971669066064,
    0.2077849550078984676006894, 0.0};
inline constexpr double gk_wk[8] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992};
inline constexpr double gk_wg[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020};

template <class F>
void gk15(const F& f, double a, double b, double& kron, double& err) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double gauss = gk_wg[3] * fc;
    kron = gk_wk[7] * fc;
    for (int i = 0; i < 7; ++i) {
        double fa = f(c - h * gk_x[i]);
        double fb = f(c + h * gk_x[i]);
        kron += gk_wk[i] * (fa + fb);
        if (i % 2 == 1) gauss += gk_wg[i / 2] * (fa + fb);
    }
    kron *= h;
    gauss *= h;
    err = std::fabs(kron - gauss);
}

struct Panel {
    double a, b, kron, err;
};

inline bool panel_less(const Panel& x, const Panel& y) { return x.err < y.err; }

} // namespace detail

template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, abs_tol, rel_tol);

    using detail::Panel;
    std::vector<Panel> heap, frozen;
    auto make = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0};
        detail::gk15(f, lo, hi, p.kron, p.err);
        return p;
    };
    heap.push_back(make(a, b));
    double total = heap[0].kron, toterr = heap[0].err;

    constexpr int max_panels = 8192;
    while (static_cast<int>(heap.size() + frozen.size()) < max_panels && !heap.empty()) {
        if (toterr <= std::fmax(abs_tol, rel_tol * std::fabs(total))) break;
        std::pop_heap(heap.begin(), heap.end(), detail::panel_less);
        Panel worst = heap.back();
        heap.pop_back();
        double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            // width exhausted in double precision; keep its value, stop refining
            toterr -= worst.err;
            frozen.push_back(worst);
            continue;
        }
        total -= worst.kron;
        toterr -= worst.err;
        for (Panel child : {make(worst.a, mid), make(mid, worst.b)}) {
            total += child.kron;
            toterr += child.err;
            heap.push_back(child);
            std::push_heap(heap.begin(), heap.end(), detail::panel_less);
        }
    }

    // fixed left-to-right resummation: accurate and independent of heap order
    heap.insert(heap.end(), frozen.begin(), frozen.end());
    std::sort(heap.begin(), heap.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    double sum = 0.0;
    for (const Panel& p : heap) sum += p.kron;
    return sum;
}

} // namespace eqc
