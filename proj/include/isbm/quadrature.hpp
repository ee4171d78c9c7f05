#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isbm/error.hpp"

namespace isbm {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;         ///< sum of |K15 - G7| over the final subintervals
    std::size_t intervals = 0;  ///< number of subintervals used
};

/// Global adaptive Gauss-Kronrod (7/15) over the pieces delimited by `points`
/// (sorted, endpoints included). The worst interval is bisected until the summed
/// error estimate is below max(abs_tol, rel_tol * |value|); at most `max_bisections`
/// bisections are made before QuadratureError is thrown.
template <class F>
QuadResult integrate_adaptive(F&& f, std::span<const double> points, double rel_tol, double abs_tol,
                              std::size_t max_bisections) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Piece {
        double a, b, value, error;
        bool operator<(const Piece& o) const noexcept { return error < o.error; }
    };
    auto eval = [&](double a, double b) {
        double err = 0.0;
        const double v = Rule::integrate(f, a, b, 0, 0.0, &err);
        return Piece{a, b, v, err};
    };

    std::priority_queue<Piece> pieces;
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        Piece p = eval(points[i], points[i + 1]);
        value += p.value;
        error += p.error;
        pieces.push(p);
    }
    std::size_t bisections = 0;
    while (error > std::max(abs_tol, rel_tol * std::fabs(value))) {
        if (bisections == max_bisections || pieces.empty()) {
            throw QuadratureError("adaptive quadrature did not reach the requested tolerance", value, error);
        }
        const Piece worst = pieces.top();
        pieces.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw QuadratureError("adaptive quadrature exhausted floating-point resolution", value, error);
        }
        const Piece left = eval(worst.a, mid);
        const Piece right = eval(mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        pieces.push(left);
        pieces.push(right);
        ++bisections;
    }
    // Re-sum to shed the drift of the running updates.
    QuadResult out{0.0, 0.0, pieces.size()};
    while (!pieces.empty()) {
        out.value += pieces.top().value;
        out.error += pieces.top().error;
        pieces.pop();
    }
    return out;
}

}  // namespace isbm
