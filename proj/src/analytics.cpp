#include "fundsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fundsim::analytics {

namespace {

// exp overflows near |x| = 709; reject far earlier so every intermediate
// stays comfortably finite.
constexpr double kMaxExpMass = 700.0;

void require_point_in_numeric_domain(Point2 p) {
    if (!std::isfinite(p.y) || !std::isfinite(p.d_y)) {
        throw std::domain_error("analytics: point coordinates must be finite");
    }
    if (std::abs(p.y) + std::abs(p.d_y) > kMaxExpMass) {
        throw std::domain_error("analytics: |y| + |d_y| > 700 would overflow exp");
    }
}

void require_context_valid(const StockContext& ctx) {
    if (!(ctx.a_k > 0.0) || !(ctx.b_k > 0.0) || !(ctx.f_now > 0.0) || !(ctx.f_next > 0.0)) {
        throw std::domain_error("analytics: context components must be strictly positive");
    }
}

}  // namespace

ConstructionError::ConstructionError(double s_, double closest, const std::string& what_)
    : std::runtime_error(what_), s(s_), closest_margin(closest) {}

double phi(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) {
        throw std::domain_error("phi: arguments must be strictly positive");
    }
    return x / y + y / x;
}

double g_fn(Point2 p, double b_k, double f_next) {
    require_point_in_numeric_domain(p);
    double ph = phi(b_k, f_next);
    return std::log((ph + 2.0 * std::cosh(p.d_y)) / (ph + 2.0 * std::cosh(p.y + p.d_y)));
}

double f_increment(Point2 p, const StockContext& ctx) {
    require_point_in_numeric_domain(p);
    require_context_valid(ctx);
    double level = std::log((ctx.a_k + ctx.f_now * std::exp(p.y)) / (ctx.a_k + ctx.f_now));
    double carry = std::log((ctx.b_k + ctx.f_next * std::exp(p.d_y)) /
                            (ctx.b_k + ctx.f_next * std::exp(p.y + p.d_y)));
    return level + carry;
}

double h_fn(Point2 p, const StockContext& ctx) {
    require_point_in_numeric_domain(p);
    require_context_valid(ctx);
    double ph = phi(ctx.a_k, ctx.f_now);
    double level = std::log((ph + 2.0 * std::cosh(p.y)) / (ph + 2.0));
    return level + g_fn(p, ctx.b_k, ctx.f_next);
}

bool region_contains(Region region, Point2 p) {
    if (!(p.y > 0.0)) {
        return false;
    }
    double boundary = -0.5 * p.y;
    return region == Region::R1 ? p.d_y >= boundary : p.d_y > boundary;
}

Point2 reflect(Reflection kind, Point2 p) {
    if (kind == Reflection::Negate) {
        return {-p.y, -p.d_y};
    }
    return {p.y, -p.y - p.d_y};
}

double t4_threshold(Point2 p, double delta1, double delta2) {
    require_point_in_numeric_domain(p);
    if (delta1 < 0.0 || delta2 < 0.0) {
        throw std::domain_error("t4_threshold: delta1 and delta2 must be >= 0");
    }
    if (!region_contains(Region::R2, p)) {
        throw std::domain_error("t4_threshold: requires y > 0 and d_y > -y/2");
    }
    // The ratio (e^y + e^{-y} - 2)/(e^{y+d} + e^{-y-d} - e^d - e^{-d}) equals
    // sinh(y/2)/sinh(y/2 + d). The sinh form stays accurate as d approaches
    // -y/2, where the cosh differences cancel catastrophically.
    double ratio = std::sinh(0.5 * p.y) / std::sinh(0.5 * p.y + p.d_y);
    return 0.5 * (1.0 - std::exp(-2.0 * delta1 - delta2) * ratio);
}

double counterexample_limit_r(double s) {
    if (!(s > 0.0)) {
        throw std::domain_error("counterexample_limit_r: s must be > 0");
    }
    if (s > kMaxExpMass) {
        throw std::domain_error("counterexample_limit_r: s > 700 would overflow cosh");
    }
    return 1.0 / (1.0 + std::cosh(s));
}

double counterexample_lhs(double a, double s) {
    if (!(a > 0.0)) {
        throw std::domain_error("counterexample_lhs: a must be > 0");
    }
    if (!(s > 0.0) || s > 0.5 * kMaxExpMass) {
        throw std::domain_error("counterexample_lhs: requires 0 < s <= 350");
    }
    double ph = phi(1.0, a);
    // e^s + e^{-s} - 2 = 4 sinh^2(s/2); likewise with 2s. The log1p form keeps
    // full precision when a (hence ph) is large and both logs are tiny.
    double sh1 = std::sinh(0.5 * s);
    double sh2 = std::sinh(s);
    double num = std::log1p(4.0 * sh1 * sh1 / (ph + 2.0));
    double den = std::log1p(4.0 * sh2 * sh2 / (ph + 2.0));
    return 2.0 * num / den;
}

CounterexampleSpec build_counterexample(double s) {
    if (!(s > 0.0)) {
        throw std::domain_error("build_counterexample: s must be > 0");
    }
    if (s > 170.0) {
        throw std::domain_error("build_counterexample: s > 170 overflows the boundary evaluation");
    }
    double r = counterexample_limit_r(s);
    double m_up = 0.5 * (r + 0.5);
    constexpr double kMinMargin = 1e-9;

    double closest = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 60; ++j) {
        double a = std::ldexp(1.0, j);
        double margin = m_up - counterexample_lhs(a, s);
        if (margin >= kMinMargin) {
            return CounterexampleSpec{s, m_up, 1.0 - m_up, a, r};
        }
        closest = std::max(closest, margin);
    }
    throw ConstructionError(
        s, closest,
        "build_counterexample: no grid point 2^j (j<=60) reaches margin 1e-9 at s=" +
            std::to_string(s) + " (closest margin " + std::to_string(closest) + ")");
}

}  // namespace fundsim::analytics
