#include "fundsim/processes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fundsim/rng.hpp"
#include "fundsim/simd/kernels.hpp"

namespace fundsim::processes {

namespace {

constexpr double kMassTol = 1e-12;

double norminv1(double u) {
    double z;
    simd::vnorminv(&u, &z, 1);
    return z;
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

// First state whose cumulative probability exceeds u; the last state backs
// up the u ~ 1 edge where rounding can leave the total just under 1.
template <class Range>
std::int64_t inverse_cdf(const Range& atoms, double u) {
    double cum = 0.0;
    std::int64_t last = 0;
    for (const auto& [state, prob] : atoms) {
        cum += prob;
        last = state;
        if (u < cum) {
            return state;
        }
    }
    return last;
}

}  // namespace

SymmetricDist SymmetricDist::two_point(double v) {
    SymmetricDist d;
    d.kind = DistKind::TwoPoint;
    d.v = v;
    return d;
}

SymmetricDist SymmetricDist::uniform(double v) {
    SymmetricDist d;
    d.kind = DistKind::Uniform;
    d.v = v;
    return d;
}

SymmetricDist SymmetricDist::normal(double sigma) {
    SymmetricDist d;
    d.kind = DistKind::Normal;
    d.sigma = sigma;
    return d;
}

SymmetricDist SymmetricDist::lattice_pmf(double s,
                                         std::map<std::int64_t, double> pmf) {
    SymmetricDist d;
    d.kind = DistKind::LatticePmf;
    d.s = s;
    d.pmf = std::move(pmf);
    return d;
}

void validate(const SymmetricDist& dist) {
    switch (dist.kind) {
        case DistKind::TwoPoint:
            require_finite(dist.v, "two_point: v");
            if (dist.v < 0.0) {
                throw std::invalid_argument("two_point: v must be >= 0");
            }
            return;
        case DistKind::Uniform:
            require_finite(dist.v, "uniform: v");
            if (!(dist.v > 0.0)) {
                throw std::invalid_argument("uniform: v must be > 0");
            }
            return;
        case DistKind::Normal:
            require_finite(dist.sigma, "normal: sigma");
            if (!(dist.sigma > 0.0)) {
                throw std::invalid_argument("normal: sigma must be > 0");
            }
            return;
        case DistKind::LatticePmf: {
            require_finite(dist.s, "lattice_pmf: s");
            if (!(dist.s > 0.0)) {
                throw std::invalid_argument("lattice_pmf: s must be > 0");
            }
            if (dist.pmf.empty()) {
                throw std::invalid_argument("lattice_pmf: pmf must be non-empty");
            }
            double total = 0.0;
            for (const auto& [k, w] : dist.pmf) {
                if (!std::isfinite(w) || w < 0.0) {
                    throw std::invalid_argument(
                        "lattice_pmf: weights must be finite and >= 0");
                }
                total += w;
                const auto mirrored = dist.pmf.find(-k);
                const double mw =
                    mirrored == dist.pmf.end() ? 0.0 : mirrored->second;
                if (std::abs(w - mw) > kMassTol) {
                    throw std::invalid_argument(
                        "lattice_pmf: weight at k=" + std::to_string(k) +
                        " differs from weight at -k");
                }
            }
            if (std::abs(total - 1.0) > kMassTol) {
                throw std::invalid_argument(
                    "lattice_pmf: weights must sum to 1 within 1e-12");
            }
            return;
        }
    }
    throw std::invalid_argument("SymmetricDist: unknown kind");
}

bool is_degenerate_at_zero(const SymmetricDist& dist) {
    switch (dist.kind) {
        case DistKind::TwoPoint:
            return dist.v == 0.0;
        case DistKind::Uniform:
        case DistKind::Normal:
            return false;
        case DistKind::LatticePmf:
            for (const auto& [k, w] : dist.pmf) {
                if (k != 0 && w > 0.0) {
                    return false;
                }
            }
            return true;
    }
    return false;
}

bool has_unbounded_upper_support(const SymmetricDist& dist) {
    return dist.kind == DistKind::Normal && dist.sigma > 0.0;
}

double sample_dist(const SymmetricDist& dist, double u) {
    switch (dist.kind) {
        case DistKind::TwoPoint:
            return u < 0.5 ? -dist.v : dist.v;
        case DistKind::Uniform:
            // 2u - 1 is exact for u in (0, 1), so u and 1-u give exact
            // negations of each other.
            return dist.v * std::fma(2.0, u, -1.0);
        case DistKind::Normal:
            return dist.sigma * norminv1(u);
        case DistKind::LatticePmf:
            return static_cast<double>(inverse_cdf(dist.pmf, u)) * dist.s;
    }
    throw std::invalid_argument("SymmetricDist: unknown kind");
}

void validate(const OUSpec& spec) {
    require_finite(spec.theta, "ou: theta");
    require_finite(spec.sigma, "ou: sigma");
    if (!(spec.theta > 0.0)) {
        throw std::invalid_argument("ou: theta must be > 0");
    }
    if (!(spec.sigma > 0.0)) {
        throw std::invalid_argument("ou: sigma must be > 0");
    }
    validate(spec.init);
}

void validate(const AR1Spec& spec) {
    require_finite(spec.theta, "ar1: theta");
    validate(spec.noise);
    validate(spec.init);
}

void validate(const LatticeKernel& kernel) {
    require_finite(kernel.s, "lattice: s");
    if (!(kernel.s > 0.0)) {
        throw std::invalid_argument("lattice: s must be > 0");
    }
    if (kernel.transitions.empty()) {
        throw std::invalid_argument("lattice: transitions must be non-empty");
    }
    for (const auto& [state, row] : kernel.transitions) {
        if (row.empty()) {
            throw std::invalid_argument(
                "lattice: empty transition row for state k=" +
                std::to_string(state));
        }
        double total = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const auto& [dest, prob] = row[j];
            if (!std::isfinite(prob) || prob < 0.0 || prob > 1.0) {
                throw std::invalid_argument(
                    "lattice: probabilities must lie in [0, 1] (state k=" +
                    std::to_string(state) + ")");
            }
            if (j > 0 && dest <= row[j - 1].first) {
                throw std::invalid_argument(
                    "lattice: destinations must be strictly ascending "
                    "(state k=" +
                    std::to_string(state) + ")");
            }
            total += prob;
        }
        if (std::abs(total - 1.0) > kMassTol) {
            throw std::invalid_argument(
                "lattice: row for state k=" + std::to_string(state) +
                " sums to " + std::to_string(total) + ", expected 1");
        }
    }
    if (kernel.init.kind != DistKind::LatticePmf) {
        throw std::invalid_argument("lattice: init must be a lattice_pmf");
    }
    if (kernel.init.s != kernel.s) {
        throw std::invalid_argument(
            "lattice: init pmf must share the kernel lattice step");
    }
    validate(kernel.init);
}

void validate(const ProcessSpec& spec) {
    std::visit([](const auto& s) { validate(s); }, spec);
}

OUTransition ou_transition(double y, double dt, const OUSpec& spec) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("ou_transition: dt must be > 0");
    }
    // expm1 keeps the mean accurate for short gaps where exp(-theta dt)
    // is close to 1.
    const double mean = y * std::expm1(-spec.theta * dt);
    const double variance = spec.sigma * spec.sigma *
                            (-std::expm1(-2.0 * spec.theta * dt)) /
                            (2.0 * spec.theta);
    return {mean, variance};
}

std::vector<double> sample_path(const ProcessSpec& spec,
                                const RebalanceSchedule& schedule,
                                std::uint64_t master_seed,
                                std::uint64_t path_index,
                                std::uint64_t stock_index) {
    validate(schedule);
    validate(spec);
    const std::size_t steps = schedule.steps();
    std::vector<double> out(steps + 1);
    const auto uniform = [&](std::uint64_t step) {
        return rng::draw_uniform(master_seed, path_index, stock_index, step);
    };

    if (const auto* ou = std::get_if<OUSpec>(&spec)) {
        double y = sample_dist(ou->init, uniform(0));
        out[0] = y;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double dt = schedule.times[k] - schedule.times[k - 1];
            const double decay = std::exp(-ou->theta * dt);
            const double sd = std::sqrt(ou_transition(0.0, dt, *ou).variance);
            const double z = norminv1(uniform(k));
            y = std::fma(decay, y, sd * z);
            out[k] = y;
        }
        return out;
    }
    if (const auto* ar = std::get_if<AR1Spec>(&spec)) {
        double y = sample_dist(ar->init, uniform(0));
        out[0] = y;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double z = sample_dist(ar->noise, uniform(k));
            y = std::fma(ar->theta, y, z);
            out[k] = y;
        }
        return out;
    }
    const auto& kernel = std::get<LatticeKernel>(spec);
    std::int64_t state = inverse_cdf(kernel.init.pmf, uniform(0));
    out[0] = static_cast<double>(state) * kernel.s;
    for (std::size_t k = 1; k <= steps; ++k) {
        state = inverse_cdf(kernel_row(kernel, state), uniform(k));
        out[k] = static_cast<double>(state) * kernel.s;
    }
    return out;
}

const std::vector<std::pair<std::int64_t, double>>& kernel_row(
    const LatticeKernel& kernel, std::int64_t state) {
    const auto it = kernel.transitions.find(state);
    if (it == kernel.transitions.end()) {
        throw std::invalid_argument(
            "lattice kernel has no transition row for state k=" +
            std::to_string(state));
    }
    return it->second;
}

std::vector<JointAtom> kernel_increment_pmf(const LatticeKernel& kernel,
                                            std::int64_t k1) {
    const auto& row = kernel_row(kernel, k1);
    std::vector<JointAtom> atoms;
    atoms.reserve(row.size());
    const double y = static_cast<double>(k1) * kernel.s;
    for (const auto& [k2, prob] : row) {
        atoms.push_back({y, static_cast<double>(k2 - k1) * kernel.s, prob});
    }
    return atoms;
}

}  // namespace fundsim::processes
