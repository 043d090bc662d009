#include "fundsim/conditions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fundsim/analytics.hpp"

namespace fundsim::conditions {

namespace {

constexpr double kTol = 1e-12;

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

std::string describe(const DiscreteJointMeasure& mu, const Atom& a) {
    return "(y=" + fmt(mu.y_of(a)) + ", d_y=" + fmt(mu.d_of(a)) + ")";
}

void fail(ConditionCheck& check, std::string at, double margin) {
    check.passed = false;
    check.witnesses.push_back({std::move(at), margin});
}

// Keeps the running minimum slack finite for the margins map.
void track_min(double& slot, double value) {
    if (value < slot) {
        slot = value;
    }
}

double row_prob(const processes::LatticeKernel& kernel, std::int64_t k1,
                std::int64_t k2) {
    const auto row = kernel.transitions.find(k1);
    if (row == kernel.transitions.end()) {
        return 0.0;
    }
    for (const auto& [dest, prob] : row->second) {
        if (dest == k2) {
            return prob;
        }
    }
    return 0.0;
}

}  // namespace

void DiscreteJointMeasure::add(std::int64_t i_y, std::int64_t i_d,
                               double mass) {
    atoms[Atom{i_y, i_d}] += mass;
}

double DiscreteJointMeasure::mass(const Atom& a) const {
    const auto it = atoms.find(a);
    return it == atoms.end() ? 0.0 : it->second;
}

double DiscreteJointMeasure::total() const {
    double t = 0.0;
    for (const auto& [a, m] : atoms) {
        t += m;
    }
    return t;
}

void validate(const DiscreteJointMeasure& mu) {
    if (!(mu.scale > 0.0) || !std::isfinite(mu.scale)) {
        throw std::invalid_argument("measure: scale must be positive");
    }
    for (const auto& [a, m] : mu.atoms) {
        if (!std::isfinite(m) || m < 0.0) {
            throw std::invalid_argument("measure: masses must be >= 0");
        }
    }
    if (mu.total() > 1.0 + kTol) {
        throw std::invalid_argument("measure: total mass exceeds 1");
    }
}

DiscreteJointMeasure snap_measure(
    double scale,
    const std::vector<std::tuple<double, double, double>>& real_atoms) {
    if (!(scale > 0.0)) {
        throw std::invalid_argument("snap_measure: scale must be positive");
    }
    DiscreteJointMeasure mu;
    mu.scale = scale;
    for (const auto& [y, d, mass] : real_atoms) {
        const auto snap = [scale](double coord, const char* name) {
            const double ratio = coord / scale;
            const auto i = static_cast<std::int64_t>(std::llround(ratio));
            if (std::abs(static_cast<double>(i) * scale - coord) > 1e-9) {
                throw std::invalid_argument(
                    std::string("snap_measure: ") + name + "=" + fmt(coord) +
                    " is not on the lattice with step " + fmt(scale));
            }
            return i;
        };
        mu.add(snap(y, "y"), snap(d, "d_y"), mass);
    }
    validate(mu);
    return mu;
}

bool atom_in_r1(const Atom& a) { return a.i_y > 0 && 2 * a.i_d >= -a.i_y; }

bool atom_in_r2(const Atom& a) { return a.i_y > 0 && 2 * a.i_d > -a.i_y; }

Atom negate_atom(const Atom& a) { return {-a.i_y, -a.i_d}; }

Atom prime_atom(const Atom& a) { return {a.i_y, -a.i_y - a.i_d}; }

bool ConditionReport::all_passed() const {
    for (const auto& c : conditions) {
        if (!c.passed) {
            return false;
        }
    }
    return true;
}

nlohmann::json to_json(const ConditionReport& report) {
    nlohmann::json conditions = nlohmann::json::array();
    for (const auto& c : report.conditions) {
        nlohmann::json witnesses = nlohmann::json::array();
        for (const auto& w : c.witnesses) {
            witnesses.push_back({{"at", w.at}, {"margin", w.margin}});
        }
        conditions.push_back({{"label", c.label},
                              {"passed", c.passed},
                              {"witnesses", witnesses}});
    }
    return {{"theorem", report.theorem},
            {"conditions", conditions},
            {"margins", report.margins}};
}

ConditionReport check_t1_symmetry(const DiscreteJointMeasure& mu,
                                  double tol) {
    validate(mu);
    ConditionReport report;
    report.theorem = "t1";
    ConditionCheck check{"(i) joint symmetry", true, {}};
    double max_gap = 0.0;
    for (const auto& [a, m] : mu.atoms) {
        const double gap = std::abs(m - mu.mass(negate_atom(a)));
        if (gap > max_gap) {
            max_gap = gap;
        }
        if (gap > tol) {
            fail(check, describe(mu, a), gap);
        }
    }
    report.margins["max_asymmetry"] = max_gap;
    report.conditions.push_back(std::move(check));
    return report;
}

ConditionReport check_t1_strength(const DiscreteJointMeasure& mu,
                                  double tol) {
    validate(mu);
    ConditionReport report;
    report.theorem = "t1";
    ConditionCheck check{"(ii) reversion strength", true, {}};
    double min_slack = std::numeric_limits<double>::max();
    bool any = false;
    for (const auto& [a, m] : mu.atoms) {
        if (!atom_in_r2(a)) {
            continue;
        }
        any = true;
        const double mirrored = mu.mass(prime_atom(a));
        track_min(min_slack, mirrored - m);
        if (m > mirrored + tol) {
            fail(check, describe(mu, a), m - mirrored);
        }
    }
    if (any) {
        report.margins["min_strength_slack"] = min_slack;
    }
    report.conditions.push_back(std::move(check));
    return report;
}

double check_t1_mass_r1(const DiscreteJointMeasure& mu) {
    validate(mu);
    double mass = 0.0;
    for (const auto& [a, m] : mu.atoms) {
        if (atom_in_r1(a)) {
            mass += m;
        }
    }
    return mass;
}

ConditionReport check_t2_conditions(const processes::LatticeKernel& kernel,
                                    int horizon) {
    if (horizon < 1) {
        throw std::invalid_argument("check_t2_conditions: horizon must be >= 1");
    }
    // States occupied at steps 0..horizon-1 must have transition rows.
    std::set<std::int64_t> support;
    for (const auto& [k, w] : kernel.init.pmf) {
        if (w > 0.0) {
            support.insert(k);
        }
    }
    for (int step = 0; step < horizon; ++step) {
        std::set<std::int64_t> next;
        for (const std::int64_t state : support) {
            for (const auto& [dest, prob] : processes::kernel_row(kernel,
                                                                  state)) {
                if (prob > 0.0) {
                    next.insert(dest);
                }
            }
        }
        support.swap(next);
    }

    ConditionReport report;
    report.theorem = "t2";

    ConditionCheck sym{"(i) row symmetry", true, {}};
    ConditionCheck strength{"(ii) row reversion strength", true, {}};
    ConditionCheck collapse{"(iv) no certain collapse", true, {}};
    ConditionCheck escape{"(v) escape into R1", true, {}};
    double max_gap = 0.0;
    double min_strength = std::numeric_limits<double>::max();
    double max_collapse = 0.0;
    double min_escape = std::numeric_limits<double>::max();
    bool any_strength = false;
    bool any_positive_row = false;

    for (const auto& [k1, row] : kernel.transitions) {
        for (const auto& [k2, prob] : row) {
            const double gap = std::abs(prob - row_prob(kernel, -k1, -k2));
            if (gap > max_gap) {
                max_gap = gap;
            }
            if (gap > kTol) {
                fail(sym, "P(k1=" + std::to_string(k1) +
                              ", k2=" + std::to_string(k2) + ")",
                     gap);
            }
            if (atom_in_r2(Atom{k1, k2 - k1})) {
                any_strength = true;
                const double mirrored = row_prob(kernel, k1, k1 - k2);
                track_min(min_strength, mirrored - prob);
                if (prob > mirrored + kTol) {
                    fail(strength,
                         "P(k1=" + std::to_string(k1) +
                             ", k2=" + std::to_string(k2) + ") vs k2=" +
                             std::to_string(k1 - k2),
                         prob - mirrored);
                }
            }
        }
        const double p0 = row_prob(kernel, k1, 0);
        if (p0 > max_collapse) {
            max_collapse = p0;
        }
        if (1.0 - p0 <= kTol) {
            fail(collapse, "state k1=" + std::to_string(k1), p0);
        }
        if (k1 >= 1) {
            any_positive_row = true;
            double into_r1 = 0.0;
            for (const auto& [k2, prob] : row) {
                if (atom_in_r1(Atom{k1, k2 - k1})) {
                    into_r1 += prob;
                }
            }
            track_min(min_escape, into_r1);
            if (!(into_r1 > 0.0)) {
                fail(escape, "state k1=" + std::to_string(k1), into_r1);
            }
        }
    }

    ConditionCheck init_sym{"(c) symmetric initial law", true, {}};
    double max_init_gap = 0.0;
    for (const auto& [k, w] : kernel.init.pmf) {
        const auto mirrored = kernel.init.pmf.find(-k);
        const double mw = mirrored == kernel.init.pmf.end()
                              ? 0.0
                              : mirrored->second;
        const double gap = std::abs(w - mw);
        if (gap > max_init_gap) {
            max_init_gap = gap;
        }
        if (gap > kTol) {
            fail(init_sym, "init weight at k=" + std::to_string(k), gap);
        }
    }

    report.margins["max_symmetry_gap"] = max_gap;
    report.margins["max_init_asymmetry"] = max_init_gap;
    report.margins["max_collapse_prob"] = max_collapse;
    if (any_strength) {
        report.margins["min_strength_slack"] = min_strength;
    }
    if (any_positive_row) {
        report.margins["min_r1_escape"] = min_escape;
    }
    report.conditions.push_back(std::move(sym));
    report.conditions.push_back(std::move(strength));
    report.conditions.push_back(std::move(init_sym));
    report.conditions.push_back(std::move(collapse));
    report.conditions.push_back(std::move(escape));
    return report;
}

ConditionReport check_ou_spacing(const std::vector<processes::OUSpec>& specs,
                                 const RebalanceSchedule& schedule) {
    fundsim::validate(schedule);
    ConditionReport report;
    report.theorem = "cor1";
    ConditionCheck check{"rebalance gaps >= ln2/min(theta)", true, {}};
    if (!specs.empty()) {
        double min_theta = specs.front().theta;
        for (const auto& spec : specs) {
            processes::validate(spec);
            min_theta = std::min(min_theta, spec.theta);
        }
        const double bound = std::numbers::ln2 / min_theta;
        double min_slack = std::numeric_limits<double>::max();
        for (std::size_t k = 0; k + 1 < schedule.times.size(); ++k) {
            const double gap = schedule.times[k + 1] - schedule.times[k];
            const double slack = gap - bound;
            track_min(min_slack, slack);
            if (slack < 0.0) {
                fail(check,
                     "gap " + std::to_string(k) + " (t=" +
                         fmt(schedule.times[k]) + " to t=" +
                         fmt(schedule.times[k + 1]) + ")",
                     -slack);
            }
        }
        report.margins["min_gap_slack"] = min_slack;
        report.margins["required_gap"] = bound;
    }
    report.conditions.push_back(std::move(check));
    return report;
}

ConditionReport check_t4_conditions(const DiscreteJointMeasure& mu,
                                    const std::map<Atom, double>& r_values,
                                    double delta1, double delta2, double dF,
                                    double kernel_bound) {
    validate(mu);
    if (!(dF >= 0.0) || !(kernel_bound >= 0.0) || !std::isfinite(dF) ||
        !std::isfinite(kernel_bound)) {
        throw std::invalid_argument(
            "check_t4_conditions: dF and kernel_bound must be finite and "
            ">= 0");
    }

    ConditionReport report;
    report.theorem = "t4";

    // (i) reuses the joint-symmetry check verbatim.
    report.conditions.push_back(
        check_t1_symmetry(mu, kTol).conditions.front());

    ConditionCheck weighted{"(ii) weighted reversion strength", true, {}};
    ConditionCheck admissible{"(ii) admissible thresholds", true, {}};
    double min_weighted = std::numeric_limits<double>::max();
    double min_headroom = std::numeric_limits<double>::max();
    bool any = false;
    for (const auto& [a, m] : mu.atoms) {
        if (!atom_in_r2(a)) {
            continue;
        }
        any = true;
        const auto it = r_values.find(a);
        if (it == r_values.end()) {
            throw std::invalid_argument(
                "check_t4_conditions: r value missing for atom " +
                describe(mu, a));
        }
        const double r = it->second;
        if (!(r >= 0.0) || r >= 1.0) {
            throw std::domain_error(
                "check_t4_conditions: r must lie in [0, 1) at atom " +
                describe(mu, a));
        }
        const double threshold = analytics::t4_threshold(
            {mu.y_of(a), mu.d_of(a)}, delta1, delta2);
        track_min(min_headroom, r - threshold);
        if (!(r > threshold)) {
            fail(admissible, describe(mu, a), threshold - r);
        }
        const double need = m * r / (1.0 - r);
        const double mirrored = mu.mass(prime_atom(a));
        track_min(min_weighted, mirrored - need);
        if (need > mirrored + kTol) {
            fail(weighted, describe(mu, a), need - mirrored);
        }
    }
    if (any) {
        report.margins["min_weighted_slack"] = min_weighted;
        report.margins["min_r_headroom"] = min_headroom;
    }

    ConditionCheck drift{"(iii) fundamental drift bound", true, {}};
    if (dF > delta1) {
        fail(drift, "max |log F(t_k+1) - log F(t_k)| = " + fmt(dF),
             dF - delta1);
    }
    ConditionCheck support{"(iv) increment support bound", true, {}};
    if (kernel_bound > delta2) {
        fail(support, "max |d_y| = " + fmt(kernel_bound),
             kernel_bound - delta2);
    }
    report.margins["fund_drift_slack"] = delta1 - dF;
    report.margins["support_slack"] = delta2 - kernel_bound;

    report.conditions.push_back(std::move(weighted));
    report.conditions.push_back(std::move(admissible));
    report.conditions.push_back(std::move(drift));
    report.conditions.push_back(std::move(support));
    return report;
}

std::map<Atom, double> derive_t4_r(const DiscreteJointMeasure& mu,
                                   double delta1, double delta2,
                                   double margin) {
    validate(mu);
    if (!(margin > 0.0) || !(margin < 0.5)) {
        throw std::invalid_argument(
            "derive_t4_r: margin must lie in (0, 1/2)");
    }
    std::map<Atom, double> r_values;
    for (const auto& [a, m] : mu.atoms) {
        if (!atom_in_r2(a)) {
            continue;
        }
        const double threshold = analytics::t4_threshold(
            {mu.y_of(a), mu.d_of(a)}, delta1, delta2);
        r_values[a] = std::max(threshold, 0.0) + margin;
    }
    return r_values;
}

std::map<std::int64_t, double> state_distribution(
    const processes::LatticeKernel& kernel, int k) {
    if (k < 0 || k > 32) {
        throw std::invalid_argument(
            "state_distribution: step count must lie in [0, 32]");
    }
    std::map<std::int64_t, double> dist;
    for (const auto& [state, w] : kernel.init.pmf) {
        if (w > 0.0) {
            dist[state] = w;
        }
    }
    for (int step = 0; step < k; ++step) {
        std::map<std::int64_t, double> next;
        for (const auto& [state, w] : dist) {
            for (const auto& [dest, prob] : processes::kernel_row(kernel,
                                                                  state)) {
                if (prob > 0.0) {
                    next[dest] += w * prob;
                }
            }
        }
        dist.swap(next);
    }
    return dist;
}

DiscreteJointMeasure induced_measure(const processes::LatticeKernel& kernel,
                                     int k) {
    const auto dist = state_distribution(kernel, k);
    DiscreteJointMeasure mu;
    mu.scale = kernel.s;
    for (const auto& [state, w] : dist) {
        for (const auto& [dest, prob] : processes::kernel_row(kernel,
                                                              state)) {
            if (prob > 0.0) {
                mu.add(state, dest - state, w * prob);
            }
        }
    }
    return mu;
}

}  // namespace fundsim::conditions
