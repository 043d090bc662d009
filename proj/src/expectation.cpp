#include "fundsim/expectation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "fundsim/market.hpp"
#include "fundsim/processes.hpp"
#include "fundsim/rng.hpp"
#include "fundsim/scenario.hpp"
#include "fundsim/simd/kernels.hpp"

namespace fundsim::expectation {

namespace {

constexpr std::size_t kBlockPaths = 4096;
constexpr double kStateBudget = 1e6;

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// Lattice kernels for every stock, or empty when some stock is OU/AR(1).
std::vector<const processes::LatticeKernel*> lattice_stocks(
    const Scenario& sc) {
    std::vector<const processes::LatticeKernel*> kernels;
    kernels.reserve(sc.processes.size());
    for (const auto& spec : sc.processes) {
        const auto* kernel = std::get_if<processes::LatticeKernel>(&spec);
        if (kernel == nullptr) {
            return {};
        }
        kernels.push_back(kernel);
    }
    return kernels;
}

// Marginal state law of one chain at each schedule time, states ascending.
std::vector<std::vector<std::pair<std::int64_t, double>>> marginal_laws(
    const processes::LatticeKernel& kernel, std::size_t steps) {
    std::map<std::int64_t, double> dist;
    for (const auto& [state, w] : kernel.init.pmf) {
        if (w > 0.0) {
            dist[state] = w;
        }
    }
    std::vector<std::vector<std::pair<std::int64_t, double>>> laws;
    laws.reserve(steps + 1);
    laws.emplace_back(dist.begin(), dist.end());
    for (std::size_t k = 1; k <= steps; ++k) {
        std::map<std::int64_t, double> next;
        for (const auto& [state, w] : dist) {
            for (const auto& [dest, prob] :
                 processes::kernel_row(kernel, state)) {
                if (prob > 0.0) {
                    next[dest] += w * prob;
                }
            }
        }
        dist.swap(next);
        laws.emplace_back(dist.begin(), dist.end());
    }
    return laws;
}

// Row-major odometer over mixed radices; f sees each index combination in
// ascending order with the last dimension fastest.
template <class F>
void for_each_combo(const std::vector<std::size_t>& sizes, F&& f) {
    std::vector<std::size_t> idx(sizes.size(), 0);
    for (;;) {
        f(idx);
        std::size_t d = sizes.size();
        for (;;) {
            if (d == 0) {
                return;
            }
            --d;
            if (++idx[d] < sizes[d]) {
                break;
            }
            idx[d] = 0;
        }
    }
}

unsigned thread_budget() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("FUNDSIM_THREADS");
    if (env == nullptr || *env == '\0') {
        return hw;
    }
    unsigned value = 0;
    const auto res = std::from_chars(env, env + std::string_view(env).size(),
                                     value);
    if (res.ec != std::errc{} || *res.ptr != '\0' || value < 1) {
        throw std::invalid_argument(
            "FUNDSIM_THREADS must be a positive integer");
    }
    return value;
}

// Draws from a symmetric law for a whole block of paths.  Normal laws are
// batched through the vectorized quantile; the other kinds are exact
// elementary operations per path.
void dist_values(const processes::SymmetricDist& dist, const double* u,
                 double* out, std::size_t cnt, std::vector<double>& scratch) {
    if (dist.kind == processes::DistKind::Normal) {
        scratch.resize(cnt);
        simd::vnorminv(u, scratch.data(), cnt);
        for (std::size_t p = 0; p < cnt; ++p) {
            out[p] = dist.sigma * scratch[p];
        }
        return;
    }
    for (std::size_t p = 0; p < cnt; ++p) {
        out[p] = processes::sample_dist(dist, u[p]);
    }
}

std::int64_t lattice_pick(
    const std::vector<std::pair<std::int64_t, double>>& row, double u) {
    double cum = 0.0;
    std::int64_t last = 0;
    for (const auto& [state, prob] : row) {
        cum += prob;
        last = state;
        if (u < cum) {
            return state;
        }
    }
    return last;
}

std::int64_t lattice_pick(const std::map<std::int64_t, double>& pmf,
                          double u) {
    double cum = 0.0;
    std::int64_t last = 0;
    for (const auto& [state, prob] : pmf) {
        cum += prob;
        last = state;
        if (u < cum) {
            return state;
        }
    }
    return last;
}

struct BlockSums {
    std::vector<double> time_sum;   // index j: sum over paths of L(t_j)
    std::vector<double> time_sum2;  // and of L(t_j)^2
    std::vector<double> step_sum;   // index k: sum of the step-k increment
    std::vector<double> step_sum2;
};

// Simulates paths [first_path, first_path + cnt) and accumulates the block
// partial sums.  All randomness comes from counter-derived substreams, so
// the result depends only on the path indices, never on which thread or
// block boundary processed them.
void run_block(const Scenario& sc, const McSettings& settings,
               std::uint64_t first_path, std::size_t cnt, BlockSums& sums) {
    const std::size_t steps = sc.schedule.steps();
    const std::size_t n = sc.n;
    const auto& fund = sc.fundamentals.values;

    sums.time_sum.assign(steps + 1, 0.0);
    sums.time_sum2.assign(steps + 1, 0.0);
    sums.step_sum.assign(steps, 0.0);
    sums.step_sum2.assign(steps, 0.0);

    // ey[i] holds exp(Y_i) for the whole block, time-major: entry
    // [k * cnt + p] is stock i at time k on block path p.
    std::vector<std::vector<double>> ey(n);
    std::vector<double> u(cnt);
    std::vector<double> z(cnt);
    std::vector<double> scratch;
    std::vector<std::int64_t> state(cnt);

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> y((steps + 1) * cnt);
        const auto fill_u = [&](std::uint64_t step) {
            for (std::size_t p = 0; p < cnt; ++p) {
                u[p] = rng::draw_uniform(settings.master_seed, first_path + p,
                                         i, step);
            }
        };
        if (const auto* ou = std::get_if<processes::OUSpec>(&sc.processes[i])) {
            fill_u(0);
            dist_values(ou->init, u.data(), y.data(), cnt, scratch);
            for (std::size_t k = 1; k <= steps; ++k) {
                const double dt =
                    sc.schedule.times[k] - sc.schedule.times[k - 1];
                const double decay = std::exp(-ou->theta * dt);
                const double sd =
                    std::sqrt(processes::ou_transition(0.0, dt, *ou).variance);
                fill_u(k);
                simd::vnorminv(u.data(), z.data(), cnt);
                const double* prev = y.data() + (k - 1) * cnt;
                double* cur = y.data() + k * cnt;
                for (std::size_t p = 0; p < cnt; ++p) {
                    cur[p] = std::fma(decay, prev[p], sd * z[p]);
                }
            }
        } else if (const auto* ar =
                       std::get_if<processes::AR1Spec>(&sc.processes[i])) {
            fill_u(0);
            dist_values(ar->init, u.data(), y.data(), cnt, scratch);
            for (std::size_t k = 1; k <= steps; ++k) {
                fill_u(k);
                dist_values(ar->noise, u.data(), z.data(), cnt, scratch);
                const double* prev = y.data() + (k - 1) * cnt;
                double* cur = y.data() + k * cnt;
                for (std::size_t p = 0; p < cnt; ++p) {
                    cur[p] = std::fma(ar->theta, prev[p], z[p]);
                }
            }
        } else {
            const auto& kernel =
                std::get<processes::LatticeKernel>(sc.processes[i]);
            fill_u(0);
            for (std::size_t p = 0; p < cnt; ++p) {
                state[p] = lattice_pick(kernel.init.pmf, u[p]);
                y[p] = static_cast<double>(state[p]) * kernel.s;
            }
            for (std::size_t k = 1; k <= steps; ++k) {
                fill_u(k);
                double* cur = y.data() + k * cnt;
                for (std::size_t p = 0; p < cnt; ++p) {
                    state[p] = lattice_pick(
                        processes::kernel_row(kernel, state[p]), u[p]);
                    cur[p] = static_cast<double>(state[p]) * kernel.s;
                }
            }
        }
        ey[i].resize(y.size());
        simd::vexp(y.data(), ey[i].data(), y.size());
    }

    // One cross quotient per (path, step); exp(d) enters as the exact
    // division exp(y + d) / exp(y).
    std::vector<double> inc(steps * cnt);
    for (std::size_t k = 0; k < steps; ++k) {
        double* row = inc.data() + k * cnt;
        for (std::size_t p = 0; p < cnt; ++p) {
            double s_lo = 0.0;
            double s_hi = 0.0;
            double t_lo = 0.0;
            double t_hi = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double eyk = ey[i][k * cnt + p];
                const double eyk1 = ey[i][(k + 1) * cnt + p];
                const double ed = eyk1 / eyk;
                const double f0 = fund[i][k];
                const double f1 = fund[i][k + 1];
                const bool hi_fund = i < static_cast<std::size_t>(sc.m2);
                const bool lo_fund = i + 1 < static_cast<std::size_t>(sc.m1);
                s_hi += hi_fund ? f0 : f0 * eyk;
                s_lo += lo_fund ? f0 : f0 * eyk;
                t_hi += hi_fund ? f1 * ed : f1 * eyk1;
                t_lo += lo_fund ? f1 * ed : f1 * eyk1;
            }
            row[p] = (t_hi * s_lo) / (s_hi * t_lo);
        }
        simd::vlog(row, row, cnt);
    }

    std::vector<double> cum(cnt, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double* row = inc.data() + k * cnt;
        double ssum = 0.0;
        double ssum2 = 0.0;
        double tsum = 0.0;
        double tsum2 = 0.0;
        for (std::size_t p = 0; p < cnt; ++p) {
            const double v = row[p];
            ssum += v;
            ssum2 += v * v;
            cum[p] += v;
            tsum += cum[p];
            tsum2 += cum[p] * cum[p];
        }
        sums.step_sum[k] = ssum;
        sums.step_sum2[k] = ssum2;
        sums.time_sum[k + 1] = tsum;
        sums.time_sum2[k + 1] = tsum2;
    }
}

struct MeanStats {
    double mean = 0.0;
    double se = 0.0;
};

MeanStats mean_stats(double sum, double sum2, std::uint64_t count) {
    MeanStats stats;
    stats.mean = sum / static_cast<double>(count);
    if (count >= 2) {
        const double ss =
            std::max(0.0, sum2 - sum * sum / static_cast<double>(count));
        const double var = ss / static_cast<double>(count - 1);
        stats.se = std::sqrt(var / static_cast<double>(count));
    }
    return stats;
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0, 1)");
    }
    double z;
    simd::vnorminv(&p, &z, 1);
    return z;
}

double exact_state_budget(const Scenario& scenario) {
    const auto kernels = lattice_stocks(scenario);
    if (kernels.empty()) {
        return -1.0;
    }
    const std::size_t steps = scenario.schedule.steps();
    double worst = 1.0;
    std::vector<std::vector<std::vector<std::pair<std::int64_t, double>>>>
        laws;
    laws.reserve(kernels.size());
    for (const auto* kernel : kernels) {
        laws.push_back(marginal_laws(*kernel, steps));
    }
    for (std::size_t k = 0; k < steps; ++k) {
        double joint = 1.0;
        for (const auto& law : laws) {
            joint *= static_cast<double>(law[k].size());
        }
        worst = std::max(worst, joint);
    }
    return worst;
}

LogRatioReport exact_expected_log_ratio(const Scenario& scenario) {
    validate(scenario);
    const auto kernels = lattice_stocks(scenario);
    if (kernels.empty()) {
        throw std::invalid_argument(
            "exact engine requires every stock to be a lattice kernel");
    }
    const std::size_t steps = scenario.schedule.steps();
    const std::size_t n = scenario.n;
    const auto& fund = scenario.fundamentals.values;

    std::vector<std::vector<std::vector<std::pair<std::int64_t, double>>>>
        laws;
    laws.reserve(n);
    std::vector<std::map<std::int64_t, double>> exp_cache(n);
    for (const auto* kernel : kernels) {
        laws.push_back(marginal_laws(*kernel, steps));
    }
    const auto exp_of = [&](std::size_t i, std::int64_t state) {
        auto [it, inserted] = exp_cache[i].try_emplace(state, 0.0);
        if (inserted) {
            it->second =
                std::exp(static_cast<double>(state) * kernels[i]->s);
        }
        return it->second;
    };

    std::vector<double> step_means(steps, 0.0);
    std::vector<std::size_t> state_sizes(n);
    std::vector<std::size_t> row_sizes(n);
    std::vector<double> x0(n);
    std::vector<double> lam_lo(n);
    std::vector<double> lam_hi(n);

    for (std::size_t k = 0; k < steps; ++k) {
        double joint = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            state_sizes[i] = laws[i][k].size();
            joint *= static_cast<double>(state_sizes[i]);
        }
        if (joint > kStateBudget) {
            throw BudgetError(
                "exact engine: step " + std::to_string(k) + " enumerates " +
                    format_double(joint) +
                    " joint states, over the 1e6 budget",
                joint);
        }

        double e_inc = 0.0;
        for_each_combo(state_sizes, [&](const std::vector<std::size_t>& si) {
            double weight = 1.0;
            double s_lo = 0.0;
            double s_hi = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& [st, w] = laws[i][k][si[i]];
                weight *= w;
                x0[i] = fund[i][k] * exp_of(i, st);
                lam_hi[i] = i < static_cast<std::size_t>(scenario.m2)
                                ? fund[i][k]
                                : x0[i];
                lam_lo[i] = i + 1 < static_cast<std::size_t>(scenario.m1)
                                ? fund[i][k]
                                : x0[i];
                s_hi += lam_hi[i];
                s_lo += lam_lo[i];
                row_sizes[i] =
                    processes::kernel_row(*kernels[i], laws[i][k][si[i]].first)
                        .size();
            }
            for_each_combo(row_sizes,
                           [&](const std::vector<std::size_t>& ri) {
                double prob = 1.0;
                double t_lo = 0.0;
                double t_hi = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& row = processes::kernel_row(
                        *kernels[i], laws[i][k][si[i]].first);
                    const auto& [dest, p] = row[ri[i]];
                    prob *= p;
                    const double ratio =
                        fund[i][k + 1] * exp_of(i, dest) / x0[i];
                    t_hi += lam_hi[i] * ratio;
                    t_lo += lam_lo[i] * ratio;
                }
                if (prob > 0.0) {
                    e_inc += weight * prob *
                             std::log((t_hi * s_lo) / (s_hi * t_lo));
                }
            });
        });
        step_means[k] = e_inc;
    }

    LogRatioReport report;
    report.method = "exact";
    report.paths_used = 0;
    report.entries.reserve(steps + 1);
    report.increments.reserve(steps);
    double cum = 0.0;
    for (std::size_t j = 0; j <= steps; ++j) {
        if (j > 0) {
            const double v = step_means[j - 1];
            report.increments.push_back({scenario.schedule.times[j - 1],
                                         scenario.schedule.times[j], v, 0.0,
                                         v, v});
            cum += v;
        }
        report.entries.push_back({scenario.schedule.times[j], cum, 0.0, cum,
                                  cum, "exact", 0});
    }
    return report;
}

LogRatioReport mc_expected_log_ratio(const Scenario& scenario,
                                     const McSettings& settings) {
    validate(scenario);
    if (settings.paths < 1) {
        throw std::invalid_argument("mc: paths must be >= 1");
    }
    if (!(settings.ci_level > 0.0 && settings.ci_level < 1.0)) {
        throw std::invalid_argument("mc: ci_level must lie in (0, 1)");
    }
    const std::size_t steps = scenario.schedule.steps();
    const std::uint64_t total = settings.paths;
    const std::size_t n_blocks =
        static_cast<std::size_t>((total + kBlockPaths - 1) / kBlockPaths);

    std::vector<BlockSums> blocks(n_blocks);
    const auto worker_count = static_cast<std::size_t>(
        std::min<std::uint64_t>(thread_budget(), n_blocks));
    std::atomic<std::size_t> next_block{0};
    const auto work = [&]() {
        for (;;) {
            const std::size_t b = next_block.fetch_add(1);
            if (b >= n_blocks) {
                return;
            }
            const std::uint64_t first = static_cast<std::uint64_t>(b) *
                                        kBlockPaths;
            const std::size_t cnt = static_cast<std::size_t>(
                std::min<std::uint64_t>(kBlockPaths, total - first));
            run_block(scenario, settings, first, cnt, blocks[b]);
        }
    };
    if (worker_count <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (std::size_t t = 0; t < worker_count; ++t) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    // Merge partials in block order so the totals are independent of the
    // thread schedule.
    std::vector<double> time_sum(steps + 1, 0.0);
    std::vector<double> time_sum2(steps + 1, 0.0);
    std::vector<double> step_sum(steps, 0.0);
    std::vector<double> step_sum2(steps, 0.0);
    for (const auto& b : blocks) {
        for (std::size_t j = 0; j <= steps; ++j) {
            time_sum[j] += b.time_sum[j];
            time_sum2[j] += b.time_sum2[j];
        }
        for (std::size_t k = 0; k < steps; ++k) {
            step_sum[k] += b.step_sum[k];
            step_sum2[k] += b.step_sum2[k];
        }
    }

    const double z = normal_quantile(0.5 * (1.0 + settings.ci_level));
    LogRatioReport report;
    report.method = "mc";
    report.paths_used = total;
    report.ci_level = settings.ci_level;
    report.entries.reserve(steps + 1);
    report.increments.reserve(steps);
    report.entries.push_back(
        {scenario.schedule.times[0], 0.0, 0.0, 0.0, 0.0, "mc", total});
    for (std::size_t j = 1; j <= steps; ++j) {
        const auto stats = mean_stats(time_sum[j], time_sum2[j], total);
        report.entries.push_back({scenario.schedule.times[j], stats.mean,
                                  stats.se, stats.mean - z * stats.se,
                                  stats.mean + z * stats.se, "mc", total});
        const auto inc = mean_stats(step_sum[j - 1], step_sum2[j - 1], total);
        report.increments.push_back({scenario.schedule.times[j - 1],
                                     scenario.schedule.times[j], inc.mean,
                                     inc.se, inc.mean - z * inc.se,
                                     inc.mean + z * inc.se});
    }
    return report;
}

CompareResult compare_engines(const Scenario& scenario) {
    const LogRatioReport exact = exact_expected_log_ratio(scenario);
    const LogRatioReport mc = mc_expected_log_ratio(scenario, scenario.mc);
    CompareResult result;
    result.rows.reserve(exact.entries.size());
    for (std::size_t j = 0; j < exact.entries.size(); ++j) {
        const double e = exact.entries[j].estimate;
        const double m = mc.entries[j].estimate;
        const double se = mc.entries[j].std_error;
        result.rows.push_back({exact.entries[j].t, e, m, se});
        const double diff = std::abs(m - e);
        result.max_abs_diff = std::max(result.max_abs_diff, diff);
        if (se > 0.0) {
            result.max_sigma = std::max(result.max_sigma, diff / se);
        }
    }
    return result;
}

nlohmann::json to_json(const LogRatioReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"t", e.t},
                           {"estimate", e.estimate},
                           {"stderr", e.std_error},
                           {"ci_low", e.ci_low},
                           {"ci_high", e.ci_high},
                           {"method", e.method},
                           {"paths", e.paths}});
    }
    nlohmann::json increments = nlohmann::json::array();
    for (const auto& s : report.increments) {
        increments.push_back({{"t_from", s.t_from},
                              {"t_to", s.t_to},
                              {"estimate", s.estimate},
                              {"stderr", s.std_error},
                              {"ci_low", s.ci_low},
                              {"ci_high", s.ci_high}});
    }
    return {{"method", report.method},
            {"paths", report.paths_used},
            {"ci_level", report.ci_level},
            {"entries", entries},
            {"increments", increments}};
}

std::string to_csv(const LogRatioReport& report) {
    std::string csv = "t,estimate,stderr,ci_low,ci_high,method,paths\n";
    for (const auto& e : report.entries) {
        csv += format_double(e.t);
        csv += ',';
        csv += format_double(e.estimate);
        csv += ',';
        csv += format_double(e.std_error);
        csv += ',';
        csv += format_double(e.ci_low);
        csv += ',';
        csv += format_double(e.ci_high);
        csv += ',';
        csv += e.method;
        csv += ',';
        csv += std::to_string(e.paths);
        csv += '\n';
    }
    return csv;
}

}  // namespace fundsim::expectation
