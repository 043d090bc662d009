#include "fundsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fundsim/analytics.hpp"

namespace fundsim {

namespace {

using nlohmann::json;

// Module validators raise "context: message"; the scenario diagnostics
// replace the context with the field's JSON pointer.
std::string strip_context(const char* what) {
    std::string s = what == nullptr ? "" : what;
    const auto pos = s.find(": ");
    return pos == std::string::npos ? s : s.substr(pos + 2);
}

struct Diags {
    std::vector<std::string> list;

    void add(const std::string& ptr, const std::string& msg) {
        list.push_back(ptr + ": " + msg);
    }
};

bool parse_int_key(const std::string& key, std::int64_t& out) {
    const char* first = key.data();
    const char* last = first + key.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

void reject_unknown_fields(const json& j, const std::string& ptr,
                           const std::set<std::string>& allowed, Diags& d) {
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) {
            d.add(ptr + "/" + item.key(), "unknown field");
        }
    }
}

// {"<state>": probability, ...} with base-10 integer keys.
std::optional<std::map<std::int64_t, double>> parse_pmf(
    const json& j, const std::string& ptr, Diags& d) {
    if (!j.is_object() || j.empty()) {
        d.add(ptr,
              "must be a non-empty object mapping integer states to "
              "probabilities");
        return std::nullopt;
    }
    std::map<std::int64_t, double> pmf;
    bool ok = true;
    for (const auto& item : j.items()) {
        std::int64_t state = 0;
        if (!parse_int_key(item.key(), state)) {
            d.add(ptr, "key \"" + item.key() + "\" must be a base-10 integer");
            ok = false;
            continue;
        }
        if (!item.value().is_number()) {
            d.add(ptr + "/" + item.key(), "must be a number");
            ok = false;
            continue;
        }
        if (!pmf.emplace(state, item.value().get<double>()).second) {
            d.add(ptr, "state " + std::to_string(state) + " appears twice");
            ok = false;
        }
    }
    if (!ok) {
        return std::nullopt;
    }
    return pmf;
}

std::optional<processes::SymmetricDist> parse_dist(const json& j,
                                                   const std::string& ptr,
                                                   Diags& d) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        d.add(ptr, "must be an object with a \"kind\" field");
        return std::nullopt;
    }
    bool ok = true;
    const auto need_number = [&](const char* field) {
        const std::string fptr = ptr + "/" + field;
        if (!j.contains(field)) {
            d.add(fptr, "required field is missing");
            ok = false;
            return 0.0;
        }
        if (!j[field].is_number()) {
            d.add(fptr, "must be a number");
            ok = false;
            return 0.0;
        }
        return j[field].get<double>();
    };
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "two_point") {
        reject_unknown_fields(j, ptr, {"kind", "v"}, d);
        const double v = need_number("v");
        if (!ok) {
            return std::nullopt;
        }
        return processes::SymmetricDist::two_point(v);
    }
    if (kind == "uniform") {
        reject_unknown_fields(j, ptr, {"kind", "v"}, d);
        const double v = need_number("v");
        if (!ok) {
            return std::nullopt;
        }
        return processes::SymmetricDist::uniform(v);
    }
    if (kind == "normal") {
        reject_unknown_fields(j, ptr, {"kind", "sigma"}, d);
        const double sigma = need_number("sigma");
        if (!ok) {
            return std::nullopt;
        }
        return processes::SymmetricDist::normal(sigma);
    }
    if (kind == "lattice_pmf") {
        reject_unknown_fields(j, ptr, {"kind", "s", "pmf"}, d);
        const double s = need_number("s");
        if (!j.contains("pmf")) {
            d.add(ptr + "/pmf", "required field is missing");
            return std::nullopt;
        }
        auto pmf = parse_pmf(j["pmf"], ptr + "/pmf", d);
        if (!ok || !pmf.has_value()) {
            return std::nullopt;
        }
        return processes::SymmetricDist::lattice_pmf(s, std::move(*pmf));
    }
    d.add(ptr + "/kind",
          "must be one of \"two_point\", \"uniform\", \"normal\", "
          "\"lattice_pmf\"");
    return std::nullopt;
}

std::optional<std::map<std::int64_t,
                       std::vector<std::pair<std::int64_t, double>>>>
parse_transitions(const json& j, const std::string& ptr, Diags& d) {
    if (!j.is_object()) {
        d.add(ptr,
              "must be an object mapping integer states to transition rows");
        return std::nullopt;
    }
    std::map<std::int64_t, std::vector<std::pair<std::int64_t, double>>> rows;
    bool ok = true;
    for (const auto& item : j.items()) {
        std::int64_t state = 0;
        if (!parse_int_key(item.key(), state)) {
            d.add(ptr, "key \"" + item.key() + "\" must be a base-10 integer");
            ok = false;
            continue;
        }
        const std::string rptr = ptr + "/" + item.key();
        const json& rj = item.value();
        if (!rj.is_array() || rj.empty()) {
            d.add(rptr,
                  "must be a non-empty array of [destination, probability] "
                  "pairs");
            ok = false;
            continue;
        }
        std::vector<std::pair<std::int64_t, double>> row;
        row.reserve(rj.size());
        for (std::size_t idx = 0; idx < rj.size(); ++idx) {
            const json& pj = rj[idx];
            const std::string pptr = rptr + "/" + std::to_string(idx);
            if (!pj.is_array() || pj.size() != 2) {
                d.add(pptr, "must be a [destination, probability] pair");
                ok = false;
                continue;
            }
            if (!pj[0].is_number_integer()) {
                d.add(pptr + "/0", "destination must be an integer");
                ok = false;
                continue;
            }
            if (!pj[1].is_number()) {
                d.add(pptr + "/1", "probability must be a number");
                ok = false;
                continue;
            }
            row.emplace_back(pj[0].get<std::int64_t>(), pj[1].get<double>());
        }
        std::stable_sort(row.begin(), row.end(),
                         [](const auto& a, const auto& b) {
                             return a.first < b.first;
                         });
        if (!rows.emplace(state, std::move(row)).second) {
            d.add(ptr, "state " + std::to_string(state) + " appears twice");
            ok = false;
        }
    }
    if (!ok) {
        return std::nullopt;
    }
    return rows;
}

std::optional<processes::ProcessSpec> parse_process(const json& j,
                                                    const std::string& ptr,
                                                    Diags& d) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        d.add(ptr, "must be an object with a \"kind\" field");
        return std::nullopt;
    }
    bool ok = true;
    const auto need_number = [&](const char* field) {
        const std::string fptr = ptr + "/" + field;
        if (!j.contains(field)) {
            d.add(fptr, "required field is missing");
            ok = false;
            return 0.0;
        }
        if (!j[field].is_number()) {
            d.add(fptr, "must be a number");
            ok = false;
            return 0.0;
        }
        return j[field].get<double>();
    };
    const auto need_dist = [&](const char* field) {
        const std::string fptr = ptr + "/" + field;
        std::optional<processes::SymmetricDist> dist;
        if (!j.contains(field)) {
            d.add(fptr, "required field is missing");
            ok = false;
            return dist;
        }
        dist = parse_dist(j[field], fptr, d);
        if (!dist.has_value()) {
            ok = false;
        }
        return dist;
    };
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "ou") {
        reject_unknown_fields(j, ptr, {"kind", "theta", "sigma", "init"}, d);
        processes::OUSpec spec;
        spec.theta = need_number("theta");
        spec.sigma = need_number("sigma");
        auto init = need_dist("init");
        if (!ok) {
            return std::nullopt;
        }
        spec.init = std::move(*init);
        return spec;
    }
    if (kind == "ar1") {
        reject_unknown_fields(j, ptr, {"kind", "theta", "noise", "init"}, d);
        processes::AR1Spec spec;
        spec.theta = need_number("theta");
        auto noise = need_dist("noise");
        auto init = need_dist("init");
        if (!ok) {
            return std::nullopt;
        }
        spec.noise = std::move(*noise);
        spec.init = std::move(*init);
        return spec;
    }
    if (kind == "lattice") {
        reject_unknown_fields(j, ptr, {"kind", "s", "transitions", "init"},
                              d);
        processes::LatticeKernel kernel;
        kernel.s = need_number("s");
        if (!j.contains("transitions")) {
            d.add(ptr + "/transitions", "required field is missing");
            ok = false;
        } else if (auto rows =
                       parse_transitions(j["transitions"],
                                         ptr + "/transitions", d)) {
            kernel.transitions = std::move(*rows);
        } else {
            ok = false;
        }
        if (!j.contains("init")) {
            d.add(ptr + "/init", "required field is missing");
            ok = false;
        } else if (auto pmf = parse_pmf(j["init"], ptr + "/init", d)) {
            kernel.init = processes::SymmetricDist::lattice_pmf(
                ok ? kernel.s : 1.0, std::move(*pmf));
        } else {
            ok = false;
        }
        if (!ok) {
            return std::nullopt;
        }
        return kernel;
    }
    d.add(ptr + "/kind", "must be one of \"ou\", \"ar1\", \"lattice\"");
    return std::nullopt;
}

void parse_fundamentals(const json& root, Scenario& sc, bool n_ok,
                        bool schedule_ok, Diags& d) {
    if (!root.contains("fundamentals")) {
        d.add("/fundamentals", "required field is missing");
        return;
    }
    const json& f = root["fundamentals"];
    const std::size_t points = sc.schedule.times.size();
    if (f.is_number()) {
        if (n_ok && schedule_ok) {
            sc.fundamentals.values.assign(
                sc.n, std::vector<double>(points, f.get<double>()));
        }
        return;
    }
    if (!f.is_array()) {
        d.add("/fundamentals",
              "must be a number, an array of n numbers, or an array of n "
              "arrays");
        return;
    }
    const bool all_numbers =
        std::all_of(f.begin(), f.end(),
                    [](const json& e) { return e.is_number(); });
    const bool all_arrays = std::all_of(
        f.begin(), f.end(), [](const json& e) { return e.is_array(); });
    if (all_numbers && !f.empty()) {
        if (n_ok && f.size() != sc.n) {
            d.add("/fundamentals",
                  "per-stock list must have exactly n entries");
            return;
        }
        if (schedule_ok) {
            for (const json& e : f) {
                sc.fundamentals.values.emplace_back(points, e.get<double>());
            }
        }
        return;
    }
    if (all_arrays && !f.empty()) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::vector<double> row;
            row.reserve(f[i].size());
            bool row_ok = true;
            for (std::size_t k = 0; k < f[i].size(); ++k) {
                if (!f[i][k].is_number()) {
                    d.add("/fundamentals/" + std::to_string(i) + "/" +
                              std::to_string(k),
                          "must be a number");
                    row_ok = false;
                    continue;
                }
                row.push_back(f[i][k].get<double>());
            }
            if (row_ok) {
                sc.fundamentals.values.push_back(std::move(row));
            }
        }
        return;
    }
    d.add("/fundamentals",
          "must be a number, an array of n numbers, or an array of n arrays");
}

std::string join_diags(const std::vector<std::string>& diags) {
    std::string msg = "invalid scenario:";
    for (const auto& diag : diags) {
        msg += "\n  ";
        msg += diag;
    }
    return msg;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> diags)
    : std::runtime_error(join_diags(diags)), diagnostics(std::move(diags)) {}

void validate(const Scenario& scenario) {
    std::vector<std::string> diags;
    if (scenario.n < 2) {
        diags.push_back("/n: must be an integer >= 2");
    }
    bool schedule_ok = true;
    try {
        validate(scenario.schedule);
    } catch (const std::exception& e) {
        schedule_ok = false;
        diags.push_back("/schedule: " + strip_context(e.what()));
    }
    if (scenario.processes.size() != scenario.n) {
        diags.push_back("/processes: must list exactly n process specs (got " +
                        std::to_string(scenario.processes.size()) +
                        ", n = " + std::to_string(scenario.n) + ")");
    }
    for (std::size_t i = 0; i < scenario.processes.size(); ++i) {
        try {
            processes::validate(scenario.processes[i]);
        } catch (const std::exception& e) {
            diags.push_back("/processes/" + std::to_string(i) + ": " +
                            strip_context(e.what()));
        }
    }
    if (schedule_ok) {
        try {
            market::validate(scenario.fundamentals, scenario.n,
                             scenario.schedule.times.size());
        } catch (const std::exception& e) {
            diags.push_back("/fundamentals: " + strip_context(e.what()));
        }
    }
    if (scenario.m1 < 1) {
        diags.push_back("/m1: must be >= 1");
    }
    if (scenario.m2 < scenario.m1) {
        diags.push_back("/m2: must be >= m1");
    }
    if (scenario.n >= 2 &&
        scenario.m2 > static_cast<int>(std::min<std::size_t>(
                          scenario.n, std::size_t{1} << 30))) {
        diags.push_back("/m2: must be <= n");
    }
    if (scenario.mc.paths < 1) {
        diags.push_back("/mc/paths: must be >= 1");
    }
    if (!(scenario.mc.ci_level > 0.0 && scenario.mc.ci_level < 1.0)) {
        diags.push_back("/mc/ci_level: must lie strictly between 0 and 1");
    }
    static const std::set<std::string> known_tags = {"t1",   "t2",   "t4",
                                                     "cor1", "cor2", "cor3",
                                                     "t5"};
    for (std::size_t i = 0; i < scenario.checks.size(); ++i) {
        if (!known_tags.contains(scenario.checks[i])) {
            diags.push_back("/checks/" + std::to_string(i) +
                            ": unknown check tag \"" + scenario.checks[i] +
                            "\" (known: t1, t2, t4, cor1, cor2, cor3, t5)");
        }
    }
    if (!diags.empty()) {
        throw ScenarioError(std::move(diags));
    }
}

Scenario parse_scenario(const std::string& json_text,
                        const std::string& source_name) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError({source_name + ": " + e.what()});
    }
    if (!root.is_object()) {
        throw ScenarioError({source_name + ": top level must be a JSON object"});
    }

    Diags d;
    Scenario sc;
    reject_unknown_fields(root, "",
                          {"n", "schedule", "fundamentals", "processes", "m1",
                           "m2", "engine", "mc", "checks"},
                          d);

    bool n_ok = false;
    if (!root.contains("n")) {
        d.add("/n", "required field is missing");
    } else if (!root["n"].is_number_integer()) {
        d.add("/n", "must be an integer >= 2");
    } else {
        const auto v = root["n"].get<std::int64_t>();
        if (v < 2) {
            d.add("/n", "must be an integer >= 2");
        } else {
            sc.n = static_cast<std::size_t>(v);
            n_ok = true;
        }
    }

    bool schedule_ok = false;
    if (!root.contains("schedule")) {
        d.add("/schedule", "required field is missing");
    } else if (!root["schedule"].is_array()) {
        d.add("/schedule", "must be an array of times");
    } else {
        schedule_ok = true;
        for (std::size_t k = 0; k < root["schedule"].size(); ++k) {
            if (!root["schedule"][k].is_number()) {
                d.add("/schedule/" + std::to_string(k), "must be a number");
                schedule_ok = false;
                continue;
            }
            sc.schedule.times.push_back(root["schedule"][k].get<double>());
        }
    }

    parse_fundamentals(root, sc, n_ok, schedule_ok, d);

    if (!root.contains("processes")) {
        d.add("/processes", "required field is missing");
    } else if (!root["processes"].is_array()) {
        d.add("/processes", "must be an array of process specs");
    } else {
        for (std::size_t i = 0; i < root["processes"].size(); ++i) {
            auto spec = parse_process(root["processes"][i],
                                      "/processes/" + std::to_string(i), d);
            if (spec.has_value()) {
                sc.processes.push_back(std::move(*spec));
            }
        }
    }

    const auto parse_index = [&](const char* field, int& out) {
        if (!root.contains(field)) {
            return;
        }
        if (!root[field].is_number_integer()) {
            d.add(std::string("/") + field, "must be an integer");
            return;
        }
        const auto v = root[field].get<std::int64_t>();
        out = v < -1000000 ? -1000000
                           : v > 1000000 ? 1000000 : static_cast<int>(v);
    };
    parse_index("m1", sc.m1);
    parse_index("m2", sc.m2);

    if (root.contains("engine")) {
        const json& e = root["engine"];
        const std::string v = e.is_string() ? e.get<std::string>() : "";
        if (v == "exact") {
            sc.engine = EngineKind::Exact;
        } else if (v == "mc") {
            sc.engine = EngineKind::Mc;
        } else if (v == "auto") {
            sc.engine = EngineKind::Auto;
        } else {
            d.add("/engine", "must be one of \"exact\", \"mc\", \"auto\"");
        }
    }

    if (root.contains("mc")) {
        const json& m = root["mc"];
        if (!m.is_object()) {
            d.add("/mc", "must be an object");
        } else {
            reject_unknown_fields(m, "/mc",
                                  {"paths", "master_seed", "ci_level"}, d);
            if (m.contains("paths")) {
                if (!m["paths"].is_number_integer() ||
                    m["paths"].get<std::int64_t>() < 0) {
                    d.add("/mc/paths", "must be an integer >= 1");
                } else {
                    sc.mc.paths = m["paths"].get<std::uint64_t>();
                }
            }
            if (m.contains("master_seed")) {
                if (!m["master_seed"].is_number_integer() ||
                    m["master_seed"].get<std::int64_t>() < 0) {
                    d.add("/mc/master_seed",
                          "must be a non-negative integer");
                } else {
                    sc.mc.master_seed = m["master_seed"].get<std::uint64_t>();
                }
            }
            if (m.contains("ci_level")) {
                if (!m["ci_level"].is_number()) {
                    d.add("/mc/ci_level", "must be a number");
                } else {
                    sc.mc.ci_level = m["ci_level"].get<double>();
                }
            }
        }
    }

    if (root.contains("checks")) {
        const json& c = root["checks"];
        if (!c.is_array()) {
            d.add("/checks", "must be an array of check tags");
        } else {
            for (std::size_t i = 0; i < c.size(); ++i) {
                if (!c[i].is_string()) {
                    d.add("/checks/" + std::to_string(i),
                          "must be a string");
                    continue;
                }
                sc.checks.push_back(c[i].get<std::string>());
            }
        }
    }

    if (!d.list.empty()) {
        throw ScenarioError(std::move(d.list));
    }
    validate(sc);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError({path + ": cannot open scenario file"});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

Scenario make_counterexample_scenario(double s,
                                      std::optional<double> m_up_override,
                                      std::optional<double> a_override) {
    const analytics::CounterexampleSpec base =
        analytics::build_counterexample(s);
    double m_up = base.m_up;
    double a = base.a;
    if (m_up_override.has_value()) {
        m_up = *m_up_override;
        if (!(m_up >= 0.0 && m_up <= 1.0)) {
            throw std::invalid_argument(
                "counterexample scenario: m_up must lie in [0, 1]");
        }
    }
    if (a_override.has_value()) {
        a = *a_override;
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument(
                "counterexample scenario: a must be strictly positive and "
                "finite");
        }
    }
    const double m_down = 1.0 - m_up;

    processes::LatticeKernel stock1;
    stock1.s = s;
    stock1.transitions[1] = {{0, m_down}, {2, m_up}};
    stock1.transitions[-1] = {{-2, m_up}, {0, m_down}};
    stock1.init =
        processes::SymmetricDist::lattice_pmf(s, {{-1, 0.5}, {1, 0.5}});

    processes::LatticeKernel stock2;
    stock2.s = 1.0;
    stock2.transitions[0] = {{0, 1.0}};
    stock2.init = processes::SymmetricDist::lattice_pmf(1.0, {{0, 1.0}});

    Scenario sc;
    sc.n = 2;
    sc.schedule.times = {0.0, 1.0};
    sc.fundamentals.values = {{1.0, 1.0}, {a, a}};
    sc.processes = {std::move(stock1), std::move(stock2)};
    sc.m1 = 1;
    sc.m2 = 2;
    sc.engine = EngineKind::Exact;
    sc.checks = {"t5"};
    validate(sc);
    return sc;
}

}  // namespace fundsim
