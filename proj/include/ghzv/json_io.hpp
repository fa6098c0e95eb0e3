// JSON serialization of the external interfaces: state specifications,
// sampling plans, strategies, sources, run summaries, and the JSONL trial
// log. Complex numbers travel as [re, im] pairs; a strategy round-trips
// through its plans, with effects rebuilt by the analytic branch sum.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ghzv/errors.hpp"
#include "ghzv/simulator.hpp"

namespace ghzv {

using nlohmann::json;

// --- complex vectors and matrices ---------------------------------------------

inline json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw InvalidSpec("json: complex entries are [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json ket_to_json(const std::vector<cplx>& v) {
    json out = json::array();
    for (const auto& z : v) out.push_back(complex_to_json(z));
    return out;
}

inline std::vector<cplx> ket_from_json(const json& j) {
    std::vector<cplx> out;
    for (const auto& e : j) out.push_back(complex_from_json(e));
    return out;
}

inline json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
    const int dim = static_cast<int>(j.size());
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i) {
        if (static_cast<int>(j[static_cast<std::size_t>(i)].size()) != dim)
            throw InvalidSpec("json: matrix rows must be square");
        for (int c = 0; c < dim; ++c)
            m(i, c) = complex_from_json(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
    }
    return m;
}

// --- states ---------------------------------------------------------------------

inline json state_to_json(const StateVector& psi) {
    return json{{"type", "pure"},
                {"n", psi.parties},
                {"d", psi.local_dim},
                {"amplitudes", ket_to_json(psi.amplitudes)}};
}

// Accepts {"type":"ghz","n":..,"d":..}, {"type":"ghz_like","n":..,"lambdas":[..]}
// and {"type":"pure","n":..,"d":..,"amplitudes":[..]}.
inline StateVector state_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "ghz") return ghz_state(j.at("n").get<int>(), j.at("d").get<int>());
    if (type == "ghz_like") {
        const GhzLikeSpec spec(j.at("lambdas").get<std::vector<double>>());
        return ghz_like_state(spec, j.at("n").get<int>());
    }
    if (type == "pure")
        return StateVector(j.at("d").get<int>(), j.at("n").get<int>(),
                           ket_from_json(j.at("amplitudes")));
    throw InvalidSpec("json: unknown state type '" + type + "'");
}

// --- sampling plans ---------------------------------------------------------------

inline std::string pass_rule_name(PassRule rule) {
    switch (rule) {
        case PassRule::always: return "always";
        case PassRule::all_equal: return "all_equal";
        case PassRule::parity: return "parity";
        case PassRule::residue: return "residue";
        case PassRule::outcome_set: return "outcome_set";
        case PassRule::adaptive_ket: return "adaptive_ket";
        case PassRule::prob_coeff: return "prob_coeff";
    }
    throw Error("pass_rule_name: unknown rule");
}

inline PassRule pass_rule_from_name(const std::string& name) {
    if (name == "always") return PassRule::always;
    if (name == "all_equal") return PassRule::all_equal;
    if (name == "parity") return PassRule::parity;
    if (name == "residue") return PassRule::residue;
    if (name == "outcome_set") return PassRule::outcome_set;
    if (name == "adaptive_ket") return PassRule::adaptive_ket;
    if (name == "prob_coeff") return PassRule::prob_coeff;
    throw InvalidSpec("json: unknown pass rule '" + name + "'");
}

inline json plan_to_json(const SamplingPlan& plan) {
    json stages = json::array();
    for (std::size_t s = 0; s < plan.measured.size(); ++s)
        stages.push_back(json{{"party", plan.measured[s]},
                              {"basis", matrix_to_json(plan.bases[s])}});
    json rule{{"kind", pass_rule_name(plan.rule)}};
    switch (plan.rule) {
        case PassRule::parity:
            rule["parity_target"] = plan.parity_target;
            break;
        case PassRule::residue:
            rule["modulus"] = plan.modulus;
            break;
        case PassRule::outcome_set:
            rule["accepted"] = plan.accepted;
            break;
        case PassRule::prob_coeff:
            rule["pass_coeff"] = plan.pass_coeff;
            break;
        default:
            break;
    }
    json out{{"parties", plan.parties},
             {"local_dim", plan.local_dim},
             {"stages", std::move(stages)},
             {"pass_rule", std::move(rule)}};
    if (plan.rule == PassRule::adaptive_ket) {
        json kets = json::array();
        for (const auto& k : plan.adaptive_kets) kets.push_back(ket_to_json(k));
        out["adaptive"] = json{{"party", plan.adaptive_party}, {"kets", std::move(kets)}};
    }
    return out;
}

inline SamplingPlan plan_from_json(const json& j) {
    SamplingPlan plan;
    plan.parties = j.at("parties").get<int>();
    plan.local_dim = j.at("local_dim").get<int>();
    for (const auto& stage : j.at("stages")) {
        plan.measured.push_back(stage.at("party").get<int>());
        plan.bases.push_back(matrix_from_json(stage.at("basis")));
    }
    const auto& rule = j.at("pass_rule");
    plan.rule = pass_rule_from_name(rule.at("kind").get<std::string>());
    switch (plan.rule) {
        case PassRule::parity:
            plan.parity_target = rule.at("parity_target").get<int>();
            break;
        case PassRule::residue:
            plan.modulus = rule.at("modulus").get<int>();
            break;
        case PassRule::outcome_set:
            plan.accepted = rule.at("accepted").get<std::vector<std::int64_t>>();
            break;
        case PassRule::prob_coeff:
            plan.pass_coeff = rule.at("pass_coeff").get<std::vector<double>>();
            break;
        case PassRule::adaptive_ket: {
            const auto& adaptive = j.at("adaptive");
            plan.adaptive_party = adaptive.at("party").get<int>();
            for (const auto& k : adaptive.at("kets"))
                plan.adaptive_kets.push_back(ket_from_json(k));
            break;
        }
        default:
            break;
    }
    return plan;
}

inline json test_to_json(const TestOperator& t) {
    return json{{"label", t.label}, {"plan", plan_to_json(t.plan)}};
}

// The effect matrix is rebuilt from the plan by the analytic branch sum.
inline TestOperator test_from_json(const json& j) {
    TestOperator t;
    t.label = j.at("label").get<std::string>();
    t.plan = plan_from_json(j.at("plan"));
    t.matrix = analytic_effect(t.plan);
    return t;
}

// --- strategies -------------------------------------------------------------------

inline json strategy_to_json(const Strategy& s) {
    json tests = json::array();
    for (const auto& wt : s.tests) {
        json entry{{"p", wt.p}, {"plan", plan_to_json(wt.test.plan)},
                   {"label", wt.test.label}};
        if (wt.exact) entry["p_exact"] = json{{"num", wt.exact->num}, {"den", wt.exact->den}};
        tests.push_back(std::move(entry));
    }
    return json{{"name", s.name},
                {"params", s.params},
                {"target", state_to_json(s.target)},
                {"tests", std::move(tests)}};
}

inline Strategy strategy_from_json(const json& j) {
    std::vector<WeightedTest> tests;
    for (const auto& entry : j.at("tests")) {
        WeightedTest wt;
        wt.p = entry.at("p").get<double>();
        if (entry.contains("p_exact"))
            wt.exact = Fraction(entry["p_exact"].at("num").get<std::int64_t>(),
                                entry["p_exact"].at("den").get<std::int64_t>());
        wt.test.label = entry.value("label", std::string{});
        wt.test.plan = plan_from_json(entry.at("plan"));
        wt.test.matrix = analytic_effect(wt.test.plan);
        tests.push_back(std::move(wt));
    }
    return make_strategy(j.at("name").get<std::string>(), state_from_json(j.at("target")),
                         std::move(tests),
                         j.value("params", std::map<std::string, double>{}));
}

// --- sources ----------------------------------------------------------------------

// {"type":"target"} | {"type":"depolarized","w":..} | state json |
// {"type":"density","matrix":[[..]]} | {"type":"per_trial","schedule":[..]}
inline Source source_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "target") return Source::target();
    if (type == "depolarized") return Source::depolarized(j.at("w").get<double>());
    if (type == "density") return Source::density(DensityMatrix(matrix_from_json(j.at("matrix"))));
    if (type == "per_trial") {
        std::vector<Source> schedule;
        for (const auto& entry : j.at("schedule")) schedule.push_back(source_from_json(entry));
        return Source::per_trial(std::move(schedule));
    }
    return Source::pure(state_from_json(j));
}

// --- run records ------------------------------------------------------------------

inline json trial_record_to_json(const TrialRecord& r) {
    return json{{"trial", r.trial},
                {"test", r.test_index},
                {"outcomes", r.outcomes},
                {"passed", r.passed},
                {"substream", r.substream}};
}

inline json run_summary_to_json(const RunSummary& s) {
    json out{{"trials", s.trials},   {"passes", s.passes},
             {"pass_rate", s.pass_rate}, {"accepted", s.accepted},
             {"seed", s.seed},       {"homogeneous", s.homogeneous}};
    if (s.homogeneous)
        out["fidelity"] = json{{"estimate", s.fidelity_estimate}, {"std", s.fidelity_std}};
    return out;
}

}  // namespace ghzv
