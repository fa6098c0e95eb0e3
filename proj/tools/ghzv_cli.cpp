// Command-line front end: build strategies, report spectral data, compute
// sample counts, run seeded simulations, and emit table/figure data. Every
// number printed here comes from a library call; the CLI only parses flags
// and formats output.
//
// Exit codes: 0 success, 1 usage error, 2 numerical/validation failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ghzv/analysis.hpp"
#include "ghzv/json_io.hpp"
#include "ghzv/simulator.hpp"
#include "ghzv/strategies.hpp"

namespace {

using namespace ghzv;

struct StrategyFlags {
    std::string name;
    int n = 3;
    int d = 2;
    int m = 0;
    std::optional<double> p;
    std::optional<double> beta;
    std::string lambdas;  // comma-separated
};

std::vector<double> parse_lambdas(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.size() < 2) throw InvalidSpec("--lambdas needs at least two comma-separated values");
    // Tolerate truncated decimals: renormalize when close, reject otherwise.
    double sum2 = 0.0;
    for (double l : out) sum2 += l * l;
    if (std::abs(sum2 - 1.0) > 1e-3)
        throw InvalidSpec("--lambdas squared values must sum to 1 (got " + std::to_string(sum2) +
                          ")");
    for (double& l : out) l /= std::sqrt(sum2);
    return out;
}

GhzLikeSpec spec_from_flags(const StrategyFlags& f) {
    if (!f.lambdas.empty()) return GhzLikeSpec(parse_lambdas(f.lambdas));
    return GhzLikeSpec::uniform(f.d);
}

Strategy strategy_from_flags(const StrategyFlags& f) {
    if (f.name == "omega1") return build_omega_I(f.n);
    if (f.name == "omega2") return build_omega_II(f.n, f.d);
    if (f.name == "omega3") return build_omega_III(f.n, f.d, f.m);
    if (f.name == "omega4") return build_omega_IV(spec_from_flags(f), f.n, f.p.value_or(0.5));
    if (f.name == "omega5") return build_omega_V(spec_from_flags(f), f.n, f.m, f.p);
    if (f.name == "omega5prime") return build_omega_V_prime(spec_from_flags(f), f.n, f.p);
    if (f.name == "omega6") return build_omega_VI(spec_from_flags(f), f.n, f.p);
    if (f.name == "omega7") {
        if (!f.beta) throw InvalidSpec("omega7 needs --beta");
        return build_omega_VII(f.n, f.d, *f.beta);
    }
    if (f.name == "omega8") return build_omega_VIII(spec_from_flags(f), f.n, f.p, f.m);
    if (f.name == "omega9") return build_omega_IX(spec_from_flags(f), f.n, f.p);
    throw InvalidSpec("unknown strategy '" + f.name + "'");
}

void add_strategy_flags(CLI::App* cmd, StrategyFlags& f) {
    cmd->add_option("--strategy", f.name,
                    "one of omega1..omega9, omega5prime")
        ->required()
        ->check(CLI::IsMember({"omega1", "omega2", "omega3", "omega4", "omega5", "omega5prime",
                               "omega6", "omega7", "omega8", "omega9"}));
    cmd->add_option("--n", f.n, "number of parties")->check(CLI::Range(2, 16));
    cmd->add_option("--d", f.d, "local dimension")->check(CLI::Range(2, 64));
    cmd->add_option("--m", f.m, "number of phase-shifted bases (0 = minimal)");
    cmd->add_option_function<double>(
        "--p", [&f](const double& v) { f.p = v; },
        "standard-test probability (default: optimal)");
    cmd->add_option_function<double>(
        "--beta", [&f](const double& v) { f.beta = v; },
        "target second eigenvalue (omega7)");
    cmd->add_option("--lambdas", f.lambdas, "comma-separated coefficients of the target");
}

Source source_from_string(const std::string& text) {
    if (text == "target") return Source::target();
    if (text.rfind("depolarized:", 0) == 0)
        return Source::depolarized(std::stod(text.substr(12)));
    if (text.rfind("file:", 0) == 0) {
        std::ifstream in(text.substr(5));
        if (!in) throw InvalidSpec("cannot open source file '" + text.substr(5) + "'");
        json j;
        in >> j;
        return source_from_json(j);
    }
    throw InvalidSpec("unknown source '" + text + "' (target | depolarized:w | file:path)");
}

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open output file '" + out_path + "'");
    out << content;
}

// --- the check subcommand: the closed-form identity suite ---------------------

struct CheckReport {
    int passed = 0;
    int failed = 0;
    json results = json::array();

    void record(const std::string& name, bool ok, const std::string& detail = {}) {
        ok ? ++passed : ++failed;
        results.push_back(json{{"check", name}, {"pass", ok}, {"detail", detail}});
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << '\n';
    }
};

ComplexMatrix ghz_exchange_operator(int d, int n) {
    auto out = ComplexMatrix::identity(static_cast<int>(checked_power(d, n, "check")));
    for (int j = 0; j < d; ++j)
        for (int jp = 0; jp < d; ++jp) {
            if (j == jp) continue;
            std::vector<cplx> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
            a[static_cast<std::size_t>(jp)] = 1.0;
            b[static_cast<std::size_t>(j)] = 1.0;
            const auto hop = ComplexMatrix::outer(a, b);
            ComplexMatrix term = ComplexMatrix::identity(1);
            for (int k = 0; k < n; ++k) term = kron(term, hop);
            out += term;
        }
    return out;
}

int run_check(bool as_json) {
    CheckReport report;

    for (int n = 2; n <= 6; ++n) {
        const auto s = build_omega_I(n);
        const auto sd = spectral_data(s);
        report.record("omega1 homogeneous, nu = 2/3, n = " + std::to_string(n),
                      is_homogeneous(s) && std::abs(sd.nu - 2.0 / 3.0) < 1e-9);
    }
    for (auto [d, n] : {std::pair{3, 2}, {3, 3}, {5, 2}, {7, 2}}) {
        const auto s = build_omega_II(n, d);
        const auto sd = spectral_data(s);
        report.record("omega2 homogeneous, nu = d/(d+1), d = " + std::to_string(d) +
                          ", n = " + std::to_string(n),
                      is_homogeneous(s) &&
                          std::abs(sd.nu - static_cast<double>(d) / (d + 1)) < 1e-9);
    }
    for (auto [d, m, n] : {std::tuple{3, 3, 2}, {3, 3, 3}, {4, 7, 2}}) {
        const auto s = build_omega_III(n, d, m);
        const auto sd = spectral_data(s);
        report.record("omega3 homogeneous, d = " + std::to_string(d) + ", m = " +
                          std::to_string(m) + ", n = " + std::to_string(n),
                      is_homogeneous(s) &&
                          std::abs(sd.nu - static_cast<double>(d) / (d + 1)) < 1e-9);
    }

    for (int n = 2; n <= 5; ++n) {
        ComplexMatrix sum(1 << n);
        for (const auto& t : xy_family(n)) sum += t.matrix;
        ComplexMatrix want(1 << n);
        want = ComplexMatrix::identity(1 << n);
        std::vector<cplx> zero(static_cast<std::size_t>(1) << n), one(zero);
        zero[0] = 1.0;
        one[(1u << n) - 1] = 1.0;
        want += ComplexMatrix::outer(zero, one);
        want += ComplexMatrix::outer(one, zero);
        want *= cplx{std::pow(2.0, n - 2), 0.0};
        report.record("X/Y projector sum identity, n = " + std::to_string(n),
                      sum.max_abs_diff(want) < 1e-10);
    }
    for (auto [d, n] : {std::pair{3, 2}, {3, 3}, {5, 2}, {5, 3}}) {
        ComplexMatrix sum(static_cast<int>(checked_power(d, n, "check")));
        for (const auto& t : pauli_r_family(n, d)) sum += t.matrix;
        auto want = ghz_exchange_operator(d, n);
        want *= cplx{std::pow(static_cast<double>(d), n - 2), 0.0};
        report.record("Pauli residue sum identity, d = " + std::to_string(d) +
                          ", n = " + std::to_string(n),
                      sum.max_abs_diff(want) < 1e-10);
    }
    for (auto [d, m, n] : {std::tuple{3, 3, 2}, {3, 3, 3}, {4, 7, 2}, {4, 7, 3}}) {
        ComplexMatrix sum(static_cast<int>(checked_power(d, n, "check")));
        for (const auto& t : design_h_family(n, d, m)) sum += t.matrix;
        auto want = ghz_exchange_operator(d, n);
        want *= cplx{std::pow(static_cast<double>(m), n - 1) / d, 0.0};
        report.record("design string sum identity, d = " + std::to_string(d) + ", m = " +
                          std::to_string(m) + ", n = " + std::to_string(n),
                      sum.max_abs_diff(want) < 1e-10);
    }

    {
        bool ok = true;
        for (int d = 3; d <= 13 && ok; ++d)
            for (int l = 1; l <= d - 1 && ok; ++l)
                if (!gm_injectivity(d, min_design_m(d), l)) ok = false;
        report.record("residue map injective for d = 3..13 at minimal m", ok);
        report.record("Pauli residue map fails at composite d = 9, l = 3",
                      !pauli_residue_injective(9, 3));
    }

    {
        const auto n2 = enumerate_admissible_qubit(2).size();
        const auto n3 = enumerate_admissible_qubit(3).size();
        const auto n4 = enumerate_admissible_qubit(4).size();
        report.record("admissible qubit test counts 3/5/9 for n = 2/3/4",
                      n2 == 3 && n3 == 5 && n4 == 9,
                      std::to_string(n2) + "/" + std::to_string(n3) + "/" + std::to_string(n4));
        const auto q = enumerate_admissible_qudit(2, 3).size();
        report.record("admissible qudit test count 4 for d = 3, n = 2", q == 4,
                      std::to_string(q));
        const auto tests = enumerate_admissible_qubit(3);
        ComplexMatrix gram(static_cast<int>(tests.size()));
        for (std::size_t i = 0; i < tests.size(); ++i)
            for (std::size_t j = 0; j < tests.size(); ++j)
                gram(static_cast<int>(i), static_cast<int>(j)) =
                    (tests[i].matrix.dagger() * tests[j].matrix).trace();
        report.record("admissible qubit projectors linearly independent",
                      hermitian_eig(gram).eigenvalues.back() > 1e-6);
    }

    for (auto [d, m] : {std::pair{3, 3}, {4, 7}}) {
        const auto set = design_basis(d, m);
        auto want = symmetric_projector(d);
        want *= cplx{2.0 / (d * (d + 1.0)), 0.0};
        report.record("weighted bases form a 2-design, d = " + std::to_string(d),
                      two_design_moment(set).max_abs_diff(want) < 1e-9);
    }

    std::cout << report.passed << " passed, " << report.failed << " failed\n";
    if (as_json)
        std::cout << json{{"passed", report.passed},
                          {"failed", report.failed},
                          {"results", report.results}}
                         .dump(2)
                  << '\n';
    return report.failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification strategies for GHZ and GHZ-like states"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output");

    if (const char* cap = std::getenv("GHZV_DIM_CAP")) set_dim_cap(std::atoll(cap));

    StrategyFlags build_flags, gap_flags, sim_flags, est_flags;
    std::string out_path, source_text = "target";
    long long trials = 10000;
    std::uint64_t seed = 0;
    double eps = 0.01, delta = 0.01, nu = 0.5;
    int gme_d = 2, fig_points = 60, fig_dmax = 200, table_n = 3, table_d = 2;
    std::string gme_kind = "optimal";

    auto* build = app.add_subcommand("build", "construct a strategy and emit its JSON");
    add_strategy_flags(build, build_flags);
    build->add_option("--out", out_path, "output file (default stdout)");

    auto* gap = app.add_subcommand("gap", "spectral data of a strategy");
    add_strategy_flags(gap, gap_flags);

    auto* ntests = app.add_subcommand("ntests", "tests needed for given eps, delta, nu");
    ntests->add_option("--eps", eps, "infidelity threshold")->required();
    ntests->add_option("--delta", delta, "significance level")->required();
    auto* nu_opt = ntests->add_option("--nu", nu, "spectral gap (nonadversarial count)");
    double adv_beta = 0.0;
    auto* beta_opt =
        ntests->add_option("--beta", adv_beta, "second eigenvalue (adversarial count)");
    nu_opt->excludes(beta_opt);

    auto* gme = app.add_subcommand("gme", "tests needed to certify genuine entanglement");
    gme->add_option("--d", gme_d, "local dimension")->required();
    gme->add_option("--delta", delta, "significance level")->required();
    gme->add_option("--kind", gme_kind, "optimal | plm | zh")
        ->check(CLI::IsMember({"optimal", "plm", "zh"}));

    auto* simulate = app.add_subcommand("simulate", "run seeded trials of a strategy");
    add_strategy_flags(simulate, sim_flags);
    simulate->add_option("--trials", trials, "number of trials");
    simulate->add_option("--seed", seed, "random seed");
    simulate->add_option("--source", source_text, "target | depolarized:w | file:path");
    simulate->add_option("--out", out_path, "JSONL trial log path");

    auto* estimate = app.add_subcommand("estimate", "estimate fidelity from seeded trials");
    add_strategy_flags(estimate, est_flags);
    estimate->add_option("--trials", trials, "number of trials");
    estimate->add_option("--seed", seed, "random seed");
    estimate->add_option("--source", source_text, "target | depolarized:w | file:path");

    auto* table1 = app.add_subcommand("table1", "emit the strategy comparison CSV");
    table1->add_option("--n", table_n, "number of parties");
    table1->add_option("--d", table_d, "local dimension");
    table1->add_option("--eps", eps, "infidelity threshold");
    table1->add_option("--delta", delta, "significance level");
    table1->add_option("--out", out_path, "output file (default stdout)");

    auto* figdata = app.add_subcommand("figdata", "emit fig1.csv and fig2.csv");
    figdata->add_option("--out", out_path, "output directory (default .)");
    figdata->add_option("--n", table_n, "parties for the n-dependent curves");
    figdata->add_option("--eps", eps, "infidelity threshold");
    figdata->add_option("--delta", delta, "significance level");
    figdata->add_option("--points", fig_points, "theta grid points");
    figdata->add_option("--dmax", fig_dmax, "largest dimension for fig1");

    auto* check = app.add_subcommand("check", "run the closed-form identity suite");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::cout.precision(10);
    try {
        if (build->parsed()) {
            const auto s = strategy_from_flags(build_flags);
            write_or_print(out_path, strategy_to_json(s).dump(2) + "\n");
        } else if (gap->parsed()) {
            const auto s = strategy_from_flags(gap_flags);
            const auto sd = spectral_data(s);
            const bool hom = is_homogeneous(s);
            if (as_json) {
                std::cout << json{{"strategy", s.name},
                                  {"params", s.params},
                                  {"nu", sd.nu},
                                  {"beta", sd.beta},
                                  {"tau", sd.tau},
                                  {"homogeneous", hom},
                                  {"tests", s.tests.size()}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << "strategy = " << s.name << "\nnu = " << sd.nu
                          << "\nbeta = " << sd.beta << "\ntau = " << sd.tau
                          << "\nhomogeneous = " << (hom ? "true" : "false")
                          << "\ntests = " << s.tests.size() << '\n';
            }
        } else if (ntests->parsed()) {
            if (beta_opt->count() > 0) {
                const long long n = adversarial_num_tests(adv_beta, eps, delta);
                if (as_json)
                    std::cout << json{{"N", n}, {"adversarial", true},
                                      {"approximation", "high-precision"}}
                                     .dump()
                              << '\n';
                else
                    std::cout << "N = " << n
                              << " (adversarial, high-precision approximation)\n";
            } else {
                if (nu_opt->count() == 0) throw InvalidSpec("ntests needs --nu or --beta");
                const long long n = num_tests(eps, delta, nu);
                const bool degenerate = nu * eps >= 1.0;
                if (as_json)
                    std::cout << json{{"N", n}, {"degenerate", degenerate}}.dump() << '\n';
                else {
                    std::cout << "N = " << n << '\n';
                    if (degenerate) std::cout << "note: nu * eps >= 1, a single test decides\n";
                }
            }
        } else if (gme->parsed()) {
            long long n_e = 0;
            if (gme_kind == "optimal") n_e = gme_tests_optimal(gme_d, delta);
            else if (gme_kind == "plm") n_e = gme_tests_plm(delta, table_n);
            else n_e = gme_tests_zh(delta, gme_d);
            const bool single_std = gme_single_test_region(gme_d, delta, false);
            const bool single_adv = gme_single_test_region(gme_d, delta, true);
            if (as_json)
                std::cout << json{{"kind", gme_kind},
                                  {"N_E", n_e},
                                  {"single_test_nonadversarial", single_std},
                                  {"single_test_adversarial", single_adv}}
                                 .dump()
                          << '\n';
            else
                std::cout << "N_E = " << n_e << " (" << gme_kind << ")\n"
                          << "single test possible: nonadversarial = "
                          << (single_std ? "yes" : "no")
                          << ", adversarial = " << (single_adv ? "yes" : "no") << '\n';
        } else if (simulate->parsed()) {
            const auto s = strategy_from_flags(sim_flags);
            const auto source = source_from_string(source_text);
            std::ofstream log;
            TrialSink sink = nullptr;
            if (!out_path.empty()) {
                log.open(out_path);
                if (!log) throw Error("cannot open trial log '" + out_path + "'");
                sink = [&log](const TrialRecord& r) {
                    log << trial_record_to_json(r).dump() << '\n';
                };
            }
            const auto summary = run(s, source, trials, seed, sink);
            if (as_json)
                std::cout << run_summary_to_json(summary).dump(2) << '\n';
            else {
                std::cout << "trials = " << summary.trials << "\npasses = " << summary.passes
                          << "\npass_rate = " << summary.pass_rate << "\ndecision = "
                          << (summary.accepted ? "accept" : "reject")
                          << "\nseed = " << summary.seed << '\n';
                if (summary.homogeneous)
                    std::cout << "fidelity = " << summary.fidelity_estimate << " +/- "
                              << summary.fidelity_std << '\n';
            }
        } else if (estimate->parsed()) {
            const auto s = strategy_from_flags(est_flags);
            const auto source = source_from_string(source_text);
            const auto [f, df] = estimate_fidelity_run(s, source, trials, seed);
            if (as_json)
                std::cout << json{{"fidelity", f}, {"std", df}, {"trials", trials},
                                  {"seed", seed}}
                                 .dump()
                          << '\n';
            else
                std::cout << "fidelity = " << f << " +/- " << df << '\n';
        } else if (table1->parsed()) {
            std::ostringstream csv;
            write_table1_csv(csv, table_n, table_d, eps, delta);
            write_or_print(out_path, csv.str());
        } else if (figdata->parsed()) {
            const std::filesystem::path dir = out_path.empty() ? "." : out_path;
            std::filesystem::create_directories(dir);
            std::ofstream f1(dir / "fig1.csv");
            std::ofstream f2(dir / "fig2.csv");
            if (!f1 || !f2) throw Error("cannot open figure CSVs under " + dir.string());
            write_fig1_csv(f1, fig_dmax);
            write_fig2_csv(f2, table_n, eps, delta, fig_points);
            std::cout << "wrote " << (dir / "fig1.csv").string() << " and "
                      << (dir / "fig2.csv").string() << '\n';
        } else if (check->parsed()) {
            return run_check(as_json);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
