// Seeded Monte-Carlo execution of verification strategies. Per trial the
// simulator samples a source state, samples a test by its probability, then
// samples local measurement outcomes stage by stage using exact conditional
// Born probabilities (including the adaptive last stage of one-way tests and
// the probabilistic pass rule of the standard-basis tests).
//
// Randomness comes from counter-based substreams keyed by (seed, trial,
// stage): trials are independent, replayable, and order-independent, so runs
// may be distributed across threads without shared state.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghzv/analysis.hpp"
#include "ghzv/errors.hpp"
#include "ghzv/linalg.hpp"
#include "ghzv/measurements.hpp"
#include "ghzv/states.hpp"
#include "ghzv/strategies.hpp"

namespace ghzv {

namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t trial_key(std::uint64_t seed, std::uint64_t trial) {
    return mix(mix(seed + kGolden) ^ (trial * 0xbf58476d1ce4e5b9ULL + 1));
}

}  // namespace rng

// Independent random substream addressed by (seed, trial, stage).
class Substream {
  public:
    Substream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stage)
        : key_(rng::mix(rng::trial_key(seed, trial) ^ (stage * 0x94d049bb133111ebULL + 1))) {}

    std::uint64_t next_u64() { return rng::mix(key_ + (++counter_) * rng::kGolden); }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // index sampled proportionally to the weights
    int categorical(std::span<const double> weights) {
        const double u = next_unit();
        double cum = 0.0;
        int last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = static_cast<int>(i);
            cum += weights[i];
            if (u < cum) return static_cast<int>(i);
        }
        return last_positive;
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// --- Sources ------------------------------------------------------------------

// Declarative description of the preparation device.
struct Source {
    enum class Kind { target, pure, depolarized, density, per_trial };

    Kind kind = Kind::target;
    double depolarizing_weight = 0.0;
    std::optional<StateVector> pure_state;
    std::optional<DensityMatrix> rho;
    std::vector<Source> schedule;  // per_trial: entry trial % size

    static Source target() { return {}; }
    static Source pure(StateVector psi) {
        Source s;
        s.kind = Kind::pure;
        s.pure_state = std::move(psi);
        return s;
    }
    static Source depolarized(double w) {
        if (w < 0.0 || w > 1.0) throw InvalidSpec("Source: depolarizing weight must lie in [0,1]");
        Source s;
        s.kind = Kind::depolarized;
        s.depolarizing_weight = w;
        return s;
    }
    static Source density(DensityMatrix sigma) {
        Source s;
        s.kind = Kind::density;
        s.rho = std::move(sigma);
        return s;
    }
    static Source per_trial(std::vector<Source> schedule) {
        if (schedule.empty()) throw InvalidSpec("Source: per-trial schedule must be nonempty");
        Source s;
        s.kind = Kind::per_trial;
        s.schedule = std::move(schedule);
        return s;
    }

    // Density matrix of the state emitted at `trial` (for expectations).
    ComplexMatrix density_matrix(const StateVector& target_state, long long trial = 0) const {
        switch (kind) {
            case Kind::target:
                return target_state.projector();
            case Kind::pure:
                return pure_state->projector();
            case Kind::depolarized: {
                auto rho_m = target_state.projector();
                rho_m *= cplx{1.0 - depolarizing_weight, 0.0};
                auto mixed = ComplexMatrix::identity(target_state.dim());
                mixed *= cplx{depolarizing_weight / target_state.dim(), 0.0};
                rho_m += mixed;
                return rho_m;
            }
            case Kind::density:
                return rho->matrix;
            case Kind::per_trial:
                return schedule[static_cast<std::size_t>(trial) % schedule.size()]
                    .density_matrix(target_state, 0);
        }
        throw Error("Source: unknown kind");
    }
};

namespace detail {

// Pure-state ensemble realizing a source; sampling a component and running
// the pure-state Born rule reproduces the density-matrix statistics exactly.
struct Ensemble {
    std::vector<double> weights;
    std::vector<std::vector<cplx>> states;
};

inline Ensemble resolve_source(const Source& src, const StateVector& target_state) {
    Ensemble e;
    switch (src.kind) {
        case Source::Kind::target:
            e.weights = {1.0};
            e.states = {target_state.amplitudes};
            break;
        case Source::Kind::pure:
            if (src.pure_state->dim() != target_state.dim())
                throw DimensionMismatch("Source: pure state dimension mismatch");
            e.weights = {1.0};
            e.states = {src.pure_state->amplitudes};
            break;
        case Source::Kind::depolarized: {
            const int dim = target_state.dim();
            e.weights.push_back(1.0 - src.depolarizing_weight);
            e.states.push_back(target_state.amplitudes);
            for (int i = 0; i < dim; ++i) {
                e.weights.push_back(src.depolarizing_weight / dim);
                std::vector<cplx> basis(static_cast<std::size_t>(dim));
                basis[static_cast<std::size_t>(i)] = 1.0;
                e.states.push_back(std::move(basis));
            }
            break;
        }
        case Source::Kind::density: {
            if (src.rho->dim() != target_state.dim())
                throw DimensionMismatch("Source: density matrix dimension mismatch");
            const auto eig = hermitian_eig(src.rho->matrix);
            double total = 0.0;
            for (double lam : eig.eigenvalues) total += std::max(0.0, lam);
            for (int c = 0; c < src.rho->dim(); ++c) {
                const double w = std::max(0.0, eig.eigenvalues[static_cast<std::size_t>(c)]);
                if (w <= 0.0) continue;
                e.weights.push_back(w / total);
                std::vector<cplx> v(static_cast<std::size_t>(src.rho->dim()));
                for (int i = 0; i < src.rho->dim(); ++i) v[static_cast<std::size_t>(i)] =
                    eig.eigenvectors(i, c);
                e.states.push_back(std::move(v));
            }
            break;
        }
        case Source::Kind::per_trial:
            throw Error("resolve_source: per-trial schedules are resolved per entry");
    }
    return e;
}

// psi <- (1 x B^dagger x 1) psi acting on `party`.
inline void apply_basis_dagger(std::vector<cplx>& psi, const ComplexMatrix& basis, int party,
                               int parties, int d) {
    std::int64_t stride = 1;
    for (int k = party + 1; k < parties; ++k) stride *= d;
    const std::int64_t block = stride * d;
    const auto dim = static_cast<std::int64_t>(psi.size());
    std::vector<cplx> scratch(static_cast<std::size_t>(d));
    for (std::int64_t base = 0; base < dim; base += block) {
        for (std::int64_t off = 0; off < stride; ++off) {
            for (int t = 0; t < d; ++t) {
                cplx acc{};
                for (int j = 0; j < d; ++j)
                    acc += std::conj(basis(j, t)) * psi[static_cast<std::size_t>(base + j * stride + off)];
                scratch[static_cast<std::size_t>(t)] = acc;
            }
            for (int t = 0; t < d; ++t)
                psi[static_cast<std::size_t>(base + t * stride + off)] =
                    scratch[static_cast<std::size_t>(t)];
        }
    }
}

// <w| psi>_party: contract one axis against conj(w), leaving the rest.
inline double overlap_probability(const std::vector<cplx>& psi, const std::vector<cplx>& w,
                                  int party, int parties, int d) {
    std::int64_t stride = 1;
    for (int k = party + 1; k < parties; ++k) stride *= d;
    const std::int64_t block = stride * d;
    const auto dim = static_cast<std::int64_t>(psi.size());
    double total = 0.0;
    for (std::int64_t base = 0; base < dim; base += block) {
        for (std::int64_t off = 0; off < stride; ++off) {
            cplx acc{};
            for (int j = 0; j < d; ++j)
                acc += std::conj(w[static_cast<std::size_t>(j)]) *
                       psi[static_cast<std::size_t>(base + j * stride + off)];
            total += std::norm(acc);
        }
    }
    return total;
}

struct PlanExecution {
    std::vector<int> outcomes;  // per party; -1 where the plan does not measure
    bool passed = false;
};

// Executes one sampling plan on a normalized pure state. Stage s draws from
// substream (seed, trial, stage_base + s); any final Bernoulli uses the
// stream after the last measurement stage.
inline PlanExecution execute_plan(const SamplingPlan& plan, std::vector<cplx> psi,
                                  std::uint64_t seed, std::uint64_t trial,
                                  std::uint64_t stage_base = 2) {
    const int n = plan.parties;
    const int d = plan.local_dim;
    PlanExecution out;
    out.outcomes.assign(static_cast<std::size_t>(n), -1);

    std::vector<int> measured_outcomes;
    std::vector<double> probs(static_cast<std::size_t>(d));
    for (std::size_t s = 0; s < plan.measured.size(); ++s) {
        const int party = plan.measured[s];
        apply_basis_dagger(psi, plan.bases[s], party, n, d);

        std::int64_t stride = 1;
        for (int k = party + 1; k < n; ++k) stride *= d;
        const std::int64_t block = stride * d;
        std::fill(probs.begin(), probs.end(), 0.0);
        for (std::int64_t base = 0; base < static_cast<std::int64_t>(psi.size()); base += block)
            for (int j = 0; j < d; ++j)
                for (std::int64_t off = 0; off < stride; ++off)
                    probs[static_cast<std::size_t>(j)] +=
                        std::norm(psi[static_cast<std::size_t>(base + j * stride + off)]);

        Substream stream(seed, trial, stage_base + s);
        const int o = stream.categorical(probs);
        out.outcomes[static_cast<std::size_t>(party)] = o;
        measured_outcomes.push_back(o);

        // collapse and renormalize
        const double norm = std::sqrt(probs[static_cast<std::size_t>(o)]);
        for (std::int64_t base = 0; base < static_cast<std::int64_t>(psi.size()); base += block)
            for (int j = 0; j < d; ++j)
                for (std::int64_t off = 0; off < stride; ++off) {
                    auto& amp = psi[static_cast<std::size_t>(base + j * stride + off)];
                    amp = (j == o) ? amp / norm : cplx{};
                }
    }

    const std::uint64_t final_stage = stage_base + plan.measured.size();
    switch (plan.rule) {
        case PassRule::always:
            out.passed = true;
            break;
        case PassRule::adaptive_ket: {
            const auto& w =
                plan.adaptive_kets[static_cast<std::size_t>(plan.flatten(measured_outcomes))];
            const double p_pass = overlap_probability(psi, w, plan.adaptive_party, n, d);
            Substream stream(seed, trial, final_stage);
            out.passed = stream.next_unit() < p_pass;
            out.outcomes[static_cast<std::size_t>(plan.adaptive_party)] = out.passed ? 0 : 1;
            break;
        }
        case PassRule::prob_coeff: {
            const double coeff =
                plan.pass_coeff[static_cast<std::size_t>(plan.flatten(measured_outcomes))];
            Substream stream(seed, trial, final_stage);
            out.passed = stream.next_unit() < coeff;
            break;
        }
        default:
            out.passed = plan.passes(measured_outcomes);
            break;
    }
    return out;
}

}  // namespace detail

// --- Trial records and summaries ------------------------------------------------

struct TrialRecord {
    long long trial = 0;
    int test_index = 0;
    std::vector<int> outcomes;  // -1 marks parties the plan does not measure
    bool passed = false;
    std::uint64_t substream = 0;  // per-trial stream key
};

struct RunSummary {
    long long trials = 0;
    long long passes = 0;
    double pass_rate = 0.0;
    bool accepted = false;  // all trials passed
    std::uint64_t seed = 0;
    bool homogeneous = false;
    double fidelity_estimate = 0.0;  // meaningful when homogeneous
    double fidelity_std = 0.0;
};

using TrialSink = std::function<void(const TrialRecord&)>;

// Runs N seeded trials of the strategy against the source. Deterministic for
// fixed (strategy, source, N, seed); records stream in trial order.
inline RunSummary run(const Strategy& strategy, const Source& source, long long n_trials,
                      std::uint64_t seed, const TrialSink& sink = nullptr) {
    if (n_trials < 1) throw InvalidSpec("run: need at least one trial");

    std::vector<detail::Ensemble> ensembles;
    if (source.kind == Source::Kind::per_trial) {
        ensembles.reserve(source.schedule.size());
        for (const auto& entry : source.schedule) {
            if (entry.kind == Source::Kind::per_trial)
                throw InvalidSpec("run: nested per-trial schedules are not supported");
            ensembles.push_back(detail::resolve_source(entry, strategy.target));
        }
    } else {
        ensembles.push_back(detail::resolve_source(source, strategy.target));
    }

    std::vector<double> test_weights;
    test_weights.reserve(strategy.tests.size());
    for (const auto& wt : strategy.tests) test_weights.push_back(wt.p);

    RunSummary summary;
    summary.trials = n_trials;
    summary.seed = seed;

    for (long long trial = 0; trial < n_trials; ++trial) {
        const auto& ensemble =
            ensembles[static_cast<std::size_t>(trial) % ensembles.size()];
        Substream source_stream(seed, static_cast<std::uint64_t>(trial), 0);
        const int component = ensemble.weights.size() == 1
                                  ? 0
                                  : source_stream.categorical(ensemble.weights);

        Substream test_stream(seed, static_cast<std::uint64_t>(trial), 1);
        const int test_index = test_stream.categorical(test_weights);
        const auto& plan = strategy.tests[static_cast<std::size_t>(test_index)].test.plan;

        auto result = detail::execute_plan(
            plan, ensemble.states[static_cast<std::size_t>(component)], seed,
            static_cast<std::uint64_t>(trial));
        if (result.passed) ++summary.passes;

        if (sink) {
            TrialRecord record;
            record.trial = trial;
            record.test_index = test_index;
            record.outcomes = std::move(result.outcomes);
            record.passed = result.passed;
            record.substream = rng::trial_key(seed, static_cast<std::uint64_t>(trial));
            sink(record);
        }
    }

    summary.pass_rate = static_cast<double>(summary.passes) / static_cast<double>(n_trials);
    summary.accepted = summary.passes == summary.trials;

    if (is_homogeneous(strategy)) {
        const auto sd = spectral_data(strategy);
        summary.homogeneous = true;
        const double slack = 6.0 * fidelity_std(0.5, sd.nu, n_trials) + 1e-9;
        summary.fidelity_estimate =
            fidelity_from_passrate(summary.pass_rate, sd.beta, sd.nu, slack);
        summary.fidelity_std = fidelity_std(summary.fidelity_estimate, sd.nu, n_trials);
    }
    return summary;
}

// Fidelity estimation via the linear pass-rate relation; requires a
// homogeneous strategy.
inline std::pair<double, double> estimate_fidelity_run(const Strategy& strategy,
                                                       const Source& source, long long n_trials,
                                                       std::uint64_t seed) {
    if (!is_homogeneous(strategy))
        throw NotHomogeneous("estimate_fidelity_run: strategy is not homogeneous");
    const auto summary = run(strategy, source, n_trials, seed);
    return {summary.fidelity_estimate, summary.fidelity_std};
}

// --- Effect oracles --------------------------------------------------------------

// Analytic branch sum of a sampling plan: enumerate all outcome branches and
// add each branch projector weighted by its pass probability. Independent of
// how the stored effect matrix was assembled.
inline ComplexMatrix analytic_effect(const SamplingPlan& plan) {
    const int n = plan.parties;
    const int d = plan.local_dim;
    const std::int64_t dim = checked_power(d, n, "analytic_effect");
    ComplexMatrix effect(static_cast<int>(dim));

    if (plan.rule == PassRule::always) return ComplexMatrix::identity(static_cast<int>(dim));

    std::int64_t branches = 1;
    for (std::size_t s = 0; s < plan.measured.size(); ++s) branches *= d;

    std::vector<int> outcomes(plan.measured.size(), 0);
    for (std::int64_t flat = 0; flat < branches; ++flat) {
        std::int64_t rest = flat;
        for (int s = static_cast<int>(plan.measured.size()) - 1; s >= 0; --s) {
            outcomes[static_cast<std::size_t>(s)] = static_cast<int>(rest % d);
            rest /= d;
        }
        double weight = 1.0;
        if (plan.rule != PassRule::adaptive_ket) {
            weight = plan.pass_probability(outcomes);
            if (weight == 0.0) continue;
        }

        // Assemble the branch ket party by party.
        std::vector<cplx> ket{1.0};
        for (int party = 0; party < n; ++party) {
            if (party == plan.adaptive_party && plan.rule == PassRule::adaptive_ket) {
                const auto& w =
                    plan.adaptive_kets[static_cast<std::size_t>(plan.flatten(outcomes))];
                ket = kron_vec(ket, w);
                continue;
            }
            const auto it = std::find(plan.measured.begin(), plan.measured.end(), party);
            if (it == plan.measured.end())
                throw Error("analytic_effect: unmeasured party outside adaptive rule");
            const auto s = static_cast<std::size_t>(it - plan.measured.begin());
            std::vector<cplx> column(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j)
                column[static_cast<std::size_t>(j)] = plan.bases[s](j, outcomes[s]);
            ket = kron_vec(ket, column);
        }
        auto term = ComplexMatrix::outer(ket, ket);
        term *= cplx{weight, 0.0};
        effect += term;
    }
    return effect;
}

inline ComplexMatrix analytic_effect(const TestOperator& test) {
    return analytic_effect(test.plan);
}

// Statistical reconstruction of the effect from pass rates of basis states
// and pairwise superposition probes.
inline ComplexMatrix empirical_effect(const TestOperator& test, long long trials_per_probe,
                                      std::uint64_t seed) {
    const int n = test.plan.parties;
    const int d = test.plan.local_dim;
    const std::int64_t dim = checked_power(d, n, "empirical_effect");

    std::uint64_t probe_salt = 0;
    const auto pass_rate = [&](std::vector<cplx> probe) {
        long long passes = 0;
        const std::uint64_t salt = probe_salt++;
        for (long long t = 0; t < trials_per_probe; ++t) {
            const auto res = detail::execute_plan(test.plan, probe, seed ^ rng::mix(salt + 1),
                                                  static_cast<std::uint64_t>(t));
            if (res.passed) ++passes;
        }
        return static_cast<double>(passes) / static_cast<double>(trials_per_probe);
    };

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    ComplexMatrix effect(static_cast<int>(dim));
    std::vector<double> diag(static_cast<std::size_t>(dim));
    for (std::int64_t i = 0; i < dim; ++i) {
        std::vector<cplx> probe(static_cast<std::size_t>(dim));
        probe[static_cast<std::size_t>(i)] = 1.0;
        diag[static_cast<std::size_t>(i)] = pass_rate(std::move(probe));
        effect(static_cast<int>(i), static_cast<int>(i)) = diag[static_cast<std::size_t>(i)];
    }
    for (std::int64_t i = 0; i < dim; ++i) {
        for (std::int64_t j = i + 1; j < dim; ++j) {
            std::vector<cplx> plus(static_cast<std::size_t>(dim));
            plus[static_cast<std::size_t>(i)] = inv_sqrt2;
            plus[static_cast<std::size_t>(j)] = inv_sqrt2;
            const double p_plus = pass_rate(std::move(plus));

            std::vector<cplx> phased(static_cast<std::size_t>(dim));
            phased[static_cast<std::size_t>(i)] = inv_sqrt2;
            phased[static_cast<std::size_t>(j)] = cplx{0.0, inv_sqrt2};
            const double p_phase = pass_rate(std::move(phased));

            const double mean = 0.5 * (diag[static_cast<std::size_t>(i)] +
                                       diag[static_cast<std::size_t>(j)]);
            const cplx entry{p_plus - mean, mean - p_phase};
            effect(static_cast<int>(i), static_cast<int>(j)) = entry;
            effect(static_cast<int>(j), static_cast<int>(i)) = std::conj(entry);
        }
    }
    return effect;
}

}  // namespace ghzv
