#include "sls/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace sls {

const char* to_string(PerturbationKind kind) {
    switch (kind) {
        case PerturbationKind::LtiStatic: return "lti_static";
        case PerturbationKind::LtvDiagonal: return "ltv_diagonal";
        case PerturbationKind::LtvDense: return "ltv_dense";
    }
    return "unknown";
}

PerturbationKind perturbation_kind_from_string(const std::string& name) {
    if (name == "lti_static") return PerturbationKind::LtiStatic;
    if (name == "ltv_diagonal") return PerturbationKind::LtvDiagonal;
    if (name == "ltv_dense") return PerturbationKind::LtvDense;
    throw std::invalid_argument("unknown perturbation kind: " + name);
}

namespace {

double uniform_pm1(std::mt19937_64& rng) { return 2.0 * uniform_unit(rng) - 1.0; }

// Deterministic parallel map over [0, count): the output slot i depends only
// on i, so any thread count gives identical results.
template <typename Fn>
void parallel_for(int count, const Fn& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, 8));
    if (workers <= 1 || count < 4) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (std::thread& t : pool) t.join();
}

}  // namespace

std::pair<LtvOperator, LtvOperator> sample_perturbation(const PerturbationSpec& spec, int n,
                                                        int p) {
    require(spec.epsilon >= 0.0, "sample_perturbation: epsilon must be nonnegative");
    require(spec.horizon >= 1, "sample_perturbation: horizon must be >= 1");
    require(n >= 1 && p >= 1, "sample_perturbation: dims must be >= 1");
    const int horizon = spec.horizon;
    std::mt19937_64 rng(spec.seed);

    LtvOperator da(n, n, horizon);
    LtvOperator db(n, p, horizon);
    switch (spec.kind) {
        case PerturbationKind::LtiStatic: {
            Matrix ma(n, n), mb(n, p);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) ma(i, j) = uniform_pm1(rng);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < p; ++j) mb(i, j) = uniform_pm1(rng);
            da = LtvOperator::memoryless(ma, horizon);
            db = LtvOperator::memoryless(mb, horizon);
            break;
        }
        case PerturbationKind::LtvDiagonal: {
            const int pd = std::min(n, p);
            for (int t = 0; t < horizon; ++t) {
                for (int i = 0; i < n; ++i) da.block(t, t)(i, i) = uniform_pm1(rng);
                for (int i = 0; i < pd; ++i) db.block(t, t)(i, i) = uniform_pm1(rng);
            }
            da.set_structure(false, 0);
            db.set_structure(false, 0);
            break;
        }
        case PerturbationKind::LtvDense: {
            const int band = std::min(3, horizon - 1);
            for (int t = 0; t < horizon; ++t)
                for (int s = std::max(0, t - band); s <= t; ++s) {
                    auto ba = da.block(t, s);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) ba(i, j) = uniform_pm1(rng);
                    auto bb = db.block(t, s);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < p; ++j) bb(i, j) = uniform_pm1(rng);
                }
            da.set_structure(false, band);
            db.set_structure(false, band);
            break;
        }
    }

    const bool boundary = uniform_unit(rng) < 0.5;
    const double rho = boundary ? 1.0 : 1.0 - uniform_unit(rng);  // (0, 1]
    const double raw_norm = induced_norm(hstack(da, db));
    const double scale = raw_norm > 0.0 ? rho * spec.epsilon / raw_norm : 0.0;
    return {scaled(da, scale), scaled(db, scale)};
}

GainReport exact_worst_gain(const UncertainPlant& plant, const SystemResponse& resp,
                            const CostOutput& cost, int horizon, double gamma) {
    const LtvOperator dhat = delta_hat(plant, resp, horizon);
    const LtvOperator inv = feedback_inverse(dhat);
    const LtvOperator z_map = compose(lift(resp.weighted(cost), horizon), inv);
    GainReport report{induced_norm(z_map), gamma, 0.0, worst_case_input(z_map)};
    report.margin = gamma - report.exact_gain;
    return report;
}

double replay_witness_gain(const UncertainPlant& plant, const SystemResponse& resp,
                           const CostOutput& cost, const Signal& witness) {
    const ClosedLoopTraces traces = simulate_closed_loop(plant, resp, witness);
    double peak = 0.0;
    for (int t = 0; t < witness.horizon(); ++t) {
        const Vector z = cost.C * traces.x.sample(t) + cost.D * traces.u.sample(t);
        peak = std::max(peak, z.cwiseAbs().maxCoeff());
    }
    return peak;
}

// ---------------------------------------------------------------------------
// Brute force over diagonal sign patterns.
// ---------------------------------------------------------------------------

namespace {

// Flat-array gain evaluation for per-step diagonal perturbations
// delta_a(t) = diag(da_t), delta_b(t) = diag(db_t):
//   dhat(i,j)   = diag(da_{i-1}) Phi_x[i-1-j] + diag(db_{i-1}) Phi_u[i-1-j]
//   V           = (I - dhat)^{-1}
//   M           = L_{Q Phi} V,  gain = max abs row sum of M.
// Everything stays in stack-friendly dense buffers; no Eigen temporaries in
// the hot loop.
struct DiagonalGainEvaluator {
    int n, p, m, t_taps, horizon;
    std::vector<double> phi_x;  // [k][i][j], k = 0..T-1 for tap k+1
    std::vector<double> phi_u;  // [k][a][j]
    std::vector<double> q_phi;  // [k][r][j]
    std::vector<double> dhat;   // [(i*n+r) * (N*n) + ...] dense (N n) x (N n)
    std::vector<double> v;      // same shape
    std::vector<double> mrow;   // (N m) x (N n)

    DiagonalGainEvaluator(const SystemResponse& resp, const CostOutput& cost, int horizon_in)
        : n(resp.num_states()),
          p(resp.num_inputs()),
          m(cost.num_outputs()),
          t_taps(resp.fir_horizon()),
          horizon(horizon_in) {
        const FirResponse q = resp.weighted(cost);
        auto pack = [](const FirResponse& g, std::vector<double>& out) {
            out.resize(static_cast<size_t>(g.num_taps()) * g.out_dim() * g.in_dim());
            size_t idx = 0;
            for (int k = 1; k <= g.num_taps(); ++k)
                for (int i = 0; i < g.out_dim(); ++i)
                    for (int j = 0; j < g.in_dim(); ++j) out[idx++] = g.tap(k)(i, j);
        };
        pack(resp.phi_x(), phi_x);
        pack(resp.phi_u(), phi_u);
        pack(q, q_phi);
        dhat.assign(static_cast<size_t>(horizon) * n * horizon * n, 0.0);
        v.assign(dhat.size(), 0.0);
        mrow.assign(static_cast<size_t>(horizon) * n, 0.0);
    }

    // da: horizon*n entries, db: horizon*p entries (diagonal values per step).
    // dhat(i,j) = diag(da_i) Phi_x[i-j] + diag(db_i) Phi_u[i-j].
    double evaluate(const double* da, const double* db) {
        const int nn = horizon * n;
        std::fill(dhat.begin(), dhat.end(), 0.0);
        for (int i = 1; i < horizon; ++i) {
            const double* wa = da + static_cast<size_t>(i) * n;
            const double* wb = db + static_cast<size_t>(i) * p;
            const int j_lo = std::max(0, i - t_taps);
            for (int j = j_lo; j <= i - 1; ++j) {
                const int k = i - j;  // tap index
                double* blk = &dhat[(static_cast<size_t>(i) * n) * nn + static_cast<size_t>(j) * n];
                const double* tx = &phi_x[static_cast<size_t>(k - 1) * n * n];
                const double* tu = &phi_u[static_cast<size_t>(k - 1) * p * n];
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) {
                        double val = wa[r] * tx[r * n + c];
                        if (r < p) val += wb[r] * tu[r * n + c];
                        blk[static_cast<size_t>(r) * nn + c] = val;
                    }
            }
        }
        // forward substitution for V = (I - dhat)^{-1}
        std::fill(v.begin(), v.end(), 0.0);
        for (int idx = 0; idx < nn; ++idx) v[static_cast<size_t>(idx) * nn + idx] = 1.0;
        for (int i = 1; i < horizon; ++i)
            for (int r = 0; r < n; ++r) {
                const int row = i * n + r;
                double* vrow = &v[static_cast<size_t>(row) * nn];
                const double* drow = &dhat[static_cast<size_t>(row) * nn];
                for (int kk = 0; kk < i * n; ++kk) {
                    const double d = drow[kk];
                    if (d == 0.0) continue;
                    const double* vk = &v[static_cast<size_t>(kk) * nn];
                    for (int c = 0; c <= kk; ++c) vrow[c] += d * vk[c];
                }
            }
        // M = L_{Q Phi} V and its induced norm
        double worst = 0.0;
        for (int i = 0; i < horizon; ++i)
            for (int r = 0; r < m; ++r) {
                double* out = mrow.data();
                std::fill(out, out + nn, 0.0);
                const int k_hi = std::min(t_taps, i);
                for (int k = 1; k <= k_hi; ++k) {
                    const double* tq = &q_phi[(static_cast<size_t>(k - 1) * m + r) * n];
                    const int src = (i - k) * n;
                    for (int c = 0; c < n; ++c) {
                        const double coef = tq[c];
                        if (coef == 0.0) continue;
                        const double* vrow = &v[static_cast<size_t>(src + c) * nn];
                        for (int col = 0; col <= src + c; ++col) out[col] += coef * vrow[col];
                    }
                }
                double sum = 0.0;
                for (int col = 0; col < i * n; ++col) sum += std::abs(out[col]);
                worst = std::max(worst, sum);
            }
        return worst;
    }
};

}  // namespace

BruteForceResult brute_force_worst(const Plant& plant, const SystemResponse& resp,
                                   const CostOutput& cost, double epsilon, int horizon) {
    const int n = plant.num_states();
    const int p = plant.num_inputs();
    require(n <= 2, "brute_force_worst: only scalar or two-state systems");
    require(horizon >= resp.fir_horizon() + 1 && horizon <= 14,
            "brute_force_worst: horizon must lie in [T+1, 14]");
    const int slots = n * horizon;
    constexpr long kMaxEvals = 1L << 25;
    const long evals_signs = 1L << slots;
    if (slots >= 40 || evals_signs > kMaxEvals)
        throw std::invalid_argument("brute_force_worst: 2^" + std::to_string(slots) +
                                    " sign patterns exceed the enumeration budget of 2^25");
    const bool joint = p >= n && 2 * slots < 40 && (1L << (2 * slots)) <= kMaxEvals;

    DiagonalGainEvaluator eval(resp, cost, horizon);
    std::vector<double> da(static_cast<size_t>(horizon) * n, 0.0);
    std::vector<double> db(static_cast<size_t>(horizon) * p, 0.0);

    BruteForceResult result{0.0, LtvOperator::zero(n, n, horizon),
                            LtvOperator::zero(n, p, horizon), 0};
    long best_code = -1;
    int best_variant = 0;  // 0 zero, 1 signs, 2 joint
    result.worst_gain = eval.evaluate(da.data(), db.data());
    ++result.evaluations;

    // Variant 1: delta_a sign grid, delta_b = 0.
    for (long code = 0; code < evals_signs; ++code) {
        for (int s = 0; s < slots; ++s) da[s] = (code >> s) & 1 ? epsilon : -epsilon;
        const double gain = eval.evaluate(da.data(), db.data());
        ++result.evaluations;
        if (gain > result.worst_gain) {
            result.worst_gain = gain;
            best_code = code;
            best_variant = 1;
        }
    }

    // Variant 2: per-slot extreme points (+-eps, 0) / (0, +-eps).
    if (joint) {
        const long evals_joint = 1L << (2 * slots);
        for (long code = 0; code < evals_joint; ++code) {
            for (int s = 0; s < slots; ++s) {
                const int choice = static_cast<int>((code >> (2 * s)) & 3);
                const int t = s / n;
                const int r = s % n;
                da[t * n + r] = choice == 0 ? -epsilon : choice == 1 ? epsilon : 0.0;
                db[t * p + r] = choice == 2 ? -epsilon : choice == 3 ? epsilon : 0.0;
            }
            const double gain = eval.evaluate(da.data(), db.data());
            ++result.evaluations;
            if (gain > result.worst_gain) {
                result.worst_gain = gain;
                best_code = code;
                best_variant = 2;
            }
        }
    }

    // Rebuild the argmax operators.
    std::fill(da.begin(), da.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
    if (best_variant == 1) {
        for (int s = 0; s < slots; ++s) da[s] = (best_code >> s) & 1 ? epsilon : -epsilon;
    } else if (best_variant == 2) {
        for (int s = 0; s < slots; ++s) {
            const int choice = static_cast<int>((best_code >> (2 * s)) & 3);
            const int t = s / n;
            const int r = s % n;
            da[t * n + r] = choice == 0 ? -epsilon : choice == 1 ? epsilon : 0.0;
            db[t * p + r] = choice == 2 ? -epsilon : choice == 3 ? epsilon : 0.0;
        }
    }
    for (int t = 0; t < horizon; ++t) {
        for (int r = 0; r < n; ++r) result.delta_a.block(t, t)(r, r) = da[t * n + r];
        for (int r = 0; r < std::min(n, p); ++r) result.delta_b.block(t, t)(r, r) = db[t * p + r];
    }
    result.delta_a.finalize(false);
    result.delta_b.finalize(false);
    return result;
}

RobustMargin robust_margin(const SynthesisResult& result, double epsilon) {
    const double gamma = result.gamma_star;
    const FirResponse q = result.response.weighted(result.problem.cost);
    const FirResponse stacked = result.response.stacked();
    const double nq = l1_norm(q);
    const double nphi = l1_norm(stacked);
    const double lhs = nq + gamma * epsilon * nphi;

    AugmentedPlant augmented{premultiply(Matrix::Identity(q.out_dim(), q.out_dim()) / gamma, q),
                             premultiply(epsilon * Matrix::Identity(stacked.out_dim(),
                                                                    stacked.out_dim()),
                                         stacked)};
    if (!(lhs < gamma))
        throw CertificateError("robust_margin: certificate violated, lhs >= gamma");
    return {lhs, gamma, std::move(augmented)};
}

VerifySummary run_verification(const SynthesisResult& result,
                               const std::vector<PerturbationKind>& kinds, int samples,
                               int horizon, std::uint64_t seed,
                               std::vector<SampleRecord>* records) {
    require(!kinds.empty(), "run_verification: at least one perturbation kind");
    require(samples >= 0, "run_verification: sample count must be nonnegative");
    const Plant& plant = result.problem.plant;
    const double epsilon = result.problem.epsilon;

    std::vector<SampleRecord> local(samples);
    std::vector<double> witness_err(samples, 0.0);
    parallel_for(samples, [&](int i) {
        PerturbationSpec spec{kinds[i % kinds.size()], epsilon, horizon, seed + i};
        auto [da, db] = sample_perturbation(spec, plant.num_states(), plant.num_inputs());
        const double delta_norm = induced_norm(hstack(da, db));
        UncertainPlant up(plant, std::move(da), std::move(db), epsilon);
        const GainReport report =
            exact_worst_gain(up, result.response, result.problem.cost, horizon,
                             result.gamma_star);
        const double replayed =
            replay_witness_gain(up, result.response, result.problem.cost, report.witness_input);
        witness_err[i] = std::abs(replayed - report.exact_gain);
        local[i] = {spec.kind, spec.seed, delta_norm, report.exact_gain, report.margin};
    });

    VerifySummary summary;
    summary.samples = samples;
    for (int i = 0; i < samples; ++i) {
        summary.max_gain = std::max(summary.max_gain, local[i].exact_gain);
        summary.min_margin = std::min(summary.min_margin, local[i].margin);
        summary.max_witness_error = std::max(summary.max_witness_error, witness_err[i]);
        if (!(local[i].exact_gain < result.gamma_star)) ++summary.violations;
    }
    if (records) *records = std::move(local);
    return summary;
}

void write_gains_csv(std::ostream& out, const std::vector<SampleRecord>& records) {
    out << "kind,seed,delta_norm,exact_gain,margin\n";
    char buf[256];
    for (const SampleRecord& r : records) {
        std::snprintf(buf, sizeof(buf), "%s,%llu,%.17g,%.17g,%.17g\n", to_string(r.kind),
                      static_cast<unsigned long long>(r.seed), r.delta_norm, r.exact_gain,
                      r.margin);
        out << buf;
    }
}

}  // namespace sls
