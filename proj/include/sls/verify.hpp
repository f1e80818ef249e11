#pragma once

#include "sls/loop.hpp"
#include "sls/synthesis.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>

namespace sls {

enum class PerturbationKind { LtiStatic, LtvDiagonal, LtvDense };

const char* to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& name);

struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::LtiStatic;
    double epsilon = 0.0;
    int horizon = 1;
    std::uint64_t seed = 0;
};

/// Draw an admissible pair (delta_a, delta_b).  The raw draw is rescaled so
/// the stacked induced norm equals rho * epsilon with rho = 1 half the time
/// (boundary samples) and rho ~ uniform(0, 1] otherwise.  Deterministic in
/// the seed.
std::pair<LtvOperator, LtvOperator> sample_perturbation(const PerturbationSpec& spec, int n,
                                                        int p);

struct GainReport {
    double exact_gain = 0.0;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double margin = std::numeric_limits<double>::quiet_NaN();
    Signal witness_input;
};

/// Exact finite-horizon worst-case gain of w -> z = C x + D u under the
/// fixed perturbation, via the closed form Q Phi (I - delta_hat)^{-1}, with
/// a sign-pattern witness input attaining it.
GainReport exact_worst_gain(const UncertainPlant& plant, const SystemResponse& resp,
                            const CostOutput& cost, int horizon,
                            double gamma = std::numeric_limits<double>::quiet_NaN());

/// Peak of |C x + D u| when the witness is replayed through the simulator;
/// equal to report.exact_gain up to roundoff.
double replay_witness_gain(const UncertainPlant& plant, const SystemResponse& resp,
                           const CostOutput& cost, const Signal& witness);

struct BruteForceResult {
    double worst_gain = 0.0;
    LtvOperator delta_a;
    LtvOperator delta_b;
    long evaluations = 0;
};

/// Exhaustive worst case over time-varying diagonal sign perturbations:
/// delta_a entries in {-eps, +eps} per state and step (delta_b = 0), plus,
/// when p >= n and the grid fits the budget, the joint grid where each
/// (state, step) slot spends its budget on one channel: (+-eps, 0) or
/// (0, +-eps).  The zero perturbation is always included.  Only scalar or
/// two-state systems are accepted; oversized grids are rejected with a size
/// report.
BruteForceResult brute_force_worst(const Plant& plant, const SystemResponse& resp,
                                   const CostOutput& cost, double epsilon, int horizon);

struct AugmentedPlant {
    FirResponse q_scaled;    // (1/gamma) Q Phi = M11 = M12
    FirResponse phi_scaled;  // eps [Phi_x; Phi_u] = M21 = M22
    double norm_m11() const { return l1_norm(q_scaled); }
    double norm_m22() const { return l1_norm(phi_scaled); }
};

struct RobustMargin {
    double lhs;    // ||Q Phi|| + gamma eps ||Phi||, recomputed from scratch
    double gamma;
    AugmentedPlant augmented;
};

/// Recompute the certificate left-hand side and the augmented-plant block
/// norms; throws CertificateError when lhs >= gamma.
RobustMargin robust_margin(const SynthesisResult& result, double epsilon);

struct SampleRecord {
    PerturbationKind kind;
    std::uint64_t seed;
    double delta_norm;
    double exact_gain;
    double margin;
};

struct VerifySummary {
    int samples = 0;
    double max_gain = 0.0;
    double min_margin = std::numeric_limits<double>::infinity();
    int violations = 0;
    double max_witness_error = 0.0;  // worst |replayed - computed| gain gap
};

/// Sample perturbations round-robin across the requested kinds (seed + index
/// per sample), evaluate exact gains against gamma_star, and replay every
/// witness.  Samples are processed in parallel; records and the summary are
/// independent of the thread count.
VerifySummary run_verification(const SynthesisResult& result,
                               const std::vector<PerturbationKind>& kinds, int samples,
                               int horizon, std::uint64_t seed,
                               std::vector<SampleRecord>* records = nullptr);

/// gains.csv: one row per sample (kind, seed, norm of delta, exact gain,
/// margin), 17 significant digits.
void write_gains_csv(std::ostream& out, const std::vector<SampleRecord>& records);

/// Uniform [0,1) from the top 53 bits; keeps sampling identical across
/// standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace sls
