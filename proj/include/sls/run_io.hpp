#pragma once

#include "sls/synthesis.hpp"
#include "sls/verify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sls {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VerifyConfig {
    int samples = 200;
    int horizon = 0;  // 0: default to 4 * fir_horizon
    std::uint64_t seed = 0;
    std::vector<PerturbationKind> kinds = {PerturbationKind::LtiStatic,
                                           PerturbationKind::LtvDiagonal,
                                           PerturbationKind::LtvDense};
};

struct RunConfig {
    Matrix A, B, C, D;
    double epsilon = 0.0;
    int fir_horizon = 1;
    std::optional<std::pair<int, int>> locality;  // (d, tau)
    double gamma_tol = 1e-3;
    double margin = 1e-6;
    std::optional<double> gamma_hi;  // nullopt: doubling search ("auto")
    VerifyConfig verify;
    std::string output_dir = ".";

    Plant make_plant() const { return Plant(A, B); }
    CostOutput make_cost() const { return CostOutput(C, D); }
    SynthesisProblem make_problem() const;
    int verify_horizon() const { return verify.horizon > 0 ? verify.horizon : 4 * fir_horizon; }
};

/// Parse and schema-check a config file; throws ConfigError on any problem.
RunConfig load_config(const std::string& path);

/// result.json contents.  Norms are stored alongside the taps so readers can
/// re-derive and cross-check them.
struct StoredResult {
    double gamma_star;
    double epsilon;
    int fir_horizon;
    double margin;
    double gamma_tol;
    double norm_qphi;
    double norm_phi;
    double eq22_lhs;
    double residual_max;
    Matrix C, D;
    std::vector<Matrix> phi_x;  // tap k at index k-1
    std::vector<Matrix> phi_u;
    std::vector<BisectionProbe> trace;

    SystemResponse make_response() const;
};

/// Deterministic writer: fixed field order, %.17g floats, newline at EOF.
void write_result_json(const std::string& path, const SynthesisResult& result);

StoredResult load_result(const std::string& path);

void write_verify_json(const std::string& path, const VerifySummary& summary, double gamma_star);

/// Line plot per channel, emitted as a self-contained SVG (no dependencies).
void write_traces_svg(const std::string& path, const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& series);

}  // namespace sls
