#include "sls/loop.hpp"
#include "sls/run_io.hpp"
#include "sls/synthesis.hpp"
#include "sls/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace sls;

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitViolation = 5;

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

int run_synth(const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const SynthesisProblem prob = cfg.make_problem();
    const SynthesisResult result = bisect_gamma(prob, cfg.gamma_hi);
    const std::string path = out_path(cfg, "result.json");
    write_result_json(path, result);
    std::printf("gamma_star = %.12g  (||Q Phi|| = %.12g, eps*||Phi|| = %.12g, probes = %zu)\n",
                result.gamma_star, result.norm_qphi, prob.epsilon * result.norm_phi,
                result.bisection_trace.size());
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

// Rebuild a SynthesisResult from a stored response, re-deriving the norms.
SynthesisResult restore_result(const RunConfig& cfg, const StoredResult& stored) {
    SynthesisProblem prob = cfg.make_problem();
    SystemResponse response = stored.make_response();
    const double nq = l1_norm(response.weighted(prob.cost));
    const double nphi = l1_norm(response.stacked());
    const double residual = max_residual(prob.plant, response);
    return SynthesisResult{std::move(prob), stored.gamma_star, std::move(response),
                           nq,              nphi,              residual,
                           stored.trace};
}

int run_verify(const std::string& config_path, const std::string& result_path) {
    const RunConfig cfg = load_config(config_path);
    const StoredResult stored = load_result(result_path);

    SynthesisResult result = [&] {
        try {
            return restore_result(cfg, stored);
        } catch (const std::invalid_argument& e) {
            throw CertificateError(std::string("stored response rejected: ") + e.what());
        }
    }();

    bool violated = false;
    auto complain = [&](const std::string& what) {
        std::fprintf(stderr, "verify: %s\n", what.c_str());
        violated = true;
    };

    const double nq_err = std::abs(result.norm_qphi - stored.norm_qphi);
    const double nphi_err = std::abs(result.norm_phi - stored.norm_phi);
    if (nq_err > 1e-10 * std::max(1.0, stored.norm_qphi) ||
        nphi_err > 1e-10 * std::max(1.0, stored.norm_phi))
        complain("stored norms disagree with the reloaded taps");
    if (result.residual_max > 1e-8)
        complain("achievability residual check failed: " + std::to_string(result.residual_max));
    try {
        (void)robust_margin(result, cfg.epsilon);
    } catch (const CertificateError& e) {
        complain(e.what());
    }
    if (violated) return kExitViolation;

    std::vector<SampleRecord> records;
    const VerifySummary summary =
        run_verification(result, cfg.verify.kinds, cfg.verify.samples, cfg.verify_horizon(),
                         cfg.verify.seed, &records);

    {
        std::ofstream csv(out_path(cfg, "gains.csv"));
        if (!csv) throw ConfigError("cannot write gains.csv");
        write_gains_csv(csv, records);
    }
    write_verify_json(out_path(cfg, "verify.json"), summary, result.gamma_star);

    std::printf("verified %d samples: max gain %.12g vs gamma %.12g (min margin %.12g)\n",
                summary.samples, summary.max_gain, result.gamma_star, summary.min_margin);
    if (summary.violations > 0) {
        std::fprintf(stderr, "verify: %d sampled gains reached gamma_star\n", summary.violations);
        return kExitViolation;
    }
    return kExitOk;
}

Signal make_input(const std::string& source, int dim, int horizon) {
    Signal w(dim, horizon);
    if (source == "impulse") {
        w.sample(0)(0) = 1.0;
        return w;
    }
    if (source == "step") {
        w.samples().setOnes();
        return w;
    }
    std::ifstream in(source);
    if (!in) throw ConfigError("input file not readable: " + source);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != dim)
            throw ConfigError("input row width does not match the state dimension");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("input file contains no samples");
    Signal wf(dim, static_cast<int>(rows.size()));
    for (int t = 0; t < wf.horizon(); ++t)
        for (int i = 0; i < dim; ++i) wf.sample(t)(i) = rows[t][i];
    return wf;
}

int run_simulate(const std::string& config_path, const std::string& result_path,
                 const std::string& input, std::uint64_t seed) {
    const RunConfig cfg = load_config(config_path);
    const StoredResult stored = load_result(result_path);
    const SystemResponse resp = stored.make_response();
    const Plant plant = cfg.make_plant();
    require(resp.num_states() == plant.num_states() && resp.num_inputs() == plant.num_inputs(),
            "simulate: result dimensions do not match the config plant");

    int horizon = cfg.verify_horizon();
    Signal w = make_input(input, plant.num_states(), horizon);
    horizon = w.horizon();
    if (horizon < resp.fir_horizon() + 1)
        throw ConfigError("simulate: horizon must be at least fir_horizon + 1");

    UncertainPlant up = [&] {
        if (cfg.epsilon <= 0.0) return UncertainPlant::exact(plant, horizon);
        PerturbationSpec spec{cfg.verify.kinds.front(), cfg.epsilon, horizon, seed};
        auto [da, db] = sample_perturbation(spec, plant.num_states(), plant.num_inputs());
        return UncertainPlant(plant, std::move(da), std::move(db), cfg.epsilon);
    }();

    const ClosedLoopTraces traces = simulate_closed_loop(up, resp, w);
    const auto [pred_x, pred_u] = predicted_response(up, resp, w);

    const int n = plant.num_states();
    const int p = plant.num_inputs();
    const std::string csv_path = out_path(cfg, "traces.csv");
    std::ofstream csv(csv_path);
    if (!csv) throw ConfigError("cannot write traces.csv");
    csv << "t";
    for (int i = 0; i < n; ++i) csv << ",x_" << i;
    for (int i = 0; i < p; ++i) csv << ",u_" << i;
    for (int i = 0; i < n; ++i) csv << ",w_hat_" << i;
    for (int i = 0; i < n; ++i) csv << ",pred_x_" << i;
    for (int i = 0; i < p; ++i) csv << ",pred_u_" << i;
    csv << "\n";
    char buf[64];
    for (int t = 0; t < horizon; ++t) {
        csv << t;
        auto put = [&](double v) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            csv << buf;
        };
        for (int i = 0; i < n; ++i) put(traces.x.sample(t)(i));
        for (int i = 0; i < p; ++i) put(traces.u.sample(t)(i));
        for (int i = 0; i < n; ++i) put(traces.w_hat.sample(t)(i));
        for (int i = 0; i < n; ++i) put(pred_x.sample(t)(i));
        for (int i = 0; i < p; ++i) put(pred_u.sample(t)(i));
        csv << "\n";
    }
    csv.close();

    std::vector<std::string> names;
    std::vector<std::vector<double>> series;
    auto add_series = [&](const std::string& base, const Signal& sig, int count) {
        for (int i = 0; i < count; ++i) {
            names.push_back(base + std::to_string(i));
            std::vector<double> vals(horizon);
            for (int t = 0; t < horizon; ++t) vals[t] = sig.sample(t)(i);
            series.push_back(std::move(vals));
        }
    };
    add_series("x_", traces.x, n);
    add_series("u_", traces.u, p);
    add_series("pred_x_", pred_x, n);
    add_series("pred_u_", pred_u, p);
    write_traces_svg(out_path(cfg, "traces.svg"), names, series);

    double max_gap = 0.0;
    for (int t = 0; t < horizon; ++t) {
        max_gap = std::max(max_gap,
                           (traces.x.sample(t) - pred_x.sample(t)).cwiseAbs().maxCoeff());
        max_gap = std::max(max_gap,
                           (traces.u.sample(t) - pred_u.sample(t)).cwiseAbs().maxCoeff());
    }
    std::printf("simulated %d steps; predicted-vs-simulated max gap %.3g\n", horizon, max_gap);
    std::printf("wrote %s\n", csv_path.c_str());
    return kExitOk;
}

int run_norm(const std::string& result_path) {
    const StoredResult stored = load_result(result_path);
    SystemResponse resp = [&] {
        try {
            return stored.make_response();
        } catch (const std::invalid_argument& e) {
            throw CertificateError(std::string("stored response rejected: ") + e.what());
        }
    }();
    const CostOutput cost(stored.C, stored.D);
    const double nq = l1_norm(resp.weighted(cost));
    const double nphi = l1_norm(resp.stacked());
    if (std::abs(nq - stored.norm_qphi) > 1e-10 * std::max(1.0, stored.norm_qphi) ||
        std::abs(nphi - stored.norm_phi) > 1e-10 * std::max(1.0, stored.norm_phi))
        throw CertificateError("stored norms disagree with the reloaded taps");
    const double lhs = nq + stored.gamma_star * stored.epsilon * nphi;
    const bool ok = lhs < stored.gamma_star;
    std::printf("||Q Phi|| + gamma*eps*||Phi|| = %.12g + %.12g * %.12g * %.12g = %.12g %s gamma = "
                "%.12g  [%s]\n",
                nq, stored.gamma_star, stored.epsilon, nphi, lhs, ok ? "<" : ">=",
                stored.gamma_star, ok ? "OK" : "VIOLATED");
    return ok ? kExitOk : kExitViolation;
}

template <typename Fn>
int guarded(const Fn& fn, bool certificate_is_violation) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const SynthesisInfeasible& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kExitInfeasible;
    } catch (const CertificateError& e) {
        std::fprintf(stderr, "certificate: %s\n", e.what());
        return certificate_is_violation ? kExitViolation : kExitNumerical;
    } catch (const LpFault& e) {
        std::fprintf(stderr, "lp fault: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"System level synthesis: robust L1 controller design and verification"};
    app.require_subcommand(1);

    std::string config_path, result_path, input = "impulse";
    std::uint64_t seed = 0;

    CLI::App* synth = app.add_subcommand("synth", "synthesize a robust controller");
    synth->add_option("config", config_path, "JSON problem description")->required();

    CLI::App* verify = app.add_subcommand("verify", "sample perturbations against a result");
    verify->add_option("config", config_path, "JSON problem description")->required();
    verify->add_option("result", result_path, "result.json from synth")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "closed-loop traces and plot");
    simulate->add_option("config", config_path, "JSON problem description")->required();
    simulate->add_option("result", result_path, "result.json from synth")->required();
    simulate->add_option("--input", input, "impulse | step | <file.csv>");
    simulate->add_option("--seed", seed, "perturbation seed");

    CLI::App* norm = app.add_subcommand("norm", "print the certificate line of a result");
    norm->add_option("result", result_path, "result.json from synth")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    if (synth->parsed()) return guarded([&] { return run_synth(config_path); }, false);
    if (verify->parsed())
        return guarded([&] { return run_verify(config_path, result_path); }, true);
    if (simulate->parsed())
        return guarded([&] { return run_simulate(config_path, result_path, input, seed); }, true);
    return guarded([&] { return run_norm(result_path); }, true);
}
