#include "sls/run_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sls {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Matrix parse_matrix(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty()) throw ConfigError(name + ": expected a non-empty 2-D array");
    const int rows = static_cast<int>(j.size());
    if (!j[0].is_array() || j[0].empty())
        throw ConfigError(name + ": expected a non-empty 2-D array");
    const int cols = static_cast<int>(j[0].size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
            throw ConfigError(name + ": rows must have equal length");
        for (int c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) throw ConfigError(name + ": entries must be numbers");
            m(i, c) = j[i][c].get<double>();
            if (!std::isfinite(m(i, c))) throw ConfigError(name + ": entries must be finite");
        }
    }
    return m;
}

std::string matrix_json(const Matrix& m, int indent) {
    std::string pad(indent, ' ');
    std::string out = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) out += ",";
        out += "\n" + pad + "  [";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ", ";
            out += fmt(m(i, c));
        }
        out += "]";
    }
    out += "\n" + pad + "]";
    return out;
}

std::string taps_json(const std::vector<Matrix>& taps, int indent) {
    std::string pad(indent, ' ');
    std::string out = "[";
    for (size_t k = 0; k < taps.size(); ++k) {
        if (k) out += ",";
        out += "\n" + pad + "  " + matrix_json(taps[k], indent + 2);
    }
    out += "\n" + pad + "]";
    return out;
}

json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string(what) + " not readable: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
    }
    return j;
}

}  // namespace

SynthesisProblem RunConfig::make_problem() const {
    SynthesisProblem prob{make_plant(), make_cost(), epsilon, fir_horizon,
                          std::nullopt,  margin,      gamma_tol};
    if (locality) {
        const SupportGraph graph = SupportGraph::from_plant(prob.plant);
        prob.mask = locality_mask(graph, locality->first, fir_horizon, locality->second);
    }
    prob.validate();
    return prob;
}

RunConfig load_config(const std::string& path) {
    const json j = load_json_file(path, "config");
    RunConfig cfg;
    try {
        if (!j.contains("plant") || !j.contains("cost") || !j.contains("uncertainty") ||
            !j.contains("synthesis"))
            throw ConfigError("config: plant, cost, uncertainty, and synthesis are required");
        cfg.A = parse_matrix(j["plant"].at("A"), "plant.A");
        cfg.B = parse_matrix(j["plant"].at("B"), "plant.B");
        cfg.C = parse_matrix(j["cost"].at("C"), "cost.C");
        cfg.D = parse_matrix(j["cost"].at("D"), "cost.D");
        cfg.epsilon = j["uncertainty"].at("epsilon").get<double>();
        if (cfg.epsilon < 0 || !std::isfinite(cfg.epsilon))
            throw ConfigError("uncertainty.epsilon must be a nonnegative number");

        const json& syn = j["synthesis"];
        cfg.fir_horizon = syn.at("fir_horizon").get<int>();
        if (cfg.fir_horizon < 1) throw ConfigError("synthesis.fir_horizon must be >= 1");
        if (syn.contains("locality")) {
            const json& loc = syn["locality"];
            const int d = loc.at("d").get<int>();
            const int tau = loc.value("tau", 0);
            if (d < 0 || tau < 0) throw ConfigError("synthesis.locality: d, tau must be >= 0");
            cfg.locality = {d, tau};
        }
        cfg.gamma_tol = syn.value("gamma_tol", 1e-3);
        cfg.margin = syn.value("margin", 1e-6);
        if (syn.contains("gamma_hi") && !syn["gamma_hi"].is_string())
            cfg.gamma_hi = syn["gamma_hi"].get<double>();
        else if (syn.contains("gamma_hi") && syn["gamma_hi"].get<std::string>() != "auto")
            throw ConfigError("synthesis.gamma_hi must be a number or \"auto\"");

        if (j.contains("verify")) {
            const json& ver = j["verify"];
            cfg.verify.samples = ver.value("samples", 200);
            cfg.verify.horizon = ver.value("horizon", 0);
            cfg.verify.seed = ver.value("seed", 0ULL);
            if (ver.contains("kinds")) {
                cfg.verify.kinds.clear();
                for (const auto& k : ver["kinds"])
                    cfg.verify.kinds.push_back(
                        perturbation_kind_from_string(k.get<std::string>()));
                if (cfg.verify.kinds.empty()) throw ConfigError("verify.kinds must be non-empty");
            }
            if (cfg.verify.samples < 0) throw ConfigError("verify.samples must be >= 0");
        }
        if (j.contains("output")) cfg.output_dir = j["output"].value("dir", ".");

        // Cross-field shape checks surface here rather than deep in synthesis.
        (void)cfg.make_problem();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

void write_result_json(const std::string& path, const SynthesisResult& result) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write result file: " + path);
    const SynthesisProblem& prob = result.problem;
    const double lhs = result.norm_qphi + result.gamma_star * prob.epsilon * result.norm_phi;
    out << "{\n";
    out << "  \"gamma_star\": " << fmt(result.gamma_star) << ",\n";
    out << "  \"epsilon\": " << fmt(prob.epsilon) << ",\n";
    out << "  \"fir_horizon\": " << prob.fir_horizon << ",\n";
    out << "  \"margin\": " << fmt(prob.margin) << ",\n";
    out << "  \"gamma_tol\": " << fmt(prob.gamma_tol) << ",\n";
    out << "  \"norms\": {\"q_phi\": " << fmt(result.norm_qphi)
        << ", \"phi\": " << fmt(result.norm_phi) << "},\n";
    out << "  \"eq22_lhs\": " << fmt(lhs) << ",\n";
    out << "  \"residual_max\": " << fmt(result.residual_max) << ",\n";
    out << "  \"cost\": {\n";
    out << "    \"C\": " << matrix_json(prob.cost.C, 4) << ",\n";
    out << "    \"D\": " << matrix_json(prob.cost.D, 4) << "\n";
    out << "  },\n";
    out << "  \"phi_x\": " << taps_json(result.response.phi_x().taps(), 2) << ",\n";
    out << "  \"phi_u\": " << taps_json(result.response.phi_u().taps(), 2) << ",\n";
    out << "  \"bisection_trace\": [";
    for (size_t i = 0; i < result.bisection_trace.size(); ++i) {
        if (i) out << ",";
        out << "\n    {\"gamma\": " << fmt(result.bisection_trace[i].gamma)
            << ", \"feasible\": " << (result.bisection_trace[i].feasible ? "true" : "false")
            << "}";
    }
    out << "\n  ]\n";
    out << "}\n";
}

StoredResult load_result(const std::string& path) {
    const json j = load_json_file(path, "result");
    StoredResult r{};
    try {
        r.gamma_star = j.at("gamma_star").get<double>();
        r.epsilon = j.at("epsilon").get<double>();
        r.fir_horizon = j.at("fir_horizon").get<int>();
        r.margin = j.at("margin").get<double>();
        r.gamma_tol = j.at("gamma_tol").get<double>();
        r.norm_qphi = j.at("norms").at("q_phi").get<double>();
        r.norm_phi = j.at("norms").at("phi").get<double>();
        r.eq22_lhs = j.at("eq22_lhs").get<double>();
        r.residual_max = j.at("residual_max").get<double>();
        r.C = parse_matrix(j.at("cost").at("C"), "result cost.C");
        r.D = parse_matrix(j.at("cost").at("D"), "result cost.D");
        for (const auto& tap : j.at("phi_x")) r.phi_x.push_back(parse_matrix(tap, "phi_x tap"));
        for (const auto& tap : j.at("phi_u")) r.phi_u.push_back(parse_matrix(tap, "phi_u tap"));
        if (j.contains("bisection_trace"))
            for (const auto& probe : j["bisection_trace"])
                r.trace.push_back(
                    {probe.at("gamma").get<double>(), probe.at("feasible").get<bool>()});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("result: ") + e.what());
    }
    if (r.phi_x.empty() || r.phi_x.size() != r.phi_u.size())
        throw ConfigError("result: phi_x/phi_u tap lists are inconsistent");
    return r;
}

SystemResponse StoredResult::make_response() const {
    const int n = static_cast<int>(phi_x[0].rows());
    const int p = static_cast<int>(phi_u[0].rows());
    FirResponse fx(n, n, phi_x);
    FirResponse fu(p, n, phi_u);
    return SystemResponse(std::move(fx), std::move(fu));
}

void write_verify_json(const std::string& path, const VerifySummary& summary, double gamma_star) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write verify file: " + path);
    out << "{\n";
    out << "  \"samples\": " << summary.samples << ",\n";
    out << "  \"gamma_star\": " << fmt(gamma_star) << ",\n";
    out << "  \"max_gain\": " << fmt(summary.max_gain) << ",\n";
    out << "  \"min_margin\": " << fmt(summary.min_margin) << ",\n";
    out << "  \"violations\": " << summary.violations << ",\n";
    out << "  \"max_witness_error\": " << fmt(summary.max_witness_error) << "\n";
    out << "}\n";
}

void write_traces_svg(const std::string& path, const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& series) {
    require(names.size() == series.size(), "write_traces_svg: names/series mismatch");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write svg file: " + path);

    const double width = 860, height = 420, ml = 50, mr = 150, mt = 15, mb = 30;
    size_t horizon = 1;
    double lo = 0.0, hi = 0.0;
    for (const auto& s : series) {
        horizon = std::max(horizon, s.size());
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double px = (width - ml - mr) / std::max<size_t>(1, horizon - 1);
    const double py = (height - mt - mb) / (hi - lo);
    auto xc = [&](size_t t) { return ml + px * static_cast<double>(t); };
    auto yc = [&](double v) { return height - mb - py * (v - lo); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf"};
    char buf[128];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#444\"/>\n", ml,
                  height - mb, width - mr, height - mb);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#444\"/>\n", ml, mt, ml,
                  height - mb);
    out << buf;
    if (lo < 0.0 && hi > 0.0) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%g\" y1=\"%.6g\" x2=\"%g\" y2=\"%.6g\" stroke=\"#bbb\" "
                      "stroke-dasharray=\"3 3\"/>\n",
                      ml, yc(0.0), width - mr, yc(0.0));
        out << buf;
    }
    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 8];
        const bool dashed = names[s].rfind("pred_", 0) == 0;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (dashed) out << " stroke-dasharray=\"6 3\"";
        out << " points=\"";
        for (size_t t = 0; t < series[s].size(); ++t) {
            std::snprintf(buf, sizeof(buf), "%.6g,%.6g ", xc(t), yc(series[s][t]));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.6g\" y=\"%.6g\" font-size=\"11\" fill=\"%s\">", width - mr + 8,
                      mt + 14.0 * static_cast<double>(s + 1), color);
        out << buf << names[s] << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace sls
