// impurity-kit: command-line front end for the impurity ground-state toolkit.
//
// Exit codes: 0 success, 1 domain/input error (message on stderr),
// 2 usage error (bad flags or arguments).

#include <chrono>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "impuritykit/errors.hpp"
#include "impuritykit/exact.hpp"
#include "impuritykit/gaussian.hpp"
#include "impuritykit/model.hpp"
#include "impuritykit/norm_estimation.hpp"
#include "impuritykit/quasipoly.hpp"
#include "impuritykit/report.hpp"
#include "impuritykit/sdp.hpp"
#include "impuritykit/skew.hpp"
#include "impuritykit/variational.hpp"
#include "impuritykit/zolotarev.hpp"

namespace {

using impkit::cxd;
using impkit::Mat;
using nlohmann::ordered_json;

struct CliContext {
    std::string format = "json";
    std::string report_path;
    int threads = 0;  // 0 = unset; resolved to 1
};

int resolve_threads(const CliContext& ctx) { return ctx.threads > 0 ? ctx.threads : 1; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw impkit::IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw impkit::IoError("cannot write " + path);
    out << text;
}

void emit(impkit::RunReport& report, const CliContext& ctx) {
    report.finish();
    if (ctx.format == "csv") {
        std::cout << report.results_csv();
    } else {
        std::cout << report.results_json();
    }
    if (!ctx.report_path.empty()) write_file(ctx.report_path, report.to_json());
}

Mat matrix_from_json(const nlohmann::json& arr, const std::string& what) {
    if (!arr.is_array() || arr.empty() || !arr.front().is_array())
        throw std::invalid_argument(what + ": expected a 2-D numeric array");
    const int rows = static_cast<int>(arr.size());
    const int cols = static_cast<int>(arr.front().size());
    Mat M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto& row = arr.at(static_cast<std::size_t>(i));
        if (static_cast<int>(row.size()) != cols)
            throw std::invalid_argument(what + ": ragged rows");
        for (int j = 0; j < cols; ++j)
            M(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return M;
}

Mat matrix_from_file(const std::string& path, const std::string& key) {
    const std::string text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw impkit::IoError(path + ": " + e.what());
    }
    if (doc.is_object()) {
        if (!doc.contains(key))
            throw std::invalid_argument(path + ": missing \"" + key + "\"");
        return matrix_from_json(doc.at(key), path + "." + key);
    }
    return matrix_from_json(doc, path);
}

cxd complex_from_json(const nlohmann::json& j, const std::string& what) {
    if (j.is_number()) return cxd(j.get<double>(), 0.0);
    if (j.is_object())
        return cxd(j.value("re", 0.0), j.value("im", 0.0));
    if (j.is_array() && j.size() == 2)
        return cxd(j.at(0).get<double>(), j.at(1).get<double>());
    throw std::invalid_argument(what + ": expected number, {re, im}, or [re, im]");
}

// Superposition state file:
//   { "n": modes, "coeff": [{re, im}, ...],
//     "states": [{"cov": [[...]], "anchor": {re, im}}, ...],
//     "reference": [[...]] }   (optional; defaults to the Fock vacuum)
impkit::Superposition load_superposition(const std::string& path) {
    const std::string text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw impkit::IoError(path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("coeff") ||
        !doc.contains("states"))
        throw std::invalid_argument(path + ": expected {n, coeff, states}");
    const int n = doc.at("n").get<int>();
    if (n < 1) throw std::invalid_argument(path + ".n: must be >= 1");
    Mat ref = doc.contains("reference")
                  ? matrix_from_json(doc.at("reference"), path + ".reference")
                  : impkit::vacuum_covariance(n);
    impkit::GaussianFrame frame(std::move(ref));
    std::vector<cxd> coeff;
    for (std::size_t i = 0; i < doc.at("coeff").size(); ++i)
        coeff.push_back(complex_from_json(doc.at("coeff").at(i),
                                          path + ".coeff[" + std::to_string(i) + "]"));
    std::vector<impkit::GaussianState> states;
    for (std::size_t i = 0; i < doc.at("states").size(); ++i) {
        const auto& s = doc.at("states").at(i);
        const std::string where = path + ".states[" + std::to_string(i) + "]";
        Mat cov = matrix_from_json(s.at("cov"), where + ".cov");
        if (cov.rows() != 2 * n || cov.cols() != 2 * n)
            throw std::invalid_argument(where + ".cov: expected " +
                                        std::to_string(2 * n) + "x" +
                                        std::to_string(2 * n));
        if (s.contains("anchor")) {
            states.push_back(frame.anchor(std::move(cov),
                                          complex_from_json(s.at("anchor"),
                                                            where + ".anchor")));
        } else {
            states.push_back(frame.anchor(cov));
        }
    }
    if (coeff.size() != states.size())
        throw std::invalid_argument(path + ": coeff and states lengths differ");
    return impkit::Superposition{std::move(frame), std::move(coeff), std::move(states)};
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_trace_csv(const std::string& path,
                     const std::vector<impkit::TraceEntry>& trace) {
    std::ostringstream out;
    out << "step,energy,theta\n";
    char buf[64];
    for (const auto& e : trace) {
        out << e.step << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", e.energy);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", e.theta);
        out << buf << "\n";
    }
    write_file(path, out.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground-state tools for free-fermion baths coupled to a small "
                 "interacting impurity"};
    app.require_subcommand(1);

    CliContext ctx;
    app.add_option("--format", ctx.format, "Result format on stdout")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    app.add_option("--report", ctx.report_path,
                   "Also write a full run report (command, input digest, seed, "
                   "wall time) to this JSON file");
    app.add_option("--threads", ctx.threads,
                   "Worker threads for restart-parallel solvers")
        ->envname("IMPURITY_KIT_THREADS");

    // ---- pfaffian ---------------------------------------------------------
    auto* pf_cmd = app.add_subcommand(
        "pfaffian", "Pfaffian of a real antisymmetric matrix from a JSON file");
    pf_cmd->fallthrough();
    std::string pf_file;
    pf_cmd->add_option("--file", pf_file, "JSON file: 2-D array or {\"matrix\": [[...]]}")
        ->required();

    // ---- zolotarev --------------------------------------------------------
    auto* zol_cmd = app.add_subcommand(
        "zolotarev", "Rational sqrt approximations on [omega, 1]: measured "
                     "worst-case relative error and proven bound per degree");
    zol_cmd->fallthrough();
    double zol_omega = 0.0;
    int zol_dmax = 0;
    zol_cmd->add_option("--omega", zol_omega, "Left endpoint, 0 < omega <= 1")->required();
    zol_cmd->add_option("--d-max", zol_dmax, "Largest degree d to tabulate")
        ->required()
        ->check(CLI::PositiveNumber);

    // ---- solve ------------------------------------------------------------
    auto* solve_cmd = app.add_subcommand("solve", "Ground-state solvers");
    solve_cmd->fallthrough();
    solve_cmd->require_subcommand(1);

    auto* qp_cmd = solve_cmd->add_subcommand(
        "quasipoly", "Certified-accuracy subspace solver for gapped models");
    qp_cmd->fallthrough();
    std::string qp_model;
    double qp_gamma = 0.0;
    int qp_sstar = 0;
    int qp_dimcap = 20000;
    qp_cmd->add_option("--model", qp_model, "Model JSON file")->required();
    qp_cmd->add_option("--gamma", qp_gamma, "Accuracy / gap parameter in (0, 1/2]")
        ->required();
    qp_cmd->add_option("--s-star", qp_sstar,
                       "Fixed occupation budget (default: adaptive)");
    qp_cmd->add_option("--dim-cap", qp_dimcap, "Subspace dimension cap")
        ->capture_default_str();

    auto* var_cmd = solve_cmd->add_subcommand(
        "variational", "Stochastic descent over rank-chi Gaussian superpositions");
    var_cmd->fallthrough();
    std::string var_model, var_trace;
    int var_chi = 1, var_steps = 20000, var_restarts = 1, var_window = 100;
    double var_theta0 = 0.3, var_epsilon = 0.2, var_f0 = 0.1;
    std::uint64_t var_seed = 0;
    var_cmd->add_option("--model", var_model, "Model JSON file")->required();
    var_cmd->add_option("--chi", var_chi, "Superposition rank")
        ->required()
        ->check(CLI::PositiveNumber);
    var_cmd->add_option("--steps", var_steps, "Walk steps per restart")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    var_cmd->add_option("--restarts", var_restarts, "Independent restarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    var_cmd->add_option("--seed", var_seed, "Base RNG seed")->capture_default_str();
    var_cmd->add_option("--theta0", var_theta0, "Initial step angle")
        ->capture_default_str();
    var_cmd->add_option("--epsilon", var_epsilon, "Step-size adaptation factor")
        ->capture_default_str();
    var_cmd->add_option("--f0", var_f0, "Target acceptance fraction")
        ->capture_default_str();
    var_cmd->add_option("--window", var_window, "Adaptation window (steps)")
        ->capture_default_str();
    var_cmd->add_option("--trace", var_trace,
                        "Write accepted-step trace (CSV) of the best restart");

    // ---- bound sdp --------------------------------------------------------
    auto* bound_cmd = app.add_subcommand("bound", "Certified lower bounds");
    bound_cmd->fallthrough();
    bound_cmd->require_subcommand(1);
    auto* sdp_cmd = bound_cmd->add_subcommand(
        "sdp", "Degree-3 moment-matrix relaxation");
    sdp_cmd->fallthrough();
    sdp_cmd->require_subcommand(1);

    std::string sdp_model, sdp_rotation_file, sdp_out, sdp_cert;
    int sdp_k = 0;
    double sdp_tol = 1e-8;
    double sdp_budget_mb = 1024.0;

    auto* sdp_build = sdp_cmd->add_subcommand(
        "build", "Assemble the relaxation and export it in sparse SDPA format");
    sdp_build->fallthrough();
    sdp_build->add_option("--model", sdp_model, "Model JSON file")->required();
    sdp_build->add_option("--out", sdp_out, "Output .dat-s path")->required();
    sdp_build->add_option("--rotation", sdp_rotation_file,
                          "Orthogonal 2n x 2n letter rotation (JSON; default identity)");
    sdp_build->add_option("--k", sdp_k,
                          "Rotated letters joining the impurity in triples")
        ->capture_default_str();
    sdp_build->add_option("--budget-mb", sdp_budget_mb,
                          "Memory budget for the dependency scan (MiB)")
        ->capture_default_str();

    auto* sdp_verify = sdp_cmd->add_subcommand(
        "verify", "Check a dual certificate against the rebuilt relaxation");
    sdp_verify->fallthrough();
    sdp_verify->add_option("--model", sdp_model, "Model JSON file")->required();
    sdp_verify->add_option("--cert", sdp_cert, "Certificate JSON {y0, y}")->required();
    sdp_verify->add_option("--rotation", sdp_rotation_file,
                           "Letter rotation used at build time (JSON)");
    sdp_verify->add_option("--k", sdp_k, "k used at build time")->capture_default_str();
    sdp_verify->add_option("--tol", sdp_tol, "Accepted eigenvalue slack")
        ->capture_default_str();
    sdp_verify->add_option("--budget-mb", sdp_budget_mb,
                           "Memory budget for the dependency scan (MiB)")
        ->capture_default_str();

    auto* sdp_baseline = sdp_cmd->add_subcommand(
        "baseline", "Produce the always-feasible bisection certificate");
    sdp_baseline->fallthrough();
    sdp_baseline->add_option("--model", sdp_model, "Model JSON file")->required();
    sdp_baseline->add_option("--out", sdp_cert, "Certificate output path")->required();
    sdp_baseline->add_option("--rotation", sdp_rotation_file,
                             "Letter rotation (JSON; default identity)");
    sdp_baseline->add_option("--k", sdp_k, "Rotated letters in triples")
        ->capture_default_str();
    sdp_baseline->add_option("--budget-mb", sdp_budget_mb,
                             "Memory budget for the dependency scan (MiB)")
        ->capture_default_str();

    // ---- exact ------------------------------------------------------------
    auto* exact_cmd = app.add_subcommand(
        "exact", "Exact ground energy (dense spectrum or Lanczos)");
    exact_cmd->fallthrough();
    std::string ex_model, ex_method = "auto";
    std::uint64_t ex_seed = impkit::LanczosOptions{}.seed;
    exact_cmd->add_option("--model", ex_model, "Model JSON file")->required();
    exact_cmd->add_option("--method", ex_method, "auto | dense | lanczos")
        ->check(CLI::IsMember({"auto", "dense", "lanczos"}))
        ->capture_default_str();
    exact_cmd->add_option("--seed", ex_seed, "Lanczos start-vector seed")
        ->capture_default_str();

    // ---- bench anderson ---------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "Built-in benchmark families");
    bench_cmd->fallthrough();
    bench_cmd->require_subcommand(1);
    auto* and_cmd = bench_cmd->add_subcommand(
        "anderson", "Single-impurity chain with on-site repulsion");
    and_cmd->fallthrough();
    int and_n = 0, and_chi = 1, and_steps = 20000, and_restarts = 1;
    double and_u = 0.0, and_gamma = 0.1;
    std::string and_method = "exact";
    std::uint64_t and_seed = 0;
    and_cmd->add_option("--n", and_n, "Total modes (impurity + chain)")
        ->required()
        ->check(CLI::PositiveNumber);
    and_cmd->add_option("--u", and_u, "On-site repulsion strength")->required();
    and_cmd->add_option("--method", and_method, "exact | quasipoly | variational")
        ->check(CLI::IsMember({"exact", "quasipoly", "variational"}))
        ->capture_default_str();
    and_cmd->add_option("--gamma", and_gamma, "Accuracy parameter (quasipoly)")
        ->capture_default_str();
    and_cmd->add_option("--chi", and_chi, "Rank (variational)")->capture_default_str();
    and_cmd->add_option("--steps", and_steps, "Walk steps (variational)")
        ->capture_default_str();
    and_cmd->add_option("--restarts", and_restarts, "Restarts (variational)")
        ->capture_default_str();
    and_cmd->add_option("--seed", and_seed, "RNG seed (variational)")
        ->capture_default_str();

    // ---- norm-estimate ----------------------------------------------------
    auto* norm_cmd = app.add_subcommand(
        "norm-estimate", "Monte Carlo squared norm of a Gaussian superposition");
    norm_cmd->fallthrough();
    std::string nm_state;
    double nm_eps = 0.1, nm_pfail = 0.1;
    std::uint64_t nm_seed = 0;
    long long nm_samples = 0;
    norm_cmd->add_option("--state", nm_state, "Superposition state JSON file")
        ->required();
    norm_cmd->add_option("--eps", nm_eps, "Relative accuracy target")
        ->capture_default_str();
    norm_cmd->add_option("--pfail", nm_pfail, "Failure probability target")
        ->capture_default_str();
    norm_cmd->add_option("--samples", nm_samples,
                         "Sample count override (0 = derived from eps, pfail)")
        ->capture_default_str();
    norm_cmd->add_option("--seed", nm_seed, "Base RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*pf_cmd) {
            impkit::RunReport report("pfaffian");
            const std::string text = read_file(pf_file);
            report.set_digest_of(text);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(text);
            } catch (const nlohmann::json::exception& e) {
                throw impkit::IoError(pf_file + ": " + e.what());
            }
            Mat M = doc.is_object() ? matrix_from_json(doc.at("matrix"), pf_file)
                                    : matrix_from_json(doc, pf_file);
            const double value = impkit::pfaffian(M);
            report.results()["size"] = M.rows();
            report.results()["pfaffian"] = value;
            emit(report, ctx);
        } else if (*zol_cmd) {
            impkit::RunReport report("zolotarev");
            report.set_digest_of("omega=" + std::to_string(zol_omega) +
                                 ";d_max=" + std::to_string(zol_dmax));
            auto rows = ordered_json::array();
            for (int d = 1; d <= zol_dmax; ++d) {
                const auto z = impkit::zolotarev_build(zol_omega, d);
                ordered_json row;
                row["omega"] = zol_omega;
                row["d"] = d;
                row["r"] = impkit::zolotarev_worst_case_error(z);
                row["bound"] = impkit::zolotarev_error_bound(zol_omega, d);
                rows.push_back(std::move(row));
            }
            report.results()["rows"] = std::move(rows);
            emit(report, ctx);
        } else if (*qp_cmd) {
            impkit::RunReport report("solve quasipoly");
            const std::string text = read_file(qp_model);
            report.set_digest_of(text);
            const auto model = impkit::model_from_json(text);
            impkit::QuasipolyOptions opts;
            opts.dim_cap = qp_dimcap;
            opts.s_star = qp_sstar;
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = impkit::solve_quasipoly(model, qp_gamma, opts);
            const double secs = elapsed_since(t0);
            report.results()["E"] = res.energy;
            report.results()["E_undeformed"] = res.undeformed_energy;
            report.results()["s_star"] = res.s_star;
            report.results()["dim"] = res.dim;
            report.results()["gamma"] = res.gamma;
            report.results()["spacing"] = res.spacing;
            report.results()["elapsed"] = secs;
            emit(report, ctx);
        } else if (*var_cmd) {
            impkit::RunReport report("solve variational");
            const std::string text = read_file(var_model);
            report.set_digest_of(text);
            report.set_seed(var_seed);
            const auto model = impkit::model_from_json(text);
            impkit::WalkConfig config;
            config.steps = var_steps;
            config.restarts = var_restarts;
            config.theta0 = var_theta0;
            config.epsilon = var_epsilon;
            config.f0 = var_f0;
            config.window = var_window;
            config.seed = var_seed;
            config.threads = resolve_threads(ctx);
            const auto res = impkit::minimize(model, var_chi, config);
            report.results()["E_best"] = res.energy;
            report.results()["chi"] = var_chi;
            report.results()["steps"] = var_steps;
            report.results()["restarts"] = var_restarts;
            report.results()["seed"] = var_seed;
            report.results()["best_restart"] = res.best_restart;
            auto energies = ordered_json::array();
            for (double e : res.restart_energies) energies.push_back(e);
            report.results()["restart_energies"] = std::move(energies);
            if (!var_trace.empty()) {
                write_trace_csv(var_trace, res.trace);
                report.results()["trace_file"] = var_trace;
            }
            emit(report, ctx);
        } else if (*sdp_build || *sdp_verify || *sdp_baseline) {
            const char* name = *sdp_build ? "bound sdp build"
                               : *sdp_verify ? "bound sdp verify"
                                             : "bound sdp baseline";
            impkit::RunReport report(name);
            const std::string text = read_file(sdp_model);
            report.set_digest_of(text);
            const auto model = impkit::model_from_json(text);
            Mat rotation = sdp_rotation_file.empty()
                               ? Mat(Mat::Identity(2 * model.n(), 2 * model.n()))
                               : matrix_from_file(sdp_rotation_file, "rotation");
            impkit::SdpOptions opts;
            opts.memory_budget =
                static_cast<std::size_t>(sdp_budget_mb * 1024.0 * 1024.0);
            const auto program = impkit::build_program(model, rotation, sdp_k, opts);
            report.results()["n"] = model.n();
            report.results()["m"] = model.m();
            report.results()["k"] = sdp_k;
            report.results()["basis_size"] = program.basis.size();
            report.results()["kernel_size"] = static_cast<int>(program.kernel.size());
            if (*sdp_build) {
                impkit::export_sdpa(program, sdp_out);
                report.results()["out"] = sdp_out;
                report.results()["sdpa_dim"] = 2 * program.basis.size();
                report.results()["sdpa_vars"] =
                    1 + static_cast<int>(program.kernel.size());
            } else if (*sdp_verify) {
                const auto cert = impkit::load_certificate(sdp_cert);
                const auto check = impkit::verify_certificate(program, cert, sdp_tol);
                report.results()["valid"] = check.valid;
                report.results()["margin"] = check.margin;
                report.results()["y0"] = cert.y0;
                report.results()["tol"] = sdp_tol;
            } else {
                const auto cert = impkit::baseline_certificate(program);
                impkit::save_certificate(sdp_cert, cert);
                const auto check = impkit::verify_certificate(program, cert, 0.0);
                report.results()["y0"] = cert.y0;
                report.results()["valid"] = check.valid;
                report.results()["margin"] = check.margin;
                report.results()["out"] = sdp_cert;
            }
            emit(report, ctx);
        } else if (*exact_cmd) {
            impkit::RunReport report("exact");
            const std::string text = read_file(ex_model);
            report.set_digest_of(text);
            report.set_seed(ex_seed);
            const auto model = impkit::model_from_json(text);
            std::string method = ex_method;
            if (method == "auto") method = model.n() <= 10 ? "dense" : "lanczos";
            double energy = 0.0;
            if (method == "dense") {
                const impkit::Vec spectrum = impkit::exact_spectrum(model);
                energy = spectrum(0);
                auto levels = ordered_json::array();
                const int keep = std::min<int>(4, static_cast<int>(spectrum.size()));
                for (int i = 0; i < keep; ++i) levels.push_back(spectrum(i));
                report.results()["levels"] = std::move(levels);
            } else {
                impkit::LanczosOptions opts;
                opts.seed = ex_seed;
                energy = impkit::exact_ground_energy(model, opts);
            }
            report.results()["E"] = energy;
            report.results()["method"] = method;
            report.results()["n"] = model.n();
            report.results()["m"] = model.m();
            report.results()["seed"] = ex_seed;
            emit(report, ctx);
        } else if (*and_cmd) {
            impkit::RunReport report("bench anderson");
            report.set_digest_of("n=" + std::to_string(and_n) +
                                 ";u=" + std::to_string(and_u) +
                                 ";method=" + and_method);
            report.set_seed(and_seed);
            const auto model = impkit::anderson(and_n, and_u);
            const auto t0 = std::chrono::steady_clock::now();
            double energy = 0.0;
            if (and_method == "exact") {
                energy = impkit::exact_ground_energy(model);
            } else if (and_method == "quasipoly") {
                energy = impkit::solve_quasipoly(model, and_gamma).energy;
            } else {
                impkit::WalkConfig config;
                config.steps = and_steps;
                config.restarts = and_restarts;
                config.seed = and_seed;
                config.threads = resolve_threads(ctx);
                energy = impkit::minimize(model, and_chi, config).energy;
            }
            const double secs = elapsed_since(t0);
            report.results()["E"] = energy;
            report.results()["n"] = and_n;
            report.results()["u"] = and_u;
            report.results()["method"] = and_method;
            report.results()["seed"] = and_seed;
            report.results()["elapsed"] = secs;
            emit(report, ctx);
        } else if (*norm_cmd) {
            impkit::RunReport report("norm-estimate");
            const std::string text = read_file(nm_state);
            report.set_digest_of(text);
            report.set_seed(nm_seed);
            const auto psi = load_superposition(nm_state);
            impkit::EstimatorConfig config;
            config.eps = nm_eps;
            config.p_fail = nm_pfail;
            config.samples = nm_samples > 0 ? static_cast<std::size_t>(nm_samples) : 0;
            config.seed = nm_seed;
            const auto est = impkit::estimate_norm2(psi, config);
            report.results()["xi"] = est.value;
            report.results()["variance"] = est.variance;
            report.results()["samples"] = est.samples;
            report.results()["degenerate"] = est.degenerate;
            report.results()["eps"] = nm_eps;
            report.results()["p_fail"] = nm_pfail;
            report.results()["seed"] = nm_seed;
            emit(report, ctx);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
