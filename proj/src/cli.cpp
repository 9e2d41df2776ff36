#include "augtrunc/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "augtrunc/config.hpp"
#include "augtrunc/error.hpp"
#include "augtrunc/simulate.hpp"
#include "augtrunc/solver.hpp"
#include "augtrunc/sweep.hpp"
#include "json.hpp"

namespace augtrunc {

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json estimate_json(const SimEstimate& e) { return {{"value", e.value}, {"se", e.se}}; }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
}

// Level used by the single-kernel subcommands.
FiniteKernel kernel_for(const SweepConfig& cfg, std::optional<std::size_t> level, std::size_t& n) {
    n = level.value_or(cfg.grid.n_max);
    std::size_t floor = cfg.anchor;
    for (auto p : cfg.probes) floor = std::max(floor, p);
    if (n < floor) throw Error(ErrorCode::InvalidConfig, "level below the anchor or a probe");
    const ChainSpec spec = make_builtin(cfg.model);
    if (spec.size() && n >= *spec.size())
        throw Error(ErrorCode::InvalidConfig, "level beyond the last state");
    return build_kernel(spec, cfg.scheme, n);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Truncation sweeps, Poisson solutions and variance constants of Markov chains"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::size_t> level;
    unsigned threads = 1;

    auto* sweep = app.add_subcommand("sweep", "Run a truncation sweep and diagnose convergence");
    std::optional<std::string> csv_path, json_path;
    bool expect_converged = false, timing = false;
    sweep->add_option("--config", config_path, "JSON config")->required();
    sweep->add_option("--csv", csv_path, "CSV output path (overrides the config; '-' for stdout)");
    sweep->add_option("--json", json_path, "JSON report path (overrides the config)");
    sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_flag("--expect-converged", expect_converged, "Exit 4 on a Diverging or Oscillating verdict");
    sweep->add_flag("--timing", timing, "Fill the ms column");

    auto* solve = app.add_subcommand("solve", "Solve the Poisson equation at one level");
    solve->add_option("--config", config_path, "JSON config")->required();
    solve->add_option("--level", level, "Truncation level (default: grid.n_max)");

    auto* var = app.add_subcommand("variance", "Variance constant at one level, both routes");
    var->add_option("--config", config_path, "JSON config")->required();
    var->add_option("--level", level, "Truncation level (default: grid.n_max)");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of the return quantities");
    SimConfig sc;
    std::optional<std::size_t> start;
    sim->add_option("--config", config_path, "JSON config")->required();
    sim->add_option("--level", level, "Truncation level (default: grid.n_max)");
    sim->add_option("--reps", sc.replications, "Replications")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sc.seed, "Seed");
    sim->add_option("--start", start, "Start state (default: the anchor)");
    sim->add_option("--max-steps", sc.max_steps, "Total step budget")->check(CLI::PositiveNumber);
    sim->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        SweepConfig cfg = load_sweep_config(config_path);

        if (sweep->parsed()) {
            if (csv_path) cfg.output.csv = *csv_path;
            if (json_path) cfg.output.json = *json_path;
            cfg.output.timing = cfg.output.timing || timing;
            cfg.expect_converged = cfg.expect_converged || expect_converged;
            const SweepReport r = run_sweep(cfg, threads);

            const std::string csv = to_csv(r);
            if (!cfg.output.csv || *cfg.output.csv == "-")
                out << csv;
            else
                write_file(*cfg.output.csv, csv);
            if (cfg.output.json) write_file(*cfg.output.json, to_json(r));

            std::size_t failed = 0;
            for (const auto& row : r.rows)
                if (!row.ok) {
                    ++failed;
                    err << "n=" << row.n << " failed: " << row.error << "\n";
                }
            err << "diagnosis (heuristic): " << to_string(r.diagnosis.verdict) << "\n";
            for (const auto& c : r.diagnosis.columns)
                err << "  " << c.column << ": " << to_string(c.verdict) << (c.detail.empty() ? "" : " [" + c.detail + "]")
                    << "\n";
            if (failed == r.rows.size()) return kExitNumerical;
            const Verdict v = r.diagnosis.verdict;
            if (cfg.expect_converged && (v == Verdict::Diverging || v == Verdict::Oscillating))
                return kExitNotConverged;
            return kExitOk;
        }

        std::size_t n = 0;
        const FiniteKernel k = kernel_for(cfg, level, n);
        const Eigen::VectorXd g = cfg.g.restrict(n);

        if (solve->parsed()) {
            const PoissonSolution p = poisson_solve(k, g, cfg.anchor);
            json doc = {{"n", n},           {"scheme", k.scheme_tag}, {"anchor", cfg.anchor},
                        {"pi_g", p.mean},   {"pi", vector_json(p.pi)}, {"f", vector_json(p.f)},
                        {"residual", p.residual}};
            out << doc.dump(2) << "\n";
            return kExitOk;
        }
        if (var->parsed()) {
            const Analysis a = analyze(k, g, cfg.anchor);
            json doc = {{"n", n},
                        {"scheme", k.scheme_tag},
                        {"anchor", cfg.anchor},
                        {"pi_g", a.poisson.mean},
                        {"sigma2", a.variance.sigma2},
                        {"regenerative", a.variance.regenerative},
                        {"stationary", a.variance.stationary}};
            out << doc.dump(2) << "\n";
            return kExitOk;
        }
        // simulate
        sc.anchor = cfg.anchor;
        sc.start = start.value_or(cfg.anchor);
        sc.threads = threads;
        const SimResult s = simulate_return(k, sc, g);
        const ReturnMoments m = return_moments(k, g, cfg.anchor);
        const auto i = static_cast<Eigen::Index>(sc.start);
        json exact = {{"tau", m.m1(i)}, {"tau2", m.m2(i)}, {"zeta", m.h(i)}, {"zeta2", m.s(i)}, {"zeta_tau", m.u(i)}};
        if (sc.start == sc.anchor) exact["sigma2"] = variance(k, g, cfg.anchor).sigma2;
        json doc = {{"n", n},
                    {"scheme", k.scheme_tag},
                    {"anchor", sc.anchor},
                    {"start", sc.start},
                    {"replications", sc.replications},
                    {"seed", sc.seed},
                    {"tau", estimate_json(s.tau)},
                    {"tau2", estimate_json(s.tau2)},
                    {"zeta", estimate_json(s.zeta)},
                    {"zeta2", estimate_json(s.zeta2)},
                    {"zeta_tau", estimate_json(s.zeta_tau)},
                    {"exact", exact}};
        if (sc.start == sc.anchor) doc["sigma2"] = estimate_json(s.sigma2);
        out << doc.dump(2) << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.is_config_error() ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace augtrunc
