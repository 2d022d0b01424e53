// Command-line driver: gen, solve, reference, verify, probe.

#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nepv/nepv.hpp"

namespace {

using nepv::io::json;
namespace fs = std::filesystem;

/// Usage problems detected after parsing; exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

nepv::cplx parse_shift(const std::string& s)
{
    const auto comma = s.find(',');
    try {
        std::size_t pos = 0;
        const double re = std::stod(s.substr(0, comma), &pos);
        if (pos != (comma == std::string::npos ? s.size() : comma)) {
            throw UsageError("bad --shift '" + s + "'");
        }
        double im = 0.0;
        if (comma != std::string::npos) {
            const std::string tail = s.substr(comma + 1);
            im = std::stod(tail, &pos);
            if (pos != tail.size()) {
                throw UsageError("bad --shift '" + s + "'");
            }
        }
        return {re, im};
    } catch (const std::logic_error&) {
        throw UsageError("bad --shift '" + s + "', expected re[,im]");
    }
}

/// "random:SEED", "identity-row:SEED" or "file:PATH.mtx".
nepv::RSpec parse_r_spec(const std::string& s, std::uint64_t default_seed)
{
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto seed = [&]() -> std::uint64_t {
        if (arg.empty()) {
            return default_seed;
        }
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(arg, &pos);
            if (pos != arg.size()) {
                throw UsageError("bad seed in --r-spec '" + s + "'");
            }
            return v;
        } catch (const std::logic_error&) {
            throw UsageError("bad seed in --r-spec '" + s + "'");
        }
    };
    if (kind == "random") {
        return nepv::RSpec::random(seed());
    }
    if (kind == "identity-row") {
        return nepv::RSpec::identity_plus_random_row(seed());
    }
    if (kind == "file" && !arg.empty()) {
        return nepv::RSpec::explicit_matrix(nepv::io::read_matrix_market(arg));
    }
    throw UsageError("unknown --r-spec '" + s + "'");
}

/// Loads a bundle; any failure to read it is a usage error.
nepv::io::ProblemBundle load(const std::string& dir)
{
    try {
        return nepv::io::load_bundle(dir);
    } catch (const nepv::IoError& e) {
        throw UsageError(std::string("cannot load bundle: ") + e.what());
    }
}

std::string default_r_spec(const nepv::io::Manifest& man)
{
    return man.generator == "example2" ? "identity-row" : "random";
}

void print(const json& j) { std::cout << j.dump() << '\n'; }

nepv::NepvProblem generate(const std::string& kind, nepv::Index n, nepv::Index r, double L, std::uint64_t seed,
                           nepv::io::Manifest& man)
{
    try {
        if (kind == "example1") {
            man.params = {{"n", n}, {"seed", seed}};
            return nepv::gen_example1(n, seed);
        }
        if (kind == "example2") {
            man.params = {{"L", L}, {"n", n}};
            return nepv::gen_example2(L, n);
        }
        if (kind == "example3") {
            man.params = {{"n", n}, {"r", r}, {"seed", seed}};
            return nepv::gen_example3(n, r, seed);
        }
        if (kind == "four-solutions") {
            return nepv::example_four_solutions();
        }
        return nepv::example_polynomial_root();
    } catch (const nepv::InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Solver for Av = λBv + (vᴴPv / vᴴQv)Cv via compact linearization"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a problem bundle");
    std::string gen_kind;
    long long gen_n = 0;
    long long gen_r = 0;
    double gen_L = 2.0;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("kind", gen_kind, "example1 | example2 | example3 | four-solutions | polynomial-root")
        ->required()
        ->check(CLI::IsMember({"example1", "example2", "example3", "four-solutions", "polynomial-root"}));
    gen->add_option("--n", gen_n, "Problem size");
    gen->add_option("--r", gen_r, "Rank of C (example3)");
    gen->add_option("--L", gen_L, "Domain length (example2)");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Bundle directory")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "Run an Arnoldi solver on a bundle");
    std::string bundle;
    std::string algorithm = "filtering";
    std::string shift = "0";
    long long max_iter = 150;
    double tol_conv = 1e-8;
    double tol_res = 1e-8;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    bool plots = false;
    std::string r_spec;
    long long nev = 0;
    solve->add_option("bundle", bundle, "Bundle directory")->required();
    solve->add_option("--algorithm", algorithm, "filtering | two-sided | standard")
        ->check(CLI::IsMember({"filtering", "two-sided", "standard"}));
    solve->add_option("--shift", shift, "Shift as re[,im]");
    solve->add_option("--max-iter", max_iter, "Maximum Arnoldi iterations");
    solve->add_option("--tol-conv", tol_conv, "Ritz stability tolerance");
    solve->add_option("--tol-res", tol_res, "Residual tolerance for genuine solutions");
    solve->add_option("--seed", seed, "Start vector seed (and default R seed)");
    solve->add_option("--out", out_dir, "Output directory");
    solve->add_flag("--plots", plots, "Write SVG plots");
    solve->add_option("--r-spec", r_spec, "random[:SEED] | identity-row[:SEED] | file:PATH");
    solve->add_option("--nev", nev, "Stop after this many genuine solutions converged (0: never)");

    // reference
    auto* reference = app.add_subcommand("reference", "Dense reference spectrum and SCF solutions");
    std::string ref_bundle;
    std::string ref_out;
    long long trials = 64;
    std::uint64_t ref_seed = 1;
    std::string ref_r_spec;
    reference->add_option("bundle", ref_bundle, "Bundle directory")->required();
    reference->add_option("--out", ref_out, "Reference JSON file")->required();
    reference->add_option("--trials", trials, "SCF starting vectors");
    reference->add_option("--seed", ref_seed, "SCF and default R seed");
    reference->add_option("--r-spec", ref_r_spec, "random[:SEED] | identity-row[:SEED] | file:PATH");

    // verify
    auto* verify = app.add_subcommand("verify", "Compare genuine solutions with a reference");
    std::string ver_solutions;
    std::string ver_reference;
    double ver_tol = 1e-6;
    verify->add_option("solutions", ver_solutions, "solutions.json")->required();
    verify->add_option("reference", ver_reference, "reference JSON")->required();
    verify->add_option("--tol", ver_tol, "Matching tolerance");

    // probe
    auto* probe = app.add_subcommand("probe", "Report regularity of Δ₀");
    std::string probe_bundle;
    std::string probe_r_spec;
    std::uint64_t probe_seed = 1;
    probe->add_option("bundle", probe_bundle, "Bundle directory")->required();
    probe->add_option("--r-spec", probe_r_spec, "random[:SEED] | identity-row[:SEED] | file:PATH");
    probe->add_option("--seed", probe_seed, "Default R seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            nepv::io::Manifest man;
            man.generator = gen_kind;
            const nepv::NepvProblem pb = generate(gen_kind, gen_n, gen_r, gen_L, gen_seed, man);
            nepv::io::save_bundle(gen_out, pb, man);
            print({{"bundle", gen_out}, {"generator", gen_kind}, {"n", pb.n()}});
            return 0;
        }

        if (solve->parsed()) {
            const auto b = load(bundle);
            nepv::SolverConfig cfg;
            cfg.algorithm = nepv::algorithm_from_string(algorithm);
            cfg.shift = parse_shift(shift);
            cfg.max_iter = max_iter;
            cfg.tol_conv = tol_conv;
            cfg.tol.res = tol_res;
            cfg.seed = seed;
            cfg.nev = nev;
            cfg.r_spec = parse_r_spec(r_spec.empty() ? default_r_spec(b.manifest) : r_spec, seed);
            if (max_iter < 1 || !(tol_conv > 0.0) || !(tol_res > 0.0) || nev < 0) {
                throw UsageError("--max-iter must be ≥ 1, tolerances positive, --nev ≥ 0");
            }
            std::error_code ec;
            fs::create_directories(out_dir, ec);
            if (ec) {
                throw UsageError("cannot create output directory " + out_dir);
            }
            const auto t0 = std::chrono::steady_clock::now();
            const nepv::CompactLinearization lin(b.problem, cfg.r_spec);
            if (cfg.algorithm != nepv::Algorithm::standard) {
                const auto pr = nepv::delta0_probe(lin);
                if (pr.kind != nepv::Delta0Probe::Kind::regular) {
                    nepv::log::info(std::string("Δ₀ is singular (") + nepv::to_string(pr.kind) +
                                    "); the standard algorithm is the appropriate choice");
                }
            }
            cfg.observer = [](const nepv::IterationInfo& it) {
                if (nepv::log::level() == nepv::log::Level::debug) {
                    nepv::log::debug("iteration " + std::to_string(it.iteration) + ": " +
                                     std::to_string(it.ritz->values.size()) + " Ritz values");
                }
            };
            const nepv::SolverResult r = nepv::run_solver(lin, cfg);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            nepv::log::info("solve finished in " + std::to_string(secs) + " s");

            nepv::io::write_json(fs::path(out_dir) / "solutions.json", nepv::io::solutions_to_json(r));
            nepv::io::write_convergence_csv(fs::path(out_dir) / "convergence.csv", r.log);
            if (plots) {
                nepv::io::write_convergence_svg(fs::path(out_dir) / "convergence.svg", r.log);
                std::vector<nepv::cplx> ritz, genuine;
                for (const auto& v : r.final_ritz.values) {
                    ritz.push_back(v.lambda);
                }
                for (const auto& s : r.solutions) {
                    if (s.classification == nepv::Classification::genuine) {
                        genuine.push_back(s.lambda);
                    }
                }
                nepv::io::write_spectrum_svg(fs::path(out_dir) / "spectrum.svg", ritz, genuine);
            }
            json genuine = json::array();
            for (const auto& s : r.solutions) {
                if (s.classification == nepv::Classification::genuine) {
                    genuine.push_back(nepv::io::to_json(s.lambda));
                }
            }
            print({{"solutions", (fs::path(out_dir) / "solutions.json").string()},
                   {"iterations", r.iterations},
                   {"genuine_lambda", genuine}});
            return 0;
        }

        if (reference->parsed()) {
            const auto b = load(ref_bundle);
            if (trials < 1) {
                throw UsageError("--trials must be ≥ 1");
            }
            const auto spec = parse_r_spec(ref_r_spec.empty() ? default_r_spec(b.manifest) : ref_r_spec, ref_seed);
            const nepv::CompactLinearization lin(b.problem, spec);
            const auto ref = nepv::dense_reference_solve(lin);
            const auto scf = nepv::scf_multistart(b.problem, trials, nepv::ScfConfig{}, ref_seed);
            nepv::io::write_json(ref_out, nepv::io::reference_to_json(ref, &scf, nepv::Tolerances{}.dedup));
            print({{"reference", ref_out},
                   {"entries", ref.entries.size()},
                   {"genuine", ref.genuine().size()},
                   {"scf", scf.solutions.size()}});
            return 0;
        }

        if (verify->parsed()) {
            nepv::io::json sj, rj;
            try {
                sj = nepv::io::read_json(ver_solutions);
                rj = nepv::io::read_json(ver_reference);
            } catch (const nepv::IoError& e) {
                throw UsageError(e.what());
            }
            std::vector<nepv::CandidateSolution> found;
            for (auto& c : nepv::io::candidates_from_json(sj, "solutions")) {
                if (c.classification == nepv::Classification::genuine) {
                    found.push_back(std::move(c));
                }
            }
            const auto ref = nepv::io::candidates_from_json(rj, "genuine");
            const auto cv = nepv::cross_validate(found, ref, ver_tol);
            print(nepv::io::cross_validation_to_json(cv));
            return cv.missing == 0 ? 0 : 3;
        }

        if (probe->parsed()) {
            const auto b = load(probe_bundle);
            const auto spec =
                parse_r_spec(probe_r_spec.empty() ? default_r_spec(b.manifest) : probe_r_spec, probe_seed);
            const nepv::CompactLinearization lin(b.problem, spec);
            const auto pr = nepv::delta0_probe(lin);
            json j = {{"kind", nepv::to_string(pr.kind)}, {"rank_C", pr.rank_C}};
            if (pr.alignment_value) {
                j["alignment_value"] = nepv::io::to_json(*pr.alignment_value);
            }
            print(j);
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const nepv::Error& e) {
        std::cerr << e.name() << ": " << e.what() << '\n';
        return 1;
    }
    return 2;
}
