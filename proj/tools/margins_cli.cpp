// margins_cli: generate instances, compute exact margins, run the perceptron
// family with bound replay, and verify the alternative and error-bound theorems.
//
// Exit codes: 0 success or verified, 1 usage error, 2 bound violated,
// 3 theorem inapplicable (or instance past the exact-oracle budget).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "margins/margins.hpp"

namespace fs = std::filesystem;
using margins::io::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kViolated = 2, kInapplicable = 3 };

struct Globals {
    std::uint64_t seed = 0;
    double tol_rank = margins::kDefaultRankRelTol;
    std::string out_dir = ".";
    long max_iters = 10000;
    double eps = 1e-3;
    bool dump_alpha = false;
};

margins::Vector parse_vector(const std::string& text)
{
    std::vector<double> xs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            xs.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw margins::InvalidArgument("cannot parse '" + item + "' in vector '" + text + "'");
        }
    }
    if (xs.empty()) throw margins::InvalidArgument("empty vector");
    return Eigen::Map<margins::Vector>(xs.data(), static_cast<margins::Index>(xs.size()));
}

margins::ProblemInstance load(const std::string& path, const Globals& g)
{
    auto inst = margins::io::load_instance(path, g.tol_rank);
    if (!inst.name().empty()) return inst;
    return margins::ProblemInstance(inst.matrix(), fs::path(path).stem().string(), inst.normalized(), g.tol_rank);
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

fs::path out_path(const Globals& g, const std::string& file)
{
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / file;
}

// FNV-1a over the canonical generator-settings JSON; names batch outputs reproducibly
std::string spec_hash(const margins::GeneratorSpec& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : margins::io::spec_to_json(s).dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 8);
}

margins::RunMode parse_mode(const std::string& m)
{
    if (m == "primal" || m == "primal-feasibility") return margins::RunMode::primal_feasibility;
    if (m == "dual" || m == "dual-certificate") return margins::RunMode::dual_certificate;
    if (m == "margin" || m == "margin-maximization") return margins::RunMode::margin_maximization;
    throw margins::InvalidArgument("unknown mode '" + m + "'");
}

margins::RunResult run_algorithm(const margins::ProblemInstance& inst, const std::string& algo,
                                 const margins::AlgorithmConfig& cfg)
{
    if (algo == "perceptron") return margins::perceptron_classic(inst, cfg);
    if (algo == "np") return margins::perceptron_normalized(inst, cfg);
    if (algo == "vng") return margins::vng(inst, cfg);
    throw margins::InvalidArgument("unknown algorithm '" + algo + "' (perceptron, np, vng)");
}

std::optional<margins::MarginReport> oracle_if_small(const margins::ProblemInstance& inst)
{
    if (inst.size() > margins::kEnumerationBudget) return std::nullopt;
    return margins::margin_report(inst);
}

// Runs one algorithm and writes <base>.csv, <base>.summary.json and optionally <base>.alpha.json.
margins::RunSummary run_and_write(const margins::ProblemInstance& inst, const std::string& algo,
                                  const margins::AlgorithmConfig& cfg, const Globals& g, const std::string& base)
{
    const auto result = run_algorithm(inst, algo, cfg);
    const auto summary = margins::summarize(inst, oracle_if_small(inst), result, cfg);
    {
        std::ofstream csv(out_path(g, base + ".csv"));
        margins::io::write_trace_csv(csv, result.trace);
    }
    margins::io::write_json_file(out_path(g, base + ".summary.json").string(), margins::io::to_json(summary));
    if (g.dump_alpha && algo != "perceptron")
        margins::io::write_json_file(out_path(g, base + ".alpha.json").string(), margins::io::alpha_to_json(result.trace));
    return summary;
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string kind;
    long d = 2;
    long n = 3;
    double target = 0.5;
    double jitter = 0.0;
    long rank = 0;
    std::string output;
};

margins::GeneratorSpec to_spec(const GenArgs& a, std::uint64_t seed)
{
    margins::GeneratorSpec s;
    s.kind = margins::generator_kind_from_string(a.kind);
    s.d = a.d;
    s.n = a.n;
    s.target_margin = a.target;
    s.jitter = a.jitter;
    s.rank = a.rank;
    s.seed = seed;
    return s;
}

int cmd_gen(const GenArgs& a, const Globals& g)
{
    const auto spec = to_spec(a, g.seed);
    const auto gen = margins::generate(spec);
    const fs::path path = a.output.empty() ? out_path(g, gen.instance.name() + ".json") : fs::path(a.output);
    margins::io::write_json_file(path.string(), margins::io::generated_to_json(gen));
    std::cout << path.string() << '\n';
    return kOk;
}

int cmd_margin(const std::string& path, int grid, const Globals& g)
{
    const auto inst = load(path, g);
    json j = margins::io::to_json(margins::margin_report(inst));
    j["instance"] = inst.name();
    if (grid > 0) j["grid_estimate"] = margins::margin_grid_estimate(inst, grid);
    if (inst.has_unit_columns()) j["minimum_enclosing_ball"] = margins::io::to_json(margins::minimum_enclosing_ball(inst));
    print(j);
    return kOk;
}

int cmd_run(const std::string& path, const std::string& algo, const std::string& mode, const Globals& g)
{
    const auto inst = load(path, g);
    margins::AlgorithmConfig cfg;
    cfg.max_iters = g.max_iters;
    cfg.target_eps = g.eps;
    cfg.mode = parse_mode(mode);
    cfg.seed = g.seed;
    const auto summary = run_and_write(inst, algo, cfg, g, inst.name() + "-" + algo);
    print(margins::io::to_json(summary));
    return summary.all_passed() ? kOk : kViolated;
}

struct CertifyArgs {
    std::string theorem;
    double gamma = 0.0;
    std::string b, x, p, c, w;
};

json ball_check(const margins::ProblemInstance& inst, bool& verified)
{
    const auto rep = margins::margin_report(inst);
    const auto ball = margins::minimum_enclosing_ball(inst);
    double reach = 0.0;
    for (margins::Index i = 0; i < inst.size(); ++i) reach = std::max(reach, (inst.column(i) - ball.center).norm());
    bool supported = (margins::combine(inst, ball.support_weights) - ball.center).norm() <= 1e-9;
    for (margins::Index i : ball.support_weights.support())
        supported = supported && std::abs((inst.column(i) - ball.center).norm() - reach) <= 1e-9;
    const double identity = reach * reach + rep.rho_plus * rep.rho_plus - 1.0;
    verified = reach <= ball.radius + 1e-9 && std::abs(identity) <= 1e-9 && supported;
    json j = margins::io::to_json(ball);
    j["farthest_column_distance"] = reach;
    j["rho_plus"] = rep.rho_plus;
    j["radius_identity_residual"] = identity;
    j["center_supported_by_farthest_columns"] = supported;
    return j;
}

json inscribed_check(const margins::ProblemInstance& inst, std::uint64_t seed, bool& verified)
{
    const auto rep = margins::margin_report(inst);
    if (rep.rho_affine >= -margins::kIllPosedBand)
        throw margins::Inapplicable("inscribed ball needs rho_A < 0 (rho_A = " + std::to_string(rep.rho_affine) + ")");
    const auto ball = margins::inscribed_ball(inst);
    const auto dirs = margins::ball_probe_directions(inst, margins::kBallSamples, seed);
    const auto inside = margins::check_ball_representation(inst, 0.99 * ball.radius, dirs);
    const margins::Vector outside = -(1.0 + 1e-3) * ball.radius * rep.witness_direction->vector;
    const bool excluded = !margins::representable(inst, outside).has_value();
    verified = inside.holds && excluded;
    json j = margins::io::to_json(ball);
    j["probes"] = dirs.size();
    j["probes_inside_representable"] = inside.holds;
    j["point_past_facet_excluded"] = excluded;
    return j;
}

int cmd_certify(const std::string& path, const CertifyArgs& a, const Globals& g)
{
    const auto inst = load(path, g);
    const margins::Index n = inst.size(), d = inst.dim();
    json out{{"instance", inst.name()}, {"theorem", a.theorem}};
    bool verified = false;

    if (a.theorem == "gordan1" || a.theorem == "gordan2" || a.theorem == "gordan3") {
        const int part = a.theorem.back() - '0';
        const auto v = margins::gordan_decide(inst, a.gamma, part, g.seed);
        out["verdict"] = margins::io::to_json(v);
        verified = v.verified;
    } else if (a.theorem == "hoffman-dual") {
        const margins::Vector b = a.b.empty() ? margins::Vector::Zero(d) : parse_vector(a.b);
        const margins::Vector x = a.x.empty() ? margins::SimplexPoint::vertex(n, 0).weights() : parse_vector(a.x);
        const auto r = margins::hoffman_dual(inst, b, x);
        out["report"] = margins::io::to_json(r);
        verified = r.verified;
    } else if (a.theorem == "hoffman-simplex") {
        const margins::SimplexPoint p =
            a.p.empty() ? margins::SimplexPoint::vertex(n, 0) : margins::SimplexPoint(parse_vector(a.p));
        const auto r = margins::hoffman_simplex(inst, p);
        out["report"] = margins::io::to_json(r);
        verified = r.verified;
    } else if (a.theorem == "hoffman-primal") {
        const margins::Vector c = a.c.empty() ? margins::Vector::Ones(n) : parse_vector(a.c);
        const margins::Vector w = a.w.empty() ? margins::Vector::Zero(d) : parse_vector(a.w);
        const auto r = margins::hoffman_primal(inst, c, w);
        out["report"] = margins::io::to_json(r);
        verified = r.verified;
    } else if (a.theorem == "meb") {
        out["report"] = ball_check(inst, verified);
    } else if (a.theorem == "radius") {
        out["report"] = inscribed_check(inst, g.seed, verified);
    } else {
        throw margins::InvalidArgument("unknown theorem '" + a.theorem + "'");
    }
    out["verified"] = verified;
    print(out);
    return verified ? kOk : kViolated;
}

struct BatchArgs {
    GenArgs gen;
    long count = 4;
    std::string algos = "np,vng";
    std::string mode = "margin-maximization";
    std::vector<std::string> instances;
    unsigned threads = 0;
};

int cmd_batch(const BatchArgs& a, const Globals& g)
{
    std::vector<std::string> algos;
    {
        std::stringstream ss(a.algos);
        std::string s;
        while (std::getline(ss, s, ',')) algos.push_back(s);
    }
    for (const auto& al : algos)
        if (al != "perceptron" && al != "np" && al != "vng")
            throw margins::InvalidArgument("unknown algorithm '" + al + "' (perceptron, np, vng)");

    // materialize instances first so names are fixed before any worker starts
    std::vector<margins::ProblemInstance> instances;
    std::vector<std::string> bases;
    for (const auto& path : a.instances) {
        instances.push_back(load(path, g));
        bases.push_back(instances.back().name());
    }
    if (a.instances.empty()) {
        if (a.gen.kind.empty()) throw margins::InvalidArgument("batch needs --kind or --instance");
        for (long k = 0; k < a.count; ++k) {
            const auto spec = to_spec(a.gen, g.seed + static_cast<std::uint64_t>(k));
            const auto gen = margins::generate(spec);
            const std::string base = gen.instance.name() + "-" + spec_hash(spec);
            margins::io::write_json_file(out_path(g, base + ".json").string(), margins::io::generated_to_json(gen));
            instances.push_back(gen.instance);
            bases.push_back(base);
        }
    }

    margins::AlgorithmConfig cfg;
    cfg.max_iters = g.max_iters;
    cfg.target_eps = g.eps;
    cfg.mode = parse_mode(a.mode);

    struct Job {
        std::size_t instance;
        std::string algo;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < instances.size(); ++i)
        for (const auto& al : algos) jobs.push_back({i, al});
    std::vector<json> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
            const Job& job = jobs[k];
            try {
                const auto s = run_and_write(instances[job.instance], job.algo, cfg, g, bases[job.instance] + "-" + job.algo);
                results[k] = margins::io::to_json(s);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned nthreads = std::max(1u, std::min<unsigned>(a.threads ? a.threads : hw, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    json index = json::array();
    bool all_ok = true;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const std::string base = bases[jobs[k].instance] + "-" + jobs[k].algo;
        json row{{"output", base}, {"algorithm", jobs[k].algo}};
        if (!errors[k].empty()) {
            row["error"] = errors[k];
            all_ok = false;
        } else {
            row["all_checks_passed"] = results[k]["all_checks_passed"];
            row["iterations"] = results[k]["iterations"];
            all_ok = all_ok && results[k]["all_checks_passed"].get<bool>();
        }
        index.push_back(row);
    }
    margins::io::write_json_file(out_path(g, "batch_index.json").string(), index);
    print(index);
    return all_ok ? kOk : kViolated;
}

int cmd_report(const std::string& dir_arg, const Globals& g)
{
    const fs::path dir = dir_arg.empty() ? fs::path(g.out_dir) : fs::path(dir_arg);
    if (!fs::is_directory(dir)) throw margins::InvalidArgument("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() > 13 && name.ends_with(".summary.json")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    bool all_ok = true;
    std::printf("%-44s %-10s %10s %-14s %s\n", "instance", "algorithm", "iterations", "certificate", "checks");
    for (const auto& f : files) {
        const json s = margins::io::read_json_file(f.string());
        long passed = 0, total = 0;
        std::string failed_names;
        for (const auto& c : s.at("checks")) {
            ++total;
            if (c.at("passed").get<bool>()) {
                ++passed;
            } else {
                failed_names += " " + c.at("name").get<std::string>();
            }
        }
        all_ok = all_ok && passed == total;
        const std::string cert = s.at("certificate").is_null() ? "none" : s.at("certificate").at("kind").get<std::string>();
        std::printf("%-44s %-10s %10ld %-14s %ld/%ld%s%s\n", s.at("instance").get<std::string>().c_str(),
                    s.at("algorithm").get<std::string>().c_str(), s.at("iterations").get<long>(), cert.c_str(), passed,
                    total, failed_names.empty() ? "" : " failed:", failed_names.c_str());
    }
    if (files.empty()) std::printf("(no summaries in %s)\n", dir.string().c_str());
    return all_ok ? kOk : kViolated;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact margins, perceptron-family runs and theorem certificates for linear feasibility"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Seed for generators and sampled checks");
    app.add_option("--tol-rank", g.tol_rank, "Relative tolerance for the rank of A")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "Directory for generated files");
    app.add_option("--max-iters", g.max_iters, "Iteration cap for algorithm runs")->check(CLI::PositiveNumber);
    app.add_option("--eps", g.eps, "Target ||Ap|| in dual-certificate mode")->check(CLI::NonNegativeNumber);
    app.add_flag("--dump-alpha", g.dump_alpha, "Write alpha_t for every iterate to a sidecar JSON");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate an instance with a planted margin");
    gen_cmd->add_option("--kind", gen.kind, "planted-positive | planted-negative | near-ill-posed | rank-deficient")
        ->required();
    gen_cmd->add_option("-d,--dim", gen.d, "Ambient dimension");
    gen_cmd->add_option("-n,--columns", gen.n, "Number of columns");
    gen_cmd->add_option("--target", gen.target, "Planted margin");
    gen_cmd->add_option("--jitter", gen.jitter, "Perturbation scale for planted-negative templates");
    gen_cmd->add_option("--rank", gen.rank, "Embedded dimension for rank-deficient (default d - 1)");
    gen_cmd->add_option("-o,--output", gen.output, "Output path (default <out-dir>/<name>.json)");

    std::string instance_path;
    int grid = 0;
    auto* margin_cmd = app.add_subcommand("margin", "Exact margin report");
    margin_cmd->add_option("instance", instance_path, "Instance JSON")->required();
    margin_cmd->add_option("--grid", grid, "Also report the grid estimate at this resolution");

    std::string algo, mode = "primal-feasibility";
    auto* run_cmd = app.add_subcommand("run", "Run an algorithm and replay its bounds");
    run_cmd->add_option("instance", instance_path, "Instance JSON")->required();
    run_cmd->add_option("--algo", algo, "perceptron | np | vng")->required();
    run_cmd->add_option("--mode", mode, "primal-feasibility | dual-certificate | margin-maximization");

    CertifyArgs cert;
    auto* cert_cmd = app.add_subcommand("certify", "Verify a theorem on an instance");
    cert_cmd->add_option("instance", instance_path, "Instance JSON")->required();
    cert_cmd->add_option("--theorem", cert.theorem,
                         "gordan1 | gordan2 | gordan3 | hoffman-dual | hoffman-simplex | hoffman-primal | meb | radius")
        ->required();
    cert_cmd->add_option("--gamma", cert.gamma, "Gordan threshold");
    cert_cmd->add_option("--b", cert.b, "hoffman-dual right-hand side, comma separated (default 0)");
    cert_cmd->add_option("--x", cert.x, "hoffman-dual query point (default e_1)");
    cert_cmd->add_option("--p", cert.p, "hoffman-simplex query point (default e_1)");
    cert_cmd->add_option("--c", cert.c, "hoffman-primal right-hand side (default all ones)");
    cert_cmd->add_option("--w", cert.w, "hoffman-primal query point (default 0)");

    BatchArgs batch;
    auto* batch_cmd = app.add_subcommand("batch", "Generate or load instances and run algorithms in parallel");
    batch_cmd->add_option("--kind", batch.gen.kind, "Generator kind");
    batch_cmd->add_option("-d,--dim", batch.gen.d, "Ambient dimension");
    batch_cmd->add_option("-n,--columns", batch.gen.n, "Number of columns");
    batch_cmd->add_option("--target", batch.gen.target, "Planted margin");
    batch_cmd->add_option("--jitter", batch.gen.jitter, "Template perturbation");
    batch_cmd->add_option("--rank", batch.gen.rank, "Embedded dimension for rank-deficient");
    batch_cmd->add_option("--count", batch.count, "Instances to generate (seeds seed, seed+1, ...)");
    batch_cmd->add_option("--instance", batch.instances, "Existing instance JSON (repeatable)");
    batch_cmd->add_option("--algos", batch.algos, "Comma separated algorithms");
    batch_cmd->add_option("--mode", batch.mode, "Run mode");
    batch_cmd->add_option("--threads", batch.threads, "Worker threads (default: hardware)");

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Tabulate run summaries in a directory");
    report_cmd->add_option("dir", report_dir, "Directory (default --out-dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen, g);
        if (*margin_cmd) return cmd_margin(instance_path, grid, g);
        if (*run_cmd) return cmd_run(instance_path, algo, mode, g);
        if (*cert_cmd) return cmd_certify(instance_path, cert, g);
        if (*batch_cmd) return cmd_batch(batch, g);
        if (*report_cmd) return cmd_report(report_dir, g);
    } catch (const margins::Inapplicable& e) {
        std::cerr << "inapplicable: " << e.what() << '\n';
        return kInapplicable;
    } catch (const margins::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kInapplicable;
    } catch (const margins::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
