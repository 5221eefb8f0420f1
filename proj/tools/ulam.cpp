// ulam: command-line front end for the sampler, chain and particle-system code.
//
//   ulam sample --n 5 --k 2 --count 10
//   ulam lis --word 2,2,1,1 --order strict
//   ulam simulate --x 10 --t 100 --lambda 1 --variant strict --alpha 1 --trace
//   ulam estimate --n 400 --k 100 --order strict --reps 500
//   ulam verify --clouds 10000 --max-x 20 --max-t 20
//   ulam tails --kind poisson --grid default
//   ulam stationarity | deviation | depoisson ...
//   ulam --manifest out/estimate.manifest.json
//
// Exit status: 0 success, 1 verification failure, 2 usage or domain error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_manifest.hpp"
#include "ulam/ulam.hpp"

namespace fs = std::filesystem;
using namespace ulam;
using ulam::cli::RunManifest;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out_dir = ".";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Master seed (default: $ULAM_SEED, else 0)")->envname("ULAM_SEED");
    sub->add_option("--jobs", c.jobs, "Replica worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", c.out_dir, "Directory for the manifest and result files");
    sub->add_option("--config", "key=value file; explicit flags take precedence");
}

// The parameter record of a manifest: every option of the subcommand as the
// string CLI11 would accept back, flags as booleans.
nlohmann::ordered_json collect_parameters(const CLI::App* sub, const Common& c) {
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        if (opt->get_expected_max() == 0) {
            p[name] = opt->count() > 0;
            continue;
        }
        if (opt->count() > 0) {
            std::string joined;
            for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
            p[name] = joined;
        } else if (std::string d = opt->get_default_str(); !d.empty()) {
            if (d.front() == '[' && d.back() == ']') d = d.substr(1, d.size() - 2);  // vector defaults
            p[name] = d;
        }
    }
    p["seed"] = std::to_string(c.seed);
    p["jobs"] = std::to_string(c.jobs);
    p["out-dir"] = c.out_dir;
    return p;
}

RunManifest start_manifest(const CLI::App* sub, const Common& c, std::vector<std::string> outputs) {
    RunManifest m;
    m.command = sub->get_name();
    m.parameters = collect_parameters(sub, c);
    m.seed = c.seed;
    m.output_paths = std::move(outputs);
    m.path = fs::path(c.out_dir) / (m.command + ".manifest.json");
    return m;
}

std::string out_path(const Common& c, const std::string& file) { return (fs::path(c.out_dir) / file).string(); }

std::ofstream open_out(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) { open_out(path) << j.dump(2) << '\n'; }

Order order_from(const std::string& s) { return parse_order(s); }

// ---------------------------------------------------------------- sample

struct SampleArgs {
    std::int64_t n = 0, k = 1;
    std::uint64_t count = 1;
    std::string format = "csv", output = "-";
};

int cmd_sample(const CLI::App* sub, const Common& c, const SampleArgs& a) {
    if (a.n < 1 || a.k < 1) throw UsageError("--n and --k must be >= 1");
    RunManifest m = start_manifest(sub, c, {a.output});
    m.begin();
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (a.output != "-") {
        file = open_out(a.output);
        os = &file;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (std::uint64_t i = 0; i < a.count; ++i) {
        RngStream rng = make_rng(c.seed, i);
        const MultisetWord w = sample_uniform_multiset_permutation(a.n, a.k, rng);
        if (a.format == "json") {
            arr.push_back(std::vector<Letter>(w.letters().begin(), w.letters().end()));
        } else {
            for (std::size_t j = 0; j < w.size(); ++j) *os << (j ? "," : "") << w.letters()[j];
            *os << '\n';
        }
    }
    if (a.format == "json") *os << arr.dump() << '\n';
    m.end();
    return exit_ok;
}

// ---------------------------------------------------------------- lis

struct LisArgs {
    std::string word, input, order = "strict", as = "auto";
    bool have_word = false;
};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

template <class T>
T parse_number(const std::string& s) {
    std::istringstream is(s);
    T v{};
    if (!(is >> v) || !is.eof()) throw UsageError("cannot parse '" + s + "'");
    return v;
}

std::vector<Letter> parse_word(const std::vector<std::string>& lines) {
    std::vector<Letter> w;
    for (const auto& l : lines)
        for (const auto& f : split_fields(l)) {
            const auto v = parse_number<long long>(f);
            if (v < 1) throw UsageError("letters must be positive integers");
            w.push_back(static_cast<Letter>(v));
        }
    return w;
}

PlanarPointSet parse_points(const std::vector<std::string>& lines) {
    std::vector<Point> pts;
    double x_max = 0.0;
    Row t_max = 1;
    for (const auto& l : lines) {
        const auto f = split_fields(l);
        if (f.empty()) continue;
        if (f.size() != 2) throw UsageError("point lines must read x,row");
        const auto x = parse_number<double>(f[0]);
        const auto r = parse_number<long long>(f[1]);
        if (!(x > 0.0) || r < 1) throw UsageError("points need x > 0 and row >= 1");
        pts.push_back({x, r});
        x_max = std::max(x_max, x);
        t_max = std::max<Row>(t_max, r);
    }
    if (pts.empty()) return PlanarPointSet(1.0, 1);
    try {
        return PlanarPointSet(x_max, t_max, pts);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

int cmd_lis(const CLI::App* sub, const Common& c, const LisArgs& a) {
    const Order order = order_from(a.order);
    std::vector<std::string> lines;
    if (a.have_word) {
        lines.push_back(a.word);
    } else {
        std::ifstream file;
        std::istream* is = &std::cin;
        if (!a.input.empty() && a.input != "-") {
            file.open(a.input);
            if (!file) throw UsageError("cannot read " + a.input);
            is = &file;
        }
        for (std::string l; std::getline(*is, l);)
            if (!split_fields(l).empty()) lines.push_back(l);
    }
    bool as_points = a.as == "points";
    if (a.as == "auto") {
        as_points = lines.size() > 1;
        for (const auto& l : lines) as_points = as_points && split_fields(l).size() == 2;
    }
    RunManifest m = start_manifest(sub, c, {"-"});
    m.begin();
    std::size_t len = 0;
    if (as_points) {
        len = longest_chain(parse_points(lines), order);
    } else {
        const auto w = parse_word(lines);
        len = longest_chain(std::span<const Letter>(w), order);
    }
    std::cout << len << '\n';
    m.end();
    return exit_ok;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    double x = 0.0, lambda = 0.0;
    std::int64_t t = 0;
    std::string variant = "strict";
    std::optional<double> alpha, beta;
    bool trace = false;
};

std::optional<BoundaryRates> rates_from(Order variant, double lambda, std::optional<double> alpha,
                                        std::optional<double> beta) {
    if (variant == Order::strict && beta) throw UsageError("--beta applies to the weak variant; use --alpha");
    if (variant == Order::weak && alpha) throw UsageError("--alpha applies to the strict variant; use --beta");
    if (alpha) return BoundaryRates::strict_from_source(lambda, *alpha);
    if (beta) return BoundaryRates::weak_from_source(lambda, *beta);
    return std::nullopt;
}

int cmd_simulate(const CLI::App* sub, const Common& c, const SimulateArgs& a) {
    const Order variant = order_from(a.variant);
    if (!(a.x > 0.0)) throw UsageError("--x must be > 0");
    if (a.t < 1) throw UsageError("--t must be >= 1");
    if (!(a.lambda > 0.0)) throw UsageError("--lambda must be > 0");
    const auto rates = rates_from(variant, a.lambda, a.alpha, a.beta);
    const std::string counts_path = out_path(c, "simulate_counts.csv");
    const std::string trace_path = out_path(c, "simulate_trajectory.csv");
    std::vector<std::string> outputs{counts_path};
    if (a.trace) outputs.push_back(trace_path);
    RunManifest m = start_manifest(sub, c, outputs);
    if (rates)
        m.derived = {{"variant", std::string(to_string(rates->variant))}, {"source_rate", rates->source_rate},
                     {"sink_param", rates->sink_param}, {"lambda", rates->lambda}};
    m.begin();
    RngStream rng = make_rng(c.seed, 0);
    const ProcessRun run = run_process(a.x, a.t, a.lambda, variant, rates, rng,
                                       {.record_trajectory = a.trace, .keep_cloud = false});
    auto os = open_out(counts_path);
    os << "step,count,exits\n";
    for (std::size_t i = 0; i < run.counts.size(); ++i) os << i + 1 << ',' << run.counts[i] << ',' << run.exits[i] << '\n';
    if (a.trace) {
        auto ts = open_out(trace_path);
        write_trajectory_csv(ts, run.trajectory);
    }
    m.end();
    return exit_ok;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::int64_t n = 0, k = 1;
    std::string order = "strict";
    std::uint64_t reps = 100;
};

int cmd_estimate(const CLI::App* sub, const Common& c, const EstimateArgs& a) {
    const Order order = order_from(a.order);
    if (a.n < 1 || a.k < 1) throw UsageError("--n and --k must be >= 1");
    if (a.reps < 2) throw UsageError("--reps must be >= 2");
    const std::string json_path = out_path(c, "estimate.json");
    const std::string csv_path = out_path(c, "estimate.csv");
    RunManifest m = start_manifest(sub, c, {json_path, csv_path});
    m.begin();
    const EstimateReport r = estimate_mean_subsequence(a.n, a.k, order, a.reps, c.seed, c.jobs);
    write_json(json_path, r.to_json());
    auto os = open_out(csv_path);
    os << "n,k,mean,stderr,predicted\n" << a.n << ',' << a.k << ',' << Shortest{r.mean} << ',' << Shortest{r.std_error}
       << ',' << Shortest{*r.predicted} << '\n';
    m.end();
    return exit_ok;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    std::uint64_t clouds = 1000, boundary = 200;
    double max_x = 20.0, max_lambda = 2.0;
    std::int64_t max_t = 20;
};

int cmd_verify(const CLI::App* sub, const Common& c, const VerifyArgs& a) {
    const std::string json_path = out_path(c, "verify.json");
    RunManifest m = start_manifest(sub, c, {json_path});
    m.begin();
    const auto rep = identity_suite(a.clouds, a.boundary, a.max_x, a.max_t, a.max_lambda, c.seed, c.jobs);
    write_json(json_path, rep.to_json());
    m.end();
    std::cout << "checks " << rep.checks << ", identity failures " << rep.failures << ", witness failures "
              << rep.witness_failures << '\n';
    return rep.passed() ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- tails

struct TailsArgs {
    std::string kind = "all", grid = "default";
};

std::vector<TailKind> kinds_for(const std::string& s) {
    using K = TailKind;
    if (s == "all") return {K::poisson_lower, K::poisson_upper, K::binomial_lower, K::binomial_upper, K::geomsum_lower, K::geomsum_upper};
    if (s == "poisson") return {K::poisson_lower, K::poisson_upper};
    if (s == "binomial") return {K::binomial_lower, K::binomial_upper};
    if (s == "geomsum") return {K::geomsum_lower, K::geomsum_upper};
    return {parse_tail_kind(s)};
}

// CSV grid with a header naming any of lambda,A,n,p,k,alpha,eps.
std::vector<TailParams> read_grid(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read grid " + path);
    std::string line;
    if (!std::getline(is, line)) return {};
    const auto header = split_fields(line);
    std::vector<TailParams> grid;
    while (std::getline(is, line)) {
        const auto f = split_fields(line);
        if (f.empty()) continue;
        if (f.size() != header.size()) throw UsageError("grid row width differs from header");
        TailParams q;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double v = parse_number<double>(f[i]);
            if (header[i] == "lambda") q.lambda = v;
            else if (header[i] == "A") q.A = v;
            else if (header[i] == "n") q.n = static_cast<std::int64_t>(v);
            else if (header[i] == "p") q.p = v;
            else if (header[i] == "k") q.k = static_cast<std::int64_t>(v);
            else if (header[i] == "alpha") q.alpha = v;
            else if (header[i] == "eps") q.eps = v;
            else throw UsageError("unknown grid column " + header[i]);
        }
        grid.push_back(q);
    }
    return grid;
}

int cmd_tails(const CLI::App* sub, const Common& c, const TailsArgs& a) {
    const auto kinds = kinds_for(a.kind);
    const auto custom = a.grid == "default" ? std::vector<TailParams>{} : read_grid(a.grid);
    const std::string csv_path = out_path(c, "tails_" + a.kind + ".csv");
    RunManifest m = start_manifest(sub, c, {csv_path});
    m.begin();
    TailCertificate all;
    for (TailKind k : kinds) {
        const auto cert = verify_tail_inequality(k, a.grid == "default" ? default_tail_grid(k) : custom);
        std::cout << to_string(k) << ": " << cert.rows.size() << " points, " << cert.failures() << " violations\n";
        all.rows.insert(all.rows.end(), cert.rows.begin(), cert.rows.end());
    }
    auto os = open_out(csv_path);
    all.write_csv(os);
    m.end();
    return all.all_pass() ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- stationarity

struct StationarityArgs {
    double x = 0.0, lambda = 1.0;
    std::optional<double> alpha, beta;
    std::string variant = "strict";
    std::int64_t t = 100;
    std::uint64_t reps = 1000;
};

int cmd_stationarity(const CLI::App* sub, const Common& c, const StationarityArgs& a) {
    const Order variant = order_from(a.variant);
    const auto rates = rates_from(variant, a.lambda, a.alpha, a.beta);
    if (!rates) throw UsageError(variant == Order::strict ? "--alpha is required" : "--beta is required");
    const std::string json_path = out_path(c, "stationarity.json");
    RunManifest m = start_manifest(sub, c, {json_path});
    m.derived = {{"sink_param", rates->sink_param}};
    m.begin();
    const auto rep = stationarity_test(a.x, a.lambda, rates->source_rate, variant, a.t, a.reps, c.seed, c.jobs);
    write_json(json_path, rep.to_json());
    m.end();
    const bool ok = rep.mean_within(4.0) && rep.chi_square.p_value > 1e-4;
    std::cout << "mean " << rep.stats.mean << " (target " << rep.target_mean << "), chi-square p " << rep.chi_square.p_value
              << (ok ? "" : "  FAIL") << '\n';
    return ok ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- deviation

struct DeviationArgs {
    double x = 0.0, lambda = 1.0;
    std::int64_t t = 0;
    std::string order = "strict";
    std::vector<double> eps{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::uint64_t reps = 500;
};

int cmd_deviation(const CLI::App* sub, const Common& c, const DeviationArgs& a) {
    const Order order = order_from(a.order);
    const std::string json_path = out_path(c, "deviation.json");
    const std::string csv_path = out_path(c, "deviation.csv");
    RunManifest m = start_manifest(sub, c, {json_path, csv_path});
    m.begin();
    const auto prof = deviation_profile(a.x, a.t, a.lambda, order, a.eps, a.reps, c.seed, c.jobs);
    write_json(json_path, prof.to_json());
    auto os = open_out(csv_path);
    prof.write_csv(os);
    m.end();
    return exit_ok;
}

// ---------------------------------------------------------------- depoisson

struct DepoissonArgs {
    std::int64_t n = 0, k = 1;
    std::uint64_t reps = 200;
};

int cmd_depoisson(const CLI::App* sub, const Common& c, const DepoissonArgs& a) {
    if (a.reps < 2) throw UsageError("--reps must be >= 2");
    const std::string json_path = out_path(c, "depoisson.json");
    RunManifest m = start_manifest(sub, c, {json_path});
    m.begin();
    const auto rep = depoissonization_report(a.n, a.k, a.reps, c.seed, c.jobs);
    write_json(json_path, rep.to_json());
    m.end();
    std::cout << "difference " << rep.difference << ", budget " << rep.budget
              << (rep.asserted ? "" : " (reporting only, k >= n)") << '\n';
    return !rep.asserted || rep.within_budget ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- driver

int run(const std::vector<std::string>& args) {
    CLI::App app{"Longest increasing subsequences of random multiset permutations", "ulam"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.add_option("--manifest", "Replay the command recorded in a manifest file");
    app.set_version_flag("--version", std::string(ulam::cli::tool_version));

    Common common;
    const auto orders = CLI::IsMember({"strict", "weak"});

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Draw uniform multiset permutations");
    sample->add_option("--n", sa.n, "Number of distinct letters")->required();
    sample->add_option("--k", sa.k, "Multiplicity of each letter");
    sample->add_option("--count", sa.count, "Number of words");
    sample->add_option("--format", sa.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sample->add_option("--output", sa.output, "Output file, - for stdout");
    add_common(sample, common);

    LisArgs la;
    auto* lis = app.add_subcommand("lis", "Longest chain of a word or point list");
    auto* word_opt = lis->add_option("--word", la.word, "Inline word, comma separated");
    auto* input_opt = lis->add_option("--input", la.input, "File with a word or x,row lines (default stdin)");
    word_opt->excludes(input_opt);
    lis->add_option("--order", la.order, "strict or weak")->check(orders);
    lis->add_option("--as", la.as, "auto, word or points")->check(CLI::IsMember({"auto", "word", "points"}));
    add_common(lis, common);

    SimulateArgs sm;
    auto* simulate = app.add_subcommand("simulate", "Run a Hammersley process and write per-step counts");
    simulate->add_option("--x", sm.x, "Interval length")->required();
    simulate->add_option("--t", sm.t, "Number of rows")->required();
    simulate->add_option("--lambda", sm.lambda, "Row intensity")->required();
    simulate->add_option("--variant", sm.variant, "strict or weak")->check(orders);
    simulate->add_option("--alpha", sm.alpha, "Source rate, strict variant");
    simulate->add_option("--beta", sm.beta, "Source rate, weak variant");
    simulate->add_flag("--trace", sm.trace, "Also write the particle trajectories");
    add_common(simulate, common);

    EstimateArgs ea;
    auto* estimate = app.add_subcommand("estimate", "Monte Carlo mean of the longest subsequence");
    estimate->add_option("--n", ea.n, "Number of distinct letters")->required();
    estimate->add_option("--k", ea.k, "Multiplicity");
    estimate->add_option("--order", ea.order, "strict or weak")->check(orders);
    estimate->add_option("--reps", ea.reps, "Replicas");
    add_common(estimate, common);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Particle count against chain length on random clouds");
    verify->add_option("--clouds", va.clouds, "Clouds without boundary (both variants each)");
    verify->add_option("--boundary", va.boundary, "Instances with sources and sinks (both variants each)");
    verify->add_option("--max-x", va.max_x, "Largest x");
    verify->add_option("--max-t", va.max_t, "Largest t");
    verify->add_option("--max-lambda", va.max_lambda, "Largest lambda");
    add_common(verify, common);

    TailsArgs ta;
    auto* tails = app.add_subcommand("tails", "Exact tail probabilities against the closed-form bounds");
    tails->add_option("--kind", ta.kind, "all, poisson, binomial, geomsum or a single kind such as poisson_lower");
    tails->add_option("--grid", ta.grid, "default, or a CSV file of parameters");
    add_common(tails, common);

    StationarityArgs st;
    auto* stationarity = app.add_subcommand("stationarity", "Particle-count law of the boundary process at time t");
    stationarity->add_option("--x", st.x, "Interval length")->required();
    stationarity->add_option("--lambda", st.lambda, "Row intensity");
    stationarity->add_option("--variant", st.variant, "strict or weak")->check(orders);
    stationarity->add_option("--alpha", st.alpha, "Source rate, strict variant");
    stationarity->add_option("--beta", st.beta, "Source rate, weak variant");
    stationarity->add_option("--t", st.t, "Time (0 = initial configuration)");
    stationarity->add_option("--reps", st.reps, "Replicas");
    add_common(stationarity, common);

    DeviationArgs da;
    auto* deviation = app.add_subcommand("deviation", "Exceedance frequencies around the first-order mean");
    deviation->add_option("--x", da.x, "Interval length")->required();
    deviation->add_option("--t", da.t, "Number of rows")->required();
    deviation->add_option("--lambda", da.lambda, "Row intensity");
    deviation->add_option("--order", da.order, "strict or weak")->check(orders);
    deviation->add_option("--eps", da.eps, "Comma separated eps grid")->delimiter(',');
    deviation->add_option("--reps", da.reps, "Replicas");
    add_common(deviation, common);

    DepoissonArgs pa;
    auto* depoisson = app.add_subcommand("depoisson", "Word mean next to its poissonized counterpart");
    depoisson->add_option("--n", pa.n, "Number of distinct letters")->required();
    depoisson->add_option("--k", pa.k, "Multiplicity");
    depoisson->add_option("--reps", pa.reps, "Replicas");
    add_common(depoisson, common);

    std::vector<const char*> argv{"ulam"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }
    la.have_word = word_opt->count() > 0;

    try {
        if (*sample) return cmd_sample(sample, common, sa);
        if (*lis) return cmd_lis(lis, common, la);
        if (*simulate) return cmd_simulate(simulate, common, sm);
        if (*estimate) return cmd_estimate(estimate, common, ea);
        if (*verify) return cmd_verify(verify, common, va);
        if (*tails) return cmd_tails(tails, common, ta);
        if (*stationarity) return cmd_stationarity(stationarity, common, st);
        if (*deviation) return cmd_deviation(deviation, common, da);
        if (*depoisson) return cmd_depoisson(depoisson, common, pa);
    } catch (const UsageError& e) {
        std::cerr << "ulam: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::logic_error& e) {  // invalid_argument, domain_error, length_error
        std::cerr << "ulam: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "ulam: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // --manifest FILE replays the recorded command; later flags are appended.
        if (!args.empty() && (args[0] == "--manifest" || args[0].rfind("--manifest=", 0) == 0)) {
            std::string file;
            std::size_t rest = 1;
            if (args[0] == "--manifest") {
                if (args.size() < 2) throw UsageError("--manifest needs a file");
                file = args[1];
                rest = 2;
            } else {
                file = args[0].substr(11);
            }
            std::ifstream is(file);
            if (!is) throw UsageError("cannot read manifest " + file);
            nlohmann::json j;
            try {
                is >> j;
            } catch (const nlohmann::json::exception& e) {
                throw UsageError(std::string("bad manifest: ") + e.what());
            }
            const std::vector<std::string> extra(args.begin() + static_cast<std::ptrdiff_t>(rest), args.end());
            auto replay = ulam::cli::replay_arguments(j, extra);
            replay.insert(replay.end(), args.begin() + static_cast<std::ptrdiff_t>(rest), args.end());
            args = std::move(replay);
        }
        args = ulam::cli::apply_config(std::move(args));
    } catch (const std::exception& e) {
        std::cerr << "ulam: " << e.what() << '\n';
        return exit_usage;
    }
    return run(args);
}
