#include "app.hpp"

#include "rbising/analysis.hpp"
#include "rbising/common.hpp"
#include "rbising/contour.hpp"
#include "rbising/disorder.hpp"
#include "rbising/ensemble.hpp"
#include "rbising/gibbs.hpp"
#include "rbising/montecarlo.hpp"
#include "rbising/polymer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace rbising::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    std::string subcommand;
    int d = 2;
    int n = 3;
    std::string n_range;
    std::optional<double> sparse_omega;
    std::int64_t j_max = 0;
    double beta = 1.0;
    double eta = 0.0;
    std::string probe;
    std::string dist = "rademacher";
    double lambda_star = 0.5;
    std::vector<double> values;
    std::vector<double> probs;
    std::uint64_t seed = 1;
    std::int64_t seeds = 1;
    std::string method;
    int cutoff = 6;
    int residual_cutoff = 4;
    std::int64_t sweeps = 10000;
    std::int64_t burn_in = 1000;
    std::int64_t thin = 1;
    std::string algorithm = "heat-bath";
    int batches = 32;
    int temperatures = 1;
    double beta_min = 0.25;
    int replicas = 8;
    std::uint64_t mc_seed = 1;
    std::int64_t samples = 1000;
    std::vector<double> ts{0.05, 0.1, 0.15, 0.2};
    double zeta = 0.0;
    double a = -1.0;
    double b = 1.0;
    double k = 1.0;
    std::vector<std::string> events{"1:0"};
    bool negate_field = false;
    int polymers = 6;
    double weight_bound = 0.2;
    double p_incompatible = 0.5;
    std::vector<std::string> suites;
    std::string inject_fault;
    std::string out;
    unsigned threads = 0;
    std::string config;

    json to_json() const
    {
        json j;
        j["subcommand"] = subcommand;
        j["d"] = d;
        j["n"] = n;
        j["n_range"] = n_range;
        j["sparse_omega"] = sparse_omega ? json(*sparse_omega) : json(nullptr);
        j["j_max"] = j_max;
        j["beta"] = beta;
        j["eta"] = eta;
        j["probe"] = probe;
        j["dist"] = dist;
        j["lambda_star"] = lambda_star;
        j["values"] = values;
        j["probs"] = probs;
        j["seed"] = seed;
        j["seeds"] = seeds;
        j["method"] = method;
        j["cutoff"] = cutoff;
        j["residual_cutoff"] = residual_cutoff;
        j["sweeps"] = sweeps;
        j["burn_in"] = burn_in;
        j["thin"] = thin;
        j["algorithm"] = algorithm;
        j["batches"] = batches;
        j["temperatures"] = temperatures;
        j["beta_min"] = beta_min;
        j["replicas"] = replicas;
        j["mc_seed"] = mc_seed;
        j["samples"] = samples;
        j["t"] = ts;
        j["zeta"] = zeta;
        j["a"] = a;
        j["b"] = b;
        j["k"] = k;
        j["events"] = events;
        j["negate_field"] = negate_field;
        j["polymers"] = polymers;
        j["weight_bound"] = weight_bound;
        j["p_incompatible"] = p_incompatible;
        j["suites"] = suites;
        return j;
    }
};

void add_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--d", c.d, "lattice dimension");
    sub->add_option("--n", c.n, "lattice side");
    sub->add_option("--n-range", c.n_range, "sizes lo:hi[:step]");
    sub->add_option("--sparse-omega", c.sparse_omega, "sparse sequence floor(j^(4-d+omega))");
    sub->add_option("--j-max", c.j_max, "last sequence index for sparse scans and Borel-Cantelli tables");
    sub->add_option("--beta", c.beta, "inverse temperature");
    sub->add_option("--eta", c.eta, "probe field strength");
    sub->add_option("--probe", c.probe, "probe site as comma-separated coordinates");
    sub->add_option("--dist", c.dist, "rademacher | uniform | discrete");
    sub->add_option("--lambda-star", c.lambda_star, "field amplitude");
    sub->add_option("--values", c.values, "discrete atoms")->delimiter(',');
    sub->add_option("--probs", c.probs, "discrete probabilities")->delimiter(',');
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--seeds", c.seeds, "number of disorder seeds");
    sub->add_option("--method", c.method, "toy | exact | cluster | mc");
    sub->add_option("--cutoff", c.cutoff, "cluster size cutoff");
    sub->add_option("--residual-cutoff", c.residual_cutoff, "smaller cutoff for the reported residual");
    sub->add_option("--sweeps", c.sweeps, "MC sweeps");
    sub->add_option("--burn-in", c.burn_in, "MC burn-in sweeps");
    sub->add_option("--thin", c.thin, "MC thinning");
    sub->add_option("--algorithm", c.algorithm, "heat-bath | metropolis | wolff-ghost");
    sub->add_option("--batches", c.batches, "MC batch count");
    sub->add_option("--temperatures", c.temperatures, "parallel tempering rungs (1 = off)");
    sub->add_option("--beta-min", c.beta_min, "lowest tempering beta");
    sub->add_option("--replicas", c.replicas, "MC replicas for the dominant sign");
    sub->add_option("--mc-seed", c.mc_seed, "MC seed");
    sub->add_option("--samples", c.samples, "disorder samples or random trials");
    sub->add_option("--t", c.ts, "characteristic-function arguments")->delimiter(',');
    sub->add_option("--zeta", c.zeta, "window growth exponent");
    sub->add_option("--a", c.a, "window lower end");
    sub->add_option("--b", c.b, "window upper end");
    sub->add_option("--k", c.k, "event half-width");
    sub->add_option("--event", c.events, "event spec k:zeta (repeatable)");
    sub->add_flag("--negate-field", c.negate_field, "use -lambda");
    sub->add_option("--polymers", c.polymers, "polymers per random system");
    sub->add_option("--weight-bound", c.weight_bound, "max |w| for random systems");
    sub->add_option("--p-incompatible", c.p_incompatible, "pair incompatibility probability");
    sub->add_option("--suite", c.suites, "verify only these suites");
    sub->add_option("--inject-fault", c.inject_fault, "negative control: break the named suite")->group("");
    sub->add_option("--out", c.out, "output root");
    sub->add_option("--threads", c.threads, "worker threads (0 = logical cores)");
    sub->add_option("--config", c.config, "key=value or JSON config merged under flags");
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Config entries become flags appended after the command line unless the
// same flag was given explicitly.
std::vector<std::string> merge_config(const std::vector<std::string>& args)
{
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;
    std::ifstream in(path);
    if (!in)
        throw ParamError("cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::vector<std::pair<std::string, std::string>> entries;
    if (trim(text).rfind('{', 0) == 0) {
        const json j = json::parse(text);
        for (auto it = j.begin(); it != j.end(); ++it) {
            const json& v = it.value();
            std::string s;
            if (v.is_string())
                s = v.get<std::string>();
            else if (v.is_boolean())
                s = v.get<bool>() ? "true" : "false";
            else if (v.is_array()) {
                for (std::size_t i = 0; i < v.size(); ++i)
                    s += (i ? "," : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
            } else
                s = v.dump();
            entries.emplace_back(it.key(), s);
        }
    } else {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#')
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParamError("config line without '=': " + line);
            entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    std::vector<std::string> out = args;
    for (auto [key, value] : entries) {
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0)
                given = true;
        if (given || key == "config")
            continue;
        if (value == "true") {
            out.push_back(flag);
        } else if (value != "false") {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    return out;
}

std::string num(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string num(std::int64_t x)
{
    return std::to_string(x);
}

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<std::string> row)
    {
        if (row.size() != header_.size())
            throw ConsistencyError("table row width does not match its header");
        rows_.push_back(std::move(row));
    }

    std::size_t size() const { return rows_.size(); }

    void write(const fs::path& path) const
    {
        std::ofstream os(path, std::ios::binary);
        auto line = [&os](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i)
                os << (i ? "," : "") << cells[i];
            os << '\n';
        };
        line(header_);
        for (const auto& r : rows_)
            line(r);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

class Run {
public:
    explicit Run(const RunConfig& c) : config_(c.to_json())
    {
        std::string root = c.out;
        if (root.empty()) {
            const char* env = std::getenv(output_root_env);
            root = env && *env ? env : "rbising-runs";
        }
        char id[17];
        std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(fnv1a(config_.dump())));
        dir_ = fs::path(root) / (c.subcommand + "-" + id);
        fs::create_directories(dir_);
    }

    const fs::path& dir() const { return dir_; }

    void table(const std::string& name, const Table& t)
    {
        t.write(dir_ / name);
        files_.push_back(name);
    }

    void summary(const json& j)
    {
        write_json("summary.json", j);
        files_.push_back("summary.json");
    }

    void finish(int exit_code)
    {
        json m;
        m["artifact"] = "rbising";
        m["version"] = artifact_version;
        m["config"] = config_;
        m["files"] = files_;
        m["exit_code"] = exit_code;
        write_json("manifest.json", m);
        std::cout << "output: " << dir_.string() << "\n";
    }

private:
    void write_json(const std::string& name, const json& j) const
    {
        std::ofstream os(dir_ / name, std::ios::binary);
        os << j.dump(2) << '\n';
    }

    json config_;
    fs::path dir_;
    std::vector<std::string> files_;
};

FieldDistribution make_dist(const RunConfig& c)
{
    if (c.dist == "rademacher")
        return FieldDistribution::rademacher(c.lambda_star);
    if (c.dist == "uniform")
        return FieldDistribution::uniform(c.lambda_star);
    if (c.dist == "discrete")
        return FieldDistribution::discrete(c.values, c.probs);
    throw ParamError("unknown distribution '" + c.dist + "'");
}

ModelParams make_params(const RunConfig& c)
{
    ModelParams p;
    p.beta = c.beta;
    p.eta = c.eta;
    if (!c.probe.empty()) {
        Site x;
        std::stringstream ss(c.probe);
        std::string tok;
        while (std::getline(ss, tok, ','))
            x.push_back(std::stoi(tok));
        if (static_cast<int>(x.size()) != c.d)
            throw ParamError("probe site must have d coordinates");
        p.probe_site = x;
    }
    return p;
}

McParams make_mc(const RunConfig& c)
{
    McParams mc;
    mc.sweeps = c.sweeps;
    mc.burn_in = c.burn_in;
    mc.thin = c.thin;
    mc.seed = c.mc_seed;
    mc.algorithm = parse_algorithm(c.algorithm);
    mc.batches = c.batches;
    mc.temperatures = c.temperatures;
    mc.beta_min = c.beta_min;
    mc.validate();
    return mc;
}

FOptions make_fopts(const RunConfig& c)
{
    FOptions o;
    o.method = parse_method(c.method);
    o.cutoff = c.cutoff;
    o.residual_cutoff = c.residual_cutoff;
    o.mc = make_mc(c);
    o.replicas = c.replicas;
    return o;
}

std::vector<std::int64_t> parse_range(const std::string& s)
{
    std::vector<std::int64_t> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':'))
        parts.push_back(std::stoll(tok));
    if (parts.size() < 2 || parts.size() > 3)
        throw ParamError("--n-range must be lo:hi or lo:hi:step");
    const std::int64_t step = parts.size() == 3 ? parts[2] : 1;
    if (step < 1 || parts[0] < 1 || parts[1] < parts[0])
        throw ParamError("--n-range needs 1 <= lo <= hi and step >= 1");
    std::vector<std::int64_t> out;
    for (std::int64_t n = parts[0]; n <= parts[1]; n += step)
        out.push_back(n);
    return out;
}

std::vector<std::int64_t> sizes(const RunConfig& c)
{
    if (c.sparse_omega) {
        if (c.j_max < 1)
            throw ParamError("--sparse-omega needs --j-max");
        const SequenceSpec seq{true, *c.sparse_omega};
        std::vector<std::int64_t> out;
        for (std::int64_t j = 1; j <= c.j_max; ++j)
            out.push_back(seq.index(j, c.d));
        return out;
    }
    if (!c.n_range.empty())
        return parse_range(c.n_range);
    return {c.n};
}

std::vector<EventSpec> parse_events(const std::vector<std::string>& specs)
{
    std::vector<EventSpec> out;
    for (const auto& s : specs) {
        const auto colon = s.find(':');
        if (colon == std::string::npos)
            throw ParamError("--event must be k:zeta");
        out.push_back({std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))});
    }
    return out;
}

std::string flag_name(const EventSpec& e)
{
    std::ostringstream os;
    os << "flag_k" << e.k << "_z" << e.zeta;
    return os.str();
}

void default_method(RunConfig& c, const std::string& m)
{
    if (c.method.empty())
        c.method = m;
}

int cmd_exact(const RunConfig& c, Run& run)
{
    const LatticeSpec L = build(c.d, c.n);
    const auto dist = make_dist(c);
    const ModelParams p = make_params(c);
    p.validate(L);
    Table t({"seed", "n", "d", "beta", "logZ", "logZ_plus", "logZ_minus", "F", "S", "split_residual"});
    double worst = 0.0;
    for (std::int64_t i = 0; i < c.seeds; ++i) {
        const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(i));
        BoundaryField f = sample(dist, L, s);
        if (c.negate_field)
            f = f.negated();
        const ExactResult r = enumerate(L, f, p, hard_site_cap);
        worst = std::max(worst, r.split_residual());
        t.add({std::to_string(s), num(std::int64_t{c.n}), num(std::int64_t{c.d}), num(c.beta), num(r.logZ),
               num(r.logZ_plus), num(r.logZ_minus), num(r.F), num(f.total()), num(r.split_residual())});
    }
    run.table("exact.csv", t);
    run.summary({{"rows", t.size()}, {"max_split_residual", worst}});
    std::cout << "exact: " << t.size() << " rows, max split residual " << num(worst) << "\n";
    return exit_ok;
}

int cmd_contour_check(const RunConfig& c, Run& run)
{
    const LatticeSpec L = build(c.d, c.n);
    const auto dist = make_dist(c);
    const ModelParams p = make_params(c);
    p.validate(L);
    const BoundaryField f = sample(dist, L, c.seed);
    const std::int64_t N = L.size();
    const bool exhaustive = N <= 16;
    const std::int64_t cases = exhaustive ? (std::int64_t{1} << N) : c.samples;
    std::uint64_t h = derive_seed(c.seed, 99);

    double worst_energy = 0.0;
    std::int64_t roundtrip_fail = 0, plus = 0;
    for (std::int64_t k = 0; k < cases; ++k) {
        SpinConfig cfg(N);
        for (std::int64_t i = 0; i < N; ++i) {
            int s;
            if (exhaustive) {
                s = (k >> i) & 1 ? 1 : -1;
            } else {
                h = splitmix64(h);
                s = (h >> 63) ? 1 : -1;
            }
            cfg.set(i, s);
        }
        const ContourSet set = extract(cfg, L);
        double faces = 0.0;
        for (const auto& g : set.contours)
            faces += g.size();
        std::vector<std::int64_t> ps, ms;
        for (std::int64_t i = 0; i < N; ++i)
            (cfg.spin(i) > 0 ? ps : ms).push_back(i);
        const double via = 2.0 * p.beta * faces + e_term(f, p, ps, +1) + e_term(f, p, ms, -1);
        worst_energy = std::max(worst_energy, std::abs(via - energy(cfg, f, p, L)));
        plus += set.exterior_sign > 0;
        if (exterior_sign(cfg.negated(), L) != -set.exterior_sign)
            ++roundtrip_fail;
    }

    Table checks({"check", "cases", "failures", "max_error"});
    checks.add({"energy_identity", num(cases), num(std::int64_t{worst_energy > 1e-12}), num(worst_energy)});
    checks.add({"exterior_sign_antisymmetry", num(cases), num(roundtrip_fail), num(0.0)});
    checks.add({"omega_plus_count", num(cases), num(std::int64_t{0}), num(static_cast<double>(plus))});

    Table cat_t({"index", "size", "case", "interior_sites", "v", "boundary_plaquettes", "theta_ok"});
    std::int64_t theta_fail = 0;
    if (c.d == 2 && c.n <= 5 && N <= 25) {
        const Catalog cat = c.n <= 4 ? catalog(L, 0) : catalog_bounded(L, c.cutoff);
        for (std::size_t i = 0; i < cat.contours.size(); ++i) {
            const Contour& g = cat.contours[i];
            const bool ok = theta_check(g, c.d);
            theta_fail += !ok;
            cat_t.add({num(static_cast<std::int64_t>(i)), num(std::int64_t{g.size()}), num(std::int64_t{g.case_tag}),
                       num(static_cast<std::int64_t>(g.interior.size())), num(std::int64_t{g.v}),
                       num(static_cast<std::int64_t>(g.boundary_plaquettes.size())), ok ? "1" : "0"});
        }
        checks.add({"theta_bound", num(static_cast<std::int64_t>(cat.contours.size())), num(theta_fail),
                    num(theta(c.d))});
        run.table("catalog.csv", cat_t);
    }
    run.table("checks.csv", checks);
    const bool pass = worst_energy <= 1e-12 && roundtrip_fail == 0 && theta_fail == 0;
    run.summary({{"pass", pass}, {"cases", cases}, {"catalog_size", cat_t.size()}, {"max_energy_error", worst_energy}});
    std::cout << "contour-check: " << cases << " configs, catalog " << cat_t.size() << ", "
              << (pass ? "pass" : "FAIL") << "\n";
    return pass ? exit_ok : exit_suite_failure;
}

int cmd_polymer_test(const RunConfig& c, Run& run)
{
    Table t({"trial", "size", "Z_re", "Z_im", "cluster_re", "cluster_im", "rel_error", "kp_holds", "bound_pass"});
    double worst = 0.0;
    std::int64_t bound_fail = 0, kp_count = 0;
    for (std::int64_t i = 0; i < c.samples; ++i) {
        const PolymerSystem sys = random_system(c.polymers, c.weight_bound, c.p_incompatible,
                                                derive_seed(c.seed, static_cast<std::uint64_t>(i)));
        std::vector<int> all(static_cast<std::size_t>(sys.size()));
        std::iota(all.begin(), all.end(), 0);
        const cplx z = partition_fn(sys, all);
        const auto wt = truncated_weight_table(sys, all);
        cplx s(0.0, 0.0);
        for (const cplx& w : wt)
            s += w;
        const cplx via = std::exp(s);
        const double err = std::abs(via - z) / std::abs(z);
        worst = std::max(worst, err);
        const std::vector<double> a(all.size(), 1.0), b(all.size(), 0.0);
        const bool kp = kp_check(sys, a, b).pass;
        bool bound = true;
        if (kp) {
            ++kp_count;
            for (int g = 0; g < sys.size(); ++g)
                bound = bound && kp_cluster_bound_check(sys, a, b, g).pass;
            bound_fail += !bound;
        }
        t.add({num(i), num(std::int64_t{sys.size()}), num(z.real()), num(z.imag()), num(via.real()), num(via.imag()),
               num(err), kp ? "1" : "0", kp ? (bound ? "1" : "0") : ""});
    }
    run.table("polymer.csv", t);
    const bool pass = worst < 1e-10 && bound_fail == 0;
    run.summary({{"pass", pass}, {"max_rel_error", worst}, {"kp_systems", kp_count}, {"bound_failures", bound_fail}});
    std::cout << "polymer-test: max rel error " << num(worst) << ", KP systems " << kp_count << ", bound failures "
              << bound_fail << "\n";
    return pass ? exit_ok : exit_suite_failure;
}

int cmd_ensemble_check(const RunConfig& c, Run& run)
{
    const LatticeSpec L = build(c.d, c.n);
    const auto dist = make_dist(c);
    const ModelParams p = make_params(c);
    p.validate(L);
    const auto cat = shared_catalog(L, c.cutoff);
    std::optional<ClusterExpansion> ce;
    if (c.cutoff > 0)
        ce.emplace(L, c.cutoff);
    const bool exact = L.size() <= hard_site_cap;
    Table t({"seed", "n", "beta", "logZ_plus_exact", "logZ_plus_contour", "logZ_minus_exact", "logZ_minus_contour",
             "rel_error", "F_exact", "F_contour", "F_cluster"});
    double worst = 0.0;
    for (std::int64_t i = 0; i < c.seeds; ++i) {
        const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(i));
        BoundaryField f = sample(dist, L, s);
        if (c.negate_field)
            f = f.negated();
        const ContourWeightTable w = build_weights(*cat, f, p);
        const ZPm z = z_pm_contour(*cat, w, f, p);
        const double fc = ce ? ce->F(f, p) : f_cluster(L, f, p, 0);
        double ep = std::nan(""), em = std::nan(""), fe = std::nan(""), rel = std::nan("");
        if (exact) {
            const ExactResult r = enumerate(L, f, p, hard_site_cap);
            ep = r.logZ_plus;
            em = r.logZ_minus;
            fe = r.F;
            rel = std::max(std::abs(std::expm1(z.logZ_plus - ep)), std::abs(std::expm1(z.logZ_minus - em)));
            worst = std::max(worst, rel);
        }
        t.add({std::to_string(s), num(std::int64_t{c.n}), num(c.beta), num(ep), num(z.logZ_plus), num(em),
               num(z.logZ_minus), num(rel), num(fe), num(z.F), num(fc)});
    }
    run.table("ensemble.csv", t);
    run.summary({{"rows", t.size()}, {"catalog_size", cat->contours.size()}, {"catalog_complete", cat->complete},
                 {"max_rel_error", exact ? json(worst) : json(nullptr)}});
    std::cout << "ensemble-check: " << t.size() << " rows, catalog " << cat->contours.size();
    if (exact)
        std::cout << ", max rel error " << num(worst);
    std::cout << "\n";
    return exit_ok;
}

int cmd_mc(const RunConfig& c, Run& run)
{
    const LatticeSpec L = build(c.d, c.n);
    const auto dist = make_dist(c);
    const ModelParams p = make_params(c);
    p.validate(L);
    McParams mc = make_mc(c);
    const bool exact = L.size() <= default_site_cap;
    Table t({"seed", "n", "beta", "algorithm", "m", "m_se", "tau_int", "batches", "sign_m", "sign_m_se", "m_exact",
             "mixing_caveat"});
    for (std::int64_t i = 0; i < c.seeds; ++i) {
        const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(i));
        BoundaryField f = sample(dist, L, s);
        if (c.negate_field)
            f = f.negated();
        mc.seed = derive_seed(c.mc_seed, static_cast<std::uint64_t>(i));
        const McResult r = rbising::run(L, f, p, mc);
        double me = std::nan("");
        if (exact) {
            const ExactResult e = enumerate(L, f, p);
            me = 0.0;
            for (double x : e.mag)
                me += x;
            me /= static_cast<double>(e.mag.size());
        }
        t.add({std::to_string(s), num(std::int64_t{c.n}), num(c.beta), c.algorithm, num(r.m.mean),
               r.m.reported ? num(r.m.se) : "", r.m.reported ? num(r.m.tau_int) : "", num(std::int64_t{r.m.batches}),
               num(r.sign_m.mean), r.sign_m.reported ? num(r.sign_m.se) : "", num(me), r.mixing_caveat ? "1" : "0"});
    }
    run.table("mc.csv", t);
    run.summary({{"rows", t.size()}});
    std::cout << "mc: " << t.size() << " rows\n";
    return exit_ok;
}

int cmd_toy(const RunConfig& c, Run& run)
{
    const auto dist = make_dist(c);
    json summary;
    if (!c.n_range.empty()) {
        const auto ns = parse_range(c.n_range);
        const LltFit fit = llt_exponent_fit(dist, c.d, static_cast<int>(ns.front()), static_cast<int>(ns.back()));
        Table t({"n", "m", "log_p0"});
        for (std::size_t i = 0; i < fit.n.size(); ++i)
            t.add({num(std::int64_t{fit.n[i]}), num(boundary_count(c.d, fit.n[i])), num(fit.log_p[i])});
        run.table("llt.csv", t);
        summary["llt"] = {{"slope", fit.fit.slope},
                          {"intercept", fit.fit.intercept},
                          {"r2", fit.fit.r2},
                          {"reference", -(c.d - 1) / 2.0}};
        std::cout << "toy: log P(S_n = 0) slope " << num(fit.fit.slope) << " (reference " << -(c.d - 1) / 2.0
                  << ")\n";
    }
    if (c.j_max > 0) {
        SequenceSpec seq;
        if (c.sparse_omega) {
            seq.sparse = true;
            seq.omega = *c.sparse_omega;
        }
        const auto rep = borel_cantelli_report(dist, c.d, c.k, c.zeta, seq, c.j_max);
        Table t({"j", "n", "m", "term", "term_zeta0", "partial"});
        for (const auto& r : rep.rows)
            t.add({num(r.j), num(r.n), num(r.m), num(r.term), num(r.term_zeta0), num(r.partial)});
        run.table("borel_cantelli.csv", t);
        summary["borel_cantelli"] = {{"sequence", seq.describe()},
                                     {"tail_exponent", rep.tail_exponent},
                                     {"convergent", rep.convergent},
                                     {"zeta_chain_ok", rep.zeta_chain_ok}};
        std::cout << "toy: Borel-Cantelli tail exponent " << num(rep.tail_exponent) << " ("
                  << (rep.convergent ? "convergent" : "divergent") << ")\n";
    }
    if (c.n_range.empty() && c.j_max <= 0) {
        const LatticeSpec L = build(c.d, c.n);
        Table t({"seed", "n", "S", "magnetization"});
        for (std::int64_t i = 0; i < c.seeds; ++i) {
            const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(i));
            BoundaryField f = sample(dist, L, s);
            if (c.negate_field)
                f = f.negated();
            t.add({std::to_string(s), num(std::int64_t{c.n}), num(f.total()), num(toy_magnetization(f))});
        }
        run.table("toy.csv", t);
        std::cout << "toy: " << t.size() << " rows\n";
    }
    run.summary(summary);
    return exit_ok;
}

int cmd_charfn(const RunConfig& c, Run& run)
{
    const LatticeSpec L = build(c.d, c.n);
    const auto dist = make_dist(c);
    const ModelParams p = make_params(c);
    p.validate(L);
    CharFnEstimate est;
    bool exact_law = false;
    if (c.method == "exact" && c.samples == 0) {
        const FLaw law = exact_F_law(L, dist, p);
        est.t = c.ts;
        for (double t : c.ts) {
            est.psi.push_back(char_fn_exact(law, t));
            est.se.push_back(0.0);
        }
        exact_law = true;
    } else {
        est = char_fn_mc(L, dist, p, c.ts, c.samples, c.seed, make_fopts(c));
    }
    const auto rows = gaussian_bound_check(est, dist, L);
    Table t({"t", "re", "im", "se", "abs", "bound", "margin", "pass"});
    bool pass = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pass = pass && rows[i].pass;
        t.add({num(rows[i].t), num(est.psi[i].real()), num(est.psi[i].imag()), num(rows[i].se), num(rows[i].abs_psi),
               num(rows[i].bound), num(rows[i].margin()), rows[i].pass ? "1" : "0"});
    }
    run.table("charfn.csv", t);
    run.summary({{"bound_pass", pass}, {"exact_law", exact_law}, {"residual", est.residual}});
    std::cout << "charfn: Gaussian bound " << (pass ? "holds" : "violated") << " on " << rows.size()
              << " points\n";
    return exit_ok;
}

int cmd_llt(const RunConfig& c, Run& run)
{
    const auto dist = make_dist(c);
    const ModelParams p = make_params(c);
    std::vector<int> ns;
    for (std::int64_t n : sizes(c))
        ns.push_back(static_cast<int>(n));
    const WeakLltFit fit = weak_llt_fit(c.d, dist, p, c.a, c.b, c.zeta, ns, c.samples, c.seed, make_fopts(c));
    Table t({"n", "p"});
    for (std::size_t i = 0; i < fit.n.size(); ++i)
        t.add({num(std::int64_t{fit.n[i]}), num(fit.p[i])});
    run.table("llt.csv", t);
    run.summary({{"slope", fit.fit.slope},
                 {"slope_se", fit.fit.slope_se},
                 {"intercept", fit.fit.intercept},
                 {"r2", fit.fit.r2},
                 {"reference_exponent", fit.reference_exponent},
                 {"lower_bound_only", fit.lower_bound_only}});
    std::cout << "llt: slope " << num(fit.fit.slope) << " (bound exponent " << fit.reference_exponent << ")\n";
    return exit_ok;
}

int cmd_scan(const RunConfig& c, Run& run)
{
    const auto dist = make_dist(c);
    const ModelParams p = make_params(c);
    const auto events = parse_events(c.events);
    const ScanResult res = limit_point_scan(dist, c.d, p, sizes(c), c.seed, make_fopts(c), events, c.negate_field);
    std::vector<std::string> header{"n", "S", "F", "method", "sign", "mc_m", "undecided"};
    for (const auto& e : events)
        header.push_back(flag_name(e));
    Table t(header);
    for (const auto& r : res.records) {
        std::vector<std::string> row{num(r.n),
                                     num(r.S),
                                     num(r.F),
                                     method_name(r.method),
                                     num(std::int64_t{r.sign}),
                                     r.method == FMethod::mc ? num(r.mc_m) : "",
                                     r.method == FMethod::mc ? (r.undecided ? "1" : "0") : ""};
        for (bool f : r.flags)
            row.push_back(f ? "1" : "0");
        t.add(row);
    }
    run.table("scan.csv", t);
    const auto& s = res.summary;
    run.summary({{"records", res.records.size()},
                 {"sign_flips", s.sign_flips},
                 {"zero_crossings", s.sign_flips},
                 {"plus_fraction", s.plus_fraction},
                 {"longest_run", s.longest_run},
                 {"recurrence", s.recurrence},
                 {"zero_count", s.zero_count}});
    std::cout << "scan: " << res.records.size() << " sizes, " << s.sign_flips << " sign flips, plus fraction "
              << num(s.plus_fraction) << "\n";
    return exit_ok;
}

int cmd_verify(const RunConfig& c, Run& run)
{
    std::vector<std::string> names = c.suites.empty() ? suite_names() : c.suites;
    const auto known = suite_names();
    for (const auto& n : names)
        if (std::find(known.begin(), known.end(), n) == known.end())
            throw ParamError("unknown suite '" + n + "'");
    json report = json::array();
    bool all = true;
    for (const auto& n : names) {
        const SuiteResult r = run_suite(n, c.inject_fault);
        all = all && r.pass;
        report.push_back({{"suite", r.name}, {"pass", r.pass}, {"failures", r.failures}});
        std::cout << r.name << ": " << (r.pass ? "pass" : "FAIL") << "\n";
        for (const auto& f : r.failures)
            std::cout << "  " << f << "\n";
    }
    run.summary({{"pass", all}, {"suites", report}});
    return all ? exit_ok : exit_suite_failure;
}

} // namespace

int run_cli(const std::vector<std::string>& raw)
{
    RunConfig c;
    CLI::App app{"Random boundary field Ising laboratory"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"exact", "exact enumeration of Z, Z+, Z- and F"},
        {"contour-check", "energy identity, exterior signs and the contour catalog"},
        {"polymer-test", "cluster-expansion identity and KP bounds on random polymer systems"},
        {"ensemble-check", "contour ensemble and cluster F against enumeration"},
        {"mc", "Monte Carlo magnetization"},
        {"toy", "toy model: local-limit exponent and Borel-Cantelli tables"},
        {"charfn", "characteristic function of F and the Gaussian bound"},
        {"llt", "weak local-limit scaling fit"},
        {"scan", "limit-point scan over volumes"},
        {"verify", "invariant suites"}};
    for (const auto& [name, help] : commands)
        add_options(app.add_subcommand(name, help), c);

    std::vector<std::string> args;
    try {
        args = merge_config(raw);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
    // CLI11 parses a reversed argument vector.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config_error;
    }
    for (const auto& [name, help] : commands)
        if (app.got_subcommand(name))
            c.subcommand = name;

    if (c.subcommand == "llt" || c.subcommand == "scan")
        default_method(c, "toy");
    else
        default_method(c, "exact");

    set_threads(c.threads);
    try {
        if (c.seeds < 0 || c.samples < 0)
            throw ParamError("--seeds and --samples must be non-negative");
        Run run(c);
        int code = exit_ok;
        if (c.subcommand == "exact")
            code = cmd_exact(c, run);
        else if (c.subcommand == "contour-check")
            code = cmd_contour_check(c, run);
        else if (c.subcommand == "polymer-test")
            code = cmd_polymer_test(c, run);
        else if (c.subcommand == "ensemble-check")
            code = cmd_ensemble_check(c, run);
        else if (c.subcommand == "mc")
            code = cmd_mc(c, run);
        else if (c.subcommand == "toy")
            code = cmd_toy(c, run);
        else if (c.subcommand == "charfn")
            code = cmd_charfn(c, run);
        else if (c.subcommand == "llt")
            code = cmd_llt(c, run);
        else if (c.subcommand == "scan")
            code = cmd_scan(c, run);
        else if (c.subcommand == "verify")
            code = cmd_verify(c, run);
        run.finish(code);
        return code;
    } catch (const ParamError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const SizeError& e) {
        std::cerr << "size cap: " << e.what() << "\n";
    } catch (const UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
    } catch (const PreconditionError& e) {
        std::cerr << "precondition: " << e.what() << "\n";
    } catch (const SingularityError& e) {
        std::cerr << "singular: " << e.what() << "\n";
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
    }
    return exit_config_error;
}

int run_cli(int argc, char** argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run_cli(args);
}

} // namespace rbising::cli
