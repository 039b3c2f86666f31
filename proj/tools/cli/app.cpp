// SPDX-License-Identifier: Apache-2.0
#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>
#include <tailrisk/tailrisk.h>

#include "table.hpp"

namespace tailrisk_cli {
namespace {

struct Failure : std::runtime_error {
    Failure(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

int exit_code_for(tr_status st) {
    switch (st) {
        case TR_NUMERICAL:
        case TR_INFEASIBLE:
        case TR_INSUFFICIENT_SAMPLES:
        case TR_INTERNAL:
            return kExitNumerical;
        default:
            return kExitUsage;
    }
}

void check(tr_status st) {
    if (st != TR_OK) throw Failure(exit_code_for(st), std::string(tr_status_string(st)) + ": " + tr_last_error());
}

struct PoolDeleter { void operator()(tr_pool* p) const { tr_pool_free(p); } };
struct PointDeleter { void operator()(tr_rate_point* p) const { tr_rate_point_free(p); } };
struct CurveDeleter { void operator()(tr_rate_curve* c) const { tr_rate_curve_free(c); } };
using PoolPtr = std::unique_ptr<tr_pool, PoolDeleter>;
using PointPtr = std::unique_ptr<tr_rate_point, PointDeleter>;
using CurvePtr = std::unique_ptr<tr_rate_curve, CurveDeleter>;

struct Options {
    int case_id = 0;
    std::string config;
    double lmin = 0.064;
    double lmax = 0.5;
    std::size_t steps = 150;
    double ell = 0.2;
    std::size_t n = 100;
    std::size_t trials = 10000;
    std::string method = "tilted";
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::string out_dir = ".";
};

PoolPtr load_pool(const Options& o) {
    tr_pool* p = nullptr;
    if (!o.config.empty()) {
        check(tr_pool_load(o.config.c_str(), &p));
    } else {
        check(tr_pool_preset(o.case_id == 0 ? 1 : o.case_id, &p));
    }
    return PoolPtr(p);
}

PoolPtr preset(int id) {
    tr_pool* p = nullptr;
    check(tr_pool_preset(id, &p));
    return PoolPtr(p);
}

std::string hash_of(const tr_pool* p) {
    char h[17];
    check(tr_pool_hash(p, h));
    return h;
}

std::vector<double> make_grid(double lo, double hi, std::size_t steps) {
    if (steps == 0) throw Failure(kExitUsage, "--steps must be at least 1");
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw Failure(kExitUsage, "grid must satisfy 0 <= lmin <= lmax <= 1");
    if (steps == 1) return {lo};
    if (lo == hi) throw Failure(kExitUsage, "lmin == lmax needs --steps 1");
    std::vector<double> g(steps);
    for (std::size_t i = 0; i < steps; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    g.back() = hi;
    return g;
}

CurvePtr compute_curve(const tr_pool* pool, const std::vector<double>& grid) {
    tr_rate_curve* c = nullptr;
    check(tr_rate_curve_compute(pool, grid.data(), grid.size(), 1, &c));
    return CurvePtr(c);
}

tr_rate_summary summary_of(const tr_rate_point* p) {
    tr_rate_summary s;
    check(tr_rate_point_summary(p, &s));
    return s;
}

std::vector<tr_recovery_point> recovery_of(const tr_rate_curve* c) {
    std::size_t count = 0;
    check(tr_recovery_curve(c, nullptr, 0, &count));
    std::vector<tr_recovery_point> pts(count);
    check(tr_recovery_curve(c, pts.data(), pts.size(), &count));
    return pts;
}

class Emitter {
public:
    Emitter(const Options& o, std::ostream& fallback) : opts_(o), out_(&fallback) {
        if (o.format != "csv" && o.format != "json") throw Failure(kExitUsage, "--format must be csv or json");
        if (!o.out.empty()) {
            file_.open(o.out, std::ios::binary | std::ios::trunc);
            if (!file_) throw Failure(kExitUsage, "cannot write " + o.out);
            out_ = &file_;
        }
    }

    void emit(const Metadata& meta, const Table& t) {
        if (opts_.format == "json") write_json(*out_, meta, t);
        else write_csv(*out_, meta, t);
        out_->flush();
    }

private:
    const Options& opts_;
    std::ostream* out_;
    std::ofstream file_;
};

Metadata metadata(const tr_pool* pool, std::uint64_t seed) {
    return {tr_version(), seed, pool ? hash_of(pool) : std::string("-")};
}

std::vector<Cell> rate_row(const tr_rate_point* p, std::size_t types) {
    const auto s = summary_of(p);
    std::vector<double> phi(types), psi(types);
    check(tr_rate_point_config(p, phi.data(), psi.data(), types));
    std::vector<Cell> row{s.ell, s.rate, s.d_star, s.r_star, s.lambda1, s.lambda2};
    for (std::size_t k = 0; k < types; ++k) row.emplace_back(phi[k]);
    for (std::size_t k = 0; k < types; ++k) row.emplace_back(psi[k]);
    row.emplace_back(std::string(!s.ok ? "failed" : s.boundary_active ? "boundary" : "ok"));
    return row;
}

std::vector<std::string> rate_columns(std::size_t types) {
    std::vector<std::string> c{"ell", "rate", "d_star", "r_star", "lambda1", "lambda2"};
    for (std::size_t k = 0; k < types; ++k) c.push_back("phi_" + std::to_string(k + 1));
    for (std::size_t k = 0; k < types; ++k) c.push_back("psi_" + std::to_string(k + 1));
    c.push_back("status");
    return c;
}

int cmd_lln(const Options& o, std::ostream& out, std::uint64_t seed) {
    auto pool = load_pool(o);
    double d = 0, l = 0;
    check(tr_lln(pool.get(), &d, &l));
    Emitter(o, out).emit(metadata(pool.get(), seed), {{"d_bar", "l_bar"}, {{d, l}}});
    return kExitOk;
}

int cmd_rate_curve(const Options& o, std::ostream& out, std::ostream& err, std::uint64_t seed) {
    auto pool = load_pool(o);
    const auto grid = make_grid(o.lmin, o.lmax, o.steps);
    auto curve = compute_curve(pool.get(), grid);
    const std::size_t types = tr_pool_type_count(pool.get());
    Table t{rate_columns(types), {}};
    bool failed = false;
    for (std::size_t i = 0; i < tr_rate_curve_size(curve.get()); ++i) {
        const tr_rate_point* p = tr_rate_curve_point(curve.get(), i);
        t.rows.push_back(rate_row(p, types));
        if (!summary_of(p).ok) {
            failed = true;
            err << "ell=" << format_number(grid[i]) << ": " << tr_rate_point_message(p) << '\n';
        }
    }
    Emitter(o, out).emit(metadata(pool.get(), seed), t);
    return failed ? kExitNumerical : kExitOk;
}

int cmd_recovery_curve(const Options& o, std::ostream& out, std::uint64_t seed) {
    auto pool = load_pool(o);
    auto curve = compute_curve(pool.get(), make_grid(o.lmin, o.lmax, o.steps));
    Table t{{"d_star", "r_star", "ell"}, {}};
    for (const auto& r : recovery_of(curve.get())) t.rows.push_back({r.d_star, r.r_star, r.ell});
    Emitter(o, out).emit(metadata(pool.get(), seed), t);
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::uint64_t seed) {
    auto pool = load_pool(o);
    const std::size_t types = tr_pool_type_count(pool.get());
    std::vector<tr_sim_outcome> sims(o.trials);
    std::vector<std::size_t> defaults(o.trials * types);
    check(tr_simulate(pool.get(), o.n, o.trials, seed, sims.data(), defaults.data()));
    Table t{{"trial", "n", "d_n", "l_n"}, {}};
    for (std::size_t k = 0; k < types; ++k) t.columns.push_back("defaults_" + std::to_string(k + 1));
    for (std::size_t i = 0; i < sims.size(); ++i) {
        std::vector<Cell> row{std::uint64_t{i}, std::uint64_t{sims[i].n}, sims[i].d_n, sims[i].l_n};
        for (std::size_t k = 0; k < types; ++k) row.emplace_back(std::uint64_t{defaults[i * types + k]});
        t.rows.push_back(std::move(row));
    }
    Emitter(o, out).emit(metadata(pool.get(), seed), t);
    return kExitOk;
}

PointPtr rate_point(const tr_pool* pool, double ell) {
    tr_rate_point* p = nullptr;
    check(tr_rate_at(pool, ell, &p));
    return PointPtr(p);
}

int cmd_tail(const Options& o, std::ostream& out, std::uint64_t seed) {
    auto pool = load_pool(o);
    auto point = rate_point(pool.get(), o.ell);
    tr_tail_estimate est{};
    if (o.method == "naive") {
        check(tr_tail_naive(pool.get(), o.ell, o.n, o.trials, seed, &est));
    } else if (o.method == "exact") {
        check(tr_tail_exact(pool.get(), o.ell, o.n, &est));
    } else if (o.method == "tilted") {
        check(tr_tail_tilted(pool.get(), o.ell, o.n, o.trials, point.get(), seed, &est));
    } else {
        throw Failure(kExitUsage, "--method must be naive, tilted or exact");
    }
    const double decay = -std::log(est.p_hat) / static_cast<double>(est.n);
    const auto s = summary_of(point.get());
    Table t{{"method", "ell", "n", "trials", "p_hat", "std_err", "decay", "rate"},
            {{o.method, est.ell, std::uint64_t{est.n}, std::uint64_t{est.trials}, est.p_hat, est.std_err,
              est.p_hat > 0.0 ? decay : INFINITY, s.rate}}};
    Emitter(o, out).emit(metadata(pool.get(), seed), t);
    return kExitOk;
}

int cmd_gibbs(const Options& o, std::ostream& out, std::uint64_t seed) {
    auto pool = load_pool(o);
    auto point = rate_point(pool.get(), o.ell);
    double mean_d = 0, se = 0;
    std::size_t hits = 0;
    check(tr_gibbs_conditional(pool.get(), o.ell, o.n, o.trials, point.get(), seed, &mean_d, &se, &hits));
    const auto s = summary_of(point.get());
    Table t{{"ell", "n", "trials", "mean_d", "std_err", "hits", "d_star"},
            {{o.ell, std::uint64_t{o.n}, std::uint64_t{o.trials}, mean_d, se, std::uint64_t{hits}, s.d_star}}};
    Emitter(o, out).emit(metadata(pool.get(), seed), t);
    return kExitOk;
}

int cmd_show_pool(const Options& o, std::ostream& out) {
    auto pool = load_pool(o);
    std::size_t need = 0;
    tr_pool_serialize(pool.get(), nullptr, 0, &need);
    std::string text(need, '\0');
    check(tr_pool_serialize(pool.get(), text.data(), text.size(), &need));
    text.resize(need - 1);
    std::ofstream file;
    std::ostream* dst = &out;
    if (!o.out.empty()) {
        file.open(o.out, std::ios::binary | std::ios::trunc);
        if (!file) throw Failure(kExitUsage, "cannot write " + o.out);
        dst = &file;
    }
    *dst << "# pool " << hash_of(pool.get()) << '\n' << text;
    return kExitOk;
}

// ---- reproduce ----

constexpr double kOrderSlack = 1e-6;

struct Check {
    std::string name;
    bool passed;
    std::string detail;
};

Check ordering_check(const std::string& name, const std::vector<double>& grid,
                     const std::vector<std::vector<double>>& rates, const std::vector<int>& chain) {
    // chain lists case indices expected in increasing order of rate.
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
            const double lo = rates[chain[j]][i], hi = rates[chain[j + 1]][i];
            if (!(lo <= hi + kOrderSlack)) {
                std::ostringstream os;
                os << "violated at ell=" << format_number(grid[i]) << ": case " << chain[j] << " rate "
                   << format_number(lo) << " > case " << chain[j + 1] << " rate " << format_number(hi);
                return {name, false, os.str()};
            }
        }
    }
    return {name, true, "holds on all " + std::to_string(grid.size()) + " grid points"};
}

Check decreasing_check(int case_id, const std::vector<tr_recovery_point>& pts) {
    const std::string name = "r_star decreasing in d_star, case " + std::to_string(case_id);
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i].r_star < pts[i - 1].r_star))
            return {name, false, "not decreasing at d_star=" + format_number(pts[i].d_star)};
    return {name, true, std::to_string(pts.size()) + " points"};
}

void write_recovery_long(const std::string& path, const Metadata& meta, const std::vector<int>& cases,
                         const std::vector<std::vector<tr_recovery_point>>& rec) {
    Table t{{"case", "d_star", "r_star", "ell"}, {}};
    for (int c : cases)
        for (const auto& r : rec[c]) t.rows.push_back({std::int64_t{c}, r.d_star, r.r_star, r.ell});
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Failure(kExitUsage, "cannot write " + path);
    write_csv(f, meta, t);
}

void write_rates_wide(const std::string& path, const Metadata& meta, const std::vector<int>& cases,
                      const std::vector<double>& grid, const std::vector<std::vector<double>>& rates) {
    Table t{{"ell"}, {}};
    for (int c : cases) t.columns.push_back("rate_case" + std::to_string(c));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<Cell> row{grid[i]};
        for (int c : cases) row.emplace_back(rates[c][i]);
        t.rows.push_back(std::move(row));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Failure(kExitUsage, "cannot write " + path);
    write_csv(f, meta, t);
}

int cmd_reproduce(const Options& o, std::ostream& out, std::ostream& err, std::uint64_t seed) {
    const auto grid = make_grid(o.lmin, o.lmax, o.steps);
    std::filesystem::create_directories(o.out_dir);
    const auto dir = std::filesystem::path(o.out_dir);

    std::vector<std::vector<double>> rates(7);
    std::vector<std::vector<tr_recovery_point>> rec(7);
    std::vector<std::string> hashes(7);
    nlohmann::ordered_json l_bars = nlohmann::ordered_json::object();
    bool solver_failed = false;
    for (int c = 1; c <= 6; ++c) {
        auto pool = preset(c);
        hashes[c] = hash_of(pool.get());
        double d = 0, l = 0;
        check(tr_lln(pool.get(), &d, &l));
        l_bars[std::to_string(c)] = l;
        auto curve = compute_curve(pool.get(), grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto* p = tr_rate_curve_point(curve.get(), i);
            const auto s = summary_of(p);
            if (!s.ok) {
                solver_failed = true;
                err << "case " << c << " ell=" << format_number(grid[i]) << ": " << tr_rate_point_message(p) << '\n';
            }
            rates[c].push_back(s.rate);
        }
        rec[c] = recovery_of(curve.get());
    }

    const Metadata meta{tr_version(), seed, "presets"};
    write_rates_wide((dir / "fig51.csv").string(), meta, {1, 2, 3, 4}, grid, rates);
    write_recovery_long((dir / "fig52.csv").string(), meta, {1, 2, 3, 4}, rec);
    write_rates_wide((dir / "fig53a.csv").string(), meta, {5, 6}, grid, rates);
    write_recovery_long((dir / "fig53b.csv").string(), meta, {5, 6}, rec);

    std::vector<Check> checks;
    checks.push_back(ordering_check("I3 <= I4 <= I2 <= I1", grid, rates, {3, 4, 2, 1}));
    checks.push_back(ordering_check("I5 <= I6", grid, rates, {5, 6}));
    for (int c = 2; c <= 5; ++c) checks.push_back(decreasing_check(c, rec[c]));
    {
        Check x{"case 5 r_star < case 6 r_star at largest d_star", false, "no finite points"};
        if (!rec[5].empty() && !rec[6].empty()) {
            const double r5 = rec[5].back().r_star, r6 = rec[6].back().r_star;
            x.passed = r5 < r6;
            x.detail = "case 5: " + format_number(r5) + " at d_star=" + format_number(rec[5].back().d_star) +
                       ", case 6: " + format_number(r6) + " at d_star=" + format_number(rec[6].back().d_star);
        }
        checks.push_back(x);
    }
    {
        bool ok = true;
        for (int c = 1; c <= 6; ++c) ok = ok && std::abs(l_bars[std::to_string(c)].get<double>() - 0.064) <= 1e-10;
        checks.push_back({"l_bar = 0.064 for all cases", ok, ""});
    }

    nlohmann::ordered_json manifest;
    manifest["version"] = tr_version();
    manifest["seed"] = seed;
    manifest["grid"] = {{"lmin", o.lmin}, {"lmax", o.lmax}, {"points", grid.size()}};
    manifest["tolerances"] = {{"ordering_slack", kOrderSlack}, {"constraint_residual", 1e-12}};
    nlohmann::ordered_json cases = nlohmann::ordered_json::object();
    for (int c = 1; c <= 6; ++c) cases[std::to_string(c)] = {{"pool_hash", hashes[c]}, {"l_bar", l_bars[std::to_string(c)]}};
    manifest["cases"] = cases;
    manifest["files"] = {"fig51.csv", "fig52.csv", "fig53a.csv", "fig53b.csv"};
    bool all = true;
    manifest["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        all = all && c.passed;
        manifest["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        out << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
    }
    manifest["all_passed"] = all;
    std::ofstream mf(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    mf << manifest.dump(2) << '\n';
    if (solver_failed) return kExitNumerical;
    return all ? kExitOk : kExitCheckFailed;
}

void add_pool_options(CLI::App* sub, Options& o) {
    auto* c = sub->add_option("--case", o.case_id, "Built-in pool 1..6 (default 1)")->check(CLI::Range(1, 6));
    auto* f = sub->add_option("--config", o.config, "Pool config file");
    c->excludes(f);
}

void add_output_options(CLI::App* sub, Options& o) {
    sub->add_option("--out", o.out, "Write results to this file instead of stdout");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_seed(CLI::App* sub, Options& o) {
    sub->add_option("--seed", o.seed, "RNG seed (default: from the OS entropy source)");
}

void add_grid(CLI::App* sub, Options& o) {
    sub->add_option("--lmin", o.lmin, "Smallest loss level")->capture_default_str();
    sub->add_option("--lmax", o.lmax, "Largest loss level")->capture_default_str();
    sub->add_option("--steps", o.steps, "Number of grid points")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Large-deviations tail asymptotics for credit pool losses", "tailrisk"};
    app.set_version_flag("--version", std::string(tr_version()));
    app.require_subcommand(1);
    std::optional<unsigned> threads;
    app.add_option("--threads", threads, "Worker threads (overrides TAILRISK_THREADS)");

    auto* lln = app.add_subcommand("lln", "Typical default and loss rates");
    add_pool_options(lln, o);
    add_output_options(lln, o);
    add_seed(lln, o);

    auto* rc = app.add_subcommand("rate-curve", "Rate function on a loss grid");
    add_pool_options(rc, o);
    add_grid(rc, o);
    add_output_options(rc, o);
    add_seed(rc, o);

    auto* rec = app.add_subcommand("recovery-curve", "Effective recovery against the optimal default rate");
    add_pool_options(rec, o);
    add_grid(rec, o);
    add_output_options(rec, o);
    add_seed(rec, o);

    auto* sim = app.add_subcommand("simulate", "Simulate finite pools");
    add_pool_options(sim, o);
    sim->add_option("--n", o.n, "Names per pool")->capture_default_str();
    sim->add_option("--trials", o.trials, "Number of pools")->capture_default_str();
    add_output_options(sim, o);
    add_seed(sim, o);

    auto* tail = app.add_subcommand("tail", "Estimate P(L_N >= ell)");
    add_pool_options(tail, o);
    tail->add_option("--ell", o.ell, "Loss level")->capture_default_str();
    tail->add_option("--n", o.n, "Names per pool")->capture_default_str();
    tail->add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
    tail->add_option("--method", o.method, "naive, tilted or exact")
        ->check(CLI::IsMember({"naive", "tilted", "exact"}))
        ->capture_default_str();
    add_output_options(tail, o);
    add_seed(tail, o);

    auto* gibbs = app.add_subcommand("gibbs", "Estimate E[D_N | L_N >= ell] under the tilted sampler");
    add_pool_options(gibbs, o);
    gibbs->add_option("--ell", o.ell, "Loss level")->capture_default_str();
    gibbs->add_option("--n", o.n, "Names per pool")->capture_default_str();
    gibbs->add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
    add_output_options(gibbs, o);
    add_seed(gibbs, o);

    auto* repro = app.add_subcommand("reproduce", "Write the figure data for all six example pools");
    add_grid(repro, o);
    repro->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
    add_seed(repro, o);

    auto* show = app.add_subcommand("show-pool", "Print a pool in config format");
    add_pool_options(show, o);
    show->add_option("--out", o.out, "Write to this file instead of stdout");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    if (threads) tr_set_thread_count(*threads);
    const std::uint64_t seed = o.seed ? *o.seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();

    try {
        if (lln->parsed()) return cmd_lln(o, out, seed);
        if (rc->parsed()) return cmd_rate_curve(o, out, err, seed);
        if (rec->parsed()) return cmd_recovery_curve(o, out, seed);
        if (sim->parsed()) return cmd_simulate(o, out, seed);
        if (tail->parsed()) return cmd_tail(o, out, seed);
        if (gibbs->parsed()) return cmd_gibbs(o, out, seed);
        if (repro->parsed()) return cmd_reproduce(o, out, err, seed);
        if (show->parsed()) return cmd_show_pool(o, out);
    } catch (const Failure& f) {
        err << "error: " << f.what() << '\n';
        return f.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace tailrisk_cli
