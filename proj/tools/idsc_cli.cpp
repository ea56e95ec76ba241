// idsc: command-line front end.
//
// Exit status: 0 success, 1 a verification came out false, 2 usage error,
// 3 budget refusal. Data goes to stdout (or --out), diagnostics to stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idsc/approx.hpp"
#include "idsc/arith.hpp"
#include "idsc/counterexample.hpp"
#include "idsc/experiments.hpp"
#include "idsc/overlap.hpp"
#include "idsc/report.hpp"
#include "idsc/specs.hpp"
#include "idsc/verify.hpp"

using namespace idsc;

namespace {

constexpr int kExitOk = 0, kExitFalse = 1, kExitUsage = 2, kExitBudget = 3;

struct Common {
    std::string format = "csv";
    std::string out;
    std::string config;
    std::string fixtures = IDSC_DEFAULT_FIXTURES;
    unsigned workers = 1;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out, "write the report here instead of stdout");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1u, 256u));
    sub->add_option("--config", c.config, "flat key=value file; command-line flags take precedence");
    sub->add_option("--fixtures", c.fixtures, "baselines file");
}

std::string join(const std::vector<Rational>& v, const char* sep = ";")
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + to_string(v[i]);
    return s;
}

/// Every option of the subcommand with its resolved value, flags included.
void echo_config(Report& rep, const CLI::App* sub, const Common& c)
{
    rep.config("tool", "idsc");
    rep.config("fixture_version", fixture_version(c.fixtures));
    for (const CLI::Option* o : sub->get_options()) {
        const std::string name = o->get_single_name();
        if (name == "help" || name == "out" || name == "config" || name == "format") continue;
        const bool flag = o->get_expected_max() == 0;
        std::string v;
        if (flag) {
            v = fmt_bool(o->count() > 0);
        } else if (o->count() > 0) {
            const auto& res = o->results();
            for (std::size_t i = 0; i < res.size(); ++i) v += (i ? "," : "") + res[i];
        } else {
            v = o->get_default_str();
        }
        rep.config(name, v);
    }
}

std::vector<u64> parse_u64_list(const std::string& s)
{
    std::vector<u64> out;
    if (s.empty()) return out;
    for (const auto& part : detail::split(s, ',')) out.push_back(to_u64(parse_natural(detail::trim(part))));
    return out;
}

Indicator parse_indicator(const std::string& s)
{
    if (s == "strict") return Indicator::strict;
    if (s == "inclusive") return Indicator::inclusive;
    throw usage_error("indicator must be strict or inclusive");
}

// ---------------------------------------------------------------------------

struct MeasureArgs {
    u64 q = 0, q_max = 0;
    unsigned m = 1;
    std::string psi = "const:1/4", y = "zero";
};

void run_measure(const MeasureArgs& a, Report& rep)
{
    IDSC_REQUIRE(a.q >= 1, "--q must be >= 1");
    const u64 hi = a.q_max ? a.q_max : a.q;
    IDSC_REQUIRE(hi >= a.q, "--q-max must be >= --q");
    const auto psi = parse_psi(a.psi);
    const auto y = parse_target(a.y, a.m);
    rep.columns({"q", "psi", "y", "measure", "closed_form", "equal", "measure_m"});
    for (u64 q = a.q; q <= hi; ++q) {
        const Rational p = psi(q);
        const auto yq = y(q);
        const auto c = closed_form_check(q, p, yq[0]);
        rep.require(c.ok);
        rep.row({std::to_string(q), to_string(p), join(yq), to_string(c.measure), to_string(c.closed_form),
                 fmt_bool(c.measure == c.closed_form), to_string(product_measure(q, p, y, a.m))});
    }
}

struct OverlapArgs {
    u64 q = 0, r = 0, scan = 0;
    std::string psi = "const:1/4", y = "zero", indicator = "inclusive";
};

void run_overlap(const OverlapArgs& a, Report& rep)
{
    const auto psi = parse_psi(a.psi);
    const auto y = parse_target(a.y, 1);
    const Indicator ind = parse_indicator(a.indicator);
    std::vector<std::pair<u64, u64>> pairs;
    if (a.scan) {
        IDSC_REQUIRE(a.q == 0 && a.r == 0, "--scan replaces --q/--r");
        for (u64 q = 2; q <= a.scan; ++q)
            for (u64 r = 1; r < q; ++r) pairs.emplace_back(q, r);
    } else {
        IDSC_REQUIRE(a.q >= 1 && a.r >= 1, "--q and --r must be >= 1 (or use --scan)");
        pairs.emplace_back(a.q, a.r);
    }
    rep.columns({"q", "r", "ell", "m", "n", "D", "exact_overlap", "addend1", "addend2", "M", "trivial_rhs",
                 "window_count_ok"});
    Rational best = 0;
    std::string arg;
    for (const auto& [q, r] : pairs) {
        const auto o = overlap_report(q, r, psi(q), psi(r), y(q)[0], y(r)[0], ind);
        const auto [lo, hi] = covering_window(o.geometry);
        const bool window_ok = o.exact_overlap == 0 ||
                               o.geometry.delta * Rational(window_pair_count(o.decomposition, lo, hi)) >= o.exact_overlap;
        rep.require(window_ok);
        const Rational rhs = o.bound.total();
        if (rhs > 0 && o.exact_overlap / rhs > best) {
            best = o.exact_overlap / rhs;
            arg = std::to_string(q) + ";" + std::to_string(r);
        }
        rep.row({std::to_string(q), std::to_string(r), std::to_string(o.decomposition.ell),
                 std::to_string(o.decomposition.em), std::to_string(o.decomposition.en), to_string(o.geometry.D),
                 to_string(o.exact_overlap), to_string(o.bound.main), to_string(o.bound.error), to_string(o.M),
                 o.trivial_rhs ? to_string(*o.trivial_rhs) : "", fmt_bool(window_ok)});
    }
    rep.summary("max_ratio", to_string(best));
    rep.summary("argmax", arg);
}

struct SumArgs {
    u64 Q = 16, exact_q_cap = 512;
    unsigned m = 1, precision = 128;
    std::string psi = "const:1/4", y = "zero", ladder, accumulation = "exact", indicator = "inclusive";
    bool allow_large_psi = false;
};

ExperimentConfig experiment_config(const SumArgs& a, unsigned workers)
{
    ExperimentConfig cfg;
    cfg.Q = a.Q;
    cfg.m = a.m;
    cfg.psi = parse_psi(a.psi);
    cfg.y = parse_target(a.y, a.m);
    if (a.accumulation == "exact")
        cfg.accumulation = Accumulation::exact;
    else if (a.accumulation == "enclosure")
        cfg.accumulation = Accumulation::enclosure;
    else
        throw usage_error("accumulation must be exact or enclosure");
    cfg.precision_bits = a.precision;
    cfg.workers = workers;
    cfg.exact_q_cap = a.exact_q_cap;
    cfg.indicator = parse_indicator(a.indicator);
    cfg.require_half = !a.allow_large_psi;
    return cfg;
}

void emit_sum(const SumReport& s, const char* pair_name, Report& rep)
{
    rep.columns({"Q", pair_name, "measure_sum", "ratio"});
    for (const auto& p : s.ladder)
        rep.row({std::to_string(p.Q), fmt_bounds(p.pair_sum), fmt_bounds(p.measure_sum),
                 p.ratio ? fmt_bounds(*p.ratio) : "undefined"});
    rep.summary(pair_name, fmt_bounds(s.pair_sum));
    rep.summary("measure_sum", fmt_bounds(s.measure_sum));
    rep.summary("ratio", s.ratio ? fmt_bounds(*s.ratio) : "undefined");
    if (s.ratio) rep.summary("ratio_decimal", fmt_decimal(s.ratio->lower.get_d()));
}

struct PhiGcdArgs {
    u64 q = 0, scan = 0;
    unsigned m = 3;
};

void run_phigcd(const PhiGcdArgs& a, unsigned workers, Report& rep)
{
    IDSC_REQUIRE(a.m >= 1, "--m must be >= 1");
    if (a.scan) {
        IDSC_REQUIRE(a.q == 0, "--scan replaces --q");
        const auto s = phigcd_scan(a.scan, a.m, workers);
        rep.columns({"Q", "m", "max_ratio", "max_ratio_decimal", "argmax"});
        rep.row({std::to_string(a.scan), std::to_string(a.m), to_string(s.max_ratio),
                 fmt_decimal(s.max_ratio.get_d()), std::to_string(s.argmax)});
        return;
    }
    const auto s = phigcd_sum(a.q, a.m);
    rep.require(s.brute == s.divisor_form);
    rep.columns({"q", "m", "brute", "divisor_form", "equal"});
    rep.row({std::to_string(a.q), std::to_string(a.m), to_string(s.brute), to_string(s.divisor_form),
             fmt_bool(s.brute == s.divisor_form)});
}

struct CounterexampleArgs {
    std::size_t blocks = 1, prime_cap = kDefaultPrimeCap, max_divisor_primes = 20;
    u64 max_pieces = 1000000;
    std::string eps, mode = "paper", primes, save;
    bool verify = false;
};

CounterexampleInstance build_instance(const CounterexampleArgs& a)
{
    std::vector<Rational> eps;
    for (const auto& part : detail::split(a.eps, ',')) eps.push_back(parse_rational(detail::trim(part)));
    if (!a.primes.empty()) {
        std::vector<std::vector<u64>> blocks;
        for (const auto& blk : detail::split(a.primes, ';')) blocks.push_back(parse_u64_list(detail::trim(blk)));
        if (eps.size() == 1 && blocks.size() > 1) eps.assign(blocks.size(), eps[0]);
        IDSC_REQUIRE(!eps.empty(), "--primes needs --eps");
        return counterexample_from_primes(blocks, eps);
    }
    IDSC_REQUIRE(a.blocks >= 1, "--blocks must be >= 1");
    BlockSchedule s;
    if (eps.empty()) {
        s = BlockSchedule::halving(a.blocks);
    } else {
        if (eps.size() == 1) eps.assign(a.blocks, eps[0]);
        IDSC_REQUIRE(eps.size() == a.blocks, "--eps needs one value or one per block");
        s.eps = eps;
    }
    s.mode = parse_prime_gap_mode(a.mode);
    s.prime_cap = a.prime_cap;
    return build_counterexample(s);
}

void run_counterexample(const CounterexampleArgs& a, Report& rep)
{
    const auto inst = build_instance(a);
    const CounterexampleBudget budget{a.max_divisor_primes, a.max_pieces};
    rep.columns({"block", "primes", "P", "eps", "density", "members", "containment", "measure", "bound", "ok"});
    for (std::size_t j = 0; j < inst.size(); ++j) {
        const Block& b = inst.block(j);
        std::string primes;
        for (const auto& p : b.primes) primes += (primes.empty() ? "" : " ") + to_string(p);
        const Natural members = (Natural(1) << static_cast<unsigned>(b.primes.size())) - 1;
        std::vector<std::string> row{std::to_string(j + 1), primes, to_string(b.P), to_string(b.eps),
                                     to_string(b.density), to_string(members)};
        if (a.verify) {
            const bool contained = verify_containment(inst, j, budget);
            const auto m = verify_block_measure(inst, j, budget);
            rep.require(contained && m.ok);
            row.insert(row.end(), {fmt_bool(contained), to_string(m.measure), to_string(m.bound),
                                   fmt_bool(contained && m.ok)});
        } else {
            row.insert(row.end(), {"", "", to_string(b.density), fmt_bool(b.density < b.eps)});
        }
        rep.row(std::move(row));
    }
    const auto div = divergence_partial_sum(inst, inst.size(), budget);
    rep.require(div.ok);
    rep.summary("divergence_sum", to_string(div.direct));
    rep.summary("divergence_closed_form", to_string(div.closed_form));
    rep.summary("divergence_ok", fmt_bool(div.ok));
    if (!a.save.empty()) {
        std::ofstream out(a.save);
        IDSC_REQUIRE(out.good(), "cannot write '" + a.save + "'");
        out << to_json(inst, budget).dump(2) << '\n';
    }
}

struct SiftArgs {
    std::string X, Y;
    u64 n = 0;
    unsigned omega_cap = kDefaultOmegaCap;
};

void run_sift(const SiftArgs& a, Report& rep)
{
    const Rational X = parse_rational(a.X), Y = parse_rational(a.Y);
    const auto s = sifted_interval_count(X, Y, a.n, a.omega_cap);
    const Rational bound(Natural(1) << s.omega);
    rep.require(s.error <= bound);
    rep.columns({"X", "Y", "n", "count", "main_term", "error", "omega", "error_bound", "ok"});
    rep.row({to_string(X), to_string(Y), std::to_string(a.n), to_string(s.count), to_string(s.main_term),
             to_string(s.error), std::to_string(s.omega), to_string(bound), fmt_bool(s.error <= bound)});
}

struct EquidistArgs {
    u64 q_lo = 1, q_hi = 100;
    std::string psi = "const:1/4", y = "zero";
    std::vector<std::string> windows;
};

void run_equidist(const EquidistArgs& a, unsigned workers, Report& rep)
{
    ExperimentConfig cfg;
    cfg.psi = parse_psi(a.psi);
    cfg.y = parse_target(a.y, 1);
    cfg.workers = workers;
    std::vector<Window> windows;
    for (const auto& w : a.windows.empty() ? std::vector<std::string>{"0,1/2"} : a.windows) {
        auto parts = detail::split(w, ',');
        IDSC_REQUIRE(parts.size() == 2, "--window takes lo,hi");
        windows.push_back({parse_rational(parts[0]), parse_rational(parts[1])});
    }
    const auto t = equidistribution_scan(cfg, a.q_lo, a.q_hi, windows);
    rep.columns({"q", "window", "ratio", "deviation"});
    for (const auto& row : t.rows) {
        const Window& w = windows[row.window];
        rep.row({std::to_string(row.q), to_string(w.lo) + ";" + to_string(w.hi), to_string(row.ratio),
                 to_string(row.deviation)});
    }
    for (std::size_t i = 0; i < windows.size(); ++i)
        rep.summary("max_deviation[" + to_string(windows[i].lo) + ";" + to_string(windows[i].hi) + "]",
                    to_string(t.max_deviation[i]) + " at q=" + std::to_string(t.argmax[i]));
}

struct McArgs {
    u64 q_lo = 1, q_hi = 1, samples = 100000, seed = 0;
    unsigned m = 1;
    std::string psi = "const:1/4", y = "zero";
    bool grid = false, exact = false;
};

void run_mc(const McArgs& a, unsigned workers, Report& rep)
{
    ExperimentConfig cfg;
    cfg.m = a.m;
    cfg.psi = parse_psi(a.psi);
    cfg.y = parse_target(a.y, a.m);
    cfg.seed = a.seed;
    cfg.workers = workers;
    const auto e = mc_coverage(cfg, a.q_lo, a.q_hi, a.samples, a.grid);
    std::vector<std::string> cols{"q_lo", "q_hi", "m", "samples", "seed", "grid", "hits", "estimate",
                                  "wilson95_lo", "wilson95_hi", "sigma3_lo", "sigma3_hi"};
    std::vector<std::string> row{std::to_string(a.q_lo), std::to_string(a.q_hi), std::to_string(a.m),
                                 std::to_string(e.samples), std::to_string(e.seed), fmt_bool(e.grid),
                                 std::to_string(e.hits), fmt_decimal(e.estimate), fmt_decimal(e.wilson95_lo),
                                 fmt_decimal(e.wilson95_hi), fmt_decimal(e.sigma3_lo), fmt_decimal(e.sigma3_hi)};
    if (a.exact) {
        const Rational exact = union_measure_exact(cfg, a.q_lo, a.q_hi);
        cols.insert(cols.end(), {"exact", "covered"});
        row.insert(row.end(), {to_string(exact), fmt_bool(e.covers(exact.get_d()))});
        rep.require(e.covers(exact.get_d()));
    }
    rep.columns(std::move(cols));
    rep.row(std::move(row));
    rep.summary("precision", "decimal columns carry 10 fractional digits");
}

void run_verify(const std::string& suite, u64 seed, const Common& c, Report& rep)
{
    const Baselines b = load_baselines(c.fixtures);
    VerifyOptions opt;
    opt.workers = c.workers;
    opt.seed = seed;
    std::vector<int> ids;
    if (suite == "all")
        for (int i = 1; i <= static_cast<int>(all_suites().size()); ++i) ids.push_back(i);
    else
        for (u64 id : parse_u64_list(suite)) ids.push_back(static_cast<int>(id));
    rep.columns({"criterion", "name", "ok", "detail"});
    for (int id : ids) {
        const auto r = run_suite(id, b, opt);
        std::fprintf(stderr, "%s criterion %d: %s [%.1fs]\n", r.ok ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
        rep.require(r.ok);
        rep.row({std::to_string(r.id), r.name, fmt_bool(r.ok), r.detail});
    }
}

// ---------------------------------------------------------------------------

std::string trim_copy(std::string s) { return detail::trim(std::move(s)); }

/// Turns a flat key=value file into --key=value arguments for keys not
/// already given on the command line.
std::vector<std::string> config_arguments(const std::string& path, const std::vector<std::string>& argv)
{
    std::ifstream in(path);
    if (!in.good()) throw usage_error("cannot open config file '" + path + "'");
    std::vector<std::string> extra;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim_copy(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw usage_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim_copy(line.substr(0, eq)), value = trim_copy(line.substr(eq + 1));
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : argv) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
        if (given) continue;
        if (value == "true")
            extra.push_back(flag);
        else if (value != "false")
            extra.push_back(flag + "=" + value);
    }
    return extra;
}

std::string find_config(const std::vector<std::string>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return "";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact coprime approximation sets: measures, overlaps, counterexample blocks, experiments", "idsc"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    Common common;

    MeasureArgs measure;
    auto* s_measure = app.add_subcommand("measure", "lambda(A_q^y) against the closed form 2 phi(q) psi(q) / q");
    s_measure->add_option("--q", measure.q, "denominator q")->required();
    s_measure->add_option("--q-max", measure.q_max, "emit rows q..q-max");
    s_measure->add_option("--psi", measure.psi, "const:c | pow:c,alpha[,noclip] | div:m | table:path | cx:...");
    s_measure->add_option("--y", measure.y, "zero | const:a[,b..] | rnd:seed,den | table:path | cx:...");
    s_measure->add_option("--m", measure.m, "dimension")->check(CLI::Range(1u, 64u));
    s_measure->footer("CSV columns: q, psi, y, measure, closed_form, equal, measure_m");

    OverlapArgs overlap;
    auto* s_overlap = app.add_subcommand("overlap", "exact pair overlap with both bound addends");
    s_overlap->add_option("--q", overlap.q, "first denominator");
    s_overlap->add_option("--r", overlap.r, "second denominator");
    s_overlap->add_option("--scan", overlap.scan, "all pairs 1 <= r < q <= scan");
    s_overlap->add_option("--psi", overlap.psi, "psi spec");
    s_overlap->add_option("--y", overlap.y, "target spec (1-dimensional)");
    s_overlap->add_option("--indicator", overlap.indicator, "M-term indicator: inclusive (D >= 1) or strict (D > 1)")
        ->check(CLI::IsMember({"inclusive", "strict"}));
    s_overlap->footer("CSV columns: q, r, ell, m, n, D, exact_overlap, addend1, addend2, M, trivial_rhs, "
                      "window_count_ok");

    SumArgs pairwise, msum;
    auto add_sum_options = [](CLI::App* sub, SumArgs& a) {
        sub->add_option("--Q", a.Q, "largest denominator");
        sub->add_option("--m", a.m, "dimension")->check(CLI::Range(1u, 64u));
        sub->add_option("--psi", a.psi, "psi spec");
        sub->add_option("--y", a.y, "target spec");
        sub->add_option("--ladder", a.ladder, "comma-separated Q values to report (each <= Q)");
        sub->add_option("--accumulation", a.accumulation, "exact or enclosure")
            ->check(CLI::IsMember({"exact", "enclosure"}));
        sub->add_option("--precision", a.precision, "enclosure precision in bits");
        sub->add_option("--exact-q-cap", a.exact_q_cap, "largest Q accepted in exact mode");
        sub->add_flag("--allow-large-psi", a.allow_large_psi, "accept psi(q) > 1/2");
    };
    auto* s_pairwise = app.add_subcommand("pairwise", "sum of lambda_m(A_q ∩ A_r) over q, r <= Q against (sum lambda_m(A_q))^2");
    add_sum_options(s_pairwise, pairwise);
    s_pairwise->footer("CSV columns: Q, pair_sum, measure_sum, ratio (enclosures print as [lo;hi])");
    auto* s_msum = app.add_subcommand("msum", "sum of M(q,r)^m over q != r <= Q against (sum (phi psi / q)^m)^2");
    add_sum_options(s_msum, msum);
    s_msum->add_option("--indicator", msum.indicator, "inclusive (D >= 1) or strict (D > 1)")
        ->check(CLI::IsMember({"inclusive", "strict"}));
    s_msum->footer("CSV columns: Q, M_sum, measure_sum, ratio");

    PhiGcdArgs phigcd;
    auto* s_phigcd = app.add_subcommand("phigcd", "sum over a mod q of phi(gcd(a,q))^m");
    s_phigcd->add_option("--q", phigcd.q, "modulus");
    s_phigcd->add_option("--m", phigcd.m, "exponent");
    s_phigcd->add_option("--scan", phigcd.scan, "max over q <= scan of the normalised sum");
    s_phigcd->footer("CSV columns: q, m, brute, divisor_form, equal | with --scan: Q, m, max_ratio, "
                     "max_ratio_decimal, argmax");

    CounterexampleArgs cx;
    auto* s_cx = app.add_subcommand("counterexample", "build and check the moving-target counterexample blocks");
    s_cx->add_option("--blocks", cx.blocks, "number of blocks J");
    s_cx->add_option("--eps", cx.eps, "per-block eps list; one value is used for every block (default 2^-j)");
    s_cx->add_option("--mode", cx.mode, "paper or desk prime gaps")->check(CLI::IsMember({"paper", "desk"}));
    s_cx->add_option("--primes", cx.primes, "explicit blocks, e.g. '2,3,5;7,11,13'");
    s_cx->add_option("--prime-cap", cx.prime_cap, "largest number of primes per block");
    s_cx->add_option("--max-divisor-primes", cx.max_divisor_primes, "refuse divisor enumeration beyond this");
    s_cx->add_option("--max-pieces", cx.max_pieces, "refuse interval sets with more pieces");
    s_cx->add_option("--save", cx.save, "write the instance as JSON");
    s_cx->add_flag("--verify", cx.verify, "check containment and block measure exactly");
    s_cx->footer("CSV columns: block, primes, P, eps, density, members, containment, measure, bound, ok");

    SiftArgs sift;
    auto* s_sift = app.add_subcommand("sift", "#{c in [X,Y] : gcd(c,n) = 1} against (Y-X) phi(rad n)/rad n");
    s_sift->add_option("--X", sift.X, "left end (rational)")->required();
    s_sift->add_option("--Y", sift.Y, "right end (rational)")->required();
    s_sift->add_option("--n", sift.n, "modulus")->required();
    s_sift->add_option("--omega-cap", sift.omega_cap, "refuse n with more distinct primes");
    s_sift->footer("CSV columns: X, Y, n, count, main_term, error, omega, error_bound, ok");

    EquidistArgs eq;
    auto* s_eq = app.add_subcommand("equidist", "share of lambda(A_q) inside windows of [0,1)");
    s_eq->add_option("--q-lo", eq.q_lo, "first q");
    s_eq->add_option("--q-hi", eq.q_hi, "last q");
    s_eq->add_option("--psi", eq.psi, "psi spec");
    s_eq->add_option("--y", eq.y, "target spec (1-dimensional)");
    s_eq->add_option("--window", eq.windows, "lo,hi (repeatable; default 0,1/2)");
    s_eq->footer("CSV columns: q, window, ratio, deviation");

    McArgs mc;
    auto* s_mc = app.add_subcommand("mc", "Monte Carlo estimate of lambda_m of a union of A_q");
    s_mc->add_option("--q-lo", mc.q_lo, "first q");
    s_mc->add_option("--q-hi", mc.q_hi, "last q");
    s_mc->add_option("--m", mc.m, "dimension (1..3)");
    s_mc->add_option("--psi", mc.psi, "psi spec");
    s_mc->add_option("--y", mc.y, "target spec");
    s_mc->add_option("--samples", mc.samples, "sample count (grid mode rounds to a full grid)");
    s_mc->add_option("--seed", mc.seed, "sampler seed");
    s_mc->add_flag("--grid", mc.grid, "equispaced grid with a seeded offset");
    s_mc->add_flag("--exact", mc.exact, "also compute the exact measure and check coverage");
    s_mc->footer("CSV columns: q_lo, q_hi, m, samples, seed, grid, hits, estimate, wilson95_lo, wilson95_hi, "
                 "sigma3_lo, sigma3_hi[, exact, covered]");

    std::string suite = "all";
    u64 verify_seed = 1;
    auto* s_verify = app.add_subcommand("verify", "run acceptance suites");
    s_verify->add_option("--suite", suite, "all or a comma-separated list of 1..9");
    s_verify->add_option("--seed", verify_seed, "seed for the randomized suites");
    s_verify->footer("CSV columns: criterion, name, ok, detail");

    for (auto* sub : {s_measure, s_overlap, s_pairwise, s_msum, s_phigcd, s_cx, s_sift, s_eq, s_mc, s_verify})
        add_common(sub, common);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const std::string config = find_config(args);
        if (!config.empty()) {
            auto extra = config_arguments(config, args);
            args.insert(args.end(), extra.begin(), extra.end());
        }
        std::reverse(args.begin(), args.end()); // CLI11 takes them reversed
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const usage_error& e) {
        std::cerr << "idsc: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    Report rep(sub->get_name());
    try {
        if (sub == s_measure)
            run_measure(measure, rep);
        else if (sub == s_overlap)
            run_overlap(overlap, rep);
        else if (sub == s_pairwise)
            emit_sum(pairwise_overlap_sum(experiment_config(pairwise, common.workers), parse_u64_list(pairwise.ladder)),
                     "pair_sum", rep);
        else if (sub == s_msum)
            emit_sum(pv_Msum_check(experiment_config(msum, common.workers), parse_u64_list(msum.ladder)), "M_sum",
                     rep);
        else if (sub == s_phigcd)
            run_phigcd(phigcd, common.workers, rep);
        else if (sub == s_cx)
            run_counterexample(cx, rep);
        else if (sub == s_sift)
            run_sift(sift, rep);
        else if (sub == s_eq)
            run_equidist(eq, common.workers, rep);
        else if (sub == s_mc)
            run_mc(mc, common.workers, rep);
        else if (sub == s_verify)
            run_verify(suite, verify_seed, common, rep);
    } catch (const usage_error& e) {
        std::cerr << "idsc " << sub->get_name() << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const budget_error& e) {
        std::cerr << "idsc " << sub->get_name() << ": refused: " << e.what() << '\n';
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "idsc " << sub->get_name() << ": " << e.what() << '\n';
        return kExitFalse;
    }

    echo_config(rep, sub, common);
    const ReportFormat format = parse_report_format(common.format);
    if (common.out.empty()) {
        rep.write(std::cout, format);
    } else {
        std::ofstream out(common.out);
        if (!out.good()) {
            std::cerr << "idsc: cannot write '" << common.out << "'\n";
            return kExitUsage;
        }
        rep.write(out, format);
    }
    if (!rep.ok()) std::cerr << "idsc " << sub->get_name() << ": verification failed (ok=false)\n";
    return rep.ok() ? kExitOk : kExitFalse;
}
