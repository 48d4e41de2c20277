#include "difact/cli.hpp"

#include "difact/collisions.hpp"
#include "difact/diffusion.hpp"
#include "difact/factor.hpp"
#include "difact/ntheory.hpp"
#include "difact/rc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>

namespace difact::cli {

namespace {

using json = nlohmann::json;

Int parse_int(const std::string& text) {
    if (text.empty()) throw CLI::ValidationError("expected a positive integer");
    for (char c : text)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw CLI::ValidationError("expected a positive integer, got '" + text + "'");
    return Int(text);
}

void print_total_time(std::ostream& out, double secs) {
    const long long whole = std::llround(secs);
    char buf[96];
    std::snprintf(buf, sizeof buf, "TOTAL TIME: %.3f s  (%lld:%02lld:%02lld)\n", secs,
                  whole / 3600, (whole % 3600) / 60, whole % 60);
    out << buf;
}

// Output sink selection: --out redirects primary output to a file.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw CLI::ValidationError("cannot open output file: " + path);
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

double inv_zeta(int s) {
    if (s == 2) return 6.0 / (std::numbers::pi * std::numbers::pi);
    if (s == 4) return 90.0 / std::pow(std::numbers::pi, 4);
    // Direct sum with an Euler-Maclaurin tail; plenty for s >= 2.
    const long cutoff = 200000;
    double z = 0.0;
    for (long n = cutoff; n >= 1; --n) z += std::pow(static_cast<double>(n), -s);
    const double x = static_cast<double>(cutoff);
    z += std::pow(x, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(x, -s);
    return 1.0 / z;
}

double sym_operator_norm(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct FactorOptions {
    std::string n_text;
    std::string base_text;
    std::string source = "collision";
    std::uint64_t seed = 1;
    int word_length = 2000;
    long max_samples = 120000;
    int stable_hits = 8;
    int max_attempts = 80;
    bool aggressive = false;
    int workers = 1;
    std::string output = "text";
    std::string out_path;
    bool no_timing = false;
};

json trial_json(const factoring::FactorReport& report) {
    json j;
    j["n"] = report.n.str();
    j["success"] = report.success;
    j["elapsed_s"] = report.elapsed_s;
    if (report.trials.empty()) return j;
    const auto& trial = report.trials.back();
    j["attempt"] = report.attempts;
    j["a"] = trial.a.str();
    json events = json::array();
    for (const auto& ev : trial.events)
        events.push_back({{"D", ev.D.str()}, {"D_min", ev.D_min.str()}, {"g", ev.g.str()}});
    j["collisions"] = std::move(events);
    j["r"] = trial.order ? json(trial.order->str()) : json(nullptr);
    if (report.success)
        j["factors"] = json::array({report.d1.str(), report.d2.str()});
    else
        j["factors"] = nullptr;
    return j;
}

int cmd_factor(const FactorOptions& opt, std::ostream& out, std::ostream& err) {
    const Int N = parse_int(opt.n_text);
    const auto check = factoring::pre_check(N);
    switch (check.kind) {
        case factoring::Classification::Composite:
            break;
        case factoring::Classification::Prime:
            out << "rejected: N is prime\n";
            return 3;
        case factoring::Classification::PrimePower:
            out << "rejected: N is a prime power: " << check.base << "^" << check.power
                << "\n";
            return 3;
        case factoring::Classification::Even:
            out << "rejected: N is even\n";
            return 3;
        case factoring::Classification::TooSmall:
            out << "rejected: N is too small\n";
            return 3;
    }

    factoring::FactorConfig cfg;
    if (opt.source == "collision")
        cfg.order_source = factoring::OrderSourceKind::Collision;
    else if (opt.source == "diffusion")
        cfg.order_source = factoring::OrderSourceKind::Diffusion;
    else if (opt.source == "oracle")
        cfg.order_source = factoring::OrderSourceKind::Oracle;
    else {
        err << "unknown order source: " << opt.source << "\n";
        return 1;
    }
    cfg.max_attempts = opt.max_attempts;
    cfg.seed = opt.seed;
    cfg.collision.word_length = opt.word_length;
    cfg.collision.max_samples = opt.max_samples;
    cfg.collision.stable_hits = opt.stable_hits;
    cfg.collision.aggressive = opt.aggressive;
    cfg.collision.workers = opt.workers;
    if (!opt.base_text.empty()) cfg.forced_base = parse_int(opt.base_text);

    Sink sink(opt.out_path, out);
    const bool text = opt.output == "text";
    const auto report = factoring::algorithm1(N, cfg, text ? &sink.get() : nullptr);

    if (text) {
        if (report.success) {
            sink.get() << "\nFINAL: " << N << " = " << report.d1 << " * " << report.d2
                       << "\n";
        } else {
            sink.get() << "no factor found within " << report.attempts << " attempts\n";
        }
        if (!opt.no_timing) print_total_time(sink.get(), report.elapsed_s);
    } else if (opt.output == "json") {
        json j = trial_json(report);
        if (opt.no_timing) j.erase("elapsed_s");
        sink.get() << j.dump(2) << "\n";
    } else {
        err << "factor supports --output text|json\n";
        return 1;
    }
    return report.success ? 0 : 2;
}

struct OrderDiffusionOptions {
    std::string n_text;
    std::string b_text;
    long steps = -1;
    std::size_t max_order = 200000;
    std::string out_path;
};

int cmd_order_diffusion(const OrderDiffusionOptions& opt, std::ostream& out,
                        std::ostream& err) {
    const Int N = parse_int(opt.n_text);
    const Int b = parse_int(opt.b_text);
    if (N < 3) {
        out << "rejected: N is too small\n";
        return 3;
    }
    const auto m = ntheory::make_modulus(N);

    // Feasibility guard: refuse up front when the oracle can already tell
    // that the walk state would outgrow the guard.
    if (m.bit_len <= 48) {
        try {
            const Int est = ntheory::order_oracle(b, m);
            if (est > Int(opt.max_order)) {
                err << "estimated order " << est << " exceeds the state guard of "
                    << opt.max_order << " (raise --max-order)\n";
                return 4;
            }
        } catch (const OutOfOracleRange&) {
        } catch (const NonInvertible& e) {
            out << "rejected: gcd(b, N) = " << e.gcd() << " > 1\n";
            return 3;
        }
    }

    diffusion::CayleyWalk walk;
    try {
        walk = diffusion::build_walk(m, b);
    } catch (const NonInvertible& e) {
        out << "rejected: gcd(b, N) = " << e.gcd() << " > 1\n";
        return 3;
    }

    const long n_max = opt.steps >= 0 ? opt.steps : diffusion::required_steps(m);
    std::vector<diffusion::HeatSeriesRow> rows;
    rows.reserve(static_cast<std::size_t>(n_max) + 1);
    try {
        diffusion::WalkSimulator sim(walk, opt.max_order);
        for (long n = 0; n <= n_max; ++n) {
            if (n > 0) sim.step();
            const double p = sim.identity_mass();
            rows.push_back({n, p, 1.0 / p, std::llround(1.0 / p)});
        }
    } catch (const ResourceGuardExceeded& e) {
        err << e.what() << " (raise --max-order)\n";
        return 4;
    }

    const long long r = rows.back().rounded;
    if (r < 1 || ntheory::mod_pow(b, Int(r), N) != 1) {
        err << "recovered order " << r << " fails verification b^r == 1 (mod N); "
            << "more steps needed?\n";
        return 1;
    }
    long stable_from = n_max;
    while (stable_from > 0 && rows[static_cast<std::size_t>(stable_from - 1)].rounded == r)
        --stable_from;

    Sink sink(opt.out_path, out);
    diffusion::write_heat_series_csv(sink.get(), rows);
    sink.get() << "# r = " << r << " (stable from n = " << stable_from << ")\n";
    if (!opt.out_path.empty())
        out << "r = " << r << " (stable from n = " << stable_from << ")\n";
    return 0;
}

struct OrderCollisionOptions {
    std::string n_text;
    std::string base_text;
    std::uint64_t seed = 1;
    int word_length = 2000;
    long max_samples = 120000;
    int stable_hits = 8;
    int max_attempts = 80;
    bool aggressive = false;
    int workers = 1;
    std::string out_path;
};

int cmd_order_collision(const OrderCollisionOptions& opt, std::ostream& out,
                        std::ostream& err) {
    const Int N = parse_int(opt.n_text);
    if (N < 3) {
        out << "rejected: N is too small\n";
        return 3;
    }
    const auto m = ntheory::make_modulus(N);
    collisions::EngineConfig cfg;
    cfg.word_length = opt.word_length;
    cfg.max_samples = opt.max_samples;
    cfg.stable_hits = opt.stable_hits;
    cfg.aggressive = opt.aggressive;
    cfg.workers = opt.workers;

    Sink sink(opt.out_path, out);
    Rng rng(opt.seed);
    for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
        const Int a = (attempt == 1 && !opt.base_text.empty()) ? parse_int(opt.base_text)
                                                               : 1 + rng.int_below(N - 1);
        sink.get() << "[attempt " << attempt << "] trying a = " << a << "\n";
        try {
            const auto res = collisions::run_attempt(
                a, m, cfg, derive_seed(opt.seed, static_cast<std::uint64_t>(attempt)),
                &sink.get());
            if (res.status == collisions::AttemptResult::Status::FactorFound ||
                res.status == collisions::AttemptResult::Status::OrderOnly) {
                if (res.order != 0) sink.get() << "\nr = " << res.order << "\n";
                if (res.factors)
                    sink.get() << "factors: " << res.factors->first << " * "
                               << res.factors->second << "\n";
                return 0;
            }
        } catch (const NonInvertible& e) {
            sink.get() << "  gcd(a, N) = " << e.gcd() << " (incidental factor)\n";
        }
        sink.get() << "\n";
    }
    err << "no order recovered within " << opt.max_attempts << " attempts\n";
    return 2;
}

struct BirthdayOptions {
    std::string n_text;
    std::string b_text;
    int samples = 40;
    long reps = 2000;
    long steps = 200;
    std::uint64_t seed = 1;
};

int cmd_stats_birthday(const BirthdayOptions& opt, std::ostream& out, std::ostream& err) {
    const Int N = parse_int(opt.n_text);
    const Int b = parse_int(opt.b_text);
    const auto m = ntheory::make_modulus(N);
    Rng rng(opt.seed);
    double observed = 0.0;
    try {
        observed = collisions::birthday_experiment(m, b, opt.samples, opt.reps,
                                                   opt.steps, rng);
    } catch (const NonInvertible& e) {
        err << "gcd(b, N) = " << e.gcd().str() << " > 1\n";
        return 3;
    }
    diffusion::WalkSimulator sim(diffusion::build_walk(m, b));
    for (long t = 0; t < opt.steps; ++t) sim.step();
    const double s2 = collisions::collision_param(sim.snapshot());
    const double expected = collisions::expected_collision_count(opt.samples, s2);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "T = %d  reps = %ld  t = %ld\n"
                  "s2(t) = %.8g\n"
                  "observed mean pairs = %.4f\n"
                  "expected pairs = %.4f\n",
                  opt.samples, opt.reps, opt.steps, s2, observed, expected);
    out << buf;
    if (expected > 0.0) {
        std::snprintf(buf, sizeof buf, "ratio = %.4f\n", observed / expected);
        out << buf;
    }
    return 0;
}

struct ZetaOptions {
    int s = 2;
    std::uint64_t q = 1000000;
    long trials = 100000;
    std::uint64_t seed = 1;
};

int cmd_stats_zeta(const ZetaOptions& opt, std::ostream& out) {
    Rng rng(opt.seed);
    const double freq = collisions::zeta_gcd_experiment(opt.s, opt.q, opt.trials, rng);
    const double expected = inv_zeta(opt.s);
    const double sigma = std::sqrt(expected * (1.0 - expected) /
                                   static_cast<double>(opt.trials));
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "s = %d  Q = %llu  trials = %ld\n"
                  "observed = %.5f\n"
                  "expected 1/zeta(s) = %.5f\n"
                  "binomial sigma = %.5f  z = %+.2f\n",
                  opt.s, static_cast<unsigned long long>(opt.q), opt.trials, freq,
                  expected, sigma, (freq - expected) / sigma);
    out << buf;
    return 0;
}

struct RcOptions {
    double resistance = 1000.0;
    double capacitance = 1e-6;
};

int cmd_rc_demo(const RcOptions& opt, std::ostream& out) {
    const auto net = diffusion::rc_triangle(opt.resistance, opt.capacitance);
    const double gammas[] = {1e-1, 1e-2, 1e-3, 1e-4};
    out << "gamma,dt,norm_diff\n";
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    char buf[128];
    for (const double gamma : gammas) {
        const double dt = gamma * net.capacitance;
        const auto disc = diffusion::rc_discretize(net, dt);
        const double norm = sym_operator_norm(disc.exact - disc.first_order);
        std::snprintf(buf, sizeof buf, "%.0e,%.4e,%.8e\n", gamma, dt, norm);
        out << buf;
        const double x = std::log10(gamma), y = std::log10(norm);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    std::snprintf(buf, sizeof buf, "fitted slope = %.4f (expected 2)\n", slope);
    out << buf;
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"diffusion-assisted factoring toolkit"};
    app.require_subcommand(1);

    FactorOptions fo;
    auto* factor = app.add_subcommand("factor", "factor an odd composite N");
    factor->add_option("N", fo.n_text, "integer to factor")->required();
    factor->add_option("--source", fo.source, "order source: collision|diffusion|oracle");
    factor->add_option("--base", fo.base_text, "force the base a for attempt 1");
    factor->add_option("--seed", fo.seed, "rng seed");
    factor->add_option("--word-length", fo.word_length, "collision word length L");
    factor->add_option("--max-samples", fo.max_samples, "endpoint samples per attempt");
    factor->add_option("--stable-hits", fo.stable_hits, "gcd stabilization streak");
    factor->add_option("--max-attempts", fo.max_attempts, "restart budget");
    factor->add_flag("--aggressive", fo.aggressive,
                     "try the order-to-factor step on every collision");
    factor->add_option("--workers", fo.workers, "sampling threads (1 = deterministic)");
    factor->add_option("--output", fo.output, "text|json");
    factor->add_option("--out", fo.out_path, "write output to a file");
    factor->add_flag("--no-timing", fo.no_timing, "suppress the TOTAL TIME line");

    OrderDiffusionOptions od;
    auto* odiff = app.add_subcommand("order-diffusion",
                                     "recover ord_N(b) from the heat value at e");
    odiff->add_option("N", od.n_text, "modulus")->required();
    odiff->add_option("b", od.b_text, "base")->required();
    odiff->add_option("--steps", od.steps, "walk steps (default: required bound)");
    odiff->add_option("--max-order", od.max_order, "state size guard");
    odiff->add_option("--out", od.out_path, "write the CSV series to a file");

    OrderCollisionOptions oc;
    auto* ocoll = app.add_subcommand("order-collision",
                                     "recover ord_N(a) from word collisions");
    ocoll->add_option("N", oc.n_text, "modulus")->required();
    ocoll->add_option("--base", oc.base_text, "force the base a for attempt 1");
    ocoll->add_option("--seed", oc.seed, "rng seed");
    ocoll->add_option("--word-length", oc.word_length, "word length L");
    ocoll->add_option("--max-samples", oc.max_samples, "endpoint samples per attempt");
    ocoll->add_option("--stable-hits", oc.stable_hits, "gcd stabilization streak");
    ocoll->add_option("--max-attempts", oc.max_attempts, "restart budget");
    ocoll->add_flag("--aggressive", oc.aggressive, "aggressive one-collision factoring");
    ocoll->add_option("--workers", oc.workers, "sampling threads");
    ocoll->add_option("--out", oc.out_path, "write output to a file");

    BirthdayOptions bo;
    auto* bday = app.add_subcommand("stats-birthday",
                                    "observed vs expected collision pairs");
    bday->add_option("N", bo.n_text, "modulus")->required();
    bday->add_option("b", bo.b_text, "base")->required();
    bday->add_option("-T,--samples", bo.samples, "restarts per repetition");
    bday->add_option("--reps", bo.reps, "independent repetitions");
    bday->add_option("--steps", bo.steps, "walk steps per restart");
    bday->add_option("--seed", bo.seed, "rng seed");

    ZetaOptions zo;
    auto* zeta = app.add_subcommand("stats-zeta", "empirical gcd law vs 1/zeta(s)");
    zeta->add_option("--s", zo.s, "tuple size (>= 2)");
    zeta->add_option("--q", zo.q, "draws are uniform on [1, Q]");
    zeta->add_option("--trials", zo.trials, "number of tuples");
    zeta->add_option("--seed", zo.seed, "rng seed");

    RcOptions ro;
    auto* rc = app.add_subcommand("rc-demo",
                                  "exact vs first-order RC discretization error");
    rc->add_option("--resistance", ro.resistance, "edge resistance in ohms");
    rc->add_option("--capacitance", ro.capacitance, "node capacitance in farads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (factor->parsed()) return cmd_factor(fo, out, err);
        if (odiff->parsed()) return cmd_order_diffusion(od, out, err);
        if (ocoll->parsed()) return cmd_order_collision(oc, out, err);
        if (bday->parsed()) return cmd_stats_birthday(bo, out, err);
        if (zeta->parsed()) return cmd_stats_zeta(zo, out);
        if (rc->parsed()) return cmd_rc_demo(ro, out);
    } catch (const CLI::ValidationError& e) {
        err << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace difact::cli
