#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "difact/collisions.hpp"
#include "difact/ntheory.hpp"

#include <cmath>
#include <sstream>

using namespace difact;
using namespace difact::collisions;
using difact::ntheory::make_modulus;
using difact::ntheory::mod_pow;
using difact::ntheory::order_oracle;

TEST_CASE("sample_word statistics and determinism") {
    Rng rng(42);
    const auto w = sample_word(rng, 5, 3);
    Rng rng2(42);
    const auto w2 = sample_word(rng2, 5, 3);
    REQUIRE(w.length() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(w.letters[i].sign == w2.letters[i].sign);
        CHECK(w.letters[i].t == w2.letters[i].t);
        CHECK(w.letters[i].t >= 0);
        CHECK(w.letters[i].t <= 3);
    }

    // Single letter: E in {+-2^t}.
    Rng rng3(7);
    for (int i = 0; i < 50; ++i) {
        const auto w1 = sample_word(rng3, 1, 6);
        const Int e = word_exponent(w1);
        CHECK((abs(e) & (abs(e) - 1)) == 0);  // power of two
        CHECK(abs(e) <= 64);
    }

    // Marginals: both signs and every t show up.
    Rng rng4(100);
    int plus = 0;
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 2000; ++i) {
        const auto wl = sample_word(rng4, 1, 6);
        plus += wl.letters[0].sign > 0;
        ++seen[wl.letters[0].t];
    }
    CHECK(plus > 800);
    CHECK(plus < 1200);
    for (int t = 0; t <= 6; ++t) CHECK(seen[t] > 150);
}

TEST_CASE("word exponent bound") {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const int L = 1 + static_cast<int>(rng.below(64));
        const int M = static_cast<int>(rng.below(40));
        const auto w = sample_word(rng, L, M);
        CHECK(abs(word_exponent(w)) <= Int(L) * pow2(M));
    }
}

TEST_CASE("word_endpoint examples and consistency") {
    const auto m = make_modulus(Int(299));
    DyadicWord empty;
    CHECK(word_endpoint(Int(3), m, empty) == std::make_pair(Int(1), Int(0)));

    DyadicWord w;
    w.letters = {{+1, 3}, {-1, 1}};
    const auto [x, e] = word_endpoint(Int(3), m, w);
    CHECK(e == 6);
    CHECK(x == mod_pow(Int(3), Int(6), m.N));

    // Incremental evaluation equals one big exponentiation on random words.
    Rng rng(2024);
    for (int i = 0; i < 100; ++i) {
        const auto wr = sample_word(rng, 40, m.M);
        const auto [xr, er] = word_endpoint(Int(3), m, wr);
        CHECK(xr == mod_pow(Int(3), er, m.N));
    }

    // Words with E == E' (mod 33) share an endpoint (conjugacy with Z/r).
    DyadicWord w1, w2;
    w1.letters = {{+1, 0}, {+1, 5}};   // E = 33
    w2.letters = {{+1, 1}, {+1, 6}};   // E = 66
    const auto e1 = word_endpoint(Int(3), m, w1);
    const auto e2 = word_endpoint(Int(3), m, w2);
    CHECK(e1.second == 33);
    CHECK(e2.second == 66);
    CHECK(e1.first == e2.first);
    CHECK(e1.first == 1);
}

TEST_CASE("halve_reduce") {
    // a = 2 has order 4 mod 15: halve 8 -> 4, then 2^2 != 1 stops.
    CHECK(halve_reduce(Int(8), Int(2), Int(15)) == 4);
    CHECK(halve_reduce(Int(4), Int(2), Int(15)) == 4);
    // Odd D is untouched.
    CHECK(halve_reduce(Int(33), Int(3), Int(299)) == 33);
    CHECK_THROWS_AS(halve_reduce(Int(5), Int(2), Int(15)), ContractViolation);

    // Every D_min printed in the F5 run is odd or has a^(D_min/2) != 1.
    const Int f5("4294967297"), a3("3945765912");
    for (const char* dmin :
         {"314919552", "32543920512", "52336949376", "22975726464", "40839035520",
          "25012652928", "4187760000", "3986747520", "18097823616", "9749105280"}) {
        const Int d(dmin);
        CHECK(mod_pow(a3, d, f5) == 1);
        CHECK(halve_reduce(d, a3, f5) == d);
    }
    // And powers of two times a reduced value collapse back to it.
    CHECK(halve_reduce(Int("314919552") * 8, a3, f5) == Int("314919552"));
}

TEST_CASE("endpoint table observe") {
    const Int N(299), a(3);
    EndpointTable table;
    CHECK_FALSE(table.observe(Int(27), Int(3), a, N).has_value());
    CHECK(table.size() == 1);
    // Same exponent again: trivial, discarded.
    CHECK_FALSE(table.observe(Int(27), Int(3), a, N).has_value());
    CHECK(table.size() == 1);
    // ord(3) = 33: exponent 36 hits the same endpoint nontrivially.
    const auto cert = table.observe(Int(27), Int(36), a, N);
    REQUIRE(cert.has_value());
    CHECK(cert->D == 33);
    CHECK(cert->D_min == 33);
    CHECK(mod_pow(a, cert->D_min, N) == 1);
}

TEST_CASE("accumulator follows the printed gcd chains") {
    // F5 log: gcd(314919552, 32543920512) = 6700416.
    CHECK(gcd(Int("314919552"), Int("32543920512")) == 6700416);
    // Example-4 log: gcd(12962750, 111206750) = 682250.
    CHECK(gcd(Int("12962750"), Int("111206750")) == 682250);

    RelationAccumulator acc;
    acc.stable_hits = 8;
    acc = accumulate(acc, Int("314919552"));
    CHECK(acc.g == Int("314919552"));
    CHECK(acc.unchanged_streak == 0);
    acc = accumulate(acc, Int("32543920512"));
    CHECK(acc.g == 6700416);
    CHECK(acc.unchanged_streak == 0);
    for (int i = 0; i < 8; ++i) acc = accumulate(acc, Int(6700416));
    CHECK(acc.unchanged_streak == 8);
    CHECK(stabilized(acc));
    CHECK(acc.collisions == 10);
}

TEST_CASE("stabilized thresholds") {
    RelationAccumulator acc;
    acc.stable_hits = 8;
    CHECK_FALSE(stabilized(acc));
    acc.unchanged_streak = 7;
    CHECK_FALSE(stabilized(acc));
    acc.unchanged_streak = 8;
    CHECK(stabilized(acc));
}

TEST_CASE("multiple_to_order examples") {
    CHECK(multiple_to_order(Int(6700416), Int("3945765912"), Int("4294967297")) ==
          6700416);
    CHECK(multiple_to_order(Int(682250), Int(7081686), Int(8219999)) == 682250);
    CHECK(multiple_to_order(Int(840), Int(1), Int(299)) == 1);
    // A strict multiple reduces to the true order.
    CHECK(multiple_to_order(Int(33) * 14, Int(3), Int(299)) == 33);
    CHECK_THROWS_AS(multiple_to_order(Int(5), Int(3), Int(299)), ContractViolation);
}

TEST_CASE("order_to_factor examples") {
    const Int f5("4294967297");
    const auto pf5 = order_to_factor(Int("3945765912"), Int(6700416), f5);
    REQUIRE(pf5.has_value());
    CHECK(pf5->first == 6700417);
    CHECK(pf5->second == 641);

    const auto p4 = order_to_factor(Int(7081686), Int(682250), Int(8219999));
    REQUIRE(p4.has_value());
    CHECK(p4->first == 32749);
    CHECK(p4->second == 251);

    // Odd order: no square root available.
    CHECK_FALSE(order_to_factor(Int(3), Int(33), Int(299)).has_value());
    // x == -1: trivial root.
    CHECK_FALSE(order_to_factor(Int(14), Int(2), Int(15)).has_value());
}

TEST_CASE("expected_collision_count") {
    CHECK(expected_collision_count(1, 0.5) == 0.0);
    CHECK(expected_collision_count(100, 0.001) == doctest::Approx(4.95));
    CHECK(expected_collision_count(40, 1.0 / 33) ==
          doctest::Approx(40.0 * 39 / 66).epsilon(1e-12));
}

TEST_CASE("collision_param") {
    using namespace difact::diffusion;
    CHECK(collision_param(delta_state()) == 1.0);

    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(33, 1.0 / 33);
    CHECK(collision_param(uniform) == doctest::Approx(1.0 / 33).epsilon(1e-12));

    // N=299, b=3: s2(t) decreases toward 1/33.
    const auto m = make_modulus(Int(299));
    WalkSimulator sim(build_walk(m, Int(3)));
    double prev = 1.0;
    for (int t = 1; t <= 50; ++t) {
        sim.step();
        const double s2 = collision_param(sim.snapshot());
        CHECK(s2 <= prev + 1e-15);
        prev = s2;
    }
    CHECK(prev > 1.0 / 33);
    CHECK(prev < 1.0);
}

TEST_CASE("zeta experiment sanity at small scale") {
    Rng rng(9);
    const double f2 = zeta_gcd_experiment(2, 10000, 20000, rng);
    CHECK(f2 == doctest::Approx(0.6079).epsilon(0.02));
}

TEST_CASE("run_attempt reproduces the logged F5 order and gcd pair") {
    const auto m = make_modulus(Int("4294967297"));
    EngineConfig cfg;  // L=2000, max_samples=120000, stable_hits=8
    std::ostringstream log;
    const auto res = run_attempt(Int("3945765912"), m, cfg, 12345, &log);
    REQUIRE(res.status == AttemptResult::Status::FactorFound);
    CHECK(res.order == 6700416);
    REQUIRE(res.factors.has_value());
    CHECK(res.factors->first == 6700417);
    CHECK(res.factors->second == 641);
    CHECK(log.str().find("  stabilized gcd = 6700416\n") != std::string::npos);
    CHECK(log.str().find("  reduced order r = 6700416\n") != std::string::npos);

    // Every certificate's D_min is a multiple of the true order.
    for (const auto& ev : res.events) {
        CHECK(ev.D_min % 6700416 == 0);
        CHECK(ev.g % 6700416 == 0);
    }
}

TEST_CASE("run_attempt wide arithmetic path matches the fast path") {
    const auto m = make_modulus(Int(1022117));
    EngineConfig fast;
    fast.word_length = 60;
    fast.max_samples = 4000;
    EngineConfig wide = fast;
    wide.force_wide = true;

    std::ostringstream log_fast, log_wide;
    const auto rf = run_attempt(Int(576), m, fast, 99, &log_fast);
    const auto rw = run_attempt(Int(576), m, wide, 99, &log_wide);
    CHECK(log_fast.str() == log_wide.str());
    CHECK(rf.status == rw.status);
    CHECK(rf.samples == rw.samples);
    REQUIRE(rf.events.size() == rw.events.size());
    for (std::size_t i = 0; i < rf.events.size(); ++i) {
        CHECK(rf.events[i].D == rw.events[i].D);
        CHECK(rf.events[i].D_min == rw.events[i].D_min);
        CHECK(rf.events[i].g == rw.events[i].g);
    }
}

TEST_CASE("run_attempt single-worker is byte deterministic") {
    const auto m = make_modulus(Int(299));
    EngineConfig cfg;
    cfg.word_length = 30;
    cfg.max_samples = 500;
    std::ostringstream l1, l2;
    const auto r1 = run_attempt(Int(3), m, cfg, 5, &l1);
    const auto r2 = run_attempt(Int(3), m, cfg, 5, &l2);
    CHECK(l1.str() == l2.str());
    CHECK(r1.samples == r2.samples);
    CHECK(r1.order == r2.order);
}

TEST_CASE("run_attempt with workers still finds the order") {
    const auto m = make_modulus(Int(1022117));
    EngineConfig cfg;
    cfg.word_length = 100;
    cfg.max_samples = 2000;
    cfg.workers = 2;
    const auto res = run_attempt(Int(576), m, cfg, 31, nullptr);
    // ord(576) = 5313 is odd, so the best possible outcome is OrderOnly.
    REQUIRE(res.status == AttemptResult::Status::OrderOnly);
    CHECK(res.order == 5313);
}

TEST_CASE("oracle divisibility of certificates on random small instances") {
    Rng rng(808);
    int made = 0;
    while (made < 40) {
        const Int N = 15 + 2 * Int(rng.below(800));
        Int a = 2 + rng.int_below(N - 3);
        if (gcd(a, N) != 1) continue;
        const auto m = make_modulus(N);
        const Int r = order_oracle(a, m);
        if (r < 2) continue;

        EngineConfig cfg;
        cfg.word_length = 16;
        cfg.max_samples = 400;
        cfg.stable_hits = 3;
        const auto res = run_attempt(a, m, cfg, rng.next_u64(), nullptr);
        const Int loop_bound = 2 * Int(cfg.word_length) * pow2(m.M);
        Int prev_g = 0;
        for (const auto& ev : res.events) {
            CHECK(ev.D % r == 0);
            CHECK(ev.D_min % r == 0);
            CHECK(mod_pow(a, ev.D_min, N) == 1);
            CHECK(abs(ev.D) <= loop_bound);
            // Divisibility chain: each running gcd divides its predecessor.
            if (prev_g != 0) CHECK(prev_g % ev.g == 0);
            prev_g = ev.g;
        }
        if (!res.events.empty()) ++made;
        if (res.order != 0) CHECK(res.order == r);
    }
}

TEST_CASE("birthday experiment tracks the expected pair count") {
    const auto m = make_modulus(Int(299));
    Rng rng(17);
    const double mean = birthday_experiment(m, Int(3), 40, 300, 200, rng);
    const double expected = 40.0 * 39 / 66;
    CHECK(mean / expected > 0.85);
    CHECK(mean / expected < 1.15);
}
