#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "mms/fairness.hpp"
#include "mms/oracle.hpp"
#include "mms/pipelines.hpp"
#include "support/brute.hpp"

using namespace mms;

namespace {

Instance identical(std::vector<const char*> vals, int n) {
    std::vector<Rational> row;
    for (const char* v : vals) row.push_back(parse_rational(v));
    return Instance::from_rows(std::vector<std::vector<Rational>>(n, row));
}

// fairness restricted to a participant set: non-participants hold nothing
bool ef1_among(const Instance& inst, const Allocation& alloc, const std::vector<int>& participants) {
    for (int i : participants)
        for (int j : participants) {
            if (i == j || alloc.bundles[j].empty()) continue;
            Rational own = inst.value_of(i, alloc.bundles[i]);
            Rational other = inst.value_of(i, alloc.bundles[j]);
            Rational best(0);
            for (int g : alloc.bundles[j])
                if (inst.at(i, g) > best) best = inst.at(i, g);
            if (own < other - best) return false;
        }
    return true;
}

bool efx_among(const Instance& inst, const Allocation& alloc, const std::vector<int>& participants) {
    for (int i : participants)
        for (int j : participants) {
            if (i == j || alloc.bundles[j].empty()) continue;
            Rational own = inst.value_of(i, alloc.bundles[i]);
            Rational other = inst.value_of(i, alloc.bundles[j]);
            Rational worst = inst.at(i, alloc.bundles[j][0]);
            for (int g : alloc.bundles[j])
                if (inst.at(i, g) < worst) worst = inst.at(i, g);
            if (own < other - worst) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("round_robin picks favorites in turn") {
    Instance inst = identical({"3", "2", "1"}, 2);
    Allocation a = round_robin(inst, {0, 1});
    CHECK(a.bundles[0] == GoodSet{0, 2});
    CHECK(a.bundles[1] == GoodSet{1});

    Instance one = identical({"3", "2", "1"}, 1);
    Allocation b = round_robin(one, {0});
    CHECK(b.bundles[0] == GoodSet{0, 1, 2});
}

TEST_CASE("round_robin output is EF1 among participants") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        int n = 2 + static_cast<int>(seed % 4);
        int m = n + static_cast<int>(seed % 8);
        Instance inst = brute::random_instance(n, m, 11000 + seed);
        std::vector<int> parts;
        for (int i = 0; i < n - static_cast<int>(seed % 2); ++i) parts.push_back(i);
        Allocation a = round_robin(inst, parts);
        CHECK(ef1_among(inst, a, parts));
        CHECK(a.complete(m));
    }
}

TEST_CASE("envy_graph_efx on the worked 3-good instance") {
    Instance inst = identical({"3", "2", "1"}, 2);
    Allocation a = envy_graph_efx(inst, {0, 1});
    CHECK(a.bundles[0] == GoodSet{0});
    CHECK(a.bundles[1] == GoodSet{1, 2});
    CHECK(efx_among(inst, a, {0, 1}));

    Allocation b = envy_graph_efx(inst, {1});
    CHECK(b.bundles[1] == GoodSet{0, 1, 2});
    CHECK_THROWS(envy_graph_efx(Instance::from_rows({{rat(1), rat(2)}}), {0}));
}

TEST_CASE("envy_graph_efx is EFX among participants on random ordered instances") {
    int cases = 0;
    for (uint64_t seed = 0; seed < 120; ++seed) {
        int n = 2 + static_cast<int>(seed % 5);
        int m = n + static_cast<int>(seed % 9);
        Instance inst = order_instance(brute::random_instance(n, m, 12000 + seed)).instance;
        std::vector<int> parts;
        for (int i = 0; i < std::max(1, n - 1); ++i) parts.push_back(i);
        Allocation a = envy_graph_efx(inst, parts);
        CHECK(a.complete(m));
        CHECK(efx_among(inst, a, parts));
        ++cases;
    }
    CHECK(cases == 120);
}

TEST_CASE("envy_graph_efx on normalized instances clears the beta bound") {
    int cases = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        int n = 5;
        int m = n + 2 + static_cast<int>(seed % 6);
        Instance raw = brute::random_instance(n, m, 13000 + seed);
        auto norm = normalize(raw);
        const Instance& work = norm.instance;
        if (work.n < 2 || work.m < work.n) continue;
        bool degenerate = false;
        for (int i = 0; i < work.n; ++i)
            if (work.total(i) == 0) degenerate = true;
        if (degenerate) continue;

        std::vector<int> parts;
        for (int i = 0; i + 1 < work.n; ++i) parts.push_back(i);
        Allocation a = envy_graph_efx(work, parts);
        for (int i : parts) {
            CHECK(work.value_of(i, a.bundles[i]) >= n_minus_one_beta(work.n));
            CHECK_FALSE(a.bundles[i].empty());
        }
        ++cases;
    }
    CHECK(cases >= 40);
}

TEST_CASE("two_agent_mms3 worked example") {
    Instance inst = identical({"5", "3", "2"}, 2);
    Allocation a = two_agent_mms3(inst);
    CHECK(a.bundles[0] == GoodSet{0});
    CHECK(a.bundles[1] == GoodSet{1, 2});
    auto m3 = mms::mms(inst, 0, 3);
    CHECK(m3->value == Rational(2));
    CHECK(inst.value_of(0, a.bundles[0]) >= m3->value);
    CHECK(inst.value_of(1, a.bundles[1]) >= m3->value);
}

TEST_CASE("two_agent_mms3 equal values and tiny markets") {
    Instance ones = identical({"1", "1", "1"}, 2);
    Allocation a = two_agent_mms3(ones);
    auto m3 = mms::mms(ones, 0, 3);
    CHECK(m3->value == Rational(1));
    CHECK(ones.value_of(0, a.bundles[0]) >= m3->value);
    CHECK(ones.value_of(1, a.bundles[1]) >= m3->value);

    Instance two_goods = identical({"2", "1"}, 2);
    Allocation b = two_agent_mms3(two_goods);
    CHECK(b.complete(2));
    CHECK(mms::mms(two_goods, 0, 3)->value == Rational(0));

    CHECK_THROWS(two_agent_mms3(identical({"1"}, 3)));
}

TEST_CASE("two_agent_mms3 guarantee on random instances") {
    int cases = 0;
    for (uint64_t seed = 0; seed < 150; ++seed) {
        int m = 2 + static_cast<int>(seed % 9);
        Instance inst = brute::random_instance(2, m, 14000 + seed);
        Allocation a = two_agent_mms3(inst);
        CHECK(a.complete(m));
        for (int i = 0; i < 2; ++i) {
            auto m3 = mms::mms(inst, i, 3);
            REQUIRE(m3.ok());
            CHECK(inst.value_of(i, a.bundles[i]) >= m3->value);
        }
        ++cases;
    }
    CHECK(cases == 150);
}

TEST_CASE("n_minus_one_pipeline beta table") {
    CHECK(n_minus_one_beta(4) == Rational(1));
    CHECK(n_minus_one_beta(5) == Rational(7, 8));
    CHECK(n_minus_one_beta(6) == Rational(4, 5));
    CHECK(n_minus_one_beta(7) == Rational(3, 4));
    CHECK(n_minus_one_beta(2) == Rational(2));
}

TEST_CASE("n_minus_one_pipeline satisfies n-1 agents at beta(n)") {
    int cases = 0;
    for (uint64_t seed = 0; seed < 60; ++seed) {
        int n = 4 + static_cast<int>(seed % 4);  // 4..7
        int m = n + 1 + static_cast<int>(seed % 5);
        Instance inst = brute::random_instance(n, m, 15000 + seed);
        PipelineResult res = n_minus_one_pipeline(inst);
        CHECK(static_cast<int>(res.satisfied.size()) >= n - 1);
        Rational beta = n_minus_one_beta(n);
        int good = 0;
        for (int i = 0; i < n; ++i) {
            auto r = mms::mms(inst, i, n);
            REQUIRE(r.ok());
            if (inst.value_of(i, res.allocation.bundles[i]) >= beta * r->value) ++good;
        }
        CHECK(good >= n - 1);
        ++cases;
    }
    CHECK(cases == 60);
}

TEST_CASE("n_minus_one_pipeline with two agents") {
    for (uint64_t seed = 0; seed < 40; ++seed) {
        int m = 2 + static_cast<int>(seed % 7);
        Instance inst = brute::random_instance(2, m, 16000 + seed);
        PipelineResult res = n_minus_one_pipeline(inst);
        int good = 0;
        for (int i = 0; i < 2; ++i) {
            auto r = mms::mms(inst, i, 2);
            if (inst.value_of(i, res.allocation.bundles[i]) >= r->value) ++good;
        }
        CHECK(good >= 1);
    }
}

TEST_CASE("half_agents_pipeline satisfies the selected half") {
    for (HalfVariant variant : {HalfVariant::Ef1, HalfVariant::BetaHalf}) {
        int cases = 0;
        for (uint64_t seed = 0; seed < 60; ++seed) {
            int n = 2 + static_cast<int>(seed % 5);  // 2..6
            int m = n + 1 + static_cast<int>(seed % 5);
            Instance inst = brute::random_instance(n, m, 17000 + seed);
            PipelineResult res = half_agents_pipeline(inst, variant);
            for (int i = 0; i < n / 2; ++i) {
                auto r = mms::mms(inst, i, n);
                REQUIRE(r.ok());
                CHECK(inst.value_of(i, res.allocation.bundles[i]) >= r->value);
            }
            ++cases;
        }
        CHECK(cases == 60);
    }
}

TEST_CASE("mms_k_via_dummies reaches MMS^4 for three agents") {
    int cases = 0;
    for (uint64_t seed = 0; seed < 60; ++seed) {
        int m = 4 + static_cast<int>(seed % 7);
        Instance inst = brute::random_instance(3, m, 18000 + seed);
        MmsKResult kr = mms_k_via_dummies(inst, 4);
        CHECK(kr.in_proven_range);
        for (int i = 0; i < 3; ++i) {
            auto r = mms::mms(inst, i, 4);
            REQUIRE(r.ok());
            CHECK(inst.value_of(i, kr.allocation.bundles[i]) >= r->value);
        }
        ++cases;
    }
    CHECK(cases == 60);
}

TEST_CASE("mms_k_via_dummies two-thirds path reaches MMS^(ceil(3n/2))") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        int n = 3 + static_cast<int>(seed % 3);  // 3..5
        int k = (3 * n + 1) / 2;
        int m = n + 2 + static_cast<int>(seed % 5);
        Instance inst = brute::random_instance(n, m, 19000 + seed);
        MmsKResult kr = mms_k_via_dummies(inst, k, MmsKPath::TwoThirds);
        CHECK(kr.in_proven_range);
        for (int i = 0; i < n; ++i) {
            auto r = mms::mms(inst, i, k);
            REQUIRE(r.ok());
            CHECK(inst.value_of(i, kr.allocation.bundles[i]) >= r->value);
        }
    }
}

TEST_CASE("mms_k_via_dummies identity wrapper") {
    Instance inst = brute::random_instance(3, 6, 777);
    MmsKResult kr = mms_k_via_dummies(inst, 3);
    CHECK_FALSE(kr.in_proven_range);  // k = n claims nothing beyond the base pipeline
    CHECK(kr.allocation.agents() == 3);
    CHECK_THROWS(mms_k_via_dummies(inst, 2));
}

TEST_CASE("alpha_beta_check accepts the n-1 pipeline output on four agents") {
    int passed = 0;
    for (uint64_t seed = 0; seed < 25; ++seed) {
        Instance inst = brute::random_instance(4, 7 + static_cast<int>(seed % 4), 20000 + seed);
        PipelineResult res = n_minus_one_pipeline(inst);
        if (!res.allocation.complete(inst.m)) continue;
        REQUIRE(res.satisfied.size() >= 3);
        std::vector<int> subset(res.satisfied.begin(), res.satisfied.begin() + 3);
        CHECK(alpha_beta_check(inst, res.allocation, Rational(3, 4), Rational(1), subset));
        ++passed;
    }
    CHECK(passed >= 20);
}
