#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "tale/oracle.hpp"
#include "tale/search.hpp"
#include "test_util.hpp"

using namespace tale;

namespace {

/// Brute-force candidate count: enumerate subsets, count (X, A) pairs.
std::uint64_t count_by_enumeration(int m, int max_lhs) {
    std::uint64_t total = 0;
    for (std::uint32_t bits = 1; bits < (1u << m); ++bits) {
        const int size = std::popcount(bits);
        if (size < 1 || size > max_lhs)
            continue;
        total += static_cast<std::uint64_t>(m - size);
    }
    return total;
}

void require_same_ranking(const std::vector<ScoredAfd>& a, const std::vector<ScoredAfd>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].lhs == b[i].lhs);
        REQUIRE(a[i].rhs == b[i].rhs);
        // one 1e-12 quantization step of slack on the canonical scores
        REQUIRE_THAT(a[i].score, Catch::Matchers::WithinAbs(b[i].score, 2e-12));
    }
}

} // namespace

TEST_CASE("theoretical_candidate_count golden values", "[search]") {
    CHECK(theoretical_candidate_count(9, 5) == 1962);
    CHECK(theoretical_candidate_count(15, 5) == 52080);
    CHECK(theoretical_candidate_count(2, 1) == 2);
}

TEST_CASE("theoretical_candidate_count matches brute-force enumeration", "[search]") {
    for (int m = 2; m <= 8; ++m)
        for (int max_lhs = 1; max_lhs <= m - 1; ++max_lhs)
            CHECK(theoretical_candidate_count(m, max_lhs) == count_by_enumeration(m, max_lhs));
}

TEST_CASE("theoretical_candidate_count overflows loudly", "[search]") {
    CHECK_THROWS_AS(theoretical_candidate_count(120, 60), std::overflow_error);
}

TEST_CASE("level1_nodes initializes S(X) = R minus X", "[search]") {
    SECTION("m = 3") {
        const auto rel = testutil::make_relation({{"a", "b", "c"}});
        const auto nodes = level1_nodes(rel);
        REQUIRE(nodes.size() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(nodes[static_cast<std::size_t>(i)].attrs == std::vector<int>{i});
            CHECK(nodes[static_cast<std::size_t>(i)].rhs_candidates.count() == 2);
            CHECK_FALSE(nodes[static_cast<std::size_t>(i)].rhs_candidates.test(i));
        }
    }
    SECTION("m = 2") {
        const auto rel = testutil::make_relation({{"a", "b"}});
        const auto nodes = level1_nodes(rel);
        REQUIRE(nodes.size() == 2);
        CHECK(nodes[0].rhs_candidates.count() == 1);
        CHECK(nodes[0].rhs_candidates.test(1));
    }
    SECTION("m = 1 has no valid RHS") {
        const auto rel = testutil::make_relation({{"a"}});
        CHECK(level1_nodes(rel).empty());
    }
}

TEST_CASE("apriori_join pairs prefix groups and intersects S", "[search]") {
    const int m = 8;
    auto node = [&](std::vector<int> attrs, std::vector<int> rhs_bits) {
        LhsNode n;
        n.attrs = std::move(attrs);
        n.rhs_candidates = AttrSet(m);
        for (int b : rhs_bits)
            n.rhs_candidates.set(b);
        return n;
    };

    SECTION("{A1,A3} and {A1,A5} join to {A1,A3,A5}") {
        std::vector<LhsNode> level;
        level.push_back(node({1, 3}, {0, 6}));
        level.push_back(node({1, 5}, {0, 7}));
        const auto next = apriori_join(level);
        REQUIRE(next.size() == 1);
        CHECK(next[0].attrs == std::vector<int>{1, 3, 5});
        CHECK(next[0].rhs_candidates.test(0));
        CHECK_FALSE(next[0].rhs_candidates.test(6));
        CHECK_FALSE(next[0].rhs_candidates.test(7));
    }
    SECTION("disjoint RHS candidate sets discard the join") {
        std::vector<LhsNode> level;
        level.push_back(node({1, 3}, {7}));
        level.push_back(node({1, 5}, {0}));
        CHECK(apriori_join(level).empty());
    }
    SECTION("a single node has no join partner") {
        std::vector<LhsNode> level;
        level.push_back(node({2, 4}, {0, 1}));
        CHECK(apriori_join(level).empty());
    }
    SECTION("different prefixes never join") {
        std::vector<LhsNode> level;
        level.push_back(node({1, 3}, {0}));
        level.push_back(node({2, 3}, {0}));
        CHECK(apriori_join(level).empty());
    }
    SECTION("output is lexicographically sorted and S propagates clears") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<LhsNode> level;
            for (int a = 0; a < m; ++a)
                for (int b = a + 1; b < m; ++b) {
                    std::vector<int> bits;
                    for (int r = 0; r < m; ++r)
                        if (r != a && r != b && rng() % 3 != 0)
                            bits.push_back(r);
                    level.push_back(node({a, b}, bits));
                }
            const auto next = apriori_join(level);
            for (std::size_t i = 1; i < next.size(); ++i)
                CHECK(next[i - 1].attrs < next[i].attrs);
            // any bit cleared in a generating parent is cleared in the child:
            // the child of the prefix join is prefix+x joined with prefix+y
            for (const auto& child : next) {
                std::vector<int> parent1 = child.attrs;
                parent1.erase(parent1.end() - 1);
                std::vector<int> parent2 = child.attrs;
                parent2.erase(parent2.end() - 2);
                int found = 0;
                for (const auto& parent : level) {
                    if (parent.attrs != parent1 && parent.attrs != parent2)
                        continue;
                    ++found;
                    for (int r = 0; r < m; ++r)
                        if (!parent.rhs_candidates.test(r))
                            CHECK_FALSE(child.rhs_candidates.test(r));
                }
                CHECK(found == 2);
            }
        }
    }
}

TEST_CASE("evaluate_lhs applies exact-FD pruning", "[search]") {
    // col1 is a function of col0; col2 breaks both ways.
    const auto rel = testutil::make_relation({{"a", "1", "p"},
                                              {"a", "1", "q"},
                                              {"b", "2", "p"},
                                              {"b", "2", "q"},
                                              {"c", "1", "p"}});
    CandidateEvaluator eval(rel);
    auto nodes = level1_nodes(rel);
    TopKHeap heap(5);
    SearchConfig cfg;
    SearchStats stats;

    evaluate_lhs(eval, nodes[0], heap, cfg, stats);
    CHECK_FALSE(nodes[0].rhs_candidates.test(1)); // {0} -> 1 exact: bit cleared
    CHECK(stats.exact_fd_count == 1);
    CHECK(stats.pruned_by_exact_fd == 1);
    CHECK(stats.evaluated_candidates == 2);

    SECTION("pruning can be disabled without changing what is offered") {
        CandidateEvaluator eval2(rel);
        auto nodes2 = level1_nodes(rel);
        TopKHeap heap2(5);
        SearchConfig no_prune;
        no_prune.exact_fd_pruning_enabled = false;
        SearchStats stats2;
        evaluate_lhs(eval2, nodes2[0], heap2, no_prune, stats2);
        CHECK(nodes2[0].rhs_candidates.test(1)); // bit survives
        CHECK(heap2.size() == heap.size());      // exact FD still never offered
    }
}

TEST_CASE("evaluate_lhs clears upper-bound-pruned bits without touching the heap",
          "[search]") {
    // Unique-ish col0 makes d_X large, so the bound collapses; the heap is
    // prefilled so tau is already high.
    const auto rel = testutil::make_relation({{"u1", "x"},
                                              {"u2", "x"},
                                              {"u3", "y"},
                                              {"u4", "y"},
                                              {"u5", "x"},
                                              {"u5", "y"}});
    CandidateEvaluator eval(rel);
    auto nodes = level1_nodes(rel);
    TopKHeap heap(1);
    heap.offer(ScoredAfd{{9}, 8, 0.6, {}});
    REQUIRE(heap.full());
    SearchConfig cfg;
    SearchStats stats;

    evaluate_lhs(eval, nodes[0], heap, cfg, stats);
    // d_X = 5 of n = 6: bound = 1 - 5/(6*(1-pm)*1) is far below tau = 0.6.
    CHECK_FALSE(nodes[0].rhs_candidates.test(1));
    CHECK(stats.pruned_by_upper_bound == 1);
    const auto sorted = heap.into_sorted();
    REQUIRE(sorted.size() == 1);
    CHECK(sorted[0].score == 0.6); // heap unchanged
}

TEST_CASE("evaluate_lhs never upper-bound-prunes while the heap is underfull", "[search]") {
    const auto rel = testutil::make_relation(
        {{"u1", "x"}, {"u2", "x"}, {"u3", "y"}, {"u4", "y"}, {"u5", "x"}, {"u5", "y"}});
    CandidateEvaluator eval(rel);
    auto nodes = level1_nodes(rel);
    TopKHeap heap(50); // will not fill
    SearchConfig cfg;
    SearchStats stats;
    evaluate_lhs(eval, nodes[0], heap, cfg, stats);
    CHECK(nodes[0].rhs_candidates.test(1));
    CHECK(stats.pruned_by_upper_bound == 0);
}

TEST_CASE("level-1 pruning decisions match a direct reimplementation", "[search][property]") {
    for (std::uint64_t seed = 40; seed < 52; ++seed) {
        const Relation rel = testutil::random_relation(seed, 40, 6, 0.0);
        const int m = rel.attribute_count();
        const int k = 1 + static_cast<int>(seed % 4);

        CandidateEvaluator eval(rel);
        auto nodes = level1_nodes(rel);
        TopKHeap heap(k);
        SearchConfig cfg;
        SearchStats stats;
        for (auto& node : nodes)
            evaluate_lhs(eval, node, heap, cfg, stats);

        // Reimplementation from the oracle's numbers and the written rules.
        TopKHeap replica(k);
        std::vector<std::set<int>> cleared(static_cast<std::size_t>(m));
        for (int x = 0; x < m; ++x) {
            for (int a = 0; a < m; ++a) {
                if (a == x)
                    continue;
                const std::vector<int> lhs{x};
                const auto mr = oracle::oracle_mu_plus(rel, lhs, a);
                if (!mr)
                    continue;
                if (mr->is_exact) {
                    cleared[static_cast<std::size_t>(x)].insert(a);
                    continue;
                }
                replica.offer(ScoredAfd{lhs, a, mr->mu_plus, *mr});
                if (replica.full()) {
                    const double nd = static_cast<double>(mr->valid_count);
                    const double bound =
                        1.0 - (nd - 1.0) / (nd * (1.0 - mr->pdep_marg) *
                                            (nd - static_cast<double>(mr->distinct_lhs)));
                    if (bound <= replica.threshold())
                        cleared[static_cast<std::size_t>(x)].insert(a);
                }
            }
        }
        for (int x = 0; x < m; ++x) {
            for (int a = 0; a < m; ++a) {
                if (a == x)
                    continue;
                const bool engine_cleared =
                    !nodes[static_cast<std::size_t>(x)].rhs_candidates.test(a);
                const bool replica_cleared =
                    cleared[static_cast<std::size_t>(x)].contains(a);
                REQUIRE(engine_cleared == replica_cleared);
            }
        }
    }
}

TEST_CASE("run_base on degenerate relations", "[search]") {
    SECTION("two constant columns: everything exact, empty result") {
        const auto rel =
            testutil::make_relation({{"c", "d"}, {"c", "d"}, {"c", "d"}});
        const auto res = run_base(rel, SearchConfig{});
        CHECK(res.ranked.empty());
        CHECK(res.stats.exact_fd_count == 2);
    }
    SECTION("single attribute: nothing to search") {
        const auto rel = testutil::make_relation({{"a"}, {"b"}});
        const auto res = run_base(rel, SearchConfig{});
        CHECK(res.ranked.empty());
        CHECK(res.stats.evaluated_candidates == 0);
    }
    SECTION("empty relation: all candidates degenerate") {
        const Relation rel = Relation::from_rows({"x", "y"}, {});
        const auto res = run_base(rel, SearchConfig{});
        CHECK(res.ranked.empty());
        CHECK(res.stats.evaluated_candidates == 0);
        CHECK(res.stats.skipped_degenerate == 2);
    }
}

TEST_CASE("run_base matches the brute-force oracle", "[search][property]") {
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
        const Relation rel = testutil::random_relation(seed, 40, 6, 0.0);
        SearchConfig cfg;
        cfg.k = (seed % 3 == 0) ? 1 : (seed % 3 == 1 ? 3 : 10);
        cfg.max_lhs_size = 1 + static_cast<int>(seed % 4);
        const auto engine = run_base(rel, cfg);
        const auto reference = oracle::oracle_topk(rel, cfg.k, cfg.max_lhs_size);
        require_same_ranking(engine.ranked, reference);
        CHECK(engine.stats.evaluated_candidates <=
              static_cast<std::int64_t>(theoretical_candidate_count(
                  rel.attribute_count(), cfg.max_lhs_size)));
    }
}

TEST_CASE("run_opt matches run_base element-wise", "[search][property]") {
    SECTION("no NULLs, default pruning") {
        for (std::uint64_t seed = 300; seed < 330; ++seed) {
            const Relation rel = testutil::random_relation(seed, 50, 7, 0.0);
            SearchConfig cfg;
            cfg.k = (seed % 3 == 0) ? 1 : (seed % 3 == 1 ? 3 : 10);
            cfg.max_lhs_size = 1 + static_cast<int>(seed % 4);
            const auto base = run_base(rel, cfg);
            const auto opt = run_opt(rel, cfg);
            require_same_ranking(opt.ranked, base.ranked);
            CHECK(opt.stats.evaluated_candidates <= base.stats.evaluated_candidates);
        }
    }
    SECTION("NULLs with upper-bound pruning disabled") {
        for (std::uint64_t seed = 400; seed < 430; ++seed) {
            const Relation rel = testutil::random_relation(seed, 50, 6, 0.15);
            SearchConfig cfg;
            cfg.k = 5;
            cfg.max_lhs_size = 3;
            cfg.ub_pruning_enabled = false;
            const auto base = run_base(rel, cfg);
            const auto opt = run_opt(rel, cfg);
            require_same_ranking(opt.ranked, base.ranked);
        }
    }
    SECTION("both pruning rules off: identical candidate counts") {
        for (std::uint64_t seed = 500; seed < 510; ++seed) {
            const Relation rel = testutil::random_relation(seed, 40, 6, 0.1);
            SearchConfig cfg;
            cfg.k = 4;
            cfg.max_lhs_size = 3;
            cfg.ub_pruning_enabled = false;
            cfg.exact_fd_pruning_enabled = false;
            const auto base = run_base(rel, cfg);
            const auto opt = run_opt(rel, cfg);
            require_same_ranking(opt.ranked, base.ranked);
            CHECK(opt.stats.evaluated_candidates == base.stats.evaluated_candidates);
            CHECK(opt.stats.skipped_degenerate == base.stats.skipped_degenerate);
        }
    }
}

TEST_CASE("per-level stats account for every candidate", "[search]") {
    const Relation rel = testutil::random_relation(77, 30, 5, 0.0);
    SearchConfig cfg;
    cfg.max_lhs_size = 3;
    const auto res = run_base(rel, cfg);
    const int m = rel.attribute_count();
    REQUIRE(res.stats.per_level.size() == static_cast<std::size_t>(std::min(3, m - 1)));
    std::int64_t total = 0;
    for (const auto& level : res.stats.per_level) {
        CHECK(level.evaluated <= level.candidates);
        total += level.evaluated;
    }
    CHECK(total == res.stats.evaluated_candidates);
}

TEST_CASE("triangle fixture: top-2 contains a non-minimal dependency", "[search]") {
    const auto fixture = oracle::build_triangle_fixture();
    SearchConfig cfg;
    cfg.k = 2;
    cfg.max_lhs_size = 2;
    const auto res = run_base(fixture.relation, cfg);
    REQUIRE(res.ranked.size() == 2);
    CHECK(res.ranked[0].lhs == fixture.f2.lhs);
    CHECK(res.ranked[0].rhs == fixture.f2.rhs);
    CHECK(res.ranked[1].lhs == fixture.f1.lhs);
    CHECK(res.ranked[1].rhs == fixture.f1.rhs);
}
