// Greedy decomposition into sparse remainder + dense spot classes, the
// independent P1-P5 verifier, canonical forms, and the JSON document.

#include <gtest/gtest.h>

#include <set>

#include "perturb/decomposition.hpp"
#include "perturb/rng.hpp"

using namespace perturb;

namespace {

Graph complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return Graph(n, std::move(e));
}

Graph k5_factor(int blocks) {
    std::vector<std::pair<int, int>> e;
    for (int b = 0; b < blocks; ++b)
        for (int u = 0; u < 5; ++u)
            for (int v = u + 1; v < 5; ++v) e.emplace_back(5 * b + u, 5 * b + v);
    return Graph(5 * blocks, std::move(e));
}

// Random graph with max degree <= delta: sample pairs, keep while degrees fit.
Graph random_bounded_degree(int n, int delta, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> deg(n, 0);
    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> have;
    int attempts = 4 * n * delta;
    for (int i = 0; i < attempts; ++i) {
        int u = rng.uniform_int(0, n - 1), v = rng.uniform_int(0, n - 1);
        if (u == v) continue;
        auto e = std::minmax(u, v);
        if (have.count({e.first, e.second})) continue;
        if (deg[u] >= delta || deg[v] >= delta) continue;
        have.insert({e.first, e.second});
        edges.emplace_back(e.first, e.second);
        ++deg[u];
        ++deg[v];
    }
    return Graph(n, std::move(edges));
}

}  // namespace

TEST(Canonical, DistinguishesAndIdentifies) {
    Graph p4(4, {{0, 1}, {1, 2}, {2, 3}});
    Graph p4b(4, {{0, 2}, {0, 3}, {1, 3}});  // relabelled path
    Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
    EXPECT_TRUE(isomorphic(p4, p4b));
    EXPECT_FALSE(isomorphic(p4, star));
    EXPECT_TRUE(isomorphic(complete(5), complete(5)));
    // Same degree sequence, different graphs: C6 vs two triangles.
    Graph c6(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
    Graph tt(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    EXPECT_FALSE(isomorphic(c6, tt));
}

TEST(Canonical, InvariantUnderRandomRelabelling) {
    for (int seed = 0; seed < 20; ++seed) {
        Graph g = gnp_sample(7, 0.5, 500 + seed);
        Rng rng(seed);
        auto perm = rng.permutation(7);
        EXPECT_TRUE(isomorphic(g, relabel(g, perm)));
    }
}

TEST(Decompose, K5FactorWholeBlocks) {
    // With delta = 5 each K5 is minimally dense, so the blocks themselves are
    // the spots and the remainder is empty.
    Graph f = k5_factor(3);
    Decomposition dec = decompose(f, 5, 1.0);
    EXPECT_TRUE(dec.f_prime.empty());
    int members = 0;
    for (auto& cls : dec.classes) {
        EXPECT_EQ(cls.s_h, 5);
        members += static_cast<int>(cls.members.size());
    }
    EXPECT_EQ(members, 3);
    EXPECT_TRUE(verify(dec).pass());
}

TEST(Decompose, PlainCycleHasNoDenseSpot) {
    TargetSpec c20 = parse_target("ham-power:k=1", 20);
    Decomposition dec = decompose(realize(c20), 5, 0.5);
    EXPECT_TRUE(dec.classes.empty());
    EXPECT_EQ(dec.f_prime.size(), 20u);
    EXPECT_TRUE(verify(dec).pass());
}

TEST(Decompose, AdjacentCliquesLandInDistinctClasses) {
    // Two K5 blocks joined by one edge: P5 forces them apart.
    std::vector<std::pair<int, int>> e;
    for (int b = 0; b < 2; ++b)
        for (int u = 0; u < 5; ++u)
            for (int v = u + 1; v < 5; ++v) e.emplace_back(5 * b + u, 5 * b + v);
    e.emplace_back(4, 5);
    Graph f(10, std::move(e));
    Decomposition dec = decompose(f, 5, 1.0);
    EXPECT_TRUE(dec.f_prime.empty());
    EXPECT_EQ(dec.classes.size(), 2u);
    for (auto& cls : dec.classes) EXPECT_EQ(cls.members.size(), 1u);
    EXPECT_TRUE(verify(dec).pass());
}

TEST(Decompose, ClassBudgetSplitsAndErrors) {
    Graph f = k5_factor(10);  // n = 50
    // eps = 0.4: 20 vertices per class -> 4 spots per class -> 3 classes.
    Decomposition dec = decompose(f, 5, 0.4);
    EXPECT_EQ(dec.classes.size(), 3u);
    EXPECT_TRUE(verify(dec).pass());
    // eps so small a single K5 exceeds eps*n: error with the class reported.
    EXPECT_THROW(decompose(f, 5, 0.05), std::invalid_argument);
    // Degree precondition.
    EXPECT_THROW(decompose(complete(7), 5, 1.0), std::invalid_argument);
}

TEST(Decompose, DeterministicAcrossReruns) {
    Graph f = random_bounded_degree(30, 5, 11);
    Decomposition a = decompose(f, 5, 0.5);
    Decomposition b = decompose(f, 5, 0.5);
    EXPECT_EQ(a.f_prime, b.f_prime);
    ASSERT_EQ(a.classes.size(), b.classes.size());
    for (std::size_t i = 0; i < a.classes.size(); ++i)
        EXPECT_EQ(a.classes[i].members, b.classes[i].members);
}

TEST(Decompose, PartitionAndTermination) {
    for (int seed = 0; seed < 15; ++seed) {
        int n = 20 + (seed * 7) % 41;
        Graph f = random_bounded_degree(n, 5, 700 + seed);
        Decomposition dec = decompose(f, 5, 0.6);
        auto rep = verify(dec);
        EXPECT_TRUE(rep.pass()) << "seed " << seed << ": " << rep.detail;
        std::vector<int> owner(n, 0);
        for (int v : dec.f_prime) ++owner[v];
        for (auto& cls : dec.classes)
            for (auto& m : cls.members)
                for (int v : m) ++owner[v];
        for (int v = 0; v < n; ++v) EXPECT_EQ(owner[v], 1);
    }
}

TEST(Verify, CatchesConstructedViolations) {
    // P2: a K4 declared as a spot is not dense for delta = 5.
    {
        std::vector<std::pair<int, int>> e;
        for (int b = 0; b < 2; ++b)
            for (int u = 0; u < 4; ++u)
                for (int v = u + 1; v < 4; ++v) e.emplace_back(4 * b + u, 4 * b + v);
        Graph f(8, std::move(e));
        Decomposition dec;
        dec.target = f;
        dec.delta = 5;
        dec.epsilon_op = 1.0;
        DenseClass cls;
        cls.iso_type = complete(4);
        cls.s_h = 4;
        cls.members = {{0, 1, 2, 3}, {4, 5, 6, 7}};
        dec.classes.push_back(cls);
        auto rep = verify(dec);
        EXPECT_FALSE(rep.p2);
        EXPECT_TRUE(rep.p1 && rep.p3 && rep.p4 && rep.p5 && rep.partition) << rep.detail;
    }
    // P5: two adjacent K5 spots forced into one class.
    {
        std::vector<std::pair<int, int>> e;
        for (int b = 0; b < 2; ++b)
            for (int u = 0; u < 5; ++u)
                for (int v = u + 1; v < 5; ++v) e.emplace_back(5 * b + u, 5 * b + v);
        e.emplace_back(4, 5);
        Graph f(10, std::move(e));
        Decomposition dec;
        dec.target = f;
        dec.delta = 5;
        dec.epsilon_op = 1.0;
        DenseClass cls;
        cls.iso_type = complete(5);
        cls.s_h = 5;
        cls.members = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
        dec.classes.push_back(cls);
        auto rep = verify(dec);
        EXPECT_FALSE(rep.p5);
        EXPECT_TRUE(rep.p1 && rep.p2 && rep.p3 && rep.p4 && rep.partition) << rep.detail;
    }
    // P1: leaving a K5 inside the remainder makes it dense.
    {
        Graph f = k5_factor(1);
        Decomposition dec;
        dec.target = f;
        dec.delta = 5;
        dec.epsilon_op = 1.0;
        dec.f_prime = {0, 1, 2, 3, 4};
        auto rep = verify(dec);
        EXPECT_FALSE(rep.p1);
        EXPECT_TRUE(rep.p2 && rep.p3 && rep.p4 && rep.p5 && rep.partition) << rep.detail;
    }
    // P3: mixed member types in one class.
    {
        Graph f = k5_factor(2);
        Decomposition dec;
        dec.target = f;
        dec.delta = 5;
        dec.epsilon_op = 1.0;
        DenseClass cls;
        cls.iso_type = complete(5);
        cls.s_h = 5;
        cls.members = {{0, 1, 2, 3, 4}};
        DenseClass cls2;
        cls2.iso_type = complete(4);  // wrong type for a 5-vertex member
        cls2.s_h = 5;
        cls2.members = {{5, 6, 7, 8, 9}};
        dec.classes = {cls, cls2};
        auto rep = verify(dec);
        EXPECT_FALSE(rep.p3);
    }
    // P4: one class carrying everything at small eps.
    {
        Graph f = k5_factor(4);
        Decomposition dec;
        dec.target = f;
        dec.delta = 5;
        dec.epsilon_op = 0.3;  // 6 vertices allowed per class
        DenseClass cls;
        cls.iso_type = complete(5);
        cls.s_h = 5;
        for (int b = 0; b < 4; ++b)
            cls.members.push_back({5 * b, 5 * b + 1, 5 * b + 2, 5 * b + 3, 5 * b + 4});
        dec.classes.push_back(cls);
        auto rep = verify(dec);
        EXPECT_FALSE(rep.p4);
        EXPECT_TRUE(rep.p2 && rep.p3 && rep.p5) << rep.detail;
    }
}

TEST(Decompose, TriangleFactorForSmallDelta) {
    // K3 blocks are minimally dense at delta = 2 (threshold 3/2).
    Graph f = realize(parse_target("factor:K3", 12));
    Decomposition dec = decompose(f, 2, 1.0);
    EXPECT_TRUE(dec.f_prime.empty());
    int members = 0;
    for (auto& cls : dec.classes) members += static_cast<int>(cls.members.size());
    EXPECT_EQ(members, 4);
    EXPECT_TRUE(verify(dec).pass());
}

TEST(DecompositionJson, StructureAndDeterminism) {
    Graph f = k5_factor(3);
    Decomposition dec = decompose(f, 5, 1.0);
    auto j = to_json(dec);
    EXPECT_EQ(j["n"], 15);
    EXPECT_TRUE(j["verdicts"]["pass"].get<bool>());
    EXPECT_EQ(j.dump(), to_json(decompose(f, 5, 1.0)).dump());
}
