// Target realization, density parameters, gadgets and plan arithmetic.
//
// Density values are cross-checked against a test-side brute force that
// enumerates vertex subsets directly and shares nothing with the oracle
// under test.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "perturb/rng.hpp"
#include "perturb/targets.hpp"

using namespace perturb;

namespace {

Graph complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return Graph(n, std::move(e));
}

// Independent oracle: max e(S)/(v(S)-c) by direct subset enumeration.
double brute_density(const Graph& g, int min_v, int sub) {
    double best = -1;
    for (unsigned mask = 1; mask < (1u << g.n()); ++mask) {
        std::vector<int> vs;
        for (int i = 0; i < g.n(); ++i)
            if (mask >> i & 1) vs.push_back(i);
        if (static_cast<int>(vs.size()) < min_v) continue;
        int e = 0;
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j)
                if (g.has_edge(vs[i], vs[j])) ++e;
        best = std::max(best, static_cast<double>(e) / (static_cast<double>(vs.size()) - sub));
    }
    return best;
}

}  // namespace

TEST(Realize, HamPowerSmallIsComplete) {
    TargetSpec spec = parse_target("ham-power:k=2", 5);
    Graph g = realize(spec);
    EXPECT_EQ(g.edge_count(), 10);  // every pair within distance 2 on C5
}

TEST(Realize, PowerPathEdgeFormula) {
    // e(P^k_m) = k*m - C(k+1,2) for m >= 2k.
    for (int k : {2, 3, 4})
        for (int m = 2 * k; m <= 30; ++m)
            EXPECT_EQ(power_path(k, m).edge_count(), k * m - k * (k + 1) / 2) << "k=" << k << " m=" << m;
    EXPECT_EQ(power_path(2, 5).edge_count(), 7);
}

TEST(Realize, TriangleFactor) {
    TargetSpec spec = parse_target("factor:K3", 9);
    Graph g = realize(spec);
    EXPECT_EQ(g.edge_count(), 9);
    EXPECT_EQ(max_degree(g), 2);
    EXPECT_THROW(realize(parse_target("factor:K3", 10)), std::invalid_argument);
}

TEST(Realize, TreeShapesRespectDegreeBound) {
    for (auto shape : {"path", "binary", "random"}) {
        TargetSpec spec = parse_target(std::string("tree:delta=3,shape=") + shape, 20);
        Graph t = realize(spec);
        EXPECT_EQ(t.edge_count(), 19);
        EXPECT_LE(max_degree(t), 3) << shape;
    }
}

TEST(Density, CompleteGraphValues) {
    // m1(K6) = 15/5 = 3, gamma(K6) = 15/4.
    auto rep = density_report(complete(6));
    EXPECT_EQ(rep.m1, Ratio(3, 1));
    ASSERT_TRUE(rep.gamma.has_value());
    EXPECT_EQ(*rep.gamma, Ratio(15, 4));
    EXPECT_EQ(rep.m1_witness.size(), 6u);
    EXPECT_FALSE(rep.bounded);
    // m1(K_r) = r/2 exactly.
    for (int r = 3; r <= 8; ++r) EXPECT_EQ(density_report(complete(r)).m1, Ratio(r, 2));
}

TEST(Density, PowerPathBelowK) {
    auto rep = density_report(power_path(2, 5));
    EXPECT_EQ(rep.m1, Ratio(7, 4));
    for (int k : {2, 3})
        for (int m = 2 * k; m <= 12; ++m) {
            EXPECT_TRUE(density_report(power_path(k, m)).m1 < Ratio(k, 1)) << k << " " << m;
            EXPECT_TRUE(density_report(power_path(k, m + 1)).m1 < Ratio(k, 1)) << k << " " << m;
        }
}

TEST(Density, SingleEdgeHasNoGamma) {
    Graph k2(2, {{0, 1}});
    auto rep = density_report(k2);
    EXPECT_EQ(rep.m1, Ratio(1, 1));
    EXPECT_FALSE(rep.gamma.has_value());
}

TEST(Density, MatchesBruteForceOnRandomGraphs) {
    for (int seed = 0; seed < 30; ++seed) {
        Graph g = gnp_sample(8, 0.45, 900 + seed);
        if (g.edge_count() == 0) continue;
        auto rep = density_report(g);
        EXPECT_NEAR(rep.m1.value(), brute_density(g, 2, 1), 1e-12) << seed;
        ASSERT_TRUE(rep.gamma.has_value());
        EXPECT_NEAR(rep.gamma->value(), brute_density(g, 3, 2), 1e-12) << seed;
    }
}

TEST(Density, WitnessesAttainReportedValues) {
    for (int seed = 0; seed < 10; ++seed) {
        Graph g = gnp_sample(9, 0.5, 40 + seed);
        if (g.edge_count() == 0) continue;
        auto rep = density_report(g);
        Graph w1 = induced_subgraph(g, rep.m1_witness);
        EXPECT_EQ(Ratio(w1.edge_count(), w1.n() - 1), rep.m1);
        if (rep.gamma) {
            Graph w2 = induced_subgraph(g, rep.gamma_witness);
            EXPECT_EQ(Ratio(w2.edge_count(), w2.n() - 2), *rep.gamma);
        }
    }
}

TEST(Density, StrictBalance) {
    EXPECT_TRUE(density_report(complete(5)).strictly_balanced);
    // A triangle with a pendant edge: the triangle beats the whole graph.
    Graph g(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
    EXPECT_FALSE(density_report(g).strictly_balanced);
}

TEST(Density, BoundedModeOnLargeSparseGraph) {
    // A long cycle: too big for the exact oracle, bounded mode flags itself.
    TargetSpec spec = parse_target("ham-power:k=1", 40);
    auto rep = density_report(realize(spec));
    EXPECT_TRUE(rep.bounded);
    EXPECT_EQ(rep.m1, Ratio(1, 1));  // subpaths and the full cycle all give <= 1
}

TEST(Dense, CliqueThresholds) {
    EXPECT_TRUE(is_dense(complete(5), 5));             // gamma = 10/3 > 3
    EXPECT_TRUE(is_minimally_dense(complete(5), 5));   // K4 has gamma 3, not > 3
    EXPECT_TRUE(is_dense(complete(6), 5));
    EXPECT_FALSE(is_minimally_dense(complete(6), 5));  // contains dense K5
    TargetSpec c8 = parse_target("ham-power:k=1", 8);
    EXPECT_FALSE(is_dense(realize(c8), 5));            // gamma(C8) = 8/6 <= 3
}

TEST(TwoIndependent, MatchingCliquePath) {
    Graph matching(6, {{0, 1}, {2, 3}, {4, 5}});
    std::vector<int> all6{0, 1, 2, 3, 4, 5};
    EXPECT_EQ(two_independent_set(matching, all6), (std::vector<int>{0, 2, 4}));

    Graph k4 = complete(4);
    EXPECT_EQ(two_independent_set(k4, {0, 1, 2, 3}), (std::vector<int>{0}));

    Graph path(7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}});
    std::vector<int> all7{0, 1, 2, 3, 4, 5, 6};
    EXPECT_EQ(two_independent_set(path, all7), (std::vector<int>{0, 3, 6}));
}

TEST(TwoIndependent, PairwiseDistanceAndMaximality) {
    for (int seed = 0; seed < 25; ++seed) {
        Graph f = gnp_sample(20, 0.15, 300 + seed);
        std::vector<int> eligible;
        for (int v = 0; v < 20; ++v) eligible.push_back(v);
        auto w = two_independent_set(f, eligible);
        // Pairwise distance >= 3.
        for (std::size_t i = 0; i < w.size(); ++i)
            for (std::size_t j = i + 1; j < w.size(); ++j) {
                EXPECT_FALSE(f.has_edge(w[i], w[j]));
                for (int x : f.neighbors(w[i])) EXPECT_FALSE(f.has_edge(x, w[j]));
            }
        // Maximality: everything eligible is within distance 2 of the set.
        std::vector<char> near(20, 0);
        for (int v : w) {
            near[v] = 1;
            for (int x : f.neighbors(v)) {
                near[x] = 1;
                for (int y : f.neighbors(x)) near[y] = 1;
            }
        }
        for (int v : eligible) EXPECT_TRUE(near[v]) << "vertex " << v << " could be added";
        // Ball-size lower bound |W| >= |eligible| / (2 + Delta^2).
        int delta = max_degree(f);
        EXPECT_GE(static_cast<int>(w.size()) * (2 + delta * delta), 20);
    }
}

TEST(Connector, EdgeCountAndKeptEdge) {
    auto gad = connector_gadget(2, 6);
    // j = 3: w3w4 kept (positions 4,5), w1w2 removed (positions 2,3).
    EXPECT_TRUE(gad.graph.has_edge(4, 5));
    EXPECT_FALSE(gad.graph.has_edge(2, 3));
    EXPECT_EQ(gad.graph.edge_count(), 9);  // equals l(k - 1/2) here
    // Exact count: e(P) = l(k-1) + k(k+1)/2, hence e(P) <= l(k-1/2)
    // holds precisely when l >= k(k+1).
    for (int k : {2, 3})
        for (int ell = 2 * k + 2; ell <= 20; ++ell) {
            auto g = connector_gadget(k, ell);
            EXPECT_EQ(g.graph.edge_count(), ell * (k - 1) + k * (k + 1) / 2) << k << " " << ell;
            if (ell >= k * (k + 1))
                EXPECT_LE(2 * g.graph.edge_count(), ell * (2 * k - 1)) << k << " " << ell;
            else
                EXPECT_GT(2 * g.graph.edge_count(), ell * (2 * k - 1)) << k << " " << ell;
        }
}

TEST(Connector, NoEdgesInsideEndTuples) {
    auto gad = connector_gadget(3, 10);
    for (std::size_t i = 0; i < gad.u_tuple.size(); ++i)
        for (std::size_t j = i + 1; j < gad.u_tuple.size(); ++j) {
            EXPECT_FALSE(gad.graph.has_edge(gad.u_tuple[i], gad.u_tuple[j]));
            EXPECT_FALSE(gad.graph.has_edge(gad.v_tuple[i], gad.v_tuple[j]));
        }
    EXPECT_THROW(connector_gadget(1, 10), std::invalid_argument);
    EXPECT_THROW(connector_gadget(2, 5), std::invalid_argument);
}

TEST(PathFactorPlan, Arithmetic) {
    auto plan = path_factor_plan(100, 2, 20, 5, 0.25);
    EXPECT_EQ(plan.s, 4);
    EXPECT_EQ(plan.t, 0);
    EXPECT_EQ(plan.covered, 80);

    auto plan2 = path_factor_plan(103, 2, 20, 5, 0.25);
    EXPECT_EQ(plan2.s, 4);
    EXPECT_EQ(plan2.t, 3);
    EXPECT_EQ(plan2.covered, 83);
    Graph fstar = realize_plan_fstar(plan2);
    EXPECT_EQ(fstar.n(), 83);
    EXPECT_EQ(103 - fstar.n(), plan2.s * plan2.ell);

    // 3 blocks of P^2_21 and one of P^2_20.
    int expect_edges = 3 * (2 * 21 - 3) + (2 * 20 - 3);
    EXPECT_EQ(fstar.edge_count(), expect_edges);

    EXPECT_THROW(path_factor_plan(24, 2, 20, 5, 0.5), std::invalid_argument);
    // n = s(m+l)+t holds by construction.
    EXPECT_EQ(plan2.s * (plan2.m + plan2.ell) + plan2.t, 103);
}

TEST(PathFactorPlan, UncoveredBudget) {
    // Uncovered s*l = 20 exceeds eps*n for eps = 0.1 at n = 103.
    EXPECT_THROW(path_factor_plan(103, 2, 20, 5, 0.1), std::invalid_argument);
    auto plan = path_factor_plan(103, 2, 20, 5, 0.2);  // 20 <= 20.6
    EXPECT_FALSE(plan.paper_regime);                   // l^2 = 25 > 0.2*20
}

TEST(ParseTarget, RoundTripTags) {
    auto t1 = parse_target("ham-power:k=3", 30);
    EXPECT_EQ(t1.kind, TargetKind::ham_power);
    EXPECT_EQ(t1.k, 3);
    auto t2 = parse_target("path-factor:k=2,m=10,l=6", 40);
    EXPECT_EQ(t2.kind, TargetKind::path_power_factor);
    EXPECT_EQ(t2.m, 10);
    EXPECT_EQ(t2.ell, 6);
    EXPECT_THROW(parse_target("nonsense:x=1", 10), std::invalid_argument);
    EXPECT_THROW(parse_target("factor:Q7", 14), std::invalid_argument);
}

TEST(Realize, PathFactorBlocks) {
    TargetSpec spec = parse_target("path-factor:k=2,m=10", 33);
    Graph g = realize(spec);  // 3 blocks: 11+11+11
    EXPECT_EQ(g.n(), 33);
    EXPECT_EQ(max_degree(g), 4);
    EXPECT_EQ(g.edge_count(), 3 * (2 * 11 - 3));
}
