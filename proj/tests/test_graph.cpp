#include <doctest.h>

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "birg/graph.hpp"

using namespace birg;

namespace {

// Column-capacity DP over rows: counts 0/1 matrices with constant row sum
// d_b and column sums d_w. Independent of the backtracking enumerator.
long long count_matrices_dp(const GraphConfig& cfg) {
    std::map<std::vector<int>, long long> states;
    states[std::vector<int>(cfg.N, cfg.d_w)] = 1;
    for (int row = 0; row < cfg.M; ++row) {
        std::map<std::vector<int>, long long> next;
        for (const auto& [caps, ways] : states) {
            std::vector<int> pick(cfg.d_b);
            std::function<void(int, int)> choose = [&](int slot, int first) {
                if (slot == cfg.d_b) {
                    auto reduced = caps;
                    for (int w : pick) --reduced[w];
                    next[reduced] += ways;
                    return;
                }
                for (int w = first; w < cfg.N; ++w) {
                    if (caps[w] == 0) continue;
                    pick[slot] = w;
                    choose(slot + 1, w + 1);
                }
            };
            choose(0, 0);
        }
        states = std::move(next);
    }
    const auto it = states.find(std::vector<int>(cfg.N, 0));
    return it == states.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("validate_config accepts and annotates valid quadruples") {
    const auto cfg = validate_config(6, 4, 2, 3);
    CHECK(cfg.M == 6);
    CHECK(cfg.alpha() == doctest::Approx(1.5));
    CHECK(cfg.gamma() == doctest::Approx(2.0 / 3.0));

    const auto square = validate_config(3, 3, 2, 2);
    CHECK(square.alpha() == doctest::Approx(1.0));
    CHECK(square.gamma() == doctest::Approx(1.0));
}

TEST_CASE("validate_config rejects each failure mode with its own error") {
    CHECK_THROWS_AS(validate_config(5, 3, 2, 3), EdgeCountMismatch);
    CHECK_THROWS_AS(validate_config(3, 6, 4, 2), OrientationError);
    CHECK_THROWS_AS(validate_config(2, 2, 3, 3), InfeasibleDegree);
    CHECK_THROWS_AS(validate_config(0, 2, 1, 1), ConfigError);
}

TEST_CASE("seed_graph produces the circulant construction") {
    const auto g = seed_graph(validate_config(3, 3, 2, 2));
    CHECK(g.black_adj()[0] == std::vector<int>{0, 1});
    CHECK(g.black_adj()[1] == std::vector<int>{0, 2});
    CHECK(g.black_adj()[2] == std::vector<int>{1, 2});

    // K_{2,2}: d_b = N forces the complete bipartite graph.
    const auto k22 = seed_graph(validate_config(2, 2, 2, 2));
    CHECK(k22.black_adj()[0] == std::vector<int>{0, 1});
    CHECK(k22.black_adj()[1] == std::vector<int>{0, 1});

    const auto wide = seed_graph(validate_config(6, 4, 2, 3));
    for (int b = 0; b < 6; ++b) {
        std::vector<int> expected{(2 * b) % 4, (2 * b + 1) % 4};
        std::sort(expected.begin(), expected.end());
        CHECK(wide.black_adj()[b] == expected);
    }
    for (int w = 0; w < 4; ++w) CHECK(wide.white_adj()[w].size() == 3);
}

TEST_CASE("seed_graph satisfies degree invariants across configurations") {
    for (const auto& [M, N, db, dw] : std::vector<std::array<long long, 4>>{
             {3, 3, 2, 2}, {6, 4, 2, 3}, {40, 20, 3, 6}, {8, 2, 1, 4}, {5, 5, 5, 5}}) {
        const auto cfg = validate_config(M, N, db, dw);
        const auto g = seed_graph(cfg);
        long long edges = 0;
        for (const auto& row : g.black_adj()) edges += static_cast<long long>(row.size());
        CHECK(edges == cfg.edges());
        for (const auto& row : g.white_adj()) CHECK(static_cast<int>(row.size()) == cfg.d_w);
    }
}

TEST_CASE("adjacency has the right row and column sums and round-trips") {
    const auto cfg = validate_config(6, 4, 2, 3);
    const auto g = seed_graph(cfg);
    const auto A = adjacency(g);
    for (int b = 0; b < cfg.M; ++b) CHECK(A.row(b).sum() == doctest::Approx(cfg.d_b));
    for (int w = 0; w < cfg.N; ++w) CHECK(A.col(w).sum() == doctest::Approx(cfg.d_w));
    CHECK(from_adjacency(A, cfg) == g);

    const auto k22 = adjacency(seed_graph(validate_config(2, 2, 2, 2)));
    CHECK(k22.minCoeff() == doctest::Approx(1.0));

    const auto seed33 = adjacency(seed_graph(validate_config(3, 3, 2, 2)));
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 1, 0, 1, 0, 1, 0, 1, 1;
    CHECK((seed33 - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("graph JSON round-trips bit-exactly") {
    const auto g = seed_graph(validate_config(6, 4, 2, 3));
    const auto text = g.to_json();
    CHECK(BiregularGraph::from_json(text) == g);
    CHECK(BiregularGraph::from_json(text).to_json() == text);
}

TEST_CASE("enumerate_graphs matches known counts and the DP oracle") {
    CHECK(enumerate_graphs(validate_config(2, 2, 1, 1)).size() == 2);
    CHECK(enumerate_graphs(validate_config(2, 2, 2, 2)).size() == 1);
    CHECK(enumerate_graphs(validate_config(3, 3, 2, 2)).size() == 6);

    for (const auto& [M, N, db, dw] : std::vector<std::array<long long, 4>>{
             {3, 3, 2, 2}, {4, 4, 2, 2}, {6, 4, 2, 3}, {4, 2, 1, 2}}) {
        const auto cfg = validate_config(M, N, db, dw);
        const auto all = enumerate_graphs(cfg);
        CHECK(static_cast<long long>(all.size()) == count_matrices_dp(cfg));

        // Duplicate-free, canonical order, all invariants hold (construction
        // validates them).
        std::set<std::string> keys;
        for (const auto& g : all) keys.insert(graph_key(g));
        CHECK(keys.size() == all.size());
    }
}

TEST_CASE("enumerate_graphs honors the size guard") {
    CHECK_THROWS_AS(enumerate_graphs(validate_config(40, 20, 3, 6)), TooLarge);
}
