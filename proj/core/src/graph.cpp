#include "birg/graph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace birg {

namespace {

using nlohmann::json;

void check_sorted_distinct(const std::vector<int>& row, int upper) {
    for (std::size_t t = 0; t < row.size(); ++t) {
        if (row[t] < 0 || row[t] >= upper) throw ConfigError("vertex index out of range");
        if (t > 0 && row[t] <= row[t - 1]) throw ConfigError("adjacency row not sorted/distinct");
    }
}

}  // namespace

GraphConfig validate_config(long long M, long long N, long long d_b, long long d_w) {
    if (M <= 0 || N <= 0 || d_b <= 0 || d_w <= 0)
        throw ConfigError("all of M, N, d_b, d_w must be positive");
    if (M * d_b != N * d_w)
        throw EdgeCountMismatch("edge count mismatch: M*d_b = " + std::to_string(M * d_b) +
                                " != N*d_w = " + std::to_string(N * d_w));
    if (M < N) throw OrientationError("M < N; relabel so that the black side is the larger one");
    if (d_b > N || d_w > M)
        throw InfeasibleDegree("degrees exceed opposite side: need d_b <= N and d_w <= M");
    if (M > (1 << 24) || N > (1 << 24)) throw ConfigError("vertex count too large");
    return GraphConfig{static_cast<int>(M), static_cast<int>(N), static_cast<int>(d_b),
                       static_cast<int>(d_w)};
}

BiregularGraph BiregularGraph::from_adjacency_lists(const GraphConfig& config,
                                                    std::vector<std::vector<int>> black_adj) {
    validate_config(config.M, config.N, config.d_b, config.d_w);
    if (static_cast<int>(black_adj.size()) != config.M)
        throw ConfigError("black adjacency has wrong number of rows");

    BiregularGraph g;
    g.config_ = config;
    g.white_adj_.assign(config.N, {});
    for (int b = 0; b < config.M; ++b) {
        auto& row = black_adj[b];
        if (static_cast<int>(row.size()) != config.d_b)
            throw ConfigError("black vertex " + std::to_string(b) + " does not have degree d_b");
        check_sorted_distinct(row, config.N);
        for (int w : row) g.white_adj_[w].push_back(b);
    }
    for (int w = 0; w < config.N; ++w) {
        if (static_cast<int>(g.white_adj_[w].size()) != config.d_w)
            throw ConfigError("white vertex " + std::to_string(w) + " does not have degree d_w");
        // Transposition of sorted rows visits blacks in ascending order already.
    }
    g.black_adj_ = std::move(black_adj);
    return g;
}

bool BiregularGraph::has_edge(int b, int w) const {
    const auto& row = black_adj_[b];
    return std::binary_search(row.begin(), row.end(), w);
}

std::string BiregularGraph::to_json() const {
    json j;
    j["M"] = config_.M;
    j["N"] = config_.N;
    j["d_b"] = config_.d_b;
    j["d_w"] = config_.d_w;
    j["black_adj"] = black_adj_;
    return j.dump();
}

BiregularGraph BiregularGraph::from_json(const std::string& text) {
    json j = json::parse(text);
    GraphConfig config = validate_config(j.at("M").get<long long>(), j.at("N").get<long long>(),
                                         j.at("d_b").get<long long>(), j.at("d_w").get<long long>());
    return from_adjacency_lists(config, j.at("black_adj").get<std::vector<std::vector<int>>>());
}

BiregularGraph seed_graph(const GraphConfig& config) {
    std::vector<std::vector<int>> rows(config.M);
    for (int b = 0; b < config.M; ++b) {
        rows[b].reserve(config.d_b);
        for (int t = 0; t < config.d_b; ++t)
            rows[b].push_back(static_cast<int>((static_cast<long long>(b) * config.d_b + t) % config.N));
        std::sort(rows[b].begin(), rows[b].end());
    }
    return BiregularGraph::from_adjacency_lists(config, std::move(rows));
}

Eigen::MatrixXd adjacency(const BiregularGraph& graph) {
    const auto& cfg = graph.config();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(cfg.M, cfg.N);
    for (int b = 0; b < cfg.M; ++b)
        for (int w : graph.black_adj()[b]) A(b, w) = 1.0;
    return A;
}

BiregularGraph from_adjacency(const Eigen::MatrixXd& A, const GraphConfig& config) {
    if (A.rows() != config.M || A.cols() != config.N) throw ConfigError("adjacency shape mismatch");
    std::vector<std::vector<int>> rows(config.M);
    for (int b = 0; b < config.M; ++b)
        for (int w = 0; w < config.N; ++w) {
            const double v = A(b, w);
            if (v != 0.0 && v != 1.0) throw ConfigError("adjacency entries must be 0/1");
            if (v == 1.0) rows[b].push_back(w);
        }
    return BiregularGraph::from_adjacency_lists(config, std::move(rows));
}

std::vector<BiregularGraph> enumerate_graphs(const GraphConfig& config) {
    validate_config(config.M, config.N, config.d_b, config.d_w);
    if (config.edges() > 16)
        throw TooLarge("enumerate_graphs guard: M*d_b <= 16, got " + std::to_string(config.edges()));

    std::vector<BiregularGraph> out;
    std::vector<std::vector<int>> rows(config.M);
    std::vector<int> capacity(config.N, config.d_w);

    // Choose each black row as an ascending d_b-subset in lexicographic order.
    std::function<void(int)> place_row = [&](int b) {
        if (b == config.M) {
            out.push_back(BiregularGraph::from_adjacency_lists(config, rows));
            return;
        }
        const int rows_after = config.M - b - 1;
        std::vector<int> choice(config.d_b);
        std::function<void(int, int)> extend = [&](int slot, int first) {
            if (slot == config.d_b) {
                for (int w : choice) --capacity[w];
                bool feasible = true;
                for (int w = 0; w < config.N && feasible; ++w)
                    if (capacity[w] > rows_after) feasible = false;
                if (feasible) {
                    rows[b] = choice;
                    place_row(b + 1);
                }
                for (int w : choice) ++capacity[w];
                return;
            }
            for (int w = first; w < config.N; ++w) {
                if (capacity[w] == 0) continue;
                choice[slot] = w;
                extend(slot + 1, w + 1);
            }
        };
        extend(0, 0);
    };
    place_row(0);
    return out;
}

std::string graph_key(const BiregularGraph& graph) {
    std::ostringstream os;
    for (const auto& row : graph.black_adj()) {
        for (int w : row) os << w << ',';
        os << ';';
    }
    return os.str();
}

}  // namespace birg
