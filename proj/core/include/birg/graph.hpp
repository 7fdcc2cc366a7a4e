#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "birg/errors.hpp"

namespace birg {

// Parameters of a (d_b, d_w)-biregular bipartite graph on M black and N
// white vertices. Valid configurations satisfy M*d_b == N*d_w, M >= N and
// the simple-graph feasibility bounds d_b <= N, d_w <= M.
struct GraphConfig {
    int M = 0;
    int N = 0;
    int d_b = 0;
    int d_w = 0;

    double alpha() const { return static_cast<double>(M) / N; }
    double gamma() const { return static_cast<double>(N) / M; }
    long long edges() const { return static_cast<long long>(M) * d_b; }

    friend bool operator==(const GraphConfig&, const GraphConfig&) = default;
};

GraphConfig validate_config(long long M, long long N, long long d_b, long long d_w);

// Simple biregular bipartite graph. Black vertices are 0..M-1, white
// vertices 0..N-1; in the (M+N)-dimensional linearization the black block
// occupies global indices 0..M-1 and the white block M..M+N-1.
// Adjacency rows are kept sorted ascending; instances are immutable.
class BiregularGraph {
  public:
    static BiregularGraph from_adjacency_lists(const GraphConfig& config,
                                               std::vector<std::vector<int>> black_adj);

    const GraphConfig& config() const { return config_; }
    const std::vector<std::vector<int>>& black_adj() const { return black_adj_; }
    const std::vector<std::vector<int>>& white_adj() const { return white_adj_; }

    bool has_edge(int b, int w) const;

    std::string to_json() const;
    static BiregularGraph from_json(const std::string& text);

    friend bool operator==(const BiregularGraph& a, const BiregularGraph& b) {
        return a.config_ == b.config_ && a.black_adj_ == b.black_adj_;
    }

  private:
    BiregularGraph() = default;

    GraphConfig config_;
    std::vector<std::vector<int>> black_adj_;
    std::vector<std::vector<int>> white_adj_;
};

// Deterministic circulant start state: black vertex i is joined to white
// vertices {(i*d_b + t) mod N : t = 0..d_b-1}.
BiregularGraph seed_graph(const GraphConfig& config);

// M x N 0/1 adjacency block; row sums d_b, column sums d_w.
Eigen::MatrixXd adjacency(const BiregularGraph& graph);

BiregularGraph from_adjacency(const Eigen::MatrixXd& A, const GraphConfig& config);

// Exhaustive list of all labeled biregular graphs for the configuration, in
// lexicographic order of their adjacency lists. Guarded by M*d_b <= 16.
std::vector<BiregularGraph> enumerate_graphs(const GraphConfig& config);

// Canonical one-line encoding of the edge set; equal iff graphs are equal.
std::string graph_key(const BiregularGraph& graph);

}  // namespace birg
