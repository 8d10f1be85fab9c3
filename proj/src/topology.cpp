#include "ach/topology.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ach {

std::string_view to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::SquareLattice: return "lattice";
        case GraphKind::RandomRegular: return "rrg";
        case GraphKind::Custom: return "custom";
    }
    return "custom";
}

Graph Graph::from_adjacency(std::vector<std::vector<int>> adjacency, GraphKind kind, int parameter,
                            std::optional<std::uint64_t> seed) {
    const int n = static_cast<int>(adjacency.size());
    Graph g;
    g.kind_ = kind;
    g.parameter_ = parameter;
    g.seed_ = seed;
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& adj = adjacency[i];
        std::sort(adj.begin(), adj.end());
        if (std::adjacent_find(adj.begin(), adj.end()) != adj.end()) {
            throw std::invalid_argument("duplicate neighbor at node " + std::to_string(i));
        }
        for (int j : adj) {
            if (j < 0 || j >= n) throw std::invalid_argument("neighbor index out of range");
            if (j == i) throw std::invalid_argument("self-loop at node " + std::to_string(i));
        }
        g.offsets_[i + 1] = g.offsets_[i] + static_cast<int>(adj.size());
    }
    g.targets_.reserve(static_cast<std::size_t>(g.offsets_[n]));
    for (const auto& adj : adjacency) g.targets_.insert(g.targets_.end(), adj.begin(), adj.end());
    for (int i = 0; i < n; ++i) {
        for (int j : adjacency[i]) {
            if (!std::binary_search(adjacency[j].begin(), adjacency[j].end(), i)) {
                throw std::invalid_argument("adjacency is not symmetric");
            }
        }
    }
    return g;
}

std::span<const int> Graph::neighbors(int i) const {
    if (i < 0 || i >= size()) throw std::out_of_range("node index out of range");
    return neighbors_unchecked(i);
}

std::vector<int> Graph::component_labels() const {
    const int n = size();
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    std::vector<int> stack;
    int next = 0;
    for (int root = 0; root < n; ++root) {
        if (label[root] >= 0) continue;
        label[root] = next;
        stack.push_back(root);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int u : neighbors_unchecked(v)) {
                if (label[u] < 0) {
                    label[u] = next;
                    stack.push_back(u);
                }
            }
        }
        ++next;
    }
    return label;
}

int Graph::component_count() const {
    const auto labels = component_labels();
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<std::vector<int>> Graph::adjacency() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) {
        auto nb = neighbors_unchecked(i);
        out[i].assign(nb.begin(), nb.end());
    }
    return out;
}

Graph square_lattice(int L) {
    if (L < 3) throw std::invalid_argument("lattice side must be at least 3, got " + std::to_string(L));
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(L) * L);
    for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L; ++c) {
            auto& nb = adj[r * L + c];
            nb = {r * L + (c + 1) % L, r * L + (c + L - 1) % L, ((r + 1) % L) * L + c,
                  ((r + L - 1) % L) * L + c};
        }
    }
    return Graph::from_adjacency(std::move(adj), GraphKind::SquareLattice, L);
}

namespace {

bool has_edge(const std::vector<std::vector<int>>& adj, int u, int v) {
    const auto& a = adj[u];
    return std::find(a.begin(), a.end(), v) != a.end();
}

// True when some pair of distinct unlinked nodes remains among the leftovers.
bool can_still_pair(const std::vector<std::vector<int>>& adj, std::vector<int> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            if (!has_edge(adj, nodes[a], nodes[b])) return true;
        }
    }
    return false;
}

}  // namespace

// Stub pairing in rounds: shuffle the open stubs, pair them off in order,
// keep every pair that forms a new simple edge and return the rest to the
// pool. When no admissible pair is left among the open stubs the whole
// construction restarts from scratch.
Graph random_regular_graph(int N, int C, Rng& rng, std::optional<std::uint64_t> seed,
                           int max_restarts) {
    if (C < 1 || C >= N) {
        throw std::invalid_argument("connectivity must satisfy 1 <= C < N (C=" + std::to_string(C) +
                                    ", N=" + std::to_string(N) + ")");
    }
    if ((static_cast<long long>(N) * C) % 2 != 0) {
        throw std::invalid_argument("N * C must be even (C=" + std::to_string(C) +
                                    ", N=" + std::to_string(N) + ")");
    }
    std::vector<int> stubs;
    std::vector<int> leftover;
    for (int attempt = 0; attempt <= max_restarts; ++attempt) {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(N));
        for (auto& a : adj) a.reserve(static_cast<std::size_t>(C));
        stubs.resize(static_cast<std::size_t>(N) * C);
        for (std::size_t s = 0; s < stubs.size(); ++s) stubs[s] = static_cast<int>(s / C);

        bool stuck = false;
        while (!stubs.empty()) {
            for (std::size_t i = stubs.size() - 1; i > 0; --i) {
                std::swap(stubs[i], stubs[uniform_index(rng, i + 1)]);
            }
            leftover.clear();
            for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
                const int u = stubs[i];
                const int v = stubs[i + 1];
                if (u != v && !has_edge(adj, u, v)) {
                    adj[u].push_back(v);
                    adj[v].push_back(u);
                } else {
                    leftover.push_back(u);
                    leftover.push_back(v);
                }
            }
            if (!leftover.empty() && !can_still_pair(adj, leftover)) {
                stuck = true;
                break;
            }
            stubs.swap(leftover);
        }
        if (!stuck) return Graph::from_adjacency(std::move(adj), GraphKind::RandomRegular, C, seed);
    }
    throw GraphGenerationError("random regular graph sampling exceeded " +
                               std::to_string(max_restarts) + " restarts (N=" + std::to_string(N) +
                               ", C=" + std::to_string(C) + ")");
}

Graph empty_graph(int N) {
    if (N < 1) throw std::invalid_argument("graph needs at least one node");
    return Graph::from_adjacency(std::vector<std::vector<int>>(static_cast<std::size_t>(N)));
}

std::span<const int> neighbors(const Graph& g, int i) { return g.neighbors(i); }

}  // namespace ach
