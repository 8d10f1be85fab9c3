#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ach/random.hpp"

namespace ach {

enum class GraphKind { SquareLattice, RandomRegular, Custom };

std::string_view to_string(GraphKind kind);

// Raised when random regular sampling runs out of restarts.
class GraphGenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simple undirected graph in compressed adjacency form. Neighbor lists are
// sorted ascending. Immutable after construction.
class Graph {
public:
    // Validates symmetry, no self-loops and no duplicate neighbors.
    static Graph from_adjacency(std::vector<std::vector<int>> adjacency,
                                GraphKind kind = GraphKind::Custom, int parameter = 0,
                                std::optional<std::uint64_t> seed = std::nullopt);

    int size() const { return static_cast<int>(offsets_.size()) - 1; }
    std::span<const int> neighbors(int i) const;
    // Unchecked fast path for the event loop.
    std::span<const int> neighbors_unchecked(int i) const {
        return {targets_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
    }
    int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
    std::size_t edge_count() const { return targets_.size() / 2; }

    GraphKind kind() const { return kind_; }
    // Side L for lattices, connectivity C for random regular graphs, 0 otherwise.
    int parameter() const { return parameter_; }
    const std::optional<std::uint64_t>& seed() const { return seed_; }

    // Component id per node, ids assigned in order of lowest member.
    std::vector<int> component_labels() const;
    int component_count() const;
    bool is_connected() const { return component_count() <= 1; }

    std::vector<std::vector<int>> adjacency() const;

private:
    Graph() = default;

    std::vector<int> offsets_{0};
    std::vector<int> targets_;
    GraphKind kind_ = GraphKind::Custom;
    int parameter_ = 0;
    std::optional<std::uint64_t> seed_;
};

// Periodic L x L lattice; node row * L + col. Requires L >= 3.
Graph square_lattice(int L);

// Uniformly paired random C-regular simple graph on N nodes.
Graph random_regular_graph(int N, int C, Rng& rng, std::optional<std::uint64_t> seed = std::nullopt,
                           int max_restarts = 1000);

// N nodes and no edges.
Graph empty_graph(int N);

std::span<const int> neighbors(const Graph& g, int i);

}  // namespace ach
