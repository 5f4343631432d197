#pragma once

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace defaultdp {

// Undirected simple graph over a fixed vertex range. The first
// variableCount ids are variable vertices, the rest default vertices;
// plain graphs use defaultCount == 0.
struct Graph {
    int variableCount = 0;
    int defaultCount = 0;
    std::vector<std::vector<int>> adj;

    Graph() = default;
    Graph(int variables, int defaults)
        : variableCount(variables), defaultCount(defaults),
          adj(static_cast<std::size_t>(variables + defaults)) {}

    int vertexCount() const { return static_cast<int>(adj.size()); }
    bool isDefaultVertex(int v) const { return v >= variableCount; }
    int defaultIndexOf(int v) const {
        assert(isDefaultVertex(v));
        return v - variableCount;
    }
    int vertexOfDefault(int defaultIndex) const { return variableCount + defaultIndex; }

    void addEdge(int a, int b) {
        if (a == b) return;
        if (a < 0 || b < 0 || a >= vertexCount() || b >= vertexCount())
            throw std::out_of_range("edge endpoint outside vertex range");
        auto& na = adj[static_cast<std::size_t>(a)];
        auto it = std::lower_bound(na.begin(), na.end(), b);
        if (it != na.end() && *it == b) return;
        na.insert(it, b);
        auto& nb = adj[static_cast<std::size_t>(b)];
        nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
    }

    bool hasEdge(int a, int b) const {
        const auto& na = adj[static_cast<std::size_t>(a)];
        return std::binary_search(na.begin(), na.end(), b);
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int v = 0; v < vertexCount(); ++v)
            for (int w : adj[static_cast<std::size_t>(v)])
                if (v < w) out.emplace_back(v, w);
        return out;
    }

    std::size_t edgeCount() const {
        std::size_t twice = 0;
        for (const auto& n : adj) twice += n.size();
        return twice / 2;
    }
};

}  // namespace defaultdp
