#include "topospat/persistence.hpp"

#include "topospat/error.hpp"
#include "topospat/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace topospat {

namespace {

class ComponentForest {
public:
    explicit ComponentForest(std::size_t n) : parent_(n), birth_(n), birth_vertex_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    void make(std::size_t v, double birth) {
        parent_[v] = v;
        birth_[v] = birth;
        birth_vertex_[v] = v;
    }

    void attach(std::size_t child, std::size_t root) { parent_[child] = root; }

    double birth(std::size_t root) const { return birth_[root]; }
    std::size_t birth_vertex(std::size_t root) const { return birth_vertex_[root]; }

    // true if component a is older than b
    bool elder(std::size_t a, std::size_t b) const {
        if (birth_[a] != birth_[b]) return birth_[a] > birth_[b];
        return birth_vertex_[a] < birth_vertex_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<double> birth_;
    std::vector<std::size_t> birth_vertex_;
};

} // namespace

PersistenceDiagram superlevel_diagram(const SpatialGraph& graph, std::span<const double> values) {
    const std::size_t n = graph.n_vertices();
    if (values.size() != n) {
        throw DimensionError("feature has " + std::to_string(values.size()) + " values but the graph has " +
                             std::to_string(n) + " vertices");
    }
    PersistenceDiagram out;
    if (n == 0) {
        return out;
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("feature values must be finite");
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });
    out.f_max = values[order.front()];
    out.f_min = values[order.back()];

    ComponentForest forest(n);
    std::vector<char> active(n, 0);
    std::vector<std::size_t> roots;
    std::vector<std::size_t> creators;

    for (const std::size_t v : order) {
        active[v] = 1;
        roots.clear();
        for (const auto u : graph.neighbors(v)) {
            if (active[u]) {
                roots.push_back(forest.find(u));
            }
        }
        if (roots.empty()) {
            forest.make(v, values[v]);
            creators.push_back(v);
            continue;
        }
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        std::size_t eldest = roots.front();
        for (const auto r : roots) {
            if (forest.elder(r, eldest)) eldest = r;
        }
        forest.attach(v, eldest);
        for (const auto r : roots) {
            if (r == eldest) continue;
            out.pairs.push_back({forest.birth(r), values[v], forest.birth_vertex(r), false});
            forest.attach(r, eldest);
        }
    }

    for (const auto c : creators) {
        if (forest.find(c) == c) {
            out.pairs.push_back({forest.birth(c), out.f_min, c, true});
        }
    }
    // creation order of the components
    std::sort(out.pairs.begin(), out.pairs.end(), [&](const PersistencePair& a, const PersistencePair& b) {
        if (a.birth != b.birth) return a.birth > b.birth;
        return a.birth_vertex < b.birth_vertex;
    });
    return out;
}

PersistenceDiagram sublevel_diagram(const SpatialGraph& graph, std::span<const double> values) {
    std::vector<double> negated(values.begin(), values.end());
    for (double& v : negated) v = -v;
    auto d = superlevel_diagram(graph, negated);
    for (auto& p : d.pairs) {
        p.birth = -p.birth;
        p.death = -p.death;
    }
    std::swap(d.f_min, d.f_max);
    d.f_min = -d.f_min;
    d.f_max = -d.f_max;
    return d;
}

DiagramStats diagram_stats(const PersistenceDiagram& d) {
    DiagramStats s;
    s.count = d.pairs.size();
    for (const auto& p : d.pairs) {
        s.max_lifetime = std::max(s.max_lifetime, p.lifetime());
        s.essential += (p.death == d.f_min);
        s.unmerged += p.essential;
    }
    return s;
}

std::string format_diagram(const PersistenceDiagram& d) {
    std::string out = "# f_min\t" + text::format_double(d.f_min) + "\n# f_max\t" + text::format_double(d.f_max) +
                      "\nbirth\tdeath\tbirth_vertex\n";
    for (const auto& p : d.pairs) {
        out += text::format_double(p.birth) + '\t' + text::format_double(p.death) + '\t' +
               std::to_string(p.birth_vertex) + '\n';
    }
    return out;
}

} // namespace topospat
