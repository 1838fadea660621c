// Incremental Bowyer-Watson Delaunay triangulation with ghost triangles.
//
// The convex hull is closed off by "ghost" triangles that share a virtual
// vertex at infinity, so every point insertion, including points outside
// the current hull, is the same cavity retriangulation.

#include "topospat/error.hpp"
#include "topospat/spatial_graph.hpp"

#include <algorithm>
#include <numeric>

namespace topospat {

namespace {

constexpr int kGhost = -1;

struct Triangle {
    std::array<int, 3> v;
    std::array<int, 3> n; // n[i] is the neighbour across the edge opposite v[i]
    bool alive = true;
};

using Real = long double;

Real orient(const Point& a, const Point& b, const Point& c) {
    const Real abx = Real(b.x) - Real(a.x), aby = Real(b.y) - Real(a.y);
    const Real acx = Real(c.x) - Real(a.x), acy = Real(c.y) - Real(a.y);
    return abx * acy - aby * acx;
}

// > 0 iff d lies strictly inside the circumcircle of the counter-clockwise a, b, c.
Real incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
    const Real adx = Real(a.x) - Real(d.x), ady = Real(a.y) - Real(d.y);
    const Real bdx = Real(b.x) - Real(d.x), bdy = Real(b.y) - Real(d.y);
    const Real cdx = Real(c.x) - Real(d.x), cdy = Real(c.y) - Real(d.y);
    const Real ad = adx * adx + ady * ady;
    const Real bd = bdx * bdx + bdy * bdy;
    const Real cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

class Triangulator {
public:
    explicit Triangulator(std::span<const Point> pts) : pts_(pts) {}

    std::vector<std::array<std::uint32_t, 3>> run() {
        const int n = static_cast<int>(pts_.size());
        if (n < 3) {
            throw GeometryError("Delaunay triangulation needs at least 3 points; use an epsilon graph instead");
        }

        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (pts_[a].x != pts_[b].x) return pts_[a].x < pts_[b].x;
            if (pts_[a].y != pts_[b].y) return pts_[a].y < pts_[b].y;
            return a < b;
        });
        for (int i = 1; i < n; ++i) {
            if (pts_[order[i]] == pts_[order[i - 1]]) {
                throw GeometryError("duplicate coordinates at points " + std::to_string(order[i - 1]) + " and " +
                                    std::to_string(order[i]));
            }
        }

        int third = -1;
        for (int i = 2; i < n; ++i) {
            if (orient(pts_[order[0]], pts_[order[1]], pts_[order[i]]) != 0) {
                third = i;
                break;
            }
        }
        if (third < 0) {
            throw GeometryError("all points are collinear; Delaunay triangulation is undefined, use an epsilon graph");
        }

        int a = order[0], b = order[1], c = order[third];
        if (orient(pts_[a], pts_[b], pts_[c]) < 0) {
            std::swap(a, b);
        }
        start_of_.assign(n + 1, -1);
        end_of_.assign(n + 1, -1);
        seed_triangle(a, b, c);

        for (int i = 2; i < n; ++i) {
            if (i == third) continue;
            insert(order[i]);
        }

        std::vector<std::array<std::uint32_t, 3>> out;
        for (const auto& t : tris_) {
            if (t.alive && t.v[0] != kGhost && t.v[1] != kGhost && t.v[2] != kGhost) {
                out.push_back({static_cast<std::uint32_t>(t.v[0]), static_cast<std::uint32_t>(t.v[1]),
                               static_cast<std::uint32_t>(t.v[2])});
            }
        }
        return out;
    }

private:
    static bool is_ghost(const Triangle& t) { return t.v[0] == kGhost || t.v[1] == kGhost || t.v[2] == kGhost; }

    int new_triangle(int a, int b, int c) {
        Triangle t{{a, b, c}, {-1, -1, -1}, true};
        if (!free_.empty()) {
            const int id = free_.back();
            free_.pop_back();
            tris_[id] = t;
            return id;
        }
        tris_.push_back(t);
        return static_cast<int>(tris_.size()) - 1;
    }

    void seed_triangle(int a, int b, int c) {
        const int t0 = new_triangle(a, b, c);
        const int g_ab = new_triangle(b, a, kGhost);
        const int g_bc = new_triangle(c, b, kGhost);
        const int g_ca = new_triangle(a, c, kGhost);
        tris_[t0].n = {g_bc, g_ca, g_ab};
        // ghost (b, a, g): opposite b is edge (a, g), shared with (a, c, g); opposite a is (g, b), shared with (c, b, g)
        tris_[g_ab].n = {g_ca, g_bc, t0};
        tris_[g_bc].n = {g_ab, g_ca, t0};
        tris_[g_ca].n = {g_bc, g_ab, t0};
        last_ = t0;
    }

    bool in_conflict(int id, const Point& p) const {
        const auto& t = tris_[id];
        for (int i = 0; i < 3; ++i) {
            if (t.v[i] == kGhost) {
                const Point& a = pts_[t.v[(i + 1) % 3]];
                const Point& b = pts_[t.v[(i + 2) % 3]];
                const Real o = orient(a, b, p);
                if (o > 0) return true;
                if (o < 0) return false;
                // collinear with the hull edge: conflict only strictly inside the segment
                const Real dot = (Real(p.x) - a.x) * (Real(b.x) - a.x) + (Real(p.y) - a.y) * (Real(b.y) - a.y);
                const Real len = (Real(b.x) - a.x) * (Real(b.x) - a.x) + (Real(b.y) - a.y) * (Real(b.y) - a.y);
                return dot > 0 && dot < len;
            }
        }
        return incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p) > 0;
    }

    int locate(const Point& p) {
        int cur = last_;
        if (!tris_[cur].alive) {
            cur = first_alive();
        }
        if (is_ghost(tris_[cur])) {
            for (int i = 0; i < 3; ++i) {
                if (tris_[cur].v[i] == kGhost) {
                    cur = tris_[cur].n[i];
                    break;
                }
            }
        }

        const std::size_t cap = 4 * tris_.size() + 16;
        unsigned rotate = 0;
        for (std::size_t step = 0; step < cap; ++step) {
            const auto& t = tris_[cur];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const int i = static_cast<int>((k + rotate) % 3);
                const Point& a = pts_[t.v[(i + 1) % 3]];
                const Point& b = pts_[t.v[(i + 2) % 3]];
                if (orient(a, b, p) < 0) {
                    next = t.n[i];
                    break;
                }
            }
            ++rotate;
            if (next < 0) {
                return cur;
            }
            if (is_ghost(tris_[next])) {
                return next;
            }
            cur = next;
        }

        // Walk failed to converge (numerical trouble); fall back to a scan.
        for (int id = 0; id < static_cast<int>(tris_.size()); ++id) {
            if (tris_[id].alive && in_conflict(id, p)) {
                return id;
            }
        }
        throw GeometryError("Delaunay point location failed");
    }

    int first_alive() const {
        for (int id = 0; id < static_cast<int>(tris_.size()); ++id) {
            if (tris_[id].alive && !is_ghost(tris_[id])) return id;
        }
        return 0;
    }

    void insert(int pi) {
        const Point& p = pts_[pi];
        const int seed = locate(p);

        ++stamp_;
        if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
        cavity_.clear();
        boundary_.clear();
        std::vector<int> stack{seed};
        mark_[seed] = stamp_;
        cavity_.push_back(seed);

        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[id].n[i];
                if (mark_[nb] == stamp_) continue;
                if (in_conflict(nb, p)) {
                    mark_[nb] = stamp_;
                    cavity_.push_back(nb);
                    stack.push_back(nb);
                }
            }
        }

        for (const int id : cavity_) {
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[id].n[i];
                if (mark_[nb] == stamp_) continue;
                boundary_.push_back({tris_[id].v[(i + 1) % 3], tris_[id].v[(i + 2) % 3], nb, id});
            }
        }
        for (const int id : cavity_) {
            tris_[id].alive = false;
        }

        std::vector<int> created;
        created.reserve(boundary_.size());
        for (const auto& e : boundary_) {
            const int t = new_triangle(e.u, e.v, pi);
            tris_[t].n[2] = e.outside;
            auto& out = tris_[e.outside];
            for (int j = 0; j < 3; ++j) {
                if (out.n[j] == e.old) {
                    out.n[j] = t;
                    break;
                }
            }
            start_of_[e.u + 1] = t;
            end_of_[e.v + 1] = t;
            created.push_back(t);
        }
        for (const int t : created) {
            auto& tri = tris_[t];
            tri.n[0] = start_of_[tri.v[1] + 1];
            tri.n[1] = end_of_[tri.v[0] + 1];
        }
        for (const auto& e : boundary_) {
            start_of_[e.u + 1] = -1;
            end_of_[e.v + 1] = -1;
        }
        for (const int id : cavity_) {
            free_.push_back(id);
        }
        if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);

        last_ = created.front();
        for (const int t : created) {
            if (!is_ghost(tris_[t])) {
                last_ = t;
                break;
            }
        }
    }

    struct BoundaryEdge {
        int u, v, outside, old;
    };

    std::span<const Point> pts_;
    std::vector<Triangle> tris_;
    std::vector<int> free_;
    std::vector<unsigned> mark_;
    unsigned stamp_ = 0;
    std::vector<int> cavity_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<int> start_of_, end_of_;
    int last_ = 0;
};

} // namespace

std::vector<std::array<std::uint32_t, 3>> delaunay_triangles(std::span<const Point> coords) {
    return Triangulator(coords).run();
}

SpatialGraph delaunay_graph(std::span<const Point> coords) {
    const auto triangles = delaunay_triangles(coords);
    std::vector<Edge> edges;
    edges.reserve(triangles.size() * 3);
    for (const auto& t : triangles) {
        for (int i = 0; i < 3; ++i) {
            auto a = t[i], b = t[(i + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.emplace_back(a, b);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return SpatialGraph(std::vector<Point>(coords.begin(), coords.end()), std::move(edges), GraphKind::Delaunay);
}

} // namespace topospat
