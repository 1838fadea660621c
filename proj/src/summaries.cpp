#include "topospat/summaries.hpp"

#include "topospat/error.hpp"
#include "topospat/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace topospat {

NormOrder norm_order(double p) {
    if (p == 1) return NormOrder::L1;
    if (p == 2) return NormOrder::L2;
    if (std::isinf(p) && p > 0) return NormOrder::LInf;
    throw ParameterError("unsupported L^p order " + text::format_double(p) + "; use 1, 2 or inf");
}

NormOrder parse_norm_order(const std::string& p) {
    if (p == "1") return NormOrder::L1;
    if (p == "2") return NormOrder::L2;
    if (p == "inf" || p == "Inf" || p == "infinity") return NormOrder::LInf;
    throw ParameterError("unsupported L^p order '" + p + "'; use 1, 2 or inf");
}

std::string to_string(NormOrder p) {
    switch (p) {
    case NormOrder::L1: return "1";
    case NormOrder::L2: return "2";
    case NormOrder::LInf: return "inf";
    }
    return "?";
}

namespace {

std::vector<double> merged_knots(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Values of `c` on the segments of `grid`, which must refine c.knots.
void accumulate_on(const StepCurve& c, const std::vector<double>& grid, std::vector<double>& acc) {
    std::size_t k = 0;
    for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
        while (k + 1 < c.knots.size() && c.knots[k + 1] < grid[s + 1]) ++k;
        acc[s] += c.values[k];
    }
}

struct Accumulator {
    NormOrder p;
    double sum = 0;

    void segment(double width, double value) {
        const double a = std::abs(value);
        switch (p) {
        case NormOrder::L1: sum += a * width; break;
        case NormOrder::L2: sum += a * a * width; break;
        case NormOrder::LInf: sum = std::max(sum, a); break;
        }
    }

    // h varies linearly from h0 to h1 over `width`.
    void linear(double width, double h0, double h1) {
        switch (p) {
        case NormOrder::L1:
            if (h0 * h1 >= 0) {
                sum += width * (std::abs(h0) + std::abs(h1)) / 2;
            } else {
                sum += width * (h0 * h0 + h1 * h1) / (2 * (std::abs(h0) + std::abs(h1)));
            }
            break;
        case NormOrder::L2: sum += width * (h0 * h0 + h0 * h1 + h1 * h1) / 3; break;
        case NormOrder::LInf: sum = std::max({sum, std::abs(h0), std::abs(h1)}); break;
        }
    }

    void point(double value) {
        if (p == NormOrder::LInf) sum = std::max(sum, std::abs(value));
    }

    double result() const { return p == NormOrder::L2 ? std::sqrt(sum) : sum; }
};

void require_same_domain(double lo1, double hi1, double lo2, double hi2) {
    if (lo1 != lo2 || hi1 != hi2) {
        throw DomainError("summaries are defined on different domains [" + text::format_double(lo1) + ", " +
                          text::format_double(hi1) + "] and [" + text::format_double(lo2) + ", " +
                          text::format_double(hi2) + "]");
    }
}

std::vector<double> knot_xs(const PiecewiseLinear& f) {
    std::vector<double> xs;
    xs.reserve(f.knots.size());
    for (const auto& k : f.knots) xs.push_back(k.x);
    return xs;
}

// Evaluate f at sorted xs with a single forward sweep.
void sample_on(const PiecewiseLinear& f, const std::vector<double>& xs, std::vector<double>& out, double weight = 1.0,
               bool accumulate = false) {
    const auto& k = f.knots;
    std::size_t j = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        double y = 0;
        if (!k.empty() && x >= k.front().x && x <= k.back().x) {
            while (j + 1 < k.size() && k[j + 1].x < x) ++j;
            if (j + 1 < k.size()) {
                const auto& a = k[j];
                const auto& b = k[j + 1];
                y = b.x > a.x ? a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x) : std::max(a.y, b.y);
                if (x == b.x) y = b.y;
            } else {
                y = k[j].y;
            }
        }
        if (accumulate) {
            out[i] += weight * y;
        } else {
            out[i] = y;
        }
    }
}

} // namespace

double StepCurve::operator()(double x) const {
    if (x < lo || x > hi) return 0;
    if (x == lo) return at_lo;
    const auto it = std::lower_bound(knots.begin(), knots.end(), x);
    const auto k = static_cast<std::size_t>(it - knots.begin()) - 1;
    return values[k];
}

double PiecewiseLinear::operator()(double x) const {
    if (knots.empty() || x < knots.front().x || x > knots.back().x) return 0;
    const auto it = std::lower_bound(knots.begin(), knots.end(), x, [](const Knot& k, double v) { return k.x < v; });
    if (it == knots.begin()) return it->y;
    const auto& b = *it;
    const auto& a = *(it - 1);
    if (b.x == x) return b.y;
    return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

double total_lifetime(const PersistenceDiagram& d) {
    double total = 0;
    for (const auto& p : d.pairs) total += p.lifetime();
    return total;
}

StepCurve betti_curve(const PersistenceDiagram& d) {
    StepCurve c;
    c.lo = d.f_min;
    c.hi = d.f_max;
    c.knots = {d.f_min, d.f_max};
    for (const auto& p : d.pairs) {
        c.knots.push_back(p.birth);
        c.knots.push_back(p.death);
    }
    std::sort(c.knots.begin(), c.knots.end());
    c.knots.erase(std::unique(c.knots.begin(), c.knots.end()), c.knots.end());

    std::vector<long long> delta(c.knots.size(), 0);
    for (const auto& p : d.pairs) {
        c.at_lo += p.essential;
        if (p.birth <= p.death) continue;
        const auto from = std::lower_bound(c.knots.begin(), c.knots.end(), p.death) - c.knots.begin();
        const auto to = std::lower_bound(c.knots.begin(), c.knots.end(), p.birth) - c.knots.begin();
        ++delta[from];
        --delta[to];
    }
    c.values.resize(c.knots.size() - 1);
    long long running = 0;
    for (std::size_t k = 0; k + 1 < c.knots.size(); ++k) {
        running += delta[k];
        c.values[k] = static_cast<double>(running);
    }
    return c;
}

double lp_norm(const StepCurve& c, NormOrder p) {
    Accumulator acc{p};
    acc.point(c.at_lo);
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        acc.segment(c.knots[k + 1] - c.knots[k], c.values[k]);
    }
    return acc.result();
}

double lp_distance(const StepCurve& a, const StepCurve& b, NormOrder p) {
    require_same_domain(a.lo, a.hi, b.lo, b.hi);
    const auto grid = merged_knots(a.knots, b.knots);
    std::vector<double> va(grid.size() - 1, 0.0), vb(grid.size() - 1, 0.0);
    accumulate_on(a, grid, va);
    accumulate_on(b, grid, vb);
    Accumulator acc{p};
    acc.point(a.at_lo - b.at_lo);
    for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
        acc.segment(grid[s + 1] - grid[s], va[s] - vb[s]);
    }
    return acc.result();
}

StepCurve mean_step_curve(std::span<const StepCurve> curves) {
    if (curves.empty()) {
        throw ParameterError("mean of an empty set of curves");
    }
    std::vector<double> grid;
    for (const auto& c : curves) {
        require_same_domain(curves.front().lo, curves.front().hi, c.lo, c.hi);
        grid.insert(grid.end(), c.knots.begin(), c.knots.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    StepCurve mean;
    mean.lo = curves.front().lo;
    mean.hi = curves.front().hi;
    mean.values.assign(grid.size() - 1, 0.0);
    for (const auto& c : curves) {
        accumulate_on(c, grid, mean.values);
        mean.at_lo += c.at_lo;
    }
    const double n = static_cast<double>(curves.size());
    for (double& v : mean.values) v /= n;
    mean.at_lo /= n;
    mean.knots = std::move(grid);
    return mean;
}

LandscapeSet landscape(const PersistenceDiagram& d, std::size_t max_levels) {
    if (max_levels < 1) {
        throw ParameterError("a landscape needs at least one level");
    }
    struct Interval {
        double lo, hi;
    };
    // Tents live on [death, birth]; order by left end ascending, right end descending.
    auto before = [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi > b.hi); };
    std::vector<Interval> pending;
    for (const auto& p : d.pairs) {
        if (p.birth > p.death) pending.push_back({p.death, p.birth});
    }
    std::sort(pending.begin(), pending.end(), before);

    LandscapeSet out;
    out.lo = d.f_min;
    out.hi = d.f_max;
    out.levels.resize(max_levels);

    for (std::size_t level = 0; level < max_levels && !pending.empty(); ++level) {
        auto& knots = out.levels[level].knots;
        Interval cur = pending.front();
        pending.erase(pending.begin());
        std::size_t pos = 0;
        knots.push_back({cur.lo, 0});
        knots.push_back({(cur.lo + cur.hi) / 2, (cur.hi - cur.lo) / 2});

        while (true) {
            std::size_t i = pos;
            while (i < pending.size() && pending[i].hi <= cur.hi) ++i;
            if (i == pending.size()) {
                knots.push_back({cur.hi, 0});
                break;
            }
            const Interval next = pending[i];
            pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
            pos = i;
            if (next.lo > cur.hi) {
                knots.push_back({cur.hi, 0});
            }
            if (next.lo >= cur.hi) {
                knots.push_back({next.lo, 0});
            } else {
                knots.push_back({(next.lo + cur.hi) / 2, (cur.hi - next.lo) / 2});
                // the part of `next` hidden under `cur` goes to deeper levels
                const Interval hidden{next.lo, cur.hi};
                auto at = std::upper_bound(pending.begin() + static_cast<std::ptrdiff_t>(pos), pending.end(), hidden, before);
                pending.insert(at, hidden);
            }
            knots.push_back({(next.lo + next.hi) / 2, (next.hi - next.lo) / 2});
            cur = next;
        }
    }
    return out;
}

double lp_norm(const PiecewiseLinear& f, NormOrder p) {
    Accumulator acc{p};
    for (std::size_t i = 0; i + 1 < f.knots.size(); ++i) {
        acc.linear(f.knots[i + 1].x - f.knots[i].x, f.knots[i].y, f.knots[i + 1].y);
    }
    return acc.result();
}

double lp_distance(const PiecewiseLinear& f, const PiecewiseLinear& g, NormOrder p) {
    const auto xs = merged_knots(knot_xs(f), knot_xs(g));
    std::vector<double> fy(xs.size()), gy(xs.size());
    sample_on(f, xs, fy);
    sample_on(g, xs, gy);
    Accumulator acc{p};
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        acc.linear(xs[i + 1] - xs[i], fy[i] - gy[i], fy[i + 1] - gy[i + 1]);
    }
    if (xs.size() == 1) acc.point(fy[0] - gy[0]);
    return acc.result();
}

double lp_norm(const LandscapeSet& l, NormOrder p) {
    double total = 0;
    for (const auto& level : l.levels) total += lp_norm(level, p);
    return total;
}

double lp_distance(const LandscapeSet& a, const LandscapeSet& b, NormOrder p) {
    if (a.levels.size() != b.levels.size()) {
        throw ParameterError("landscapes have " + std::to_string(a.levels.size()) + " and " +
                             std::to_string(b.levels.size()) + " levels");
    }
    require_same_domain(a.lo, a.hi, b.lo, b.hi);
    double total = 0;
    for (std::size_t k = 0; k < a.levels.size(); ++k) total += lp_distance(a.levels[k], b.levels[k], p);
    return total;
}

LandscapeSet mean_landscape(std::span<const LandscapeSet> landscapes) {
    if (landscapes.empty()) {
        throw ParameterError("mean of an empty set of landscapes");
    }
    const auto& first = landscapes.front();
    for (const auto& l : landscapes) {
        require_same_domain(first.lo, first.hi, l.lo, l.hi);
        if (l.levels.size() != first.levels.size()) {
            throw ParameterError("landscapes with different level counts cannot be averaged");
        }
    }

    LandscapeSet mean;
    mean.lo = first.lo;
    mean.hi = first.hi;
    mean.levels.resize(first.levels.size());
    const double weight = 1.0 / static_cast<double>(landscapes.size());
    for (std::size_t k = 0; k < first.levels.size(); ++k) {
        std::vector<double> xs;
        for (const auto& l : landscapes) {
            for (const auto& knot : l.levels[k].knots) xs.push_back(knot.x);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::vector<double> ys(xs.size(), 0.0);
        for (const auto& l : landscapes) sample_on(l.levels[k], xs, ys, weight, true);
        auto& knots = mean.levels[k].knots;
        knots.reserve(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) knots.push_back({xs[i], ys[i]});
    }
    return mean;
}

std::string format_step_curve(const StepCurve& c, NormOrder p) {
    nlohmann::ordered_json header;
    header["kind"] = "betti_curve";
    header["p"] = to_string(p);
    header["domain"] = {c.lo, c.hi};
    header["value_at_lo"] = c.at_lo;
    std::string out = "# " + header.dump() + "\nfrom\tto\tvalue\n";
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        out += text::format_double(c.knots[k]) + '\t' + text::format_double(c.knots[k + 1]) + '\t' +
               text::format_double(c.values[k]) + '\n';
    }
    return out;
}

std::string format_landscape(const LandscapeSet& l, NormOrder p) {
    nlohmann::ordered_json header;
    header["kind"] = "landscape";
    header["p"] = to_string(p);
    header["domain"] = {l.lo, l.hi};
    header["levels"] = l.levels.size();
    std::string out = "# " + header.dump() + "\nlevel\tx\ty\n";
    for (std::size_t k = 0; k < l.levels.size(); ++k) {
        for (const auto& knot : l.levels[k].knots) {
            out += std::to_string(k + 1) + '\t' + text::format_double(knot.x) + '\t' + text::format_double(knot.y) + '\n';
        }
    }
    return out;
}

} // namespace topospat
