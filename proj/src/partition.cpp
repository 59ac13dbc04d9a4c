#include "mabi/partition.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mabi {

PartitionSpec::PartitionSpec(double cell_side_in, double margin_in, double box_half_width_in)
    : cell_side(cell_side_in), margin(margin_in), box_half_width(box_half_width_in) {
    if (!(cell_side > 0.0))
        throw std::invalid_argument("PartitionSpec: cell side must be positive");
    if (margin < 0.0)
        throw std::invalid_argument("PartitionSpec: margin must be nonnegative");
    if (!(2.0 * margin < cell_side))
        throw std::invalid_argument("PartitionSpec: requires 2*margin < cell_side");
    if (box_half_width < 0.0)
        throw std::invalid_argument("PartitionSpec: negative box half-width");
}

int PartitionSpec::cells_per_axis() const {
    const double span = 2.0 * box_half_width;
    int m = static_cast<int>(std::floor(span / cell_side));
    if (m * cell_side < span)
        ++m;
    return std::max(1, m);
}

const char* region_kind_name(RegionId::Kind kind) {
    switch (kind) {
    case RegionId::Kind::Interior: return "interior";
    case RegionId::Kind::VStrip: return "vertical-strip";
    case RegionId::Kind::HStrip: return "horizontal-strip";
    case RegionId::Kind::Quad: return "quad";
    }
    return "?";
}

namespace {

struct AxisClass {
    bool strip = false;
    int line = 0;
    int cell = 0;
};

// 2r < l guarantees a point is within r of at most one grid line per axis.
AxisClass classify_axis(double x, const PartitionSpec& spec, int cells) {
    AxisClass out;
    int line = static_cast<int>(std::llround(x / spec.cell_side));
    line = std::clamp(line, 0, cells);
    out.line = line;
    out.strip = std::fabs(x - line * spec.cell_side) <= spec.margin;
    out.cell = std::clamp(static_cast<int>(std::floor(x / spec.cell_side)), 0, cells - 1);
    return out;
}

} // namespace

RegionId classify_region(const Point& p, const PartitionSpec& spec) {
    const double b = spec.box_half_width;
    const double lx = p.x + b;
    const double ly = p.y + b;
    if (!(lx >= 0.0 && lx <= 2.0 * b && ly >= 0.0 && ly <= 2.0 * b))
        throw std::invalid_argument("classify_region: point outside the bounding box");
    const int cells = spec.cells_per_axis();
    const AxisClass ax = classify_axis(lx, spec, cells);
    const AxisClass ay = classify_axis(ly, spec, cells);
    if (ax.strip && ay.strip)
        return {RegionId::Kind::Quad, ax.line, ay.line};
    if (ax.strip)
        return {RegionId::Kind::VStrip, ax.line, ay.cell};
    if (ay.strip)
        return {RegionId::Kind::HStrip, ax.cell, ay.line};
    return {RegionId::Kind::Interior, ax.cell, ay.cell};
}

std::vector<ClusterId> region_cluster_options(const RegionId& region, const PartitionSpec& spec) {
    const int cells = spec.cells_per_axis();
    std::vector<ClusterId> out;
    switch (region.kind) {
    case RegionId::Kind::Interior:
        out.push_back({region.i, region.j});
        break;
    case RegionId::Kind::VStrip:
        if (region.i - 1 >= 0)
            out.push_back({region.i - 1, region.j});
        if (region.i <= cells - 1)
            out.push_back({region.i, region.j});
        break;
    case RegionId::Kind::HStrip:
        if (region.j - 1 >= 0)
            out.push_back({region.i, region.j - 1});
        if (region.j <= cells - 1)
            out.push_back({region.i, region.j});
        break;
    case RegionId::Kind::Quad:
        for (int dj = 0; dj <= 1; ++dj) {
            for (int di = 0; di <= 1; ++di) {
                const int ci = region.i - 1 + di;
                const int cj = region.j - 1 + dj;
                if (ci >= 0 && ci <= cells - 1 && cj >= 0 && cj <= cells - 1)
                    out.push_back({ci, cj});
            }
        }
        break;
    }
    if (out.empty())
        throw std::logic_error("region_cluster_options: region has no in-box cluster");
    return out;
}

ClusterId uniform_cluster_of(const Point& p, const PartitionSpec& spec) {
    const double b = spec.box_half_width;
    const double lx = p.x + b;
    const double ly = p.y + b;
    if (!(lx >= 0.0 && lx <= 2.0 * b && ly >= 0.0 && ly <= 2.0 * b))
        throw std::invalid_argument("uniform_cluster_of: point outside the bounding box");
    const int cells = spec.cells_per_axis();
    const int ci = std::clamp(static_cast<int>(std::floor(lx / spec.cell_side)), 0, cells - 1);
    const int cj = std::clamp(static_cast<int>(std::floor(ly / spec.cell_side)), 0, cells - 1);
    return {ci, cj};
}

Partition::Partition(const PartitionSpec& spec) : spec_(spec), cells_(spec.cells_per_axis()) {}

Partition Partition::sample(const PartitionSpec& spec, Rng& rng) {
    Partition part(spec);
    const int m = part.cells_;
    part.vstrip_.resize(static_cast<std::size_t>(m + 1) * m);
    part.hstrip_.resize(static_cast<std::size_t>(m) * (m + 1));
    part.quad_.resize(static_cast<std::size_t>(m + 1) * (m + 1));

    // Fixed draw order: vertical strips, horizontal strips, quads, row-major.
    // Regions with a single in-box option never consume randomness.
    for (int line = 0; line <= m; ++line) {
        for (int row = 0; row < m; ++row) {
            const auto opts = region_cluster_options({RegionId::Kind::VStrip, line, row}, spec);
            const std::size_t pick = opts.size() == 1 ? 0 : rng.next_below(opts.size());
            part.vstrip_[static_cast<std::size_t>(line) * m + row] = opts[pick];
        }
    }
    for (int col = 0; col < m; ++col) {
        for (int line = 0; line <= m; ++line) {
            const auto opts = region_cluster_options({RegionId::Kind::HStrip, col, line}, spec);
            const std::size_t pick = opts.size() == 1 ? 0 : rng.next_below(opts.size());
            part.hstrip_[static_cast<std::size_t>(col) * (m + 1) + line] = opts[pick];
        }
    }
    for (int li = 0; li <= m; ++li) {
        for (int lj = 0; lj <= m; ++lj) {
            const auto opts = region_cluster_options({RegionId::Kind::Quad, li, lj}, spec);
            const std::size_t pick = opts.size() == 1 ? 0 : rng.next_below(opts.size());
            part.quad_[static_cast<std::size_t>(li) * (m + 1) + lj] = opts[pick];
        }
    }
    return part;
}

ClusterId Partition::cluster_of_region(const RegionId& region) const {
    const int m = cells_;
    switch (region.kind) {
    case RegionId::Kind::Interior:
        return {region.i, region.j};
    case RegionId::Kind::VStrip:
        return vstrip_.at(static_cast<std::size_t>(region.i) * m + region.j);
    case RegionId::Kind::HStrip:
        return hstrip_.at(static_cast<std::size_t>(region.i) * (m + 1) + region.j);
    case RegionId::Kind::Quad:
        return quad_.at(static_cast<std::size_t>(region.i) * (m + 1) + region.j);
    }
    throw std::logic_error("Partition::cluster_of_region: bad region kind");
}

ClusterId Partition::cluster_of(const Point& p) const {
    return cluster_of_region(classify_region(p, spec_));
}

void Partition::dump_csv(std::ostream& out) const {
    out << "region_kind,i,j,cluster_i,cluster_j\n";
    const int m = cells_;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out << "interior," << i << ',' << j << ',' << i << ',' << j << '\n';
    for (int line = 0; line <= m; ++line)
        for (int row = 0; row < m; ++row) {
            const ClusterId c = vstrip_[static_cast<std::size_t>(line) * m + row];
            out << "vertical-strip," << line << ',' << row << ',' << c.i << ',' << c.j << '\n';
        }
    for (int col = 0; col < m; ++col)
        for (int line = 0; line <= m; ++line) {
            const ClusterId c = hstrip_[static_cast<std::size_t>(col) * (m + 1) + line];
            out << "horizontal-strip," << col << ',' << line << ',' << c.i << ',' << c.j << '\n';
        }
    for (int li = 0; li <= m; ++li)
        for (int lj = 0; lj <= m; ++lj) {
            const ClusterId c = quad_[static_cast<std::size_t>(li) * (m + 1) + lj];
            out << "quad," << li << ',' << lj << ',' << c.i << ',' << c.j << '\n';
        }
}

std::vector<ClusterId> ball_cluster_set(const Partition& part, const UnitUniverse& universe,
                                        int u, double r) {
    if (!(2.0 * r < part.spec().cell_side))
        throw std::invalid_argument("ball_cluster_set: requires 2r < cell_side");
    std::vector<ClusterId> out;
    for (int v : universe.ball(u, r)) {
        const ClusterId c = part.cluster_of(universe.unit(v));
        if (std::find(out.begin(), out.end(), c) == out.end())
            out.push_back(c);
    }
    return out;
}

BallRegionLayout ball_region_layout(const PartitionSpec& spec, const UnitUniverse& universe,
                                    int u, double r) {
    if (!(2.0 * r < spec.cell_side))
        throw std::invalid_argument("ball_region_layout: requires 2r < cell_side");
    BallRegionLayout layout;
    const std::vector<int> ids = universe.ball(u, r);
    if (ids.empty()) {
        layout.own_fixed = region_cluster_options(
            classify_region(universe.unit(u), spec), spec)[0];
        return layout;
    }
    layout.ball_empty = false;

    std::vector<RegionId> regions;
    for (int v : ids) {
        const RegionId reg = classify_region(universe.unit(v), spec);
        if (std::find(regions.begin(), regions.end(), reg) == regions.end())
            regions.push_back(reg);
    }
    const RegionId own = classify_region(universe.unit(u), spec);

    for (const RegionId& reg : regions) {
        auto opts = region_cluster_options(reg, spec);
        if (opts.size() == 1) {
            if (reg == own) {
                layout.own_random_index = -1;
                layout.own_fixed = opts[0];
            }
            layout.fixed.push_back(opts[0]);
        } else {
            if (reg == own)
                layout.own_random_index = static_cast<int>(layout.random.size());
            layout.random.push_back(std::move(opts));
        }
    }
    return layout;
}

namespace {

// Visits every joint outcome of the independent region draws; the callback
// receives the chosen cluster per random region and the outcome probability.
template <typename Fn>
void for_each_outcome(const BallRegionLayout& layout, Fn&& fn) {
    const std::size_t k = layout.random.size();
    std::vector<std::size_t> idx(k, 0);
    std::vector<ClusterId> chosen(k);
    double weight = 1.0;
    for (const auto& opts : layout.random)
        weight /= static_cast<double>(opts.size());
    for (;;) {
        for (std::size_t d = 0; d < k; ++d)
            chosen[d] = layout.random[d][idx[d]];
        fn(chosen, weight);
        std::size_t d = 0;
        while (d < k && ++idx[d] == layout.random[d].size()) {
            idx[d] = 0;
            ++d;
        }
        if (d == k)
            break;
    }
}

} // namespace

double containment_probability(const PartitionSpec& spec, const UnitUniverse& universe,
                               int u, double r) {
    const BallRegionLayout layout = ball_region_layout(spec, universe, u, r);
    if (layout.ball_empty)
        return 1.0;
    double total = 0.0;
    for_each_outcome(layout, [&](const std::vector<ClusterId>& chosen, double weight) {
        const ClusterId cu = layout.own_random_index >= 0
                                 ? chosen[static_cast<std::size_t>(layout.own_random_index)]
                                 : layout.own_fixed;
        for (const ClusterId& c : layout.fixed)
            if (!(c == cu))
                return;
        for (const ClusterId& c : chosen)
            if (!(c == cu))
                return;
        total += weight;
    });
    return total;
}

namespace {

std::vector<double> cover_profile_from_layout(const BallRegionLayout& layout) {
    if (layout.ball_empty)
        return {1.0};
    std::vector<ClusterId> fixed_distinct;
    for (const ClusterId& c : layout.fixed)
        if (std::find(fixed_distinct.begin(), fixed_distinct.end(), c) == fixed_distinct.end())
            fixed_distinct.push_back(c);

    std::vector<double> w(fixed_distinct.size() + layout.random.size() + 1, 0.0);
    std::vector<ClusterId> distinct;
    for_each_outcome(layout, [&](const std::vector<ClusterId>& chosen, double weight) {
        distinct.assign(fixed_distinct.begin(), fixed_distinct.end());
        for (const ClusterId& c : chosen)
            if (std::find(distinct.begin(), distinct.end(), c) == distinct.end())
                distinct.push_back(c);
        w[distinct.size()] += weight;
    });
    while (w.size() > 1 && w.back() == 0.0)
        w.pop_back();
    return w;
}

} // namespace

std::vector<double> ball_cover_profile(const PartitionSpec& spec, const UnitUniverse& universe,
                                       int u, double r) {
    return cover_profile_from_layout(ball_region_layout(spec, universe, u, r));
}

std::vector<double> ball_cover_profile_uniform(const PartitionSpec& spec,
                                               const UnitUniverse& universe, int u, double r) {
    if (!(2.0 * r < spec.cell_side))
        throw std::invalid_argument("ball_cover_profile_uniform: requires 2r < cell_side");
    const std::vector<int> ids = universe.ball(u, r);
    if (ids.empty())
        return {1.0};
    std::vector<ClusterId> distinct;
    for (int v : ids) {
        const ClusterId c = uniform_cluster_of(universe.unit(v), spec);
        if (std::find(distinct.begin(), distinct.end(), c) == distinct.end())
            distinct.push_back(c);
    }
    std::vector<double> w(distinct.size() + 1, 0.0);
    w[distinct.size()] = 1.0;
    return w;
}

} // namespace mabi
