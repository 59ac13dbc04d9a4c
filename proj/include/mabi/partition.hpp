#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mabi/geometry.hpp"
#include "mabi/rng.hpp"

namespace mabi {

// Parameters of the robust randomized partition: square cells of side
// `cell_side`, randomized bands of half-width `margin` around every grid
// line. The cell grid is anchored at the lower-left corner of the bounding
// box [-box_half_width, box_half_width]^2.
struct PartitionSpec {
    double cell_side = 1.0;      // l
    double margin = 0.0;         // r, requires 2r < l
    double box_half_width = 0.0; // copied from the universe

    PartitionSpec(double cell_side_in, double margin_in, double box_half_width_in);

    // Cells per axis (at least 1); the last cell may be clipped by the box.
    int cells_per_axis() const;
};

struct ClusterId {
    int i = 0;
    int j = 0;
    friend bool operator==(const ClusterId&, const ClusterId&) = default;
};

// One tile of the cell decomposition.
//   Interior: cell (i, j).
//   VStrip:   vertical grid line i crossed with the interior band of cell row j.
//   HStrip:   interior band of cell column i crossed with horizontal grid line j.
//   Quad:     the margin square around the crossing of grid lines (i, j).
struct RegionId {
    enum class Kind : std::uint8_t { Interior, VStrip, HStrip, Quad };
    Kind kind = Kind::Interior;
    int i = 0;
    int j = 0;
    friend bool operator==(const RegionId&, const RegionId&) = default;
};

const char* region_kind_name(RegionId::Kind kind);

// Deterministic tiling of the box. The defining closed intervals overlap on
// measure-zero boundaries; shared points resolve with precedence
// quad > strip > interior (a point within `margin` of a grid line is always in
// that line's band). Throws if p lies outside the box.
RegionId classify_region(const Point& p, const PartitionSpec& spec);

// Clusters a region may be attached to: 1 for interiors, up to 2 for strips,
// up to 4 for quads. Regions on the box edge lose their out-of-box options and
// keep a single deterministic target.
std::vector<ClusterId> region_cluster_options(const RegionId& region, const PartitionSpec& spec);

// Uniform clustering without randomized boundaries: plain floor division into
// cells (the simplified ablation mode).
ClusterId uniform_cluster_of(const Point& p, const PartitionSpec& spec);

// One realized region-to-cluster assignment. Interiors always map to their own
// cell; each strip picks one of its (up to) 2 neighbor cells with equal
// probability, each quad one of its (up to) 4, all draws independent.
// Immutable once sampled; deterministic given the generator state.
class Partition {
public:
    static Partition sample(const PartitionSpec& spec, Rng& rng);

    const PartitionSpec& spec() const { return spec_; }
    int cells_per_axis() const { return cells_; }

    ClusterId cluster_of_region(const RegionId& region) const;
    ClusterId cluster_of(const Point& p) const;

    // Rows: region-kind,i,j,cluster_i,cluster_j
    void dump_csv(std::ostream& out) const;

private:
    explicit Partition(const PartitionSpec& spec);

    PartitionSpec spec_;
    int cells_ = 0;
    std::vector<ClusterId> vstrip_; // (M+1) lines x M rows
    std::vector<ClusterId> hstrip_; // M cols x (M+1) lines
    std::vector<ClusterId> quad_;   // (M+1) x (M+1) line crossings
};

// Clusters containing at least one unit of B(u, r) under a realized partition.
// At most 4 whenever cell_side >= 4r.
std::vector<ClusterId> ball_cluster_set(const Partition& part, const UnitUniverse& universe,
                                        int u, double r);

// Joint layout of the regions covering B(u, r): clusters attached
// deterministically plus the independent random regions with their candidate
// clusters. Powers the exact containment and exposure probabilities.
struct BallRegionLayout {
    bool ball_empty = true;
    std::vector<ClusterId> fixed;
    std::vector<std::vector<ClusterId>> random;
    int own_random_index = -1; // index into `random` of u's own region, -1 if fixed
    ClusterId own_fixed;       // u's cluster when own_random_index < 0
};
BallRegionLayout ball_region_layout(const PartitionSpec& spec, const UnitUniverse& universe,
                                    int u, double r);

// Exact P[B(u, r) is contained in the cluster of u], by enumerating the joint
// draws of the random regions the ball touches. 1 for empty balls.
double containment_probability(const PartitionSpec& spec, const UnitUniverse& universe,
                               int u, double r);

// w[j] = probability that the ball's units are covered by exactly j distinct
// clusters. With independent per-cluster arm draws the exposure probability
// of arm a is sum_j w[j] * p_a^j.
std::vector<double> ball_cover_profile(const PartitionSpec& spec, const UnitUniverse& universe,
                                       int u, double r);

// Same, for the simplified uniform clustering (deterministic: a single j).
std::vector<double> ball_cover_profile_uniform(const PartitionSpec& spec,
                                               const UnitUniverse& universe, int u, double r);

} // namespace mabi
