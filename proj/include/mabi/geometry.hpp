#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mabi {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Sup-norm (L-infinity) distance.
double sup_distance(const Point& a, const Point& b);

// A finite set of planar units with pairwise sup-distance >= 1, contained in
// the box [-half_width, half_width]^2 with half_width <= C * sqrt(N).
// Unit ids are dense 0..N-1; the lattice constructor orders them row-major
// (y outer, x inner). Immutable after construction; safe to share across
// threads without synchronization.
class UnitUniverse {
public:
    // sqrt(n) x sqrt(n) unit-spaced grid centered at the origin.
    // n must be a positive perfect square.
    static UnitUniverse lattice(int n);

    // Arbitrary point set; validates the spacing and box invariants.
    static UnitUniverse from_points(std::vector<Point> points, double scale_constant = 2.0);

    // CSV with header "id,x,y"; ids must be dense 0..N-1.
    static UnitUniverse load_csv(const std::string& path, double scale_constant = 2.0);
    void save_csv(const std::string& path) const;

    int size() const { return static_cast<int>(points_.size()); }
    const Point& unit(int id) const;
    double half_width() const { return half_width_; }

    // Ids of units strictly within sup-distance r of unit u (open ball):
    // empty for r = 0, {u} for r in (0, 1] given the minimum spacing.
    std::vector<int> ball(int u, double r) const;

    // Exact-position lookup (window restriction on lattices).
    std::optional<int> unit_at(const Point& p) const;

    // Grid side for lattice-constructed universes, 0 otherwise.
    int side() const { return side_; }

private:
    UnitUniverse() = default;
    void build_index();
    void validate_spacing() const;

    std::vector<Point> points_;
    double half_width_ = 0.0;
    int side_ = 0;

    // Cell hash with unit cells; min spacing 1 guarantees at most one unit
    // per half-open cell.
    double grid_x0_ = 0.0, grid_y0_ = 0.0;
    int grid_nx_ = 0, grid_ny_ = 0;
    std::vector<std::int32_t> cells_;
};

} // namespace mabi
