#include "mabi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mabi {

double sup_distance(const Point& a, const Point& b) {
    return std::max(std::fabs(a.x - b.x), std::fabs(a.y - b.y));
}

const Point& UnitUniverse::unit(int id) const {
    if (id < 0 || id >= size())
        throw std::out_of_range("UnitUniverse::unit: invalid unit id");
    return points_[static_cast<std::size_t>(id)];
}

UnitUniverse UnitUniverse::lattice(int n) {
    if (n <= 0)
        throw std::invalid_argument("UnitUniverse::lattice: n must be positive");
    const int s = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
    if (s * s != n)
        throw std::invalid_argument("UnitUniverse::lattice: n must be a perfect square");

    UnitUniverse uni;
    uni.points_.reserve(static_cast<std::size_t>(n));
    const double off = (s - 1) / 2.0;
    for (int row = 0; row < s; ++row)
        for (int col = 0; col < s; ++col)
            uni.points_.push_back({col - off, row - off});
    uni.half_width_ = off;
    uni.side_ = s;
    uni.build_index();
    return uni;
}

UnitUniverse UnitUniverse::from_points(std::vector<Point> points, double scale_constant) {
    if (points.empty())
        throw std::invalid_argument("UnitUniverse: empty point set");
    double b = 0.0;
    for (const Point& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("UnitUniverse: non-finite coordinate");
        b = std::max(b, std::max(std::fabs(p.x), std::fabs(p.y)));
    }
    const double n = static_cast<double>(points.size());
    if (b > scale_constant * std::sqrt(n))
        throw std::invalid_argument("UnitUniverse: bounding box exceeds the declared scaling constant");

    UnitUniverse uni;
    uni.points_ = std::move(points);
    uni.half_width_ = b;
    uni.build_index();
    uni.validate_spacing();
    return uni;
}

void UnitUniverse::build_index() {
    double xmin = points_[0].x, xmax = points_[0].x;
    double ymin = points_[0].y, ymax = points_[0].y;
    for (const Point& p : points_) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    grid_x0_ = xmin;
    grid_y0_ = ymin;
    grid_nx_ = static_cast<int>(std::floor(xmax - xmin)) + 1;
    grid_ny_ = static_cast<int>(std::floor(ymax - ymin)) + 1;
    cells_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, -1);
    for (int id = 0; id < size(); ++id) {
        const Point& p = points_[static_cast<std::size_t>(id)];
        const int ix = std::min(grid_nx_ - 1, static_cast<int>(std::floor(p.x - grid_x0_)));
        const int iy = std::min(grid_ny_ - 1, static_cast<int>(std::floor(p.y - grid_y0_)));
        auto& slot = cells_[static_cast<std::size_t>(iy) * grid_nx_ + ix];
        if (slot >= 0)
            throw std::invalid_argument("UnitUniverse: two units closer than the minimum spacing 1");
        slot = id;
    }
}

void UnitUniverse::validate_spacing() const {
    // Same-cell collisions are caught during indexing; only neighbor cells can
    // still hold a unit within distance < 1.
    for (int id = 0; id < size(); ++id) {
        const Point& p = points_[static_cast<std::size_t>(id)];
        const int ix = std::min(grid_nx_ - 1, static_cast<int>(std::floor(p.x - grid_x0_)));
        const int iy = std::min(grid_ny_ - 1, static_cast<int>(std::floor(p.y - grid_y0_)));
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int cx = ix + dx, cy = iy + dy;
                if (cx < 0 || cx >= grid_nx_ || cy < 0 || cy >= grid_ny_)
                    continue;
                const std::int32_t other = cells_[static_cast<std::size_t>(cy) * grid_nx_ + cx];
                if (other < 0 || other <= id)
                    continue;
                if (sup_distance(p, points_[static_cast<std::size_t>(other)]) < 1.0)
                    throw std::invalid_argument(
                        "UnitUniverse: two units closer than the minimum spacing 1");
            }
        }
    }
}

std::vector<int> UnitUniverse::ball(int u, double r) const {
    const Point& c = unit(u);
    if (r < 0.0)
        throw std::invalid_argument("UnitUniverse::ball: radius must be nonnegative");
    std::vector<int> out;
    if (r == 0.0)
        return out;
    const int ix0 = std::max(0, static_cast<int>(std::floor(c.x - r - grid_x0_)));
    const int ix1 = std::min(grid_nx_ - 1, static_cast<int>(std::floor(c.x + r - grid_x0_)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(c.y - r - grid_y0_)));
    const int iy1 = std::min(grid_ny_ - 1, static_cast<int>(std::floor(c.y + r - grid_y0_)));
    for (int iy = iy0; iy <= iy1; ++iy) {
        for (int ix = ix0; ix <= ix1; ++ix) {
            const std::int32_t v = cells_[static_cast<std::size_t>(iy) * grid_nx_ + ix];
            if (v < 0)
                continue;
            if (sup_distance(c, points_[static_cast<std::size_t>(v)]) < r)
                out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<int> UnitUniverse::unit_at(const Point& p) const {
    const int ix = static_cast<int>(std::floor(p.x - grid_x0_));
    const int iy = static_cast<int>(std::floor(p.y - grid_y0_));
    if (ix < 0 || ix >= grid_nx_ || iy < 0 || iy >= grid_ny_)
        return std::nullopt;
    const std::int32_t v = cells_[static_cast<std::size_t>(iy) * grid_nx_ + ix];
    if (v < 0)
        return std::nullopt;
    const Point& q = points_[static_cast<std::size_t>(v)];
    if (q.x == p.x && q.y == p.y)
        return v;
    return std::nullopt;
}

void UnitUniverse::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("UnitUniverse::save_csv: cannot open " + path);
    out << "id,x,y\n";
    char buf[96];
    for (int id = 0; id < size(); ++id) {
        const Point& p = points_[static_cast<std::size_t>(id)];
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", id, p.x, p.y);
        out << buf;
    }
}

UnitUniverse UnitUniverse::load_csv(const std::string& path, double scale_constant) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("UnitUniverse::load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("UnitUniverse::load_csv: empty file " + path);
    std::vector<std::pair<int, Point>> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ss(line);
        std::string tok;
        int id;
        Point p;
        if (!std::getline(ss, tok, ','))
            throw std::runtime_error("UnitUniverse::load_csv: malformed row: " + line);
        id = std::stoi(tok);
        if (!std::getline(ss, tok, ','))
            throw std::runtime_error("UnitUniverse::load_csv: malformed row: " + line);
        p.x = std::stod(tok);
        if (!std::getline(ss, tok, ','))
            throw std::runtime_error("UnitUniverse::load_csv: malformed row: " + line);
        p.y = std::stod(tok);
        rows.emplace_back(id, p);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Point> points;
    points.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != static_cast<int>(i))
            throw std::runtime_error("UnitUniverse::load_csv: ids must be dense 0..N-1");
        points.push_back(rows[i].second);
    }
    return from_points(std::move(points), scale_constant);
}

} // namespace mabi
