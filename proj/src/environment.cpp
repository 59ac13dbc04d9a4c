#include "mabi/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mabi {

AssignmentVector constant_assignment(int units, int arm) {
    if (units < 0 || arm < 0 || arm > 255)
        throw std::invalid_argument("constant_assignment: bad arguments");
    return AssignmentVector(static_cast<std::size_t>(units), static_cast<std::uint8_t>(arm));
}

InterferenceKernel::InterferenceKernel(Variant variant, double param, std::vector<double> table)
    : variant_(variant), param_(param), table_(std::move(table)) {}

InterferenceKernel InterferenceKernel::sutva() {
    return {Variant::Sutva, 0.0, {}};
}

InterferenceKernel InterferenceKernel::kappa_neighborhood(double kappa) {
    if (!(kappa > 0.0))
        throw std::invalid_argument("InterferenceKernel: kappa must be positive");
    return {Variant::KappaNeighborhood, kappa, {}};
}

InterferenceKernel InterferenceKernel::power_law(double exponent) {
    if (!(exponent >= 1.0))
        throw std::invalid_argument("InterferenceKernel: power-law exponent must be >= 1");
    return {Variant::PowerLaw, exponent, {}};
}

InterferenceKernel InterferenceKernel::tabulated(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("InterferenceKernel: empty table");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0))
            throw std::invalid_argument("InterferenceKernel: table values must be nonnegative");
        if (i > 0 && values[i] > values[i - 1])
            throw std::invalid_argument("InterferenceKernel: table must be non-increasing");
    }
    return {Variant::Tabulated, 0.0, std::move(values)};
}

double InterferenceKernel::operator()(double r) const {
    if (r < 0.0)
        throw std::invalid_argument("InterferenceKernel: negative radius");
    switch (variant_) {
    case Variant::Sutva:
        return r == 0.0 ? 1.0 : 0.0;
    case Variant::KappaNeighborhood:
        return param_ > r ? 1.0 : 0.0;
    case Variant::PowerLaw:
        return r <= 1.0 ? 1.0 : std::pow(r, -param_);
    case Variant::Tabulated: {
        const auto i = static_cast<std::size_t>(std::floor(r));
        return i < table_.size() ? table_[i] : table_.back();
    }
    }
    throw std::logic_error("InterferenceKernel: bad variant");
}

std::string InterferenceKernel::describe() const {
    std::ostringstream out;
    switch (variant_) {
    case Variant::Sutva:
        return "sutva";
    case Variant::KappaNeighborhood:
        out << "kappa:" << param_;
        return out.str();
    case Variant::PowerLaw:
        out << "power-law:" << param_;
        return out.str();
    case Variant::Tabulated:
        out << "tabulated:";
        for (std::size_t i = 0; i < table_.size(); ++i)
            out << (i ? ";" : "") << table_[i];
        return out.str();
    }
    return "?";
}

InterferenceKernel InterferenceKernel::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string tail = colon == std::string::npos ? std::string() : text.substr(colon + 1);
    if (head == "sutva")
        return sutva();
    if (head == "kappa")
        return kappa_neighborhood(std::stod(tail));
    if (head == "power-law")
        return power_law(std::stod(tail));
    if (head == "tabulated") {
        std::vector<double> values;
        std::istringstream ss(tail);
        std::string tok;
        while (std::getline(ss, tok, ';'))
            values.push_back(std::stod(tok));
        return tabulated(std::move(values));
    }
    throw std::invalid_argument("InterferenceKernel::parse: unknown kernel '" + text + "'");
}

RewardModel::RewardModel(std::shared_ptr<const UnitUniverse> universe, InterferenceKernel kernel,
                         int arms, int horizon)
    : universe_(std::move(universe)), kernel_(std::move(kernel)), arms_(arms), horizon_(horizon) {
    if (!universe_)
        throw std::invalid_argument("RewardModel: null universe");
    if (arms_ < 1)
        throw std::invalid_argument("RewardModel: needs at least one arm");
    if (horizon_ < 1)
        throw std::invalid_argument("RewardModel: needs at least one round");
}

double RewardModel::eval(int u, int t, const AssignmentVector& z) const {
    if (t < 1 || t > horizon_)
        throw std::out_of_range("RewardModel::eval: round out of range");
    if (static_cast<int>(z.size()) != units())
        throw std::invalid_argument("RewardModel::eval: assignment length mismatch");
    if (u < 0 || u >= units())
        throw std::out_of_range("RewardModel::eval: invalid unit id");
    return eval_impl(u, t, z);
}

double RewardModel::counterfactual_mean(int t, int arm) const {
    if (t < 1 || t > horizon_)
        throw std::out_of_range("RewardModel::counterfactual_mean: round out of range");
    if (arm < 0 || arm >= arms_)
        throw std::out_of_range("RewardModel::counterfactual_mean: invalid arm");
    return counterfactual_[static_cast<std::size_t>(t - 1) * arms_ + arm];
}

void RewardModel::finalize() {
    const int n = units();
    counterfactual_.assign(static_cast<std::size_t>(horizon_) * arms_, 0.0);
    for (int a = 0; a < arms_; ++a) {
        const AssignmentVector z = constant_assignment(n, a);
        for (int t = 1; t <= horizon_; ++t) {
            double sum = 0.0;
            for (int u = 0; u < n; ++u)
                sum += eval_impl(u, t, z);
            counterfactual_[static_cast<std::size_t>(t - 1) * arms_ + a] = sum / n;
        }
    }
}

LatticeNeighborModel::LatticeNeighborModel(std::shared_ptr<const UnitUniverse> universe, int arms,
                                           int horizon, int neighborhood_radius, Rng& rng)
    : RewardModel(std::move(universe),
                  InterferenceKernel::kappa_neighborhood(static_cast<double>(neighborhood_radius)),
                  arms, horizon),
      radius_(neighborhood_radius) {
    if (arms < 2)
        throw std::invalid_argument("LatticeNeighborModel: needs at least two arms");
    if (radius_ != 1 && radius_ != 2)
        throw std::invalid_argument("LatticeNeighborModel: neighborhood radius must be 1 or 2");
    const int s = this->universe().side();
    if (s <= 0)
        throw std::invalid_argument("LatticeNeighborModel: requires a lattice universe");

    const int n = units();
    drift_.resize(static_cast<std::size_t>(n) * kDriftPieces);
    for (double& v : drift_)
        v = rng.next_double();

    neigh_.assign(static_cast<std::size_t>(n) * 5, -1);
    neigh_len_.assign(static_cast<std::size_t>(n), 0);
    for (int row = 0; row < s; ++row) {
        for (int col = 0; col < s; ++col) {
            const int id = row * s + col;
            auto* slot = &neigh_[static_cast<std::size_t>(id) * 5];
            int len = 0;
            slot[len++] = id;
            if (radius_ == 2) {
                if (col > 0) slot[len++] = id - 1;
                if (col + 1 < s) slot[len++] = id + 1;
                if (row > 0) slot[len++] = id - s;
                if (row + 1 < s) slot[len++] = id + s;
            }
            neigh_len_[static_cast<std::size_t>(id)] = static_cast<std::int8_t>(len);
        }
    }
    finalize();
}

int LatticeNeighborModel::piece_index(int t, int horizon) {
    const int len = (horizon + kDriftPieces - 1) / kDriftPieces;
    return std::min((t - 1) / len, kDriftPieces - 1);
}

double LatticeNeighborModel::drift(int u, int t) const {
    return drift_[static_cast<std::size_t>(u) * kDriftPieces + piece_index(t, horizon())];
}

double LatticeNeighborModel::eval_impl(int u, int t, const AssignmentVector& z) const {
    const auto* ids = &neigh_[static_cast<std::size_t>(u) * 5];
    const int len = neigh_len_[static_cast<std::size_t>(u)];
    int ones = 0;
    for (int i = 0; i < len; ++i)
        ones += z[static_cast<std::size_t>(ids[i])] == 1;
    const double rho = static_cast<double>(ones) / len;
    return (1.0 + (2.0 * rho - 1.0) * drift(u, t)) / 2.0;
}

std::string LatticeNeighborModel::describe() const {
    std::ostringstream out;
    out << "lattice-neighbor:radius=" << radius_;
    return out.str();
}

UniformConstantModel::UniformConstantModel(std::shared_ptr<const UnitUniverse> universe,
                                           int horizon, std::vector<double> levels)
    : RewardModel(std::move(universe), InterferenceKernel::sutva(),
                  static_cast<int>(levels.size()), horizon),
      levels_(std::move(levels)) {
    for (double v : levels_)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("UniformConstantModel: levels must lie in [0,1]");
    finalize();
}

double UniformConstantModel::eval_impl(int u, int /*t*/, const AssignmentVector& z) const {
    return levels_.at(z[static_cast<std::size_t>(u)]);
}

std::string UniformConstantModel::describe() const {
    std::ostringstream out;
    out << "uniform-constant:";
    for (std::size_t i = 0; i < levels_.size(); ++i)
        out << (i ? ";" : "") << levels_[i];
    return out.str();
}

int r_star(std::span<const std::uint8_t> window, int m) {
    const int side = 2 * m + 1;
    if (static_cast<int>(window.size()) != side * side)
        throw std::invalid_argument("r_star: window size mismatch");
    // Smallest sup-distance of a zero entry; rings scanned outward so typical
    // mixed windows exit early.
    for (int d = 0; d <= m; ++d) {
        for (int dy = -d; dy <= d; ++dy) {
            const bool edge_row = (dy == -d || dy == d);
            const int step = edge_row ? 1 : 2 * d;
            for (int dx = -d; dx <= d; dx += (d == 0 ? 1 : step)) {
                const std::size_t idx =
                    static_cast<std::size_t>(dy + m) * side + static_cast<std::size_t>(dx + m);
                if (window[idx] == 0)
                    return d; // min(m, d) with d <= m
            }
        }
    }
    return m;
}

double extension_value(const HypercubeExtension& ext, const AssignmentVector& z) {
    if (!ext.universe)
        throw std::invalid_argument("extension_value: null universe");
    if (static_cast<int>(z.size()) != ext.universe->size())
        throw std::invalid_argument("extension_value: assignment length mismatch");
    const int m = ext.half_width;
    if (m < 0)
        throw std::invalid_argument("extension_value: negative window half-width");
    const Point center = ext.universe->unit(ext.center_unit);
    const int side = 2 * m + 1;
    std::vector<std::uint8_t> window(static_cast<std::size_t>(side) * side, 1);
    for (int dy = -m; dy <= m; ++dy) {
        for (int dx = -m; dx <= m; ++dx) {
            const auto id = ext.universe->unit_at({center.x + dx, center.y + dy});
            if (!id)
                continue; // absent cells never cap the radius
            const std::uint8_t v = z[static_cast<std::size_t>(*id)];
            if (v > 1)
                throw std::invalid_argument("extension_value: two-arm construction only");
            window[static_cast<std::size_t>(dy + m) * side + static_cast<std::size_t>(dx + m)] = v;
        }
    }
    const int rs = r_star(window, m);
    return ext.kernel(0.0) - ext.kernel(static_cast<double>(rs));
}

namespace {

std::shared_ptr<const UnitUniverse> lower_bound_universe(
    int scale, std::shared_ptr<const UnitUniverse> given = nullptr) {
    if (scale <= 0)
        throw std::invalid_argument("LowerBoundModel: scale must be positive");
    const int s = static_cast<int>(std::llround(std::sqrt(static_cast<double>(scale))));
    if (s * s != scale)
        throw std::invalid_argument("LowerBoundModel: scale must be a perfect square");
    const int side = 4 * s + 1;
    if (given) {
        if (given->side() != side)
            throw std::invalid_argument("LowerBoundModel: universe does not match the scale");
        return given;
    }
    return std::make_shared<const UnitUniverse>(UnitUniverse::lattice(side * side));
}

} // namespace

LowerBoundModel::LowerBoundModel(int scale, int horizon, const InterferenceKernel& kernel,
                                 Rng& rng, std::shared_ptr<const UnitUniverse> universe)
    : RewardModel(lower_bound_universe(scale, std::move(universe)), kernel, 2, horizon),
      side_scale_(static_cast<int>(std::llround(std::sqrt(static_cast<double>(scale))))) {
    xi_.resize(static_cast<std::size_t>(horizon));
    for (auto& x : xi_)
        x = rng.bernoulli(0.5) ? 1 : 0;
    init(kernel);
}

LowerBoundModel::LowerBoundModel(int scale, int horizon, const InterferenceKernel& kernel,
                                 std::vector<std::uint8_t> xi)
    : RewardModel(lower_bound_universe(scale), kernel, 2, horizon),
      side_scale_(static_cast<int>(std::llround(std::sqrt(static_cast<double>(scale))))),
      xi_(std::move(xi)) {
    if (static_cast<int>(xi_.size()) != horizon)
        throw std::invalid_argument("LowerBoundModel: xi length must equal the horizon");
    for (auto x : xi_)
        if (x > 1)
            throw std::invalid_argument("LowerBoundModel: xi entries must be 0/1");
    init(kernel);
}

void LowerBoundModel::init(const InterferenceKernel& kernel) {
    const int m = side_scale_;
    if (kernel(0.0) != 1.0)
        throw std::invalid_argument("LowerBoundModel: kernel must have psi(0) = 1");
    const double tail = kernel(static_cast<double>(m));
    if (!(tail < 1.0))
        throw std::invalid_argument("LowerBoundModel: kernel does not decay over the window");
    // Rescale so the profile hits 0 at the window edge; no-op for compactly
    // supported kernels.
    psi_.resize(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j)
        psi_[static_cast<std::size_t>(j)] =
            std::max(0.0, (kernel(static_cast<double>(j)) - tail) / (1.0 - tail));
    finalize();
}

bool LowerBoundModel::is_interior(int u) const {
    const Point& p = universe().unit(u);
    const double s = static_cast<double>(side_scale_);
    return std::fabs(p.x) <= s && std::fabs(p.y) <= s;
}

int LowerBoundModel::interior_count() const {
    const int w = 2 * side_scale_ + 1;
    return w * w;
}

double LowerBoundModel::eval_impl(int u, int t, const AssignmentVector& z) const {
    if (!is_interior(u))
        return 0.0;
    const int m = side_scale_;
    const int grid = 4 * m + 1;
    const int col = u % grid;
    const int row = u / grid;
    // Interior units sit >= m cells from the lattice edge, so the window
    // always fits.
    if (col < m || col + m >= grid || row < m || row + m >= grid)
        throw std::logic_error("LowerBoundModel: window escapes the lattice");

    int d0 = m + 1;
    for (int d = 0; d <= m && d0 > m; ++d) {
        for (int dy = -d; dy <= d && d0 > m; ++dy) {
            const bool edge_row = (dy == -d || dy == d);
            const int step = edge_row ? 1 : 2 * d;
            for (int dx = -d; dx <= d; dx += (d == 0 ? 1 : step)) {
                if (z[static_cast<std::size_t>((row + dy) * grid + (col + dx))] == 0) {
                    d0 = d;
                    break;
                }
            }
        }
    }
    const int rs = std::min(m, d0);
    const double f = 1.0 - psi_[static_cast<std::size_t>(rs)];
    return xi_[static_cast<std::size_t>(t - 1)] ? 0.5 + 0.5 * f : 0.5 - 0.5 * f;
}

std::string LowerBoundModel::describe() const {
    std::ostringstream out;
    out << "lower-bound:scale=" << side_scale_ * side_scale_;
    return out.str();
}

DipReport verify_dip(const RewardModel& model, int samples, Rng& rng) {
    DipReport report;
    const int n = model.units();
    const int k = model.arms();
    const UnitUniverse& uni = model.universe();
    const double r_cap = std::max(4.0, 2.0 * uni.half_width());
    AssignmentVector z(static_cast<std::size_t>(n));
    AssignmentVector z2(static_cast<std::size_t>(n));
    for (int s = 0; s < samples; ++s) {
        const int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        const int t = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(model.horizon())));
        double r;
        switch (rng.next_below(4)) {
        case 0: r = 0.0; break;
        case 1: r = 1.0; break;
        case 2: r = 1.0 + rng.next_below(3) * 0.5; break;
        default: r = rng.uniform(0.0, r_cap); break;
        }
        for (int v = 0; v < n; ++v)
            z[static_cast<std::size_t>(v)] =
                static_cast<std::uint8_t>(rng.next_below(static_cast<std::uint64_t>(k)));
        z2 = z;
        const Point& pu = uni.unit(u);
        for (int v = 0; v < n; ++v) {
            if (sup_distance(pu, uni.unit(v)) >= r)
                z2[static_cast<std::size_t>(v)] =
                    static_cast<std::uint8_t>(rng.next_below(static_cast<std::uint64_t>(k)));
        }
        const double gap = std::fabs(model.eval(u, t, z) - model.eval(u, t, z2));
        const double bound = model.kernel()(r);
        ++report.samples;
        if (gap > bound + 1e-12) {
            ++report.violations;
            report.max_excess = std::max(report.max_excess, gap - bound);
        }
    }
    return report;
}

} // namespace mabi
