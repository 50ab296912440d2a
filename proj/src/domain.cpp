#include "lvnd/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lvnd/error.hpp"

namespace lvnd {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Negativity: return "negativity";
        case ErrorKind::NonFinite: return "non_finite";
        case ErrorKind::Hypothesis: return "hypothesis";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Numerical: return "numerical";
    }
    return "unknown";
}

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::DirichletType: return "dirichlet";
        case Regime::NeumannType: return "neumann";
        case Regime::Periodic: return "periodic";
    }
    return "unknown";
}

Regime parse_regime(const std::string& name) {
    if (name == "dirichlet") return Regime::DirichletType;
    if (name == "neumann") return Regime::NeumannType;
    if (name == "periodic") return Regime::Periodic;
    throw ValidationError("unknown regime '" + name + "' (expected dirichlet, neumann or periodic)");
}

std::string to_string(KernelProfile profile) {
    return profile == KernelProfile::SmoothBump ? "smooth_bump" : "cosine";
}

KernelProfile parse_kernel_profile(const std::string& name) {
    if (name == "smooth_bump") return KernelProfile::SmoothBump;
    if (name == "cosine") return KernelProfile::Cosine;
    throw ValidationError("unknown kernel profile '" + name + "' (expected smooth_bump or cosine)");
}

// ---------------------------------------------------------------------------
// Grid

double Grid::cell_measure() const {
    return dimension_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1];
}

double Grid::measure() const {
    return dimension_ == 1 ? extents_[0] : extents_[0] * extents_[1];
}

std::array<int, 2> Grid::lattice_index(std::size_t i) const {
    const int idx = static_cast<int>(i);
    return {idx % counts_[0], idx / counts_[0]};
}

namespace {

// Signed lattice difference b - a along one axis, wrapped to the minimal image
// when the axis is periodic.
int axis_difference(int a, int b, int count, bool periodic) {
    int d = b - a;
    if (periodic) {
        d = ((d % count) + count) % count;
        if (2 * d > count) d -= count;
    }
    return d;
}

}  // namespace

Point Grid::offset(std::size_t i, std::size_t j) const {
    const bool periodic = regime_ == Regime::Periodic;
    const auto a = lattice_index(i);
    const auto b = lattice_index(j);
    Point p;
    p.x = axis_difference(a[0], b[0], counts_[0], periodic) * spacing_[0];
    if (dimension_ == 2) p.y = axis_difference(a[1], b[1], counts_[1], periodic) * spacing_[1];
    return p;
}

double Grid::distance(std::size_t i, std::size_t j) const {
    const Point p = offset(i, j);
    return std::hypot(p.x, p.y);
}

bool Grid::same_geometry(const Grid& other) const {
    return dimension_ == other.dimension_ && counts_ == other.counts_ && extents_ == other.extents_;
}

Grid build_grid(int dimension, std::span<const double> extents, std::span<const int> nodes_per_axis,
                Regime regime) {
    if (dimension != 1 && dimension != 2) {
        throw ValidationError("grid dimension must be 1 or 2, got " + std::to_string(dimension));
    }
    const auto dim = static_cast<std::size_t>(dimension);
    if (extents.size() != dim || nodes_per_axis.size() != dim) {
        throw ValidationError("grid extents and node counts must have one entry per axis");
    }
    Grid g;
    g.dimension_ = dimension;
    g.regime_ = regime;
    for (std::size_t a = 0; a < dim; ++a) {
        if (!(extents[a] > 0.0) || !std::isfinite(extents[a])) {
            throw ValidationError("grid extents must be positive and finite");
        }
        if (nodes_per_axis[a] < 3) {
            throw ValidationError("grid needs at least 3 nodes per axis");
        }
        g.extents_[a] = extents[a];
        g.counts_[a] = nodes_per_axis[a];
        g.spacing_[a] = extents[a] / nodes_per_axis[a];
    }
    if (dimension == 1) {
        g.extents_[1] = 1.0;
        g.counts_[1] = 1;
        g.spacing_[1] = 1.0;
    }

    const std::size_t n = static_cast<std::size_t>(g.counts_[0]) * static_cast<std::size_t>(g.counts_[1]);
    g.nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = g.lattice_index(i);
        Point p;
        p.x = -0.5 * g.extents_[0] + (idx[0] + 0.5) * g.spacing_[0];
        if (dimension == 2) p.y = -0.5 * g.extents_[1] + (idx[1] + 0.5) * g.spacing_[1];
        g.nodes_[i] = p;
    }
    g.weights_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), g.cell_measure());
    return g;
}

// ---------------------------------------------------------------------------
// Kernel

namespace {

double profile_value(KernelProfile profile, double s) {
    if (s >= 1.0) return 0.0;
    switch (profile) {
        case KernelProfile::SmoothBump: return std::exp(-1.0 / (1.0 - s * s));
        case KernelProfile::Cosine: return 0.5 * (1.0 + std::cos(std::numbers::pi * s));
    }
    return 0.0;
}

}  // namespace

double Kernel::at(int k0, int k1) const {
    k0 = std::abs(k0);
    k1 = std::abs(k1);
    if (k0 > reach_[0] || k1 > reach_[1]) return 0.0;
    return quadrant_[static_cast<std::size_t>(k0 + (reach_[0] + 1) * k1)];
}

double Kernel::discrete_mass() const {
    double sum = 0.0;
    for (int k1 = -reach_[1]; k1 <= reach_[1]; ++k1) {
        for (int k0 = -reach_[0]; k0 <= reach_[0]; ++k0) sum += at(k0, k1);
    }
    return sum * cell_;
}

std::size_t Kernel::support_size() const {
    std::size_t count = 0;
    for (int k1 = -reach_[1]; k1 <= reach_[1]; ++k1) {
        for (int k0 = -reach_[0]; k0 <= reach_[0]; ++k0) count += at(k0, k1) > 0.0 ? 1 : 0;
    }
    return count;
}

Kernel build_kernel(const Grid& grid, double radius, KernelProfile profile) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("kernel radius must be positive");
    double smallest_extent = grid.extent(0);
    double largest_spacing = grid.spacing(0);
    if (grid.dimension() == 2) {
        smallest_extent = std::min(smallest_extent, grid.extent(1));
        largest_spacing = std::max(largest_spacing, grid.spacing(1));
    }
    if (radius >= smallest_extent) {
        throw ValidationError("kernel radius must be smaller than the smallest domain extent");
    }
    if (radius <= largest_spacing) {
        throw ValidationError("kernel radius must exceed one grid spacing (kernel would be numerically empty)");
    }

    Kernel k;
    k.dimension_ = grid.dimension();
    k.radius_ = radius;
    k.profile_ = profile;
    k.spacing_ = {grid.spacing(0), grid.spacing(1)};
    k.counts_ = {grid.nodes_per_axis(0), grid.nodes_per_axis(1)};
    k.cell_ = grid.cell_measure();
    k.reach_[0] = static_cast<int>(std::ceil(radius / k.spacing_[0]));
    k.reach_[1] = grid.dimension() == 2 ? static_cast<int>(std::ceil(radius / k.spacing_[1])) : 0;

    const std::size_t w0 = static_cast<std::size_t>(k.reach_[0] + 1);
    k.quadrant_.assign(w0 * static_cast<std::size_t>(k.reach_[1] + 1), 0.0);
    for (int k1 = 0; k1 <= k.reach_[1]; ++k1) {
        for (int k0 = 0; k0 <= k.reach_[0]; ++k0) {
            const double z = std::hypot(k0 * k.spacing_[0], grid.dimension() == 2 ? k1 * k.spacing_[1] : 0.0);
            k.quadrant_[static_cast<std::size_t>(k0) + w0 * static_cast<std::size_t>(k1)] =
                profile_value(profile, z / radius);
        }
    }

    // Raw mass over the full offset lattice, each quadrant entry counted once per sign pattern.
    double raw = 0.0;
    for (int k1 = -k.reach_[1]; k1 <= k.reach_[1]; ++k1) {
        for (int k0 = -k.reach_[0]; k0 <= k.reach_[0]; ++k0) {
            raw += k.quadrant_[static_cast<std::size_t>(std::abs(k0)) + w0 * static_cast<std::size_t>(std::abs(k1))];
        }
    }
    k.normalization_ = raw * k.cell_;
    for (double& v : k.quadrant_) v /= k.normalization_;
    return k;
}

// ---------------------------------------------------------------------------
// DispersalOperator

Eigen::MatrixXd DispersalOperator::matrix() const {
    Eigen::MatrixXd m = convolution_;
    m.diagonal() -= loss_;
    return m;
}

Eigen::VectorXd DispersalOperator::apply(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    apply(u, out);
    return out;
}

void DispersalOperator::apply(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    out.noalias() = convolution_ * u;
    out -= loss_.cwiseProduct(u);
}

Eigen::VectorXd DispersalOperator::row_sums() const {
    return apply(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(size())));
}

DispersalOperator assemble_dispersal(const Grid& grid, const Kernel& kernel, Regime regime) {
    if (kernel.dimension() != grid.dimension() || kernel.grid_counts()[0] != grid.nodes_per_axis(0) ||
        kernel.grid_counts()[1] != grid.nodes_per_axis(1) || kernel.spacing()[0] != grid.spacing(0) ||
        kernel.spacing()[1] != grid.spacing(1)) {
        throw ValidationError("kernel was built on a different grid");
    }
    if (regime != grid.regime()) {
        throw ValidationError("dispersal regime " + to_string(regime) + " does not match grid regime " +
                              to_string(grid.regime()));
    }

    const std::size_t n = grid.size();
    const auto ni = static_cast<Eigen::Index>(n);
    DispersalOperator op;
    op.regime_ = regime;
    op.convolution_ = Eigen::MatrixXd::Zero(ni, ni);

    const bool periodic = regime == Regime::Periodic;
    const int n0 = grid.nodes_per_axis(0);
    const int n1 = grid.nodes_per_axis(1);
    const double cell = grid.cell_measure();

    for (std::size_t i = 0; i < n; ++i) {
        const auto a = grid.lattice_index(i);
        for (std::size_t j = 0; j < n; ++j) {
            const auto b = grid.lattice_index(j);
            double sum = 0.0;
            if (periodic) {
                // Sum over every periodic image of node j inside the kernel support.
                const int base0 = b[0] - a[0];
                const int base1 = b[1] - a[1];
                const int m0 = kernel.reach(0) / n0 + 1;
                const int m1 = grid.dimension() == 2 ? kernel.reach(1) / n1 + 1 : 0;
                for (int s1 = -m1; s1 <= m1; ++s1) {
                    for (int s0 = -m0; s0 <= m0; ++s0) sum += kernel.at(base0 + s0 * n0, base1 + s1 * n1);
                }
            } else {
                sum = kernel.at(b[0] - a[0], b[1] - a[1]);
            }
            op.convolution_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum * cell;
        }
    }

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ni);
    switch (regime) {
        case Regime::DirichletType:
            op.loss_ = Eigen::VectorXd::Ones(ni);
            op.diagonal_field_ = Eigen::VectorXd::Constant(ni, -1.0);
            break;
        case Regime::NeumannType:
            // Same product kernel as apply(), so the constant field is annihilated bit for bit.
            op.loss_.resize(ni);
            op.loss_.noalias() = op.convolution_ * ones;
            op.diagonal_field_ = -op.loss_;
            break;
        case Regime::Periodic:
            op.loss_.resize(ni);
            op.loss_.noalias() = op.convolution_ * ones;
            op.diagonal_field_ = Eigen::VectorXd::Constant(ni, -1.0);
            break;
    }
    return op;
}

}  // namespace lvnd
