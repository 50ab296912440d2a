#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lvnd {

/// Boundary treatment of the nonlocal dispersal.
///
/// DirichletType: hostile surroundings, mass leaving the domain is lost.
/// NeumannType:   no flux, dispersal only exchanges mass inside the domain.
/// Periodic:      spatially periodic medium, the domain is one period cell.
enum class Regime { DirichletType, NeumannType, Periodic };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& name);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Uniform cell-centred grid on a rectangle centred at the origin.
///
/// Nodes sit at cell midpoints, so each node carries the cell measure as its
/// quadrature weight. In 2-D the node index is ix + nx * iy.
class Grid {
public:
    int dimension() const { return dimension_; }
    Regime regime() const { return regime_; }
    std::size_t size() const { return nodes_.size(); }

    double extent(int axis) const { return extents_[axis]; }
    int nodes_per_axis(int axis) const { return counts_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double cell_measure() const;
    double measure() const;

    const std::vector<Point>& nodes() const { return nodes_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    const Eigen::VectorXd& weights() const { return weights_; }

    std::array<int, 2> lattice_index(std::size_t i) const;

    /// Displacement x_j - x_i. For the periodic regime the minimal image is used.
    Point offset(std::size_t i, std::size_t j) const;
    double distance(std::size_t i, std::size_t j) const;

    bool same_geometry(const Grid& other) const;

private:
    friend Grid build_grid(int, std::span<const double>, std::span<const int>, Regime);

    int dimension_ = 1;
    Regime regime_ = Regime::NeumannType;
    std::array<double, 2> extents_{1.0, 1.0};
    std::array<int, 2> counts_{1, 1};
    std::array<double, 2> spacing_{1.0, 1.0};
    std::vector<Point> nodes_;
    Eigen::VectorXd weights_;
};

Grid build_grid(int dimension, std::span<const double> extents, std::span<const int> nodes_per_axis,
                Regime regime);

enum class KernelProfile { SmoothBump, Cosine };

std::string to_string(KernelProfile profile);
KernelProfile parse_kernel_profile(const std::string& name);

/// Compactly supported symmetric dispersal kernel sampled on the lattice of
/// grid offsets. Samples are scaled so that the cell-weighted sum over all
/// offsets is one.
class Kernel {
public:
    double radius() const { return radius_; }
    KernelProfile profile() const { return profile_; }

    /// Largest lattice offset (per axis) with a nonzero sample.
    int reach(int axis) const { return reach_[axis]; }

    /// kappa(k0 * h0, k1 * h1); zero outside the support.
    double at(int k0, int k1 = 0) const;

    /// Cell-weighted sum of all samples; 1 up to rounding.
    double discrete_mass() const;
    double normalization() const { return normalization_; }
    std::size_t support_size() const;

    const std::array<double, 2>& spacing() const { return spacing_; }
    const std::array<int, 2>& grid_counts() const { return counts_; }
    int dimension() const { return dimension_; }

private:
    friend Kernel build_kernel(const Grid&, double, KernelProfile);

    int dimension_ = 1;
    double radius_ = 0.0;
    KernelProfile profile_ = KernelProfile::SmoothBump;
    std::array<double, 2> spacing_{1.0, 1.0};
    std::array<int, 2> counts_{1, 1};
    std::array<int, 2> reach_{0, 0};
    double cell_ = 1.0;
    double normalization_ = 1.0;
    // Samples for nonnegative offsets only: quadrant_[k0 + (reach0 + 1) * k1].
    std::vector<double> quadrant_;
};

Kernel build_kernel(const Grid& grid, double radius, KernelProfile profile);

/// Discrete nonlocal dispersal u -> K u - loss * u with unit rate.
///
/// K is the quadrature of the kernel integral restricted to the domain (or
/// summed over periodic images). loss is 1 for DirichletType and the row sum
/// of K otherwise, so NeumannType and Periodic operators annihilate the
/// constant field. Dispersal rates are applied at use sites.
class DispersalOperator {
public:
    Regime regime() const { return regime_; }
    std::size_t size() const { return static_cast<std::size_t>(convolution_.rows()); }

    const Eigen::MatrixXd& convolution() const { return convolution_; }
    const Eigen::VectorXd& loss() const { return loss_; }

    /// Diagonal field m(x) at unit rate: -1 for DirichletType and Periodic,
    /// minus the in-domain kernel mass for NeumannType.
    const Eigen::VectorXd& diagonal_field() const { return diagonal_field_; }

    /// Dense matrix K - diag(loss).
    Eigen::MatrixXd matrix() const;

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    void apply(const Eigen::VectorXd& u, Eigen::VectorXd& out) const;

    /// Row sums of the dense matrix, i.e. the operator applied to 1.
    Eigen::VectorXd row_sums() const;

private:
    friend DispersalOperator assemble_dispersal(const Grid&, const Kernel&, Regime);

    Regime regime_ = Regime::NeumannType;
    Eigen::MatrixXd convolution_;
    Eigen::VectorXd loss_;
    Eigen::VectorXd diagonal_field_;
};

DispersalOperator assemble_dispersal(const Grid& grid, const Kernel& kernel, Regime regime);

}  // namespace lvnd
