#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace rkbsnet {

/// Axis-aligned box in parameter space; the sampling domain that stands in
/// for the unbounded parameter space (the weight function makes the kernel
/// negligible far from the origin).
struct BoxSpec {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static BoxSpec symmetric(int dim, double bound);
    void validate() const;
    int dim() const { return static_cast<int>(lower.size()); }
};

/// Default half-width 3/sqrt(alpha): rho at a corner is exp(-9 * dim).
double default_box_bound(double alpha);

enum class Provenance { grid, random, refined };

Provenance provenance_from_string(const std::string& name);
std::string to_string(Provenance p);

/// Finite discretization of the parameter space. Point order is
/// deterministic given (provenance, seed, box); no two points are
/// bit-identical.
struct CandidateSet {
    std::vector<Eigen::VectorXd> points;
    Provenance provenance = Provenance::random;
    std::uint64_t seed = 0;
    BoxSpec box;

    int count() const { return static_cast<int>(points.size()); }
};

/// count independent uniform draws from the box, seeded.
CandidateSet sample_random(const BoxSpec& box, int count, std::uint64_t seed);

/// Full tensor grid with points_per_dim values per coordinate (endpoints
/// included; a single value sits at the midpoint), lexicographic order.
/// Refused for boxes of dimension > 8.
CandidateSet sample_grid(const BoxSpec& box, int points_per_dim);

/// Appends count_per_center seeded uniform draws from the sup-norm ball of
/// the given radius around each center, clipped to the box. Original points
/// keep their order.
CandidateSet refine(const CandidateSet& cands,
                    const std::vector<Eigen::VectorXd>& centers, double radius,
                    int count_per_center, std::uint64_t seed);

} // namespace rkbsnet
