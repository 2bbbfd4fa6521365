#include "rkbsnet/candidates.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_set>

#include "rkbsnet/rng.hpp"

namespace rkbsnet {

namespace {

// Byte-level hash so "no exact duplicates" means bit-identical vectors.
struct PointHash {
    std::size_t operator()(const Eigen::VectorXd& v) const {
        std::size_t h = 1469598103934665603ull;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, &v[i], sizeof(bits));
            h = (h ^ bits) * 1099511628211ull;
        }
        return h;
    }
};
struct PointEq {
    bool operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return a.size() == b.size() &&
               std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
    }
};

using PointIndex = std::unordered_set<Eigen::VectorXd, PointHash, PointEq>;

} // namespace

BoxSpec BoxSpec::symmetric(int dim, double bound) {
    if (dim < 1) throw std::invalid_argument("box dimension must be >= 1");
    if (!(bound > 0.0) || !std::isfinite(bound))
        throw std::invalid_argument("box bound must be a positive finite real");
    BoxSpec box;
    box.lower = Eigen::VectorXd::Constant(dim, -bound);
    box.upper = Eigen::VectorXd::Constant(dim, bound);
    return box;
}

void BoxSpec::validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
        throw std::invalid_argument("box bounds must be nonempty and equally sized");
    if (!lower.allFinite() || !upper.allFinite())
        throw std::invalid_argument("box bounds must be finite");
    if ((lower.array() > upper.array()).any())
        throw std::invalid_argument("box lower bound exceeds upper bound");
}

double default_box_bound(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    return 3.0 / std::sqrt(alpha);
}

Provenance provenance_from_string(const std::string& name) {
    if (name == "grid") return Provenance::grid;
    if (name == "random") return Provenance::random;
    if (name == "refined") return Provenance::refined;
    throw std::invalid_argument("unknown provenance '" + name + "'");
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::grid: return "grid";
        case Provenance::random: return "random";
        case Provenance::refined: return "refined";
    }
    return "random";
}

CandidateSet sample_random(const BoxSpec& box, int count, std::uint64_t seed) {
    box.validate();
    if (count < 1) throw std::invalid_argument("sample count must be >= 1");

    CandidateSet set;
    set.provenance = Provenance::random;
    set.seed = seed;
    set.box = box;
    set.points.reserve(static_cast<std::size_t>(count));

    Rng rng(seed);
    PointIndex seen;
    const int dim = box.dim();
    int attempts = 0;
    while (static_cast<int>(set.points.size()) < count) {
        Eigen::VectorXd p(dim);
        for (int d = 0; d < dim; ++d) p[d] = rng.uniform(box.lower[d], box.upper[d]);
        if (seen.insert(p).second) {
            set.points.push_back(std::move(p));
        } else if (++attempts > 1000 * count) {
            throw std::invalid_argument(
                "box is too degenerate to hold the requested number of distinct points");
        }
    }
    return set;
}

CandidateSet sample_grid(const BoxSpec& box, int points_per_dim) {
    box.validate();
    if (points_per_dim < 1) throw std::invalid_argument("points per dimension must be >= 1");
    const int dim = box.dim();
    if (dim > 8)
        throw std::invalid_argument(
            "grid sampling refused for parameter dimension > 8 (tensor grid blows up); "
            "use random sampling");

    CandidateSet set;
    set.provenance = Provenance::grid;
    set.seed = 0;
    set.box = box;

    double total = std::pow(static_cast<double>(points_per_dim), dim);
    if (total > 5e7) throw std::invalid_argument("grid would exceed 5e7 points");
    set.points.reserve(static_cast<std::size_t>(total));

    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    auto coord = [&](int d, int i) {
        if (points_per_dim == 1) return 0.5 * (box.lower[d] + box.upper[d]);
        return box.lower[d] + (box.upper[d] - box.lower[d]) * static_cast<double>(i) /
                                  static_cast<double>(points_per_dim - 1);
    };
    while (true) {
        Eigen::VectorXd p(dim);
        for (int d = 0; d < dim; ++d) p[d] = coord(d, idx[static_cast<std::size_t>(d)]);
        set.points.push_back(std::move(p));
        int d = dim - 1;
        while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == points_per_dim) {
            idx[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return set;
}

CandidateSet refine(const CandidateSet& cands,
                    const std::vector<Eigen::VectorXd>& centers, double radius,
                    int count_per_center, std::uint64_t seed) {
    cands.box.validate();
    if (!(radius > 0.0)) throw std::invalid_argument("refinement radius must be positive");
    if (count_per_center < 0) throw std::invalid_argument("count per center must be >= 0");
    const int dim = cands.box.dim();
    for (const auto& c : centers)
        if (c.size() != dim) throw std::invalid_argument("center dimension mismatch");

    CandidateSet out = cands;
    out.provenance = Provenance::refined;
    out.seed = seed;
    if (count_per_center == 0 || centers.empty()) return out;

    PointIndex seen;
    for (const auto& p : out.points) seen.insert(p);

    Rng rng(seed);
    for (const auto& center : centers) {
        for (int i = 0; i < count_per_center; ++i) {
            Eigen::VectorXd p(dim);
            for (int d = 0; d < dim; ++d) {
                double v = center[d] + rng.uniform(-radius, radius);
                p[d] = std::min(cands.box.upper[d], std::max(cands.box.lower[d], v));
            }
            // Clipping can land on an existing point; duplicates are dropped
            // rather than redrawn so the stream stays aligned with the seed.
            if (seen.insert(p).second) out.points.push_back(std::move(p));
        }
    }
    return out;
}

} // namespace rkbsnet
