#include "rkbsnet/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace rkbsnet {

double rho(const WeightFn& w, const Eigen::VectorXd& theta) {
    if (!(w.alpha > 0.0)) throw std::invalid_argument("weight scale alpha must be positive");
    if (!theta.allFinite())
        throw std::invalid_argument("rho: parameter vector must be finite");
    return std::exp(-w.alpha * theta.squaredNorm());
}

Eigen::VectorXd kernel_eval(const NetworkSpec& spec, const WeightFn& w,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
    return forward(spec, theta, x) * rho(w, theta);
}

FeatureMatrix feature_matrix(const NetworkSpec& spec, const WeightFn& w,
                             const Dataset& data, const CandidateSet& cands) {
    const int m = data.count();
    const int t = spec.output_dim;
    if (m < 1) throw std::invalid_argument("feature_matrix: need at least one data point");
    if (cands.count() < 1)
        throw std::invalid_argument("feature_matrix: need at least one candidate");
    if (data.y.rows() != t || data.y.cols() != m)
        throw std::invalid_argument("feature_matrix: target matrix must be t x m");
    for (const auto& x : data.x)
        if (x.size() != spec.input_dim)
            throw std::invalid_argument("feature_matrix: input point dimension mismatch");
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if ((data.x[static_cast<std::size_t>(i)].array() ==
                 data.x[static_cast<std::size_t>(j)].array())
                    .all())
                throw std::invalid_argument(
                    "feature_matrix: data points must be distinct (x_" + std::to_string(i) +
                    " equals x_" + std::to_string(j) + ")");

    FeatureMatrix A;
    A.entries.resize(static_cast<Eigen::Index>(t) * m, cands.count());
    // Columns are independent; fixed loop order keeps the result
    // evaluation-order free.
    for (int p = 0; p < cands.count(); ++p) {
        const auto& theta = cands.points[static_cast<std::size_t>(p)];
        const double weight = rho(w, theta);
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd value =
                forward(spec, theta, data.x[static_cast<std::size_t>(j)]) * weight;
            for (int k = 0; k < t; ++k) A.entries(k * m + j, p) = value(k);
        }
    }
    if (!A.entries.allFinite())
        throw std::invalid_argument("feature_matrix: non-finite kernel value");
    A.data = data;
    A.candidates = {cands.provenance, cands.seed, cands.count()};
    A.spec = spec;
    A.weight = w;
    return A;
}

RankInfo rank_check(const FeatureMatrix& A, double tol) {
    const Eigen::Index rows = A.entries.rows();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.entries.transpose());
    const Eigen::VectorXd diag =
        qr.matrixR().diagonal().head(std::min(A.entries.rows(), A.entries.cols())).cwiseAbs();
    const double largest = diag.size() > 0 ? diag.maxCoeff() : 0.0;
    RankInfo info;
    if (largest > 0.0) {
        const double threshold = tol * largest;
        for (Eigen::Index i = 0; i < diag.size(); ++i)
            if (diag(i) > threshold) ++info.rank;
    }
    info.warning = info.rank < rows;
    return info;
}

Eigen::VectorXd vectorize_targets(const Eigen::MatrixXd& y) {
    const Eigen::Index t = y.rows(), m = y.cols();
    Eigen::VectorXd v(t * m);
    for (Eigen::Index k = 0; k < t; ++k)
        for (Eigen::Index j = 0; j < m; ++j) v(k * m + j) = y(k, j);
    return v;
}

} // namespace rkbsnet
