#include "drddpc/predictor.hpp"

#include <Eigen/SVD>
#include <stdexcept>

namespace drddpc {

SpcPredictor fit(const HankelPartition &part, double cutoff_rel) {
    SpcPredictor pred;
    pred.Tp = part.Tp;
    pred.Tf = part.Tf;
    pred.m = part.m;
    pred.p = part.p;
    pred.N = part.N;

    Eigen::JacobiSVD<MatrixXd> svd(part.M,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd &sv = svd.singularValues();
    if (!sv.allFinite())
        throw std::runtime_error("fit: SVD produced non-finite values");
    pred.svd_cutoff =
        sv(0) * std::max(part.M.rows(), part.M.cols()) * cutoff_rel;
    int rho = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > pred.svd_cutoff) ++rho;
    pred.rank = rho;

    const MatrixXd Ur = svd.matrixU().leftCols(rho);
    pred.V = svd.matrixV().leftCols(rho);
    VectorXd sinv(rho);
    for (int i = 0; i < rho; ++i) sinv(i) = 1.0 / sv(i);
    const MatrixXd Mpinv = pred.V * sinv.asDiagonal() * Ur.transpose();

    pred.Khat = part.Yf * Mpinv;
    pred.P = pred.V * pred.V.transpose();
    pred.Xi = part.Yf - part.Yf * pred.P;
    return pred;
}

VectorXd predict(const SpcPredictor &pred, const VectorXd &m_f) {
    if (m_f.size() != pred.Khat.cols())
        throw std::invalid_argument("predict: m_f dimension mismatch");
    return pred.Khat * m_f;
}

ScenarioSet scenarios(const SpcPredictor &pred, const VectorXd &m_f) {
    ScenarioSet set;
    set.center = predict(pred, m_f);
    set.atoms = pred.Xi.colwise() + set.center;
    set.weight = 1.0 / pred.N;
    return set;
}

MatrixXd oracle_residuals(const MatrixXd &K_true,
                          const HankelPartition &part) {
    if (K_true.cols() != part.M.rows() || K_true.rows() != part.Yf.rows())
        throw std::invalid_argument("oracle_residuals: dimension mismatch");
    return part.Yf - K_true * part.M;
}

} // namespace drddpc
