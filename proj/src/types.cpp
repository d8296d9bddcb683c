#include "sbmreg/types.hpp"

#include <cmath>

namespace sbmreg {

ObservedNetwork ObservedNetwork::create(MatrixXi counts, MatrixXd covariates) {
    const int n = static_cast<int>(counts.rows());
    if (counts.cols() != n) throw InputError("count matrix must be square");
    for (int i = 0; i < n; ++i) {
        if (counts(i, i) != 0)
            throw InputError("nonzero diagonal at Y[" + std::to_string(i + 1) +
                             "][" + std::to_string(i + 1) + "]");
        for (int j = i + 1; j < n; ++j) {
            if (counts(i, j) != counts(j, i))
                throw InputError(
                    "asymmetric counts: Y[" + std::to_string(i + 1) + "][" +
                    std::to_string(j + 1) + "]=" + std::to_string(counts(i, j)) +
                    " vs Y[" + std::to_string(j + 1) + "][" +
                    std::to_string(i + 1) + "]=" + std::to_string(counts(j, i)));
            if (counts(i, j) < 0)
                throw InputError("negative count at Y[" + std::to_string(i + 1) +
                                 "][" + std::to_string(j + 1) + "]");
        }
    }
    if (covariates.rows() != pair_count(n))
        throw InputError("covariate table must have one row per unordered pair: expected " +
                         std::to_string(pair_count(n)) + ", got " +
                         std::to_string(covariates.rows()));
    ObservedNetwork net;
    net.n = n;
    net.d = static_cast<int>(covariates.cols());
    net.Y = std::move(counts);
    net.X = std::move(covariates);
    return net;
}

void ModelParams::validate() const {
    const int k = K();
    if (k < 1) throw InputError("nu must be nonempty");
    if (alpha.rows() != k || alpha.cols() != k)
        throw InputError("alpha must be K x K");
    if (std::abs(nu.sum() - 1.0) > 1e-12)
        throw InputError("nu must sum to 1");
    for (int a = 0; a < k; ++a) {
        if (!(nu[a] > 0.0)) throw InputError("nu entries must be positive");
        for (int b = a + 1; b < k; ++b)
            if (alpha(a, b) != alpha(b, a))
                throw InputError("alpha must be symmetric");
    }
}

VectorXd gamma_pack(const MatrixXd& alpha, const VectorXd& beta) {
    const int K = static_cast<int>(alpha.rows());
    if (alpha.cols() != K) throw InputError("alpha must be square");
    for (int a = 0; a < K; ++a)
        for (int b = a + 1; b < K; ++b)
            if (alpha(a, b) != alpha(b, a))
                throw InputError("alpha must be symmetric");
    const int d = static_cast<int>(beta.size());
    VectorXd gamma(gamma_dim(K, d));
    int pos = 0;
    for (int a = 0; a < K; ++a)
        for (int b = a; b < K; ++b) gamma[pos++] = alpha(a, b);
    gamma.tail(d) = beta;
    return gamma;
}

std::pair<MatrixXd, VectorXd> gamma_unpack(int K, int d, const VectorXd& gamma) {
    if (gamma.size() != gamma_dim(K, d))
        throw InputError("gamma has wrong length: expected " +
                         std::to_string(gamma_dim(K, d)) + ", got " +
                         std::to_string(gamma.size()));
    MatrixXd alpha(K, K);
    int pos = 0;
    for (int a = 0; a < K; ++a)
        for (int b = a; b < K; ++b) {
            alpha(a, b) = gamma[pos];
            alpha(b, a) = gamma[pos];
            ++pos;
        }
    return {alpha, gamma.tail(d)};
}

void PriorHyper::validate() const {
    if (V0.rows() != gamma0.size() || V0.cols() != gamma0.size())
        throw InputError("V0 must match gamma0 dimension");
    if (!V0.isApprox(V0.transpose(), 1e-12))
        throw InputError("V0 must be symmetric");
    Eigen::LLT<MatrixXd> llt(V0);
    if (llt.info() != Eigen::Success)
        throw InputError("V0 must be positive definite (Cholesky failed)");
    for (int k = 0; k < e0.size(); ++k)
        if (!(e0[k] > 0.0)) throw InputError("e0 entries must be positive");
}

}  // namespace sbmreg
