#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace sbmreg {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::RowVectorXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Raised on malformed inputs (files, dimensions, parameter ranges).  CLI exit 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a computation cannot proceed numerically.  CLI exit 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Row index of the unordered pair {i,j}, i < j, in the packed upper-triangle
// ordering (0,1), (0,2), ..., (0,n-1), (1,2), ...
inline int pair_index(int n, int i, int j) {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline int pair_count(int n) { return n * (n - 1) / 2; }

// Symmetric count network with one covariate vector per unordered pair.
// Only i<j pairs are stored; the mirror is implicit.
struct ObservedNetwork {
    int n = 0;
    int d = 0;
    MatrixXi Y;  // n x n, symmetric, zero diagonal, entries >= 0
    MatrixXd X;  // pair_count(n) x d, row pair_index(n,i,j) holds x_ij

    int pairs() const { return pair_count(n); }

    Eigen::VectorXd covariate(int i, int j) const {
        return X.row(pair_index(n, i, j));
    }

    // Counts flattened in pair order, as doubles.
    VectorXd pair_counts() const {
        VectorXd y(pairs());
        int p = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++p) y[p] = Y(i, j);
        return y;
    }

    // Validates symmetry, diagonal, nonnegativity and covariate shape.
    static ObservedNetwork create(MatrixXi counts, MatrixXd covariates);
};

// Block labels, 0-based internally.  File formats use 1-based labels.
struct LatentAssignment {
    VectorXi z;

    int n() const { return static_cast<int>(z.size()); }

    void validate(int K) const {
        for (int i = 0; i < z.size(); ++i)
            if (z[i] < 0 || z[i] >= K)
                throw InputError("block label out of range at node " +
                                 std::to_string(i + 1));
    }
};

// theta = (nu, alpha, beta): group proportions, symmetric block interactions,
// regression coefficients.
struct ModelParams {
    VectorXd nu;     // K, entries > 0, sums to 1
    MatrixXd alpha;  // K x K, symmetric
    VectorXd beta;   // d

    int K() const { return static_cast<int>(nu.size()); }
    int d() const { return static_cast<int>(beta.size()); }

    // (K-1) + K(K+1)/2 + d
    int free_parameter_count() const {
        return (K() - 1) + K() * (K() + 1) / 2 + d();
    }

    void validate() const;
};

inline int gamma_dim(int K, int d) { return K * (K + 1) / 2 + d; }

// Packs (alpha, beta) as [a_11, a_12, ..., a_1K, a_22, ..., a_KK, b_1, ..., b_d]
// (upper triangle of alpha in row-major order, then beta).
VectorXd gamma_pack(const MatrixXd& alpha, const VectorXd& beta);
std::pair<MatrixXd, VectorXd> gamma_unpack(int K, int d, const VectorXd& gamma);

// Position of alpha_{ab} (a <= b, 0-based) inside the packed gamma vector.
inline int alpha_pack_index(int K, int a, int b) {
    return a * K - a * (a - 1) / 2 + (b - a);
}

// Gaussian prior on gamma, Dirichlet prior on nu.
struct PriorHyper {
    VectorXd gamma0;  // gamma_dim(K,d)
    MatrixXd V0;      // symmetric positive definite
    VectorXd e0;      // K, entries > 0

    int gamma_size() const { return static_cast<int>(gamma0.size()); }
    int K() const { return static_cast<int>(e0.size()); }

    // Checks V0 via Cholesky and e0 positivity.
    void validate() const;
};

}  // namespace sbmreg
