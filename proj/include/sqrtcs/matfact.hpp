/*
 Copyright 2026 The sqrtcs Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <Eigen/Dense>

namespace sqrtcs
{
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;

    /// Economy QR factors with a positive diagonal on `r`.
    ///
    /// `q` is p x q with orthonormal columns, `r` is q x q upper triangular.
    struct QrPair
    {
        Mat q;
        Mat r;
    };

    /// Lower-triangular Cholesky factor S with P = S S^T and diag(S) > 0.
    ///
    /// Throws NotPositiveDefinite when a pivot falls to 1e-12 * max(diag(P)) or below.
    Mat cholesky(const Mat &p);

    /// Economy QR of a tall matrix, sign-normalized so that diag(r) > 0.
    ///
    /// Throws RankDeficient if the smallest diagonal of r is at or below
    /// `rank_tol * ||m||_F`.
    QrPair qr_econ_pos(const Mat &m, double rank_tol = 1e-10);

    /// First-order change of the R factor for a perturbation `dm` of the reference
    /// matrix factored in `ref`. The result is exactly upper triangular.
    ///
    /// With W = Q^T dm R^{-1}, the skew part of Q^T dQ is recovered from the strictly
    /// lower part of W, and dR = (W - tril_strict(W) + tril_strict(W)^T) R.
    Mat qr_derivative(const Mat &dm, const QrPair &ref);

    /// Number of entries in the lower triangle of an n x n matrix.
    constexpr int tril_size(int n) { return n * (n + 1) / 2; }

    /// Position of entry (i, j), i >= j, in the column-major lower-triangle ordering.
    constexpr int tril_index(int n, int i, int j) { return j * n - j * (j - 1) / 2 + (i - j); }

    /// Lower triangle, column by column (col j, rows j..n-1). Upper entries are discarded.
    Vec vectril(const Mat &m);

    /// Inverse of vectril; strictly upper entries of the result are zero.
    Mat unvectril(const Eigen::Ref<const Vec> &v);

    /// Order n with n(n+1)/2 == len, or -1 when len is not triangular.
    int tril_order(Eigen::Index len);

    /// Largest singular value.
    double spectral_norm(const Mat &m);

    double normal_cdf(double x);

    /// Inverse standard normal CDF, absolute error below 1e-9 on (0, 1).
    double normal_quantile(double p);

    /// Regularized lower incomplete gamma function P(a, x).
    double regularized_gamma_p(double a, double x);

    double chi2_cdf(double x, double dof);

    /// Inverse chi-squared CDF with `dof` degrees of freedom.
    double chi2_quantile(double p, double dof);

} // namespace sqrtcs
