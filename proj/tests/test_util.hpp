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

#include <random>

#include <Eigen/Dense>

namespace sqrtcs::testing
{
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;

    inline Mat randn(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols)
    {
        std::normal_distribution<double> nd;
        Mat m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                m(i, j) = nd(rng);
        return m;
    }

    inline Vec randn_vec(std::mt19937_64 &rng, Eigen::Index n) { return randn(rng, n, 1); }

    /// Well-conditioned symmetric positive definite matrix.
    inline Mat random_spd(std::mt19937_64 &rng, Eigen::Index n, double floor = 0.1)
    {
        const Mat a = randn(rng, n, n);
        return a * a.transpose() / static_cast<double>(n) + floor * Mat::Identity(n, n);
    }

    /// Lower triangular with diagonal in [0.5, 1.5].
    inline Mat random_lower_pd(std::mt19937_64 &rng, Eigen::Index n)
    {
        std::uniform_real_distribution<double> ud(0.5, 1.5);
        Mat l = randn(rng, n, n).triangularView<Eigen::StrictlyLower>();
        for (Eigen::Index i = 0; i < n; ++i)
            l(i, i) = ud(rng);
        return l;
    }

    inline double rel_fro(const Mat &a, const Mat &b) { return (a - b).norm() / b.norm(); }

} // namespace sqrtcs::testing
