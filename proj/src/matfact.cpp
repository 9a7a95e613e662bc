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

#include "sqrtcs/matfact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        constexpr double kSymmetryTol = 1e-12;
        constexpr double kPivotTol = 1e-12;

        double regularized_gamma_q_cf(double a, double x)
        {
            // Modified Lentz evaluation of the continued fraction for Q(a, x), valid for x >= a + 1.
            constexpr double tiny = 1e-300;
            double b = x + 1.0 - a;
            double c = 1.0 / tiny;
            double d = 1.0 / b;
            double h = d;
            for (int i = 1; i < 1000; ++i)
            {
                const double an = -i * (i - a);
                b += 2.0;
                d = an * d + b;
                if (std::abs(d) < tiny)
                    d = tiny;
                c = b + an / c;
                if (std::abs(c) < tiny)
                    c = tiny;
                d = 1.0 / d;
                const double del = d * c;
                h *= del;
                if (std::abs(del - 1.0) < 1e-16)
                    break;
            }
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
        }

        double regularized_gamma_p_series(double a, double x)
        {
            double ap = a;
            double del = 1.0 / a;
            double sum = del;
            for (int i = 0; i < 10000; ++i)
            {
                ap += 1.0;
                del *= x / ap;
                sum += del;
                if (std::abs(del) < std::abs(sum) * 1e-17)
                    break;
            }
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }

        double regularized_gamma_q(double a, double x)
        {
            if (x <= 0.0)
                return 1.0;
            if (x < a + 1.0)
                return 1.0 - regularized_gamma_p_series(a, x);
            return regularized_gamma_q_cf(a, x);
        }

        void require_probability(double p, const char *what)
        {
            if (!(p > 0.0 && p < 1.0))
                throw DomainError(std::string(what) + ": probability must lie in (0, 1), got " + std::to_string(p));
        }
    } // namespace

    Mat cholesky(const Mat &p)
    {
        if (p.rows() != p.cols() || p.rows() == 0)
            throw ShapeMismatch("cholesky: expected a non-empty square matrix");
        if (!p.allFinite())
            throw DomainError("cholesky: non-finite entries");
        const Eigen::Index n = p.rows();
        const double scale = p.cwiseAbs().maxCoeff();
        if ((p - p.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * std::max(scale, 1e-300))
            throw DomainError("cholesky: matrix is not symmetric");

        const double max_diag = p.diagonal().maxCoeff();
        if (!(max_diag > 0.0))
            throw NotPositiveDefinite("cholesky: non-positive diagonal");
        const double tol = kPivotTol * max_diag;

        Mat s = Mat::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
        {
            double pivot = p(j, j) - s.row(j).head(j).squaredNorm();
            if (!(pivot > tol))
                throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) + " is " + std::to_string(pivot));
            const double d = std::sqrt(pivot);
            s(j, j) = d;
            for (Eigen::Index i = j + 1; i < n; ++i)
                s(i, j) = (p(i, j) - s.row(i).head(j).dot(s.row(j).head(j))) / d;
        }
        return s;
    }

    QrPair qr_econ_pos(const Mat &m, double rank_tol)
    {
        const Eigen::Index rows = m.rows();
        const Eigen::Index cols = m.cols();
        if (cols == 0 || rows < cols)
            throw ShapeMismatch("qr_econ_pos: expected p x q with p >= q >= 1");

        Eigen::HouseholderQR<Mat> qr(m);
        QrPair out;
        out.r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
        out.q = qr.householderQ() * Mat::Identity(rows, cols);

        for (Eigen::Index j = 0; j < cols; ++j)
        {
            if (out.r(j, j) < 0.0)
            {
                out.r.row(j) *= -1.0;
                out.q.col(j) *= -1.0;
            }
        }
        const double threshold = rank_tol * m.norm();
        if (!(out.r.diagonal().minCoeff() > threshold))
            throw RankDeficient("qr_econ_pos: matrix is numerically rank deficient");
        return out;
    }

    Mat qr_derivative(const Mat &dm, const QrPair &ref)
    {
        if (dm.rows() != ref.q.rows() || dm.cols() != ref.q.cols() || ref.r.rows() != ref.r.cols() ||
            ref.r.rows() != ref.q.cols())
            throw ShapeMismatch("qr_derivative: perturbation shape does not match the reference factors");

        const Mat c = ref.q.transpose() * dm;
        // W = C R^{-1}, i.e. R^T W^T = C^T.
        const Mat w = ref.r.transpose().triangularView<Eigen::Lower>().solve(c.transpose()).transpose();
        Mat lower = w.triangularView<Eigen::StrictlyLower>();
        Mat upper_part = w - lower + lower.transpose();
        Mat dr = upper_part.triangularView<Eigen::Upper>() * ref.r;
        return dr.triangularView<Eigen::Upper>();
    }

    Vec vectril(const Mat &m)
    {
        if (m.rows() != m.cols())
            throw ShapeMismatch("vectril: expected a square matrix");
        const int n = static_cast<int>(m.rows());
        Vec v(tril_size(n));
        int idx = 0;
        for (int j = 0; j < n; ++j)
            for (int i = j; i < n; ++i)
                v(idx++) = m(i, j);
        return v;
    }

    int tril_order(Eigen::Index len)
    {
        if (len < 0)
            return -1;
        int n = 0;
        while (tril_size(n) < len)
            ++n;
        return tril_size(n) == len ? n : -1;
    }

    Mat unvectril(const Eigen::Ref<const Vec> &v)
    {
        const int n = tril_order(v.size());
        if (n <= 0)
            throw ShapeMismatch("unvectril: length " + std::to_string(v.size()) + " is not n(n+1)/2");
        Mat m = Mat::Zero(n, n);
        int idx = 0;
        for (int j = 0; j < n; ++j)
            for (int i = j; i < n; ++i)
                m(i, j) = v(idx++);
        return m;
    }

    double spectral_norm(const Mat &m)
    {
        if (m.size() == 0)
            return 0.0;
        Eigen::JacobiSVD<Mat> svd(m);
        return svd.singularValues()(0);
    }

    double normal_cdf(double x)
    {
        return 0.5 * std::erfc(-x / std::numbers::sqrt2);
    }

    double normal_quantile(double p)
    {
        require_probability(p, "normal_quantile");
        if (p > 0.5)
            return -normal_quantile(1.0 - p); // 1 - p is exact for p in [0.5, 1)
        if (p == 0.5)
            return 0.0;

        // Rational initializer (lower region and central region), then Halley refinement on erfc.
        static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                       1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
        static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                       6.680131188771972e+01, -1.328068155288572e+01};
        static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                       -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
        static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                       3.754408661907416e+00};
        constexpr double p_low = 0.02425;

        double x;
        if (p < p_low)
        {
            const double q = std::sqrt(-2.0 * std::log(p));
            x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        else
        {
            const double q = p - 0.5;
            const double r = q * q;
            x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
                (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
        }

        const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
        for (int it = 0; it < 3; ++it)
        {
            const double e = normal_cdf(x) - p;
            const double u = e * sqrt_2pi * std::exp(0.5 * x * x);
            x -= u / (1.0 + 0.5 * x * u);
        }
        return x;
    }

    double regularized_gamma_p(double a, double x)
    {
        if (!(a > 0.0))
            throw DomainError("regularized_gamma_p: shape must be positive");
        if (x <= 0.0)
            return 0.0;
        if (x < a + 1.0)
            return regularized_gamma_p_series(a, x);
        return 1.0 - regularized_gamma_q_cf(a, x);
    }

    double chi2_cdf(double x, double dof)
    {
        if (!(dof > 0.0))
            throw DomainError("chi2_cdf: degrees of freedom must be positive");
        return regularized_gamma_p(0.5 * dof, 0.5 * x);
    }

    double chi2_quantile(double p, double dof)
    {
        require_probability(p, "chi2_quantile");
        if (!(dof >= 1.0))
            throw DomainError("chi2_quantile: degrees of freedom must be >= 1");

        const double a = 0.5 * dof;
        // Residual on whichever tail keeps the most significant digits.
        const bool upper = p > 0.5;
        const double target = upper ? 1.0 - p : p;
        auto residual = [&](double x) {
            return upper ? target - regularized_gamma_q(a, 0.5 * x) : regularized_gamma_p(a, 0.5 * x) - target;
        };
        auto density = [&](double x) {
            return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::numbers::ln2 - std::lgamma(a));
        };

        // Wilson-Hilferty initializer.
        const double z = normal_quantile(p);
        const double h = 2.0 / (9.0 * dof);
        double x = dof * std::pow(std::max(1.0 - h + z * std::sqrt(h), 0.0), 3);
        if (!(x > 0.0))
            x = 2.0 * std::exp((std::log(p) + std::log(a) + std::lgamma(a)) / a);

        // Bracket the root, then safeguarded Newton.
        double lo = 0.0;
        double hi = std::max(2.0 * x, 1.0);
        while (residual(hi) < 0.0)
            hi *= 2.0;
        for (int it = 0; it < 200; ++it)
        {
            const double f = residual(x);
            if (f == 0.0)
                break;
            if (f < 0.0)
                lo = x;
            else
                hi = x;
            double next = x - f / density(x);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            const double step = std::abs(next - x);
            x = next;
            if (step <= 4.0 * std::numeric_limits<double>::epsilon() * x)
                break;
        }
        return x;
    }

} // namespace sqrtcs
