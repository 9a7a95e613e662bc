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

#include "sqrtcs/ltv.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        void check_node(const LtvSystem &sys, int k)
        {
            if (k < 0 || k >= sys.horizon)
                throw ShapeMismatch("node index " + std::to_string(k) + " outside [0, " + std::to_string(sys.horizon) +
                                    ")");
        }

        LtvSystem repeat(const Mat &a, const Mat &b, const Mat &g, int horizon)
        {
            LtvSystem sys;
            sys.n = static_cast<int>(a.rows());
            sys.m = static_cast<int>(b.cols());
            sys.nw = static_cast<int>(g.cols());
            sys.horizon = horizon;
            sys.a.assign(horizon, a);
            sys.b.assign(horizon, b);
            sys.g.assign(horizon, g);
            return sys;
        }
    } // namespace

    void LtvSystem::validate() const
    {
        if (n < 1 || m < 1 || nw < 0 || horizon < 1)
            throw ShapeMismatch("LtvSystem: invalid dimensions");
        if (static_cast<int>(a.size()) != horizon || static_cast<int>(b.size()) != horizon ||
            static_cast<int>(g.size()) != horizon)
            throw ShapeMismatch("LtvSystem: sequence lengths must equal the horizon");
        for (int k = 0; k < horizon; ++k)
        {
            if (a[k].rows() != n || a[k].cols() != n || b[k].rows() != n || b[k].cols() != m || g[k].rows() != n ||
                g[k].cols() != nw)
                throw ShapeMismatch("LtvSystem: inconsistent matrix shapes at node " + std::to_string(k));
        }
    }

    LtvSystem build_double_integrator_dt(int dim, int horizon, double dt, double noise_density)
    {
        if (dim < 1 || dim > 3)
            throw InvalidDimension("double integrator dimension must be 1, 2 or 3");
        if (horizon < 1)
            throw InvalidDimension("horizon must be positive");
        if (!(dt > 0.0) || !(noise_density >= 0.0))
            throw InvalidParameter("double integrator: need dt > 0 and noise density >= 0");
        const Mat eye = Mat::Identity(dim, dim);
        Mat a = Mat::Identity(2 * dim, 2 * dim);
        a.topRightCorner(dim, dim) = dt * eye;
        Mat b(2 * dim, dim);
        b << 0.5 * dt * dt * eye, dt * eye;
        const Mat g = std::sqrt(noise_density * dt) * Mat::Identity(2 * dim, 2 * dim);
        return repeat(a, b, g, horizon);
    }

    LtvSystem build_double_integrator(int dim, int horizon, double total_time, double noise_density)
    {
        if (horizon < 2)
            throw InvalidDimension("horizon must be at least 2");
        if (!(total_time > 0.0))
            throw InvalidParameter("total time must be positive");
        return build_double_integrator_dt(dim, horizon, total_time / horizon, noise_density);
    }

    double cwh_mean_motion(double orbit_radius, double grav_param)
    {
        return std::sqrt(grav_param / (orbit_radius * orbit_radius * orbit_radius));
    }

    void cwh_continuous(double nm, Mat &ac, Mat &bc)
    {
        ac = Mat::Zero(6, 6);
        ac.topRightCorner(3, 3).setIdentity();
        ac(3, 0) = 3.0 * nm * nm;
        ac(5, 2) = -nm * nm;
        ac(3, 4) = 2.0 * nm;
        ac(4, 3) = -2.0 * nm;
        bc = Mat::Zero(6, 3);
        bc.bottomRows(3).setIdentity();
    }

    LtvSystem build_cwh_zoh(double orbit_radius, double grav_param, double dt, int horizon, double accel_noise)
    {
        if (!(orbit_radius > 0.0 && grav_param > 0.0 && dt > 0.0 && accel_noise > 0.0))
            throw InvalidParameter("CWH: all physical parameters must be positive");
        if (horizon < 1)
            throw InvalidDimension("horizon must be positive");
        Mat ac, bc;
        cwh_continuous(cwh_mean_motion(orbit_radius, grav_param), ac, bc);

        // Van Loan: exp([[Ac, Bc], [0, 0]] dt) = [[A, B], [0, I]].
        Mat blk = Mat::Zero(9, 9);
        blk.topLeftCorner(6, 6) = ac * dt;
        blk.topRightCorner(6, 3) = bc * dt;
        const Mat e = blk.exp();

        Mat g = Mat::Zero(6, 3);
        g.bottomRows(3) = accel_noise * std::sqrt(dt) * Mat::Identity(3, 3);
        return repeat(e.topLeftCorner(6, 6), e.topRightCorner(6, 3), g, horizon);
    }

    Vec propagate_mean(const LtvSystem &sys, int k, const Vec &mu, const Vec &v)
    {
        check_node(sys, k);
        if (mu.size() != sys.n || v.size() != sys.m)
            throw ShapeMismatch("propagate_mean: dimension mismatch");
        return sys.a[k] * mu + sys.b[k] * v;
    }

    Mat propagate_cov_full(const LtvSystem &sys, int k, const Mat &p, const Mat &gain)
    {
        check_node(sys, k);
        if (p.rows() != sys.n || p.cols() != sys.n || gain.rows() != sys.m || gain.cols() != sys.n)
            throw ShapeMismatch("propagate_cov_full: dimension mismatch");
        const Mat acl = sys.a[k] + sys.b[k] * gain;
        Mat out = acl * p * acl.transpose() + sys.g[k] * sys.g[k].transpose();
        return 0.5 * (out + out.transpose());
    }

    Mat sqrt_step_matrix(const LtvSystem &sys, int k, const Mat &s, const Mat &l)
    {
        check_node(sys, k);
        if (s.rows() != sys.n || s.cols() != sys.n || l.rows() != sys.m || l.cols() != sys.n)
            throw ShapeMismatch("sqrt_step_matrix: dimension mismatch");
        Mat x(sys.n, sys.n + sys.nw);
        x << sys.a[k] * s + sys.b[k] * l, sys.g[k];
        return x;
    }

    Mat propagate_cov_sqrt(const LtvSystem &sys, int k, const Mat &s, const Mat &l)
    {
        return qr_econ_pos(sqrt_step_matrix(sys, k, s, l).transpose()).r.transpose();
    }

    Mat SqrtStepLinearization::predict(const Mat &dx) const
    {
        return s_next_ref + qr_derivative(dx.transpose(), qr).transpose();
    }

    Mat SqrtStepLinearization::predict(const LtvSystem &sys, const Mat &ds, const Mat &dl) const
    {
        Mat dx = Mat::Zero(x_ref.rows(), x_ref.cols());
        dx.leftCols(sys.n) = sys.a[k] * ds + sys.b[k] * dl;
        return predict(dx);
    }

    void SqrtStepLinearization::jacobians(const LtvSystem &sys, Mat &js, Mat &jl) const
    {
        const int n = sys.n, m = sys.m;
        const Mat &a = sys.a[k];
        const Mat &b = sys.b[k];
        js.resize(tril_size(n), tril_size(n));
        jl.resize(tril_size(n), m * n);
        Mat dx = Mat::Zero(x_ref.rows(), x_ref.cols());
        // Each probe perturbs one column j of the n x n block by a column of A or B.
        for (int j = 0; j < n; ++j)
        {
            for (int i = j; i < n; ++i)
            {
                dx.col(j) = a.col(i);
                js.col(tril_index(n, i, j)) = vectril(qr_derivative(dx.transpose(), qr).transpose());
                dx.col(j).setZero();
            }
            for (int i = 0; i < m; ++i)
            {
                dx.col(j) = b.col(i);
                jl.col(i + j * m) = vectril(qr_derivative(dx.transpose(), qr).transpose());
                dx.col(j).setZero();
            }
        }
    }

    SqrtStepLinearization linearize_sqrt_step(const LtvSystem &sys, int k, const Mat &s_ref, const Mat &l_ref)
    {
        SqrtStepLinearization lin;
        lin.k = k;
        lin.x_ref = sqrt_step_matrix(sys, k, s_ref, l_ref);
        lin.qr = qr_econ_pos(lin.x_ref.transpose());
        lin.s_next_ref = lin.qr.r.transpose();
        return lin;
    }

    Mat gain_from_sqrt(const Mat &l, const Mat &s)
    {
        if (s.rows() != s.cols() || l.cols() != s.rows())
            throw ShapeMismatch("gain_from_sqrt: dimension mismatch");
        // S^T is upper triangular.
        return s.transpose().triangularView<Eigen::Upper>().solve(l.transpose()).transpose();
    }

} // namespace sqrtcs
