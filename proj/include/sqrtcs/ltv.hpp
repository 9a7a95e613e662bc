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

#include <vector>

#include "sqrtcs/matfact.hpp"

namespace sqrtcs
{
    /// x_{k+1} = A_k x_k + B_k u_k + G_k w_k with w_k ~ N(0, I), k = 0..N-1.
    struct LtvSystem
    {
        int n = 0;
        int m = 0;
        int nw = 0;
        int horizon = 0;
        std::vector<Mat> a;
        std::vector<Mat> b;
        std::vector<Mat> g;

        /// Throws ShapeMismatch on inconsistent sequences.
        void validate() const;
    };

    /// Time-invariant double integrator in `dim` axes with dt = total_time / horizon.
    LtvSystem build_double_integrator(int dim, int horizon, double total_time, double noise_density);

    /// Same as above with an explicit step; total time is horizon * dt.
    LtvSystem build_double_integrator_dt(int dim, int horizon, double dt, double noise_density);

    /// Clohessy-Wiltshire-Hill relative motion (x radial, y along-track, z cross-track),
    /// zero-order-hold on the acceleration input. Units follow the arguments
    /// (km, km^3/s^2, s, km/s^{3/2}).
    LtvSystem build_cwh_zoh(double orbit_radius, double grav_param, double dt, int horizon, double accel_noise);

    double cwh_mean_motion(double orbit_radius, double grav_param);

    /// Continuous CWH pair (A_c, B_c).
    void cwh_continuous(double mean_motion, Mat &ac, Mat &bc);

    Vec propagate_mean(const LtvSystem &sys, int k, const Vec &mu, const Vec &v);

    /// (A + B K) P (A + B K)^T + G G^T.
    Mat propagate_cov_full(const LtvSystem &sys, int k, const Mat &p, const Mat &gain);

    /// X_{k+1} = [A S + B L, G].
    Mat sqrt_step_matrix(const LtvSystem &sys, int k, const Mat &s, const Mat &l);

    /// S_{k+1} = qr(X_{k+1}^T).r^T. Throws RankDeficient when X loses row rank.
    Mat propagate_cov_sqrt(const LtvSystem &sys, int k, const Mat &s, const Mat &l);

    /// Affine model of one square-root step around (S_ref, L_ref).
    struct SqrtStepLinearization
    {
        int k = 0;
        Mat x_ref;
        QrPair qr; // of x_ref^T
        Mat s_next_ref;

        /// First-order prediction of S_{k+1} for a change dX of the whole X matrix.
        Mat predict(const Mat &dx) const;

        /// Same, for changes of S_k and L_k only (the G block is fixed).
        Mat predict(const LtvSystem &sys, const Mat &ds, const Mat &dl) const;

        /// Jacobians of vectril(prediction) w.r.t. vectril(S_k) (js) and vec(L_k) (jl).
        void jacobians(const LtvSystem &sys, Mat &js, Mat &jl) const;
    };

    SqrtStepLinearization linearize_sqrt_step(const LtvSystem &sys, int k, const Mat &s_ref, const Mat &l_ref);

    /// K = L S^{-1} by back-substitution on S^T K^T = L^T.
    Mat gain_from_sqrt(const Mat &l, const Mat &s);

} // namespace sqrtcs
