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

#include "sqrtcs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#include <omp.h>

#include "sqrtcs/error.hpp"

namespace sqrtcs
{
    namespace
    {
        // Cholesky factor when P is definite; otherwise a symmetric root of a PSD P
        // (e.g. a deterministic initial state).
        Mat sampling_root(const Mat &p)
        {
            try
            {
                return cholesky(p);
            }
            catch (const NotPositiveDefinite &)
            {
            }
            const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (p + p.transpose()));
            const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
            if (es.eigenvalues().minCoeff() < -1e-12 * scale)
                throw NotPositiveDefinite("simulate_ensemble: initial covariance is indefinite");
            return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        }

        std::uint64_t splitmix64(std::uint64_t &state)
        {
            std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        }

        // xoshiro256** with Box-Muller normals. Kept local so the stream is fixed across
        // standard library implementations.
        class NormalStream
        {
        public:
            explicit NormalStream(std::uint64_t seed)
            {
                for (auto &w : s_)
                    w = splitmix64(seed);
            }

            double next()
            {
                if (has_spare_)
                {
                    has_spare_ = false;
                    return spare_;
                }
                double u1 = uniform();
                while (u1 <= 0.0)
                    u1 = uniform();
                const double u2 = uniform();
                const double r = std::sqrt(-2.0 * std::log(u1));
                const double t = 2.0 * std::numbers::pi * u2;
                spare_ = r * std::sin(t);
                has_spare_ = true;
                return r * std::cos(t);
            }

            void fill(Vec &z)
            {
                for (Eigen::Index i = 0; i < z.size(); ++i)
                    z(i) = next();
            }

        private:
            static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

            std::uint64_t raw()
            {
                const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
                const std::uint64_t t = s_[1] << 17;
                s_[2] ^= s_[0];
                s_[3] ^= s_[1];
                s_[1] ^= s_[2];
                s_[0] ^= s_[3];
                s_[2] ^= t;
                s_[3] = rotl(s_[3], 45);
                return result;
            }

            double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

            std::uint64_t s_[4];
            double spare_ = 0.0;
            bool has_spare_ = false;
        };

        void check_iterate(const CsProblem &problem, const Iterate &z)
        {
            const int n = problem.horizon();
            if (static_cast<int>(z.mu.size()) != n + 1 || static_cast<int>(z.s.size()) != n + 1 ||
                static_cast<int>(z.v.size()) != n || static_cast<int>(z.l.size()) != n)
                throw ShapeMismatch("iterate length does not match the horizon");
        }
    } // namespace

    int parallel_threads()
    {
        return omp_get_max_threads();
    }

    std::vector<SqrtStepLinearization> linearize_all(const CsProblem &problem, const Iterate &ref, Exec exec)
    {
        check_iterate(problem, ref);
        const int n = problem.horizon();
        std::vector<SqrtStepLinearization> out(n);
        if (exec == Exec::kSerial)
        {
            for (int k = 0; k < n; ++k)
                out[k] = linearize_sqrt_step(problem.sys, k, ref.s[k], ref.l[k]);
            return out;
        }
        // Exceptions must not cross the parallel region; rethrow the first one afterwards.
        std::exception_ptr error;
#pragma omp parallel for schedule(static)
        for (int k = 0; k < n; ++k)
        {
            try
            {
                out[k] = linearize_sqrt_step(problem.sys, k, ref.s[k], ref.l[k]);
            }
            catch (...)
            {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
        if (error)
            std::rethrow_exception(error);
        return out;
    }

    std::vector<StepJacobians> jacobians_all(const LtvSystem &sys, const std::vector<SqrtStepLinearization> &lin,
                                             Exec exec)
    {
        const int n = static_cast<int>(lin.size());
        std::vector<StepJacobians> out(n);
        if (exec == Exec::kSerial)
        {
            for (int k = 0; k < n; ++k)
                lin[k].jacobians(sys, out[k].js, out[k].jl);
            return out;
        }
#pragma omp parallel for schedule(static)
        for (int k = 0; k < n; ++k)
            lin[k].jacobians(sys, out[k].js, out[k].jl);
        return out;
    }

    std::vector<Vec> defect_all(const CsProblem &problem, const Iterate &z, Exec exec)
    {
        check_iterate(problem, z);
        const int n = problem.horizon();
        std::vector<Vec> out(n);
        auto one = [&](int k) { out[k] = vectril(z.s[k + 1] - propagate_cov_sqrt(problem.sys, k, z.s[k], z.l[k])); };
        if (exec == Exec::kSerial)
        {
            for (int k = 0; k < n; ++k)
                one(k);
            return out;
        }
        std::exception_ptr error;
#pragma omp parallel for schedule(static)
        for (int k = 0; k < n; ++k)
        {
            try
            {
                one(k);
            }
            catch (...)
            {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
        if (error)
            std::rethrow_exception(error);
        return out;
    }

    Ensemble simulate_ensemble(const LtvSystem &sys, const std::vector<Vec> &v, const std::vector<Mat> &gains,
                               const std::vector<Vec> &mu_ref, const Vec &mu_init, const Mat &p_init, int samples,
                               std::uint64_t seed, Exec exec)
    {
        sys.validate();
        const int horizon = sys.horizon;
        if (samples < 1)
            throw InvalidParameter("simulate_ensemble: sample count must be positive");
        if (static_cast<int>(v.size()) != horizon || static_cast<int>(gains.size()) != horizon ||
            static_cast<int>(mu_ref.size()) < horizon)
            throw ShapeMismatch("simulate_ensemble: policy length does not match the horizon");

        Ensemble ens;
        ens.samples = samples;
        ens.seed = seed;
        ens.n = sys.n;
        ens.m = sys.m;
        ens.horizon = horizon;
        ens.x.resize(static_cast<std::size_t>(samples) * (horizon + 1) * sys.n);
        ens.u.resize(static_cast<std::size_t>(samples) * horizon * sys.m);
        const Mat s0 = sampling_root(p_init);

        // Hash the seed first: a raw seed ^ i would only permute the same set of streams
        // across small seeds.
        std::uint64_t mix = seed;
        const std::uint64_t base = splitmix64(mix);
        auto run = [&](int i) {
            NormalStream rng(base ^ static_cast<std::uint64_t>(i));
            Vec z0(sys.n);
            rng.fill(z0);
            Vec x = mu_init + s0 * z0;
            Vec w(sys.nw);
            double *xs = ens.x.data() + static_cast<std::size_t>(i) * (horizon + 1) * sys.n;
            double *us = ens.u.data() + static_cast<std::size_t>(i) * horizon * sys.m;
            Eigen::Map<Vec>(xs, sys.n) = x;
            for (int k = 0; k < horizon; ++k)
            {
                const Vec u = v[k] + gains[k] * (x - mu_ref[k]);
                rng.fill(w);
                x = sys.a[k] * x + sys.b[k] * u + sys.g[k] * w;
                Eigen::Map<Vec>(us + static_cast<std::size_t>(k) * sys.m, sys.m) = u;
                Eigen::Map<Vec>(xs + static_cast<std::size_t>(k + 1) * sys.n, sys.n) = x;
            }
        };

        if (exec == Exec::kSerial)
        {
            for (int i = 0; i < samples; ++i)
                run(i);
        }
        else
        {
#pragma omp parallel for schedule(static)
            for (int i = 0; i < samples; ++i)
                run(i);
        }
        return ens;
    }

} // namespace sqrtcs
