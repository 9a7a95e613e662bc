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

// Serial reference vs OpenMP kernels on the 3D double integrator.

#include <benchmark/benchmark.h>

#include "sqrtcs/kernels.hpp"
#include "sqrtcs/scp.hpp"

using namespace sqrtcs;

namespace
{
    CsProblem problem(int horizon)
    {
        CsProblem p;
        p.sys = build_double_integrator(3, horizon, 3.0, 0.05);
        p.mu_init = Vec::Ones(6);
        p.mu_fin = Vec::Zero(6);
        p.p_init = Mat::Identity(6, 6);
        p.p_fin = 0.5 * Mat::Identity(6, 6);
        EoqCost c;
        c.q.assign(horizon, 0.1 * Mat::Identity(6, 6));
        c.r.assign(horizon, Mat::Identity(3, 3));
        p.cost = c;
        return p;
    }

    Iterate reference(const CsProblem &p)
    {
        Iterate z = initial_iterate(p);
        for (auto &l : z.l)
            l = 0.1 * Mat::Ones(p.m(), p.n());
        return z;
    }

    Exec exec_of(const benchmark::State &st) { return st.range(1) == 0 ? Exec::kSerial : Exec::kParallel; }

    void set_label(benchmark::State &st)
    {
        st.SetLabel(st.range(1) == 0 ? "serial" : "omp x" + std::to_string(parallel_threads()));
    }

    void BM_Linearize(benchmark::State &st)
    {
        const auto p = problem(static_cast<int>(st.range(0)));
        const auto z = reference(p);
        for (auto _ : st)
            benchmark::DoNotOptimize(linearize_all(p, z, exec_of(st)));
        set_label(st);
    }

    void BM_Jacobians(benchmark::State &st)
    {
        const auto p = problem(static_cast<int>(st.range(0)));
        const auto lin = linearize_all(p, reference(p), Exec::kSerial);
        for (auto _ : st)
            benchmark::DoNotOptimize(jacobians_all(p.sys, lin, exec_of(st)));
        set_label(st);
    }

    void BM_Defect(benchmark::State &st)
    {
        const auto p = problem(static_cast<int>(st.range(0)));
        const auto z = reference(p);
        for (auto _ : st)
            benchmark::DoNotOptimize(defect_all(p, z, exec_of(st)));
        set_label(st);
    }

    void BM_Simulate(benchmark::State &st)
    {
        const auto p = problem(40);
        const auto pol = make_policy(rollout(p, reference(p).v, reference(p).l));
        const int samples = static_cast<int>(st.range(0));
        for (auto _ : st)
            benchmark::DoNotOptimize(
                simulate_ensemble(p.sys, pol.v, pol.k, pol.mu, p.mu_init, p.p_init, samples, 0, exec_of(st)));
        st.SetItemsProcessed(st.iterations() * samples);
        set_label(st);
    }
} // namespace

BENCHMARK(BM_Linearize)->ArgsProduct({{10, 40, 160}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Jacobians)->ArgsProduct({{10, 40, 160}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Defect)->ArgsProduct({{10, 40, 160}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Simulate)->ArgsProduct({{1000, 10000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
