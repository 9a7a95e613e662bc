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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

#include "sqrtcs/conic.hpp"

extern "C"
{
    struct SqrtcsClarabelSettings
    {
        double tol_feas;
        double tol_gap_abs;
        double tol_gap_rel;
        double tol_reduced;
        std::uint32_t max_iter;
        std::int32_t verbose;
        std::int32_t chordal;
    };

    struct SqrtcsClarabelInfo
    {
        std::int32_t status;
        std::uint32_t iterations;
        double obj_val;
        double solve_time;
        double r_prim;
        double r_dual;
    };

    std::int32_t sqrtcs_clarabel_solve(std::size_t n, std::size_t m, const double *q, const std::size_t *a_colptr,
                                       const std::size_t *a_rowval, const double *a_nzval, const double *b,
                                       std::size_t ncones, const std::int32_t *cone_kind, const std::size_t *cone_dim,
                                       const SqrtcsClarabelSettings *settings, double *x_out,
                                       SqrtcsClarabelInfo *info);
}

namespace sqrtcs
{
    namespace
    {
        constexpr std::int32_t kZero = 0;
        constexpr std::int32_t kNonneg = 1;
        constexpr std::int32_t kSoc = 2;
        constexpr std::int32_t kPsd = 3;

        SolveStatus map_status(std::int32_t s)
        {
            switch (s)
            {
            case 0:
                return SolveStatus::Optimal;
            case 1:
                return SolveStatus::AlmostOptimal;
            case 2:
                return SolveStatus::PrimalInfeasible;
            case 3:
                return SolveStatus::DualInfeasible;
            case 4:
                return SolveStatus::MaxIterations;
            case 5:
                return SolveStatus::NumericalError;
            default:
                return SolveStatus::Other;
            }
        }

        /// Rows of s = b - A x in Clarabel's sign convention.
        struct Assembly
        {
            std::vector<Eigen::Triplet<double>> trips;
            std::vector<double> b;
            std::vector<std::int32_t> kinds;
            std::vector<std::size_t> dims;

            void row(const AffineExpr &e, double scale = 1.0)
            {
                const int r = static_cast<int>(b.size());
                for (const auto &t : e.terms)
                    trips.emplace_back(r, t.var, -scale * t.coef);
                b.push_back(scale * e.constant);
            }

            void cone(std::int32_t kind, std::size_t dim)
            {
                if (dim == 0)
                    return;
                kinds.push_back(kind);
                dims.push_back(dim);
            }
        };

        class ClarabelBackend final : public ConicBackend
        {
        public:
            explicit ClarabelBackend(const BackendSettings &s) : settings_(s) {}

            std::string name() const override { return "clarabel"; }
            BackendCapabilities capabilities() const override { return {true, true}; }

            ConicSolution solve(const ConicProgram &prog) const override
            {
                const int n = prog.num_variables();
                Assembly as;

                for (const auto &e : prog.equalities())
                    as.row(e);
                as.cone(kZero, prog.equalities().size());

                std::size_t nonneg = 0;
                for (const auto &e : prog.nonnegatives())
                {
                    as.row(e);
                    ++nonneg;
                }
                for (const auto &bd : prog.bounds())
                {
                    if (std::isfinite(bd.lo))
                    {
                        as.row(AffineExpr(-bd.lo).add(bd.var, 1.0));
                        ++nonneg;
                    }
                    if (std::isfinite(bd.hi))
                    {
                        as.row(AffineExpr(bd.hi).add(bd.var, -1.0));
                        ++nonneg;
                    }
                }
                as.cone(kNonneg, nonneg);

                for (const auto &c : prog.socs())
                {
                    for (const auto &e : c.rows)
                        as.row(e);
                    as.cone(kSoc, c.rows.size());
                }

                // Clarabel packs the upper triangle by columns with off-diagonals scaled by sqrt(2).
                // Entry (i, j), i >= j, of our lower triangle is (j, i) of the upper one.
                for (const auto &c : prog.psds())
                {
                    const int order = c.order;
                    std::vector<int> slot(c.rows.size());
                    std::vector<double> scale(c.rows.size());
                    for (int j = 0; j < order; ++j)
                        for (int i = j; i < order; ++i)
                        {
                            const int src = tril_index(order, i, j);
                            slot[src] = i * (i + 1) / 2 + j;
                            scale[src] = i == j ? 1.0 : std::sqrt(2.0);
                        }
                    std::vector<int> inverse(c.rows.size());
                    for (std::size_t s = 0; s < slot.size(); ++s)
                        inverse[slot[s]] = static_cast<int>(s);
                    for (int dst : inverse)
                        as.row(c.rows[dst], scale[dst]);
                    as.cone(kPsd, static_cast<std::size_t>(order));
                }

                const int m = static_cast<int>(as.b.size());
                Eigen::SparseMatrix<double, Eigen::ColMajor, std::ptrdiff_t> a(m, n);
                a.setFromTriplets(as.trips.begin(), as.trips.end());
                a.makeCompressed();

                std::vector<std::size_t> colptr(n + 1), rowval(a.nonZeros());
                for (int j = 0; j <= n; ++j)
                    colptr[j] = static_cast<std::size_t>(a.outerIndexPtr()[j]);
                for (std::ptrdiff_t k = 0; k < a.nonZeros(); ++k)
                    rowval[k] = static_cast<std::size_t>(a.innerIndexPtr()[k]);

                const Vec q = prog.objective();
                ConicSolution sol;
                sol.x = Vec::Zero(n);
                const auto run = [&](double relax) {
                    SqrtcsClarabelSettings st{relax * settings_.tol_feas,
                                              relax * settings_.tol_gap_abs,
                                              relax * settings_.tol_gap_rel,
                                              std::max(settings_.tol_reduced, relax * settings_.tol_feas),
                                              static_cast<std::uint32_t>(settings_.max_iter),
                                              settings_.verbose ? 1 : 0,
                                              settings_.chordal_decomposition ? 1 : 0};
                    SqrtcsClarabelInfo info{};
                    const std::int32_t rc = sqrtcs_clarabel_solve(
                        static_cast<std::size_t>(n), static_cast<std::size_t>(m), q.data(), colptr.data(),
                        rowval.data(), a.valuePtr(), as.b.data(), as.kinds.size(), as.kinds.data(), as.dims.data(),
                        &st, sol.x.data(), &info);
                    if (rc != 0)
                        return SolveStatus::Other;
                    sol.iterations += static_cast<int>(info.iterations);
                    sol.solve_time += info.solve_time;
                    return map_status(info.status);
                };

                sol.status = run(1.0);
                // Interior-point iterations can stall just short of very tight tolerances.
                if (sol.status == SolveStatus::NumericalError && settings_.stall_retry_factor > 1.0)
                {
                    const SolveStatus retry = run(settings_.stall_retry_factor);
                    sol.status = is_success(retry) ? SolveStatus::AlmostOptimal : retry;
                }
                sol.objective = prog.objective_value(sol.x);
                return sol;
            }

        private:
            BackendSettings settings_;
        };
    } // namespace

    std::unique_ptr<ConicBackend> make_clarabel_backend(const BackendSettings &settings)
    {
        return std::make_unique<ClarabelBackend>(settings);
    }

} // namespace sqrtcs
