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

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sqrtcs/error.hpp"
#include "sqrtcs/matfact.hpp"

namespace sqrtcs
{
    struct LinTerm
    {
        int var;
        double coef;
    };

    /// sum_i coef_i x_{var_i} + constant
    struct AffineExpr
    {
        std::vector<LinTerm> terms;
        double constant = 0.0;

        AffineExpr() = default;
        explicit AffineExpr(double c) : constant(c) {}

        AffineExpr &add(int var, double coef)
        {
            if (coef != 0.0)
                terms.push_back({var, coef});
            return *this;
        }
        AffineExpr &operator+=(const AffineExpr &o);
        AffineExpr &operator*=(double s);

        double eval(const Vec &x) const;
    };

    enum class ConeKind
    {
        Zero,
        Nonneg,
        Soc,
        Psd
    };

    /// A group of affine rows constrained to lie in one cone.
    ///
    /// Soc: rows[0] >= ||rows[1:]||. Psd: `order` x `order` symmetric matrix whose
    /// lower triangle is listed column by column (tril_index ordering).
    struct ConeBlock
    {
        ConeKind kind;
        int order = 0;
        std::vector<AffineExpr> rows;
    };

    struct VarBound
    {
        int var;
        double lo;
        double hi;
    };

    /// Backend-agnostic conic program with a linear objective.
    class ConicProgram
    {
    public:
        /// Appends `count` free variables and returns the index of the first.
        int add_variables(int count);
        int num_variables() const { return num_vars_; }

        void add_objective(int var, double coef);
        void add_objective_constant(double c) { objective_constant_ += c; }
        const Vec &objective() const { return objective_; }
        double objective_constant() const { return objective_constant_; }

        void add_equality(AffineExpr e);
        void add_nonneg(AffineExpr e);
        void add_bound(int var, double lo, double hi);
        void add_soc(std::vector<AffineExpr> rows);
        void add_psd(int order, std::vector<AffineExpr> lower);

        const std::vector<AffineExpr> &equalities() const { return equalities_; }
        const std::vector<AffineExpr> &nonnegatives() const { return nonneg_; }
        const std::vector<VarBound> &bounds() const { return bounds_; }
        const std::vector<ConeBlock> &socs() const { return socs_; }
        const std::vector<ConeBlock> &psds() const { return psds_; }
        bool uses_psd() const { return !psds_.empty(); }

        double objective_value(const Vec &x) const;

        /// Change of variables x = scale .* x_new, applied to every row, bound and the objective.
        void rescale_variables(const Vec &scale);

        /// Multiplies the objective (and its constant) by c > 0.
        void scale_objective(double c);

        /// Largest violation of any constraint at x (cone distance proxies: |eq|,
        /// negative part, ||tail|| - head, minus the smallest eigenvalue).
        double max_violation(const Vec &x) const;

        /// Sparse-triplet text form; numbers written with 17 significant digits.
        void write(std::ostream &os) const;
        static ConicProgram read(std::istream &is);

    private:
        void check_expr(const AffineExpr &e) const;

        int num_vars_ = 0;
        Vec objective_;
        double objective_constant_ = 0.0;
        std::vector<AffineExpr> equalities_;
        std::vector<AffineExpr> nonneg_;
        std::vector<VarBound> bounds_;
        std::vector<ConeBlock> socs_;
        std::vector<ConeBlock> psds_;
    };

    enum class SolveStatus
    {
        Optimal,
        AlmostOptimal,
        PrimalInfeasible,
        DualInfeasible,
        MaxIterations,
        NumericalError,
        Other
    };

    const char *to_string(SolveStatus s);

    /// Statuses whose primal point is usable.
    inline bool is_success(SolveStatus s) { return s == SolveStatus::Optimal || s == SolveStatus::AlmostOptimal; }

    struct ConicSolution
    {
        SolveStatus status = SolveStatus::Other;
        Vec x;
        double objective = 0.0; // including the objective constant
        int iterations = 0;
        double solve_time = 0.0;
    };

    class BackendFailure : public Error
    {
    public:
        BackendFailure(SolveStatus status, const std::string &what)
            : Error(what + " (" + to_string(status) + ")"), status_(status)
        {
        }
        SolveStatus status() const { return status_; }

    private:
        SolveStatus status_;
    };

    struct BackendCapabilities
    {
        bool soc = false;
        bool psd = false;
    };

    struct BackendSettings
    {
        double tol_feas = 1e-9;
        double tol_gap_abs = 1e-9;
        double tol_gap_rel = 1e-9;
        /// Tolerance under which a stalled solve is still reported as AlmostOptimal.
        double tol_reduced = 1e-6;
        int max_iter = 200;
        bool verbose = false;
        /// A stalled solve is retried once with all tolerances multiplied by this factor and
        /// reported AlmostOptimal on success. Values <= 1 disable the retry.
        double stall_retry_factor = 10.0;
        /// Let the backend split PSD blocks along a chordal sparsity pattern.
        bool chordal_decomposition = false;

        /// Defaults, with all three tolerances replaced by SQRTCS_BACKEND_TOL if set.
        /// Throws ConfigError when the variable does not parse as a positive number.
        static BackendSettings from_env();
    };

    class ConicBackend
    {
    public:
        virtual ~ConicBackend() = default;
        virtual std::string name() const = 0;
        virtual BackendCapabilities capabilities() const = 0;

        /// Never throws on solver outcomes; inspect the returned status.
        virtual ConicSolution solve(const ConicProgram &prog) const = 0;
    };

    /// Interior-point backend (Clarabel) supporting zero, nonnegative, SOC and PSD cones.
    std::unique_ptr<ConicBackend> make_clarabel_backend(const BackendSettings &settings);

    std::unique_ptr<ConicBackend> make_default_backend();

} // namespace sqrtcs
