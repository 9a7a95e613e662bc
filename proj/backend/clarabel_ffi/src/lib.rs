// Copyright 2026 The sqrtcs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Flat C entry point for solving
//!
//!     min q'x  s.t.  A x + s = b,  s in K
//!
//! with K a product of zero, nonnegative, second-order and PSD-triangle cones.
//! A is passed in CSC form. PSD blocks use Clarabel's scaled upper-triangle packing.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use std::panic;
use std::slice;

#[repr(C)]
pub struct SqrtcsClarabelSettings {
    pub tol_feas: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_reduced: f64,
    pub max_iter: u32,
    pub verbose: i32,
    pub chordal: i32,
}

#[repr(C)]
pub struct SqrtcsClarabelInfo {
    pub status: i32,
    pub iterations: u32,
    pub obj_val: f64,
    pub solve_time: f64,
    pub r_prim: f64,
    pub r_dual: f64,
}

pub const CONE_ZERO: i32 = 0;
pub const CONE_NONNEG: i32 = 1;
pub const CONE_SOC: i32 = 2;
pub const CONE_PSD: i32 = 3;

// Status codes shared with the C++ side.
const ST_SOLVED: i32 = 0;
const ST_ALMOST_SOLVED: i32 = 1;
const ST_PRIMAL_INFEASIBLE: i32 = 2;
const ST_DUAL_INFEASIBLE: i32 = 3;
const ST_MAX_ITER: i32 = 4;
const ST_NUMERICAL: i32 = 5;
const ST_OTHER: i32 = 6;

fn map_status(s: SolverStatus) -> i32 {
    match s {
        SolverStatus::Solved => ST_SOLVED,
        SolverStatus::AlmostSolved => ST_ALMOST_SOLVED,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => ST_PRIMAL_INFEASIBLE,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => ST_DUAL_INFEASIBLE,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => ST_MAX_ITER,
        SolverStatus::NumericalError | SolverStatus::InsufficientProgress => ST_NUMERICAL,
        _ => ST_OTHER,
    }
}

/// Returns 0 when the solver ran (check `info.status`), -1 on invalid input,
/// -2 if the solver panicked.
///
/// # Safety
/// All pointers must be valid for the lengths implied by `n`, `m`, `ncones`
/// and `a_colptr[n]`.
#[no_mangle]
pub unsafe extern "C" fn sqrtcs_clarabel_solve(
    n: usize,
    m: usize,
    q: *const f64,
    a_colptr: *const usize,
    a_rowval: *const usize,
    a_nzval: *const f64,
    b: *const f64,
    ncones: usize,
    cone_kind: *const i32,
    cone_dim: *const usize,
    settings: *const SqrtcsClarabelSettings,
    x_out: *mut f64,
    info: *mut SqrtcsClarabelInfo,
) -> i32 {
    if q.is_null() || a_colptr.is_null() || b.is_null() || settings.is_null() || info.is_null() || x_out.is_null() {
        return -1;
    }
    let colptr = slice::from_raw_parts(a_colptr, n + 1).to_vec();
    let nnz = colptr[n];
    let rowval = if nnz > 0 { slice::from_raw_parts(a_rowval, nnz).to_vec() } else { Vec::new() };
    let nzval = if nnz > 0 { slice::from_raw_parts(a_nzval, nnz).to_vec() } else { Vec::new() };
    let qv = slice::from_raw_parts(q, n).to_vec();
    let bv = if m > 0 { slice::from_raw_parts(b, m).to_vec() } else { Vec::new() };
    let kinds = if ncones > 0 { slice::from_raw_parts(cone_kind, ncones) } else { &[] };
    let dims = if ncones > 0 { slice::from_raw_parts(cone_dim, ncones) } else { &[] };

    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(ncones);
    for (k, d) in kinds.iter().zip(dims.iter()) {
        let cone = match *k {
            CONE_ZERO => SupportedConeT::ZeroConeT(*d),
            CONE_NONNEG => SupportedConeT::NonnegativeConeT(*d),
            CONE_SOC => SupportedConeT::SecondOrderConeT(*d),
            CONE_PSD => SupportedConeT::PSDTriangleConeT(*d),
            _ => return -1,
        };
        cones.push(cone);
    }

    let st = &*settings;
    let (tol_feas, tol_gap_abs, tol_gap_rel, tol_reduced, max_iter, verbose, chordal) = (
        st.tol_feas,
        st.tol_gap_abs,
        st.tol_gap_rel,
        st.tol_reduced,
        st.max_iter,
        st.verbose != 0,
        st.chordal != 0,
    );

    let result = panic::catch_unwind(move || {
        let p = CscMatrix::<f64>::zeros((n, n));
        let a = CscMatrix::new(m, n, colptr, rowval, nzval);
        let set = DefaultSettingsBuilder::default()
            .verbose(verbose)
            .max_iter(max_iter)
            .tol_feas(tol_feas)
            .tol_gap_abs(tol_gap_abs)
            .tol_gap_rel(tol_gap_rel)
            .reduced_tol_feas(tol_reduced)
            .reduced_tol_gap_abs(tol_reduced)
            .reduced_tol_gap_rel(tol_reduced)
            .presolve_enable(false)
            .chordal_decomposition_enable(chordal)
            .build()
            .ok()?;
        let mut solver = DefaultSolver::new(&p, &qv, &a, &bv, &cones, set).ok()?;
        solver.solve();
        Some((solver.solution.x.clone(), solver.solution.status, solver.solution.iterations,
              solver.solution.obj_val, solver.solution.solve_time, solver.solution.r_prim, solver.solution.r_dual))
    });

    match result {
        Ok(Some((x, status, iters, obj, time, rp, rd))) => {
            let out = slice::from_raw_parts_mut(x_out, n);
            out.copy_from_slice(&x[..n]);
            let inf = &mut *info;
            inf.status = map_status(status);
            inf.iterations = iters;
            inf.obj_val = obj;
            inf.solve_time = time;
            inf.r_prim = rp;
            inf.r_dual = rd;
            0
        }
        Ok(None) => -1,
        Err(_) => -2,
    }
}
