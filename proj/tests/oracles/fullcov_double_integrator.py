# Copyright 2026 The sqrtcs Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent full-covariance oracle for the 3D double integrator.

Solves min sum E[x'Qx + u'Ru] with P, U, Y variables in cvxpy and prints the
optimal cost per horizon. The values are frozen into test_fullcov.cpp.
"""
import cvxpy as cp
import numpy as np


def solve(N, T=3.0, q=0.05):
    dt = T / N
    I3 = np.eye(3)
    A = np.block([[I3, dt * I3], [np.zeros((3, 3)), I3]])
    B = np.vstack([0.5 * dt**2 * I3, dt * I3])
    G = np.sqrt(q * dt) * np.eye(6)
    Q = 0.1 * np.eye(6)
    R = np.eye(3)
    mu0 = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    muf = np.zeros(6)
    P0 = np.eye(6)
    Pf = 0.5 * np.eye(6)

    mu = cp.Variable((6, N + 1))
    v = cp.Variable((3, N))
    P = [cp.Variable((6, 6), symmetric=True) for _ in range(N + 1)]
    U = [cp.Variable((3, 6)) for _ in range(N)]
    Y = [cp.Variable((3, 3), symmetric=True) for _ in range(N)]
    cons = [mu[:, 0] == mu0, mu[:, N] == muf, P[0] == P0, Pf - P[N] >> 0]
    cost = 0
    for k in range(N):
        cons.append(mu[:, k + 1] == A @ mu[:, k] + B @ v[:, k])
        cons.append(P[k + 1] == A @ P[k] @ A.T + B @ U[k] @ A.T + A @ U[k].T @ B.T + B @ Y[k] @ B.T + G @ G.T)
        cons.append(cp.bmat([[Y[k], U[k]], [U[k].T, P[k]]]) >> 0)
        cost += cp.quad_form(mu[:, k], Q) + cp.quad_form(v[:, k], R) + cp.trace(Q @ P[k]) + cp.trace(R @ Y[k])
    prob = cp.Problem(cp.Minimize(cost), cons)
    prob.solve(solver=cp.CLARABEL, tol_feas=1e-10, tol_gap_abs=1e-10, tol_gap_rel=1e-10)
    return prob.status, prob.value


if __name__ == "__main__":
    for n in (10, 20, 40):
        status, value = solve(n)
        print(f"N={n} status={status} cost={value:.12f}")
