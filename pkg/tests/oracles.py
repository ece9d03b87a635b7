"""Independent reference computations used by the tests.

Each oracle works from the defining formula with plain grids or explicit
matrix inverses, never from the library's own solvers.
"""

import itertools

import numpy as np


def brute_force_w1(P, Q):
    """Minimum mean transport cost over all permutations."""
    m = len(P)
    return min(np.mean([np.linalg.norm(P[i] - Q[pi[i]]) for i in range(m)])
               for pi in itertools.permutations(range(m)))


def inner_objective(A, Sigma, rho, xi):
    """``xi (rho^2 - tr S) + xi^2 tr((xi I - M^T M)^{-1} S)`` by explicit inverses."""
    A = np.atleast_2d(A)
    M = np.hstack([A, -np.eye(A.shape[0])])
    K = M.T @ M
    p = K.shape[0]
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    inv = np.linalg.inv(xi[:, None, None] * np.eye(p) - K)
    tr = np.einsum("kij,ji->k", inv, Sigma)
    return xi * (rho ** 2 - np.trace(Sigma)) + xi ** 2 * tr


def grid_inner(A, Sigma, rho, n_coarse=4000, n_fine=4001):
    """Grid minimum of the inner objective: log grid above the floor, then a
    linear grid between the neighbours of the best coarse point."""
    A = np.atleast_2d(A)
    M = np.hstack([A, -np.eye(A.shape[0])])
    floor = float(np.linalg.eigvalsh(M.T @ M).max())
    s = max(1.0, floor)
    t = np.logspace(-9, 7, n_coarse) * s
    vals = inner_objective(A, Sigma, rho, floor + t)
    i = int(np.argmin(vals))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, n_coarse - 1)]
    tf = np.linspace(lo, hi, n_fine)
    fine = inner_objective(A, Sigma, rho, floor + tf)
    j = int(np.argmin(fine))
    return float(fine[j]), float(floor + tf[j])


def _inner_scalar_grid(a, S, rho, n_coarse=2000, n_fine=2001):
    """Inner grid minimum for ``p_x = p_y = 1``, vectorized over the array ``a``.

    With ``M = [a, -1]``, ``det(xi I - M^T M) = xi (xi - 1 - a^2)`` so the
    objective is ``xi (rho^2 - s11 - s22) + xi tr(adj S) / (xi - 1 - a^2)``.
    """
    s11, s12, s22 = S[0, 0], S[0, 1], S[1, 1]
    a = np.asarray(a, dtype=float)[:, None]
    floor = 1.0 + a * a

    def f(t):
        xi = floor + t
        adj_tr = (xi - 1.0) * s11 - 2.0 * a * s12 + (xi - a * a) * s22
        return xi * (rho ** 2 - s11 - s22) + xi * adj_tr / t

    t = np.logspace(-9, 7, n_coarse)[None, :] * floor
    vals = f(t)
    i = np.argmin(vals, axis=1)
    rows = np.arange(a.shape[0])
    lo = t[rows, np.maximum(i - 1, 0)]
    hi = t[rows, np.minimum(i + 1, n_coarse - 1)]
    u = np.linspace(0.0, 1.0, n_fine)[None, :]
    tf = lo[:, None] + (hi - lo)[:, None] * u
    return f(tf).min(axis=1)


def two_level_grid(S, rho, lo=-3.0, hi=3.0, step=1e-3, chunk=500):
    """Outer grid over ``A`` in ``[lo, hi]``, inner grid over ``xi``.

    The bias is at its optimum, so the objective reduces to ``f(A)``.
    Returns ``(best value, best A)``.
    """
    grid = lo + step * np.arange(int(round((hi - lo) / step)) + 1)
    best, best_a = np.inf, None
    for start in range(0, grid.size, chunk):
        a = grid[start:start + chunk]
        v = _inner_scalar_grid(a, S, rho)
        k = int(np.argmin(v))
        if v[k] < best:
            best, best_a = float(v[k]), float(a[k])
    return best, best_a


def _gelbrich_2x2(G11, G12, G22, S):
    """Squared equal-mean W2 distance between 2x2 covariances, closed form.

    For 2x2 PSD ``N``, ``tr sqrt(N) = sqrt(tr N + 2 sqrt(det N))``; the
    matrix ``S^1/2 G S^1/2`` has the trace and determinant of ``G S``.
    """
    tr_gs = G11 * S[0, 0] + 2 * G12 * S[0, 1] + G22 * S[1, 1]
    det = np.clip((G11 * G22 - G12 ** 2) * np.linalg.det(S), 0.0, None)
    cross = np.sqrt(np.clip(tr_gs + 2 * np.sqrt(det), 0.0, None))
    return G11 + G22 + np.trace(S) - 2 * cross


def worst_case_grid(a, S, rho, n=41, levels=14):
    """Supremum of ``E[(a x - y)^2]`` over centered Gaussians within W2 radius ``rho``.

    Coarse-to-fine search over Cholesky factors ``G = L L^T``.
    """
    R = np.sqrt(np.trace(S)) + rho
    center = np.array([R / 2, 0.0, R / 2])
    half = np.array([R / 2, R, R / 2])
    best = -np.inf
    m = np.array([a, -1.0])
    for _ in range(levels):
        axes = [np.linspace(c - h, c + h, n) for c, h in zip(center, half)]
        l11, l21, l22 = np.meshgrid(*axes, indexing="ij")
        l11, l22 = np.abs(l11), np.abs(l22)
        G11, G12, G22 = l11 ** 2, l11 * l21, l21 ** 2 + l22 ** 2
        feasible = _gelbrich_2x2(G11, G12, G22, S) <= rho ** 2
        val = m[0] ** 2 * G11 + 2 * m[0] * m[1] * G12 + m[1] ** 2 * G22
        val = np.where(feasible, val, -np.inf)
        k = np.unravel_index(np.argmax(val), val.shape)
        if val[k] > best:
            best = float(val[k])
            center = np.array([l11[k], l21[k], l22[k]])
        half = half / 4
    return best


def sdp_solve(summary, rho):
    """Solve the LMI-constrained program with cvxpy; returns the optimal value."""
    import cvxpy as cp

    from dprl.ambiguity import sqrtm_psd

    px, py, p = summary.p_x, summary.p_y, summary.p
    R = sqrtm_psd(summary.sigma_hat)
    A = cp.Variable((py, px))
    B = cp.Variable(py)
    xi = cp.Variable()
    Z = cp.Variable((p, p), symmetric=True)
    M = cp.hstack([A, -np.eye(py)])
    block = cp.bmat([
        [Z, xi * R, np.zeros((p, py))],
        [xi * R, xi * np.eye(p), M.T],
        [np.zeros((py, p)), M, np.eye(py)],
    ])
    sym = 0.5 * (block + block.T)
    obj = (xi * (rho ** 2 - np.trace(summary.sigma_hat)) + cp.trace(Z)
           + cp.sum_squares(M @ summary.mu_hat + B))
    prob = cp.Problem(cp.Minimize(obj), [sym >> 0])
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def random_summary(rng, p_x, p_y, n=None):
    """Summary of a random correlated sample."""
    from dprl.gauss_dro import GaussianSummary

    p = p_x + p_y
    n = n or 5 * p + 10
    Zs = rng.normal(size=(n, p)) @ rng.normal(size=(p, p)) + rng.normal(size=p)
    return GaussianSummary(Zs.mean(axis=0), np.cov(Zs, rowvar=False), p_x, p_y)
