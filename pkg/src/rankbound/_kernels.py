"""Hot loops: objective evaluation and the Nelder-Mead driver.

Everything here is written so that numba can compile it unchanged; with
``RANKBOUND_DISABLE_NUMBA=1`` the same functions run as ordinary Python on
numpy arrays. Objectives are selected by an integer code rather than passed
as callables, which keeps the compiled signatures simple and cacheable.
"""

import math

import numpy as np

from ._accel import jit

# objective codes
OBJ_FEF = 0
OBJ_VN_BOUND = 1
OBJ_LIN_BOUND = 2
OBJ_CONC_STATE = 3
OBJ_FID_UPPER_R3 = 4

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@jit
def unitary_from_params(x, d):
    """Exponential chart ``U = exp(i H)`` with ``H`` built from ``d*d`` reals.

    For ``d == 2`` the four parameters are ``(a0, a1, a2, a3)`` and
    ``U = exp(i a0) (cos|a| I + i sin|a| a_hat . sigma)``.
    """
    if d == 2:
        a1 = x[1]
        a2 = x[2]
        a3 = x[3]
        n = math.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
        c = math.cos(n)
        s = math.sin(n) / n if n > 1e-12 else 1.0 - n * n / 6.0
        ph = complex(math.cos(x[0]), math.sin(x[0]))
        u = np.empty((2, 2), dtype=np.complex128)
        u[0, 0] = ph * complex(c, s * a3)
        u[0, 1] = ph * (1j * s * complex(a1, -a2))
        u[1, 0] = ph * (1j * s * complex(a1, a2))
        u[1, 1] = ph * complex(c, -s * a3)
        return u
    h = np.zeros((d, d), dtype=np.complex128)
    k = d
    for i in range(d):
        h[i, i] = x[i]
        for j in range(i + 1, d):
            h[i, j] = complex(x[k], x[k + 1])
            h[j, i] = complex(x[k], -x[k + 1])
            k += 2
    w, v = np.linalg.eigh(h)
    phase = np.exp(1j * w)
    return (v * phase) @ v.conj().T


@jit
def fef_value(x, rho, d):
    """``<psi|rho|psi>`` for ``|psi> = (I (x) U)|phi+_d>``."""
    u = unitary_from_params(x, d)
    psi = np.empty(d * d, dtype=np.complex128)
    scale = 1.0 / math.sqrt(d)
    for i in range(d):
        for j in range(d):
            psi[i * d + j] = u[j, i] * scale
    acc = 0.0
    for a in range(d * d):
        row = 0j
        for b in range(d * d):
            row += rho[a, b] * psi[b]
        acc += (psi[a].conjugate() * row).real
    return acc


@jit
def _magic():
    e = np.zeros((4, 4), dtype=np.complex128)
    s = _INV_SQRT2
    # columns: phi+, i phi-, i psi+, psi-
    e[0, 0] = s
    e[3, 0] = s
    e[0, 1] = 1j * s
    e[3, 1] = -1j * s
    e[1, 2] = 1j * s
    e[2, 2] = 1j * s
    e[1, 3] = s
    e[2, 3] = -s
    return e


@jit
def _spin_flip():
    y = np.zeros((4, 4), dtype=np.complex128)
    y[0, 3] = -1.0
    y[1, 2] = 1.0
    y[2, 1] = 1.0
    y[3, 0] = -1.0
    return y


@jit
def factor_measures(a):
    """Measures of ``rho = A A^dagger / Tr`` for a ``4 x r`` factor ``A``.

    Returns ``(S, S_L, f, C, cmax)``. Concurrence comes from the singular
    values of ``A^dagger Y A*``, which avoids square roots of near-zero
    eigenvalues.
    """
    tr = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            tr += a[i, j].real ** 2 + a[i, j].imag ** 2
    b = a / math.sqrt(tr)
    rho = b @ b.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    lam = np.linalg.eigvalsh(rho)[::-1]
    cutoff = 1e-10 * lam[0]
    s_vn = 0.0
    purity = 0.0
    for k in range(4):
        v = lam[k]
        if v <= cutoff:
            lam[k] = 0.0
        else:
            if v > 1.0:
                v = 1.0
            s_vn -= v * math.log(v)
    for i in range(4):
        for j in range(4):
            purity += rho[i, j].real ** 2 + rho[i, j].imag ** 2
    s_lin = 4.0 / 3.0 * (1.0 - purity)
    e = _magic()
    m = e.conj().T @ rho @ e
    f = np.linalg.eigvalsh(np.ascontiguousarray(m.real))[-1]
    tau = b.conj().T @ _spin_flip() @ b.conj()
    sv = np.linalg.svd(tau)[1]
    c = sv[0]
    for k in range(1, sv.size):
        c -= sv[k]
    if c < 0.0:
        c = 0.0
    cm = lam[0] - lam[2] - 2.0 * math.sqrt(lam[1] * lam[3])
    if cm < 0.0:
        cm = 0.0
    return s_vn, s_lin, f, c, cm


@jit
def claim_margin(code, x, r, bound):
    """Raw violation margin of a claim; positive means the claim fails."""
    half = x.size // 2
    a = np.empty((4, r), dtype=np.complex128)
    for i in range(4):
        for j in range(r):
            a[i, j] = complex(x[i * r + j], x[half + i * r + j])
    s_vn, s_lin, f, c, cm = factor_measures(a)
    if code == OBJ_VN_BOUND:
        return min(s_vn - bound, f - 0.5)
    if code == OBJ_LIN_BOUND:
        return min(s_lin - bound, f - 0.5)
    if code == OBJ_CONC_STATE:
        return min(f - 0.5, bound - c)
    fid = (2.0 * f + 1.0) / 3.0
    return fid - (5.0 + 4.0 * c) / 9.0


@jit
def objective(code, x, rho, d, r, bound):
    if code == OBJ_FEF:
        return fef_value(x, rho, d)
    return claim_margin(code, x, r, bound)


@jit
def nelder_mead(code, x0, step, rho, d, r, bound, xtol, max_evals):
    """Maximize ``objective(code, ...)`` from ``x0``.

    Standard reflection/expansion/contraction/shrink coefficients
    (1, 2, 1/2, 1/2). Stops when every vertex lies within ``xtol`` (max-norm)
    of the best one, or after ``max_evals`` evaluations.
    Returns ``(x_best, f_best, evaluations)``.
    """
    n = x0.size
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    for i in range(n + 1):
        sim[i] = x0
        if i > 0:
            sim[i, i - 1] += step
        fs[i] = -objective(code, sim[i], rho, d, r, bound)
    nev = n + 1
    while nev < max_evals:
        order = np.argsort(fs, kind="mergesort")
        sim = sim[order]
        fs = fs[order]
        size = 0.0
        for i in range(1, n + 1):
            for j in range(n):
                dist = abs(sim[i, j] - sim[0, j])
                if dist > size:
                    size = dist
        if size <= xtol:
            break
        cen = np.zeros(n)
        for i in range(n):
            cen += sim[i]
        cen /= n
        worst = sim[n]
        xr = 2.0 * cen - worst
        fr = -objective(code, xr, rho, d, r, bound)
        nev += 1
        if fr < fs[0]:
            xe = 3.0 * cen - 2.0 * worst
            fe = -objective(code, xe, rho, d, r, bound)
            nev += 1
            if fe < fr:
                sim[n] = xe
                fs[n] = fe
            else:
                sim[n] = xr
                fs[n] = fr
            continue
        if fr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fr
            continue
        if fr < fs[n]:
            xc = cen + 0.5 * (xr - cen)
            fc = -objective(code, xc, rho, d, r, bound)
            nev += 1
            if fc <= fr:
                sim[n] = xc
                fs[n] = fc
                continue
        else:
            xc = cen + 0.5 * (worst - cen)
            fc = -objective(code, xc, rho, d, r, bound)
            nev += 1
            if fc < fs[n]:
                sim[n] = xc
                fs[n] = fc
                continue
        for i in range(1, n + 1):
            sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
            fs[i] = -objective(code, sim[i], rho, d, r, bound)
        nev += n
    best = 0
    for i in range(1, n + 1):
        if fs[i] < fs[best]:
            best = i
    return sim[best].copy(), -fs[best], nev


@jit
def multistart(code, starts, step, rho, d, r, bound, xtol, max_evals):
    """Run ``nelder_mead`` from each row of ``starts``; per-start results."""
    m = starts.shape[0]
    vals = np.empty(m)
    xs = np.empty_like(starts)
    evals = np.empty(m, dtype=np.int64)
    for k in range(m):
        xb, fb, ne = nelder_mead(code, starts[k].copy(), step, rho, d, r, bound, xtol, max_evals)
        xs[k] = xb
        vals[k] = fb
        evals[k] = ne
    return xs, vals, evals
