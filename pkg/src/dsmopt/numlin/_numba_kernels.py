"""numba-compiled kernels: Cholesky, triangular solve, one-sided Jacobi SVD,
and the batched per-tone waterfilling passes used by the multiplier searches.

All kernels are scalar loops over small matrices (N <= ~16) compiled with
``@njit(cache=True, nogil=True)``.  They return status codes instead of
raising; the wrappers in ``dsmopt.numlin`` translate codes to exceptions.

The pure-numpy twin of this module is ``dsmopt.numlin._numpy_kernels``; both
follow the same pivot/rotation schedule so results agree to ~1e-12.
"""

import numpy as np
from numba import njit

BACKEND = "numba"

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60
PIVOT_FLOOR = 1e-300


@njit(cache=True, nogil=True)
def chol(A):
    """Lower Cholesky factor of Hermitian A (lower triangle authoritative).

    Returns (L, status); status 0 on success, j+1 when pivot j fell below
    PIVOT_FLOOR (not positive definite).
    """
    n = A.shape[0]
    L = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        s = A[j, j].real
        for k in range(j):
            ljk = L[j, k]
            s -= ljk.real * ljk.real + ljk.imag * ljk.imag
        if not (s > PIVOT_FLOOR):
            return L, j + 1
        piv = np.sqrt(s)
        L[j, j] = piv
        for i in range(j + 1, n):
            acc = A[i, j]
            for k in range(j):
                acc -= L[i, k] * np.conj(L[j, k])
            L[i, j] = acc / piv
    return L, 0


@njit(cache=True, nogil=True)
def solve_lower(L, B):
    """Solve L X = B by forward substitution.

    Returns (X, status); status j+1 when diagonal entry j is exactly zero.
    """
    n = L.shape[0]
    m = B.shape[1]
    X = np.zeros((n, m), dtype=np.complex128)
    for j in range(n):
        piv = L[j, j]
        if piv == 0:
            return X, j + 1
        for c in range(m):
            acc = B[j, c]
            for k in range(j):
                acc -= L[j, k] * X[k, c]
            X[j, c] = acc / piv
    return X, 0


@njit(cache=True, nogil=True)
def _jacobi_core(W, V):
    """One-sided Jacobi on the columns of W, accumulating rotations into V.

    Sweeps until no column pair needs rotating or JACOBI_MAX_SWEEPS is hit.
    Returns 1 when converged, 0 otherwise.  After convergence the columns of
    W are orthogonal and W = A_input @ V.
    """
    n = W.shape[0]
    for _sweep in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = 0.0
                aqq = 0.0
                apq = 0.0 + 0.0j
                for k in range(n):
                    wp = W[k, p]
                    wq = W[k, q]
                    app += wp.real * wp.real + wp.imag * wp.imag
                    aqq += wq.real * wq.real + wq.imag * wq.imag
                    apq += np.conj(wp) * wq
                m = np.abs(apq)
                if m == 0.0 or m <= JACOBI_TOL * np.sqrt(app * aqq):
                    continue
                rotated = True
                phase = apq / m
                tau = (aqq - app) / (2.0 * m)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                spc = s * np.conj(phase)
                for k in range(n):
                    wp = W[k, p]
                    wq = W[k, q]
                    W[k, p] = c * wp - spc * wq
                    W[k, q] = sp * wp + c * wq
                for k in range(n):
                    vp = V[k, p]
                    vq = V[k, q]
                    V[k, p] = c * vp - spc * vq
                    V[k, q] = sp * vp + c * vq
        if not rotated:
            return 1
    return 0


@njit(cache=True, nogil=True)
def jacobi_svd(A, need_u):
    """Full SVD A = U diag(d) V^H of a square complex matrix.

    Singular values are sorted non-increasing (stable order for ties); each
    column of V is rotated so its largest-magnitude entry is real positive,
    with U adjusted by the same phase.  Zero-singular-value columns of U are
    completed to an orthonormal basis from canonical vectors.

    Returns (U, d, V, converged).  U is the identity-shaped placeholder when
    need_u is False.
    """
    n = A.shape[0]
    W = A.copy()
    V = np.eye(n, dtype=np.complex128)
    converged = _jacobi_core(W, V)

    d_raw = np.empty(n, dtype=np.float64)
    for j in range(n):
        acc = 0.0
        for k in range(n):
            w = W[k, j]
            acc += w.real * w.real + w.imag * w.imag
        d_raw[j] = np.sqrt(acc)

    # stable insertion sort, descending
    order = np.empty(n, dtype=np.int64)
    for j in range(n):
        order[j] = j
    for j in range(1, n):
        key = order[j]
        kd = d_raw[key]
        i = j - 1
        while i >= 0 and d_raw[order[i]] < kd:
            order[i + 1] = order[i]
            i -= 1
        order[i + 1] = key

    d = np.empty(n, dtype=np.float64)
    Vs = np.empty((n, n), dtype=np.complex128)
    Ws = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        src = order[j]
        d[j] = d_raw[src]
        for k in range(n):
            Vs[k, j] = V[k, src]
            Ws[k, j] = W[k, src]

    U = np.eye(n, dtype=np.complex128)
    if need_u:
        for j in range(n):
            if d[j] > 0.0:
                inv = 1.0 / d[j]
                for k in range(n):
                    U[k, j] = Ws[k, j] * inv
            else:
                # complete with canonical vectors, two-pass Gram-Schmidt
                done = False
                for cand in range(n):
                    for k in range(n):
                        U[k, j] = 0.0
                    U[cand, j] = 1.0
                    for _pass in range(2):
                        for prev in range(j):
                            dot = 0.0 + 0.0j
                            for k in range(n):
                                dot += np.conj(U[k, prev]) * U[k, j]
                            for k in range(n):
                                U[k, j] -= dot * U[k, prev]
                    nrm = 0.0
                    for k in range(n):
                        u = U[k, j]
                        nrm += u.real * u.real + u.imag * u.imag
                    nrm = np.sqrt(nrm)
                    if nrm > 0.5:
                        inv = 1.0 / nrm
                        for k in range(n):
                            U[k, j] = U[k, j] * inv
                        done = True
                        break
                if not done:
                    # cannot happen for j < n, keep canonical as last resort
                    U[j, j] = 1.0

    # phase convention: largest-|V| entry of each column real positive
    for j in range(n):
        best = 0
        bmag = -1.0
        for k in range(n):
            v = Vs[k, j]
            mag = v.real * v.real + v.imag * v.imag
            if mag > bmag:
                bmag = mag
                best = k
        v = Vs[best, j]
        mag = np.sqrt(bmag)
        if mag > 0.0:
            ph = np.conj(v) / mag
            for k in range(n):
                Vs[k, j] = Vs[k, j] * ph
            if need_u:
                for k in range(n):
                    U[k, j] = U[k, j] * ph
    return U, d, Vs, converged


@njit(cache=True, nogil=True)
def _tone_waterfill(G_t, inv_sqrt, gamma, phi_row):
    """Waterfill one tone at scaled channel G_t diag(inv_sqrt).

    Writes per-line powers into phi_row; returns (b_nats, converged_flag).
    phi_row[n] = (1/lam_n) * sum_j |V_nj|^2 * s_j with s_j = max(0, 1-gamma/d_j^2).
    """
    n = G_t.shape[0]
    W = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            W[i, j] = G_t[i, j] * inv_sqrt[j]
    V = np.eye(n, dtype=np.complex128)
    conv = _jacobi_core(W, V)
    b = 0.0
    for nn in range(n):
        phi_row[nn] = 0.0
    for j in range(n):
        d2 = 0.0
        for k in range(n):
            w = W[k, j]
            d2 += w.real * w.real + w.imag * w.imag
        if d2 > gamma:
            s = 1.0 - gamma / d2
            b += np.log(1.0 + s * d2 / gamma)
            for nn in range(n):
                v = V[nn, j]
                phi_row[nn] += (v.real * v.real + v.imag * v.imag) * s * (
                    inv_sqrt[nn] * inv_sqrt[nn]
                )
    return b, conv


@njit(cache=True, nogil=True)
def power_eval(G, dead, lam_eff, gamma):
    """Per-line powers and tone rates for every tone at multipliers lam_eff.

    G : (T, N, N) whitened channels L^-1 H, lam_eff : (T, N) diagonal of
    Lambda_i (> 0).  Dead tones get zero power and rate.
    Returns (phi (T, N), b (T,), n_nonconverged).
    """
    T = G.shape[0]
    n = G.shape[1]
    phi = np.zeros((T, n), dtype=np.float64)
    b = np.zeros(T, dtype=np.float64)
    bad = 0
    inv_sqrt = np.empty(n, dtype=np.float64)
    for t in range(T):
        if dead[t]:
            continue
        for nn in range(n):
            inv_sqrt[nn] = 1.0 / np.sqrt(lam_eff[t, nn])
        bt, conv = _tone_waterfill(G[t], inv_sqrt, gamma, phi[t])
        b[t] = bt
        if conv == 0:
            bad += 1
    return phi, b, bad


@njit(cache=True, nogil=True)
def _tone_phi_line(G_t, lam_t, gamma, line, scratch):
    """phi of a single line at per-tone multipliers lam_t (helper)."""
    n = G_t.shape[0]
    inv_sqrt = np.empty(n, dtype=np.float64)
    for nn in range(n):
        inv_sqrt[nn] = 1.0 / np.sqrt(lam_t[nn])
    _b, _conv = _tone_waterfill(G_t, inv_sqrt, gamma, scratch)
    return scratch[line]


@njit(cache=True, nogil=True)
def mask_fixup(G, dead, lam, mu, mask, gamma, eps_mask, inner_cap, bisect_cap):
    """Adjust per-tone mask prices mu so that phi_{n,i} <= mask_{n,i}.

    For each tone: repeatedly pick the worst violating line, bisect its mu
    to put phi on the mask, and drop prices whose mask went slack.  mu is
    updated in place; masks decouple per tone once lam is fixed.

    Returns the number of tones still violating after inner_cap rounds.
    """
    T = G.shape[0]
    n = G.shape[1]
    unresolved = 0
    lam_t = np.empty(n, dtype=np.float64)
    phi_row = np.empty(n, dtype=np.float64)
    inv_sqrt = np.empty(n, dtype=np.float64)
    for t in range(T):
        if dead[t]:
            continue
        finite_any = False
        for nn in range(n):
            if np.isfinite(mask[t, nn]):
                finite_any = True
        if not finite_any:
            continue
        ok = False
        for _round in range(inner_cap):
            for nn in range(n):
                lam_t[nn] = lam[nn] + mu[t, nn]
                inv_sqrt[nn] = 1.0 / np.sqrt(lam_t[nn])
            _b, _conv = _tone_waterfill(G[t], inv_sqrt, gamma, phi_row)
            # worst relative violation and worst slack price
            worst = -1
            worst_v = eps_mask
            relax = -1
            relax_v = eps_mask
            for nn in range(n):
                cap = mask[t, nn]
                if not np.isfinite(cap):
                    continue
                v = (phi_row[nn] - cap) / cap
                if v > worst_v:
                    worst_v = v
                    worst = nn
                if mu[t, nn] > 0.0 and -v > relax_v:
                    relax_v = -v
                    relax = nn
            if worst < 0 and relax < 0:
                ok = True
                break
            target_line = worst if worst >= 0 else relax
            cap = mask[t, target_line]
            # phi is non-increasing in mu[target]; bracket then bisect
            lo = 0.0
            lam_t[target_line] = lam[target_line]
            p_lo = _tone_phi_line(G[t], lam_t, gamma, target_line, phi_row)
            if p_lo <= cap * (1.0 + eps_mask):
                mu[t, target_line] = 0.0
                continue
            hi = mu[t, target_line] + lam[target_line] + 1.0
            for _grow in range(200):
                lam_t[target_line] = lam[target_line] + hi
                if _tone_phi_line(G[t], lam_t, gamma, target_line, phi_row) <= cap:
                    break
                hi *= 2.0
            for _step in range(bisect_cap):
                mid = 0.5 * (lo + hi)
                lam_t[target_line] = lam[target_line] + mid
                p_mid = _tone_phi_line(G[t], lam_t, gamma, target_line, phi_row)
                if p_mid > cap:
                    lo = mid
                else:
                    hi = mid
                if p_mid <= cap and p_mid >= cap * (1.0 - eps_mask):
                    break
            mu[t, target_line] = hi
        if not ok:
            # final check after cap
            for nn in range(n):
                lam_t[nn] = lam[nn] + mu[t, nn]
                inv_sqrt[nn] = 1.0 / np.sqrt(lam_t[nn])
            _b, _conv = _tone_waterfill(G[t], inv_sqrt, gamma, phi_row)
            viol = False
            for nn in range(n):
                cap = mask[t, nn]
                if np.isfinite(cap) and phi_row[nn] > cap * (1.0 + eps_mask):
                    viol = True
            if viol:
                unresolved += 1
    return unresolved


@njit(cache=True, nogil=True)
def chol_whiten(H, R):
    """Batch precompute: L_i = chol(R_i) and whitened channel G_i = L_i^{-1} H_i.

    Returns (L, G, bad) with bad = first failing tone index + 1 (0 when all
    tones factor).
    """
    T = H.shape[0]
    n = H.shape[1]
    L = np.zeros((T, n, n), dtype=np.complex128)
    G = np.zeros((T, n, n), dtype=np.complex128)
    for t in range(T):
        Lt, st = chol(R[t])
        if st != 0:
            return L, G, t + 1
        Gt, st2 = solve_lower(Lt, H[t])
        if st2 != 0:
            return L, G, t + 1
        L[t] = Lt
        G[t] = Gt
    return L, G, 0
