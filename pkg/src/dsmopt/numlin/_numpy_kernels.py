"""Pure-numpy fallback kernels (same algorithms as the numba module).

The batch waterfilling pass is vectorised across tones: every Jacobi
rotation step is applied simultaneously to all tones still rotating, with
the identical rotation schedule and accumulation order as the scalar numba
loops.  Agreement between the backends is ~1e-12 relative (reduction order
inside complex ops can differ in the last ulp).
"""

import numpy as np

BACKEND = "numpy"

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60
PIVOT_FLOOR = 1e-300


def chol(A):
    """Lower Cholesky of Hermitian A; returns (L, status), status as numba twin."""
    n = A.shape[0]
    L = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        s = A[j, j].real - np.sum(np.abs(L[j, :j]) ** 2)
        if not (s > PIVOT_FLOOR):
            return L, j + 1
        piv = np.sqrt(s)
        L[j, j] = piv
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ np.conj(L[j, :j])) / piv
    return L, 0


def solve_lower(L, B):
    """Forward substitution for L X = B; returns (X, status)."""
    n = L.shape[0]
    X = np.zeros((n, B.shape[1]), dtype=np.complex128)
    for j in range(n):
        piv = L[j, j]
        if piv == 0:
            return X, j + 1
        X[j, :] = (B[j, :] - L[j, :j] @ X[:j, :]) / piv
    return X, 0


def _jacobi_core_batch(W, V):
    """In-place one-sided Jacobi over a (T, N, N) batch; returns converged (T,)."""
    T, n, _ = W.shape
    if n == 1:
        return np.ones(T, dtype=bool)
    active = np.ones(T, dtype=bool)
    for _sweep in range(JACOBI_MAX_SWEEPS):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        Wa = W[idx]
        Va = V[idx]
        rotated = np.zeros(idx.size, dtype=bool)
        for p in range(n - 1):
            for q in range(p + 1, n):
                wp = Wa[:, :, p]
                wq = Wa[:, :, q]
                app = np.zeros(idx.size)
                aqq = np.zeros(idx.size)
                apq = np.zeros(idx.size, dtype=np.complex128)
                for k in range(n):
                    app += wp[:, k].real ** 2 + wp[:, k].imag ** 2
                    aqq += wq[:, k].real ** 2 + wq[:, k].imag ** 2
                    apq += np.conj(wp[:, k]) * wq[:, k]
                m = np.abs(apq)
                rot = (m > 0.0) & (m > JACOBI_TOL * np.sqrt(app * aqq))
                if not rot.any():
                    continue
                r = np.nonzero(rot)[0]
                mm = m[r]
                phase = apq[r] / mm
                tau = (aqq[r] - app[r]) / (2.0 * mm)
                t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cc = c[:, None]
                sp = (s * phase)[:, None]
                spc = (s * np.conj(phase))[:, None]
                wpr = Wa[r, :, p]
                wqr = Wa[r, :, q]
                Wa[r, :, p] = cc * wpr - spc * wqr
                Wa[r, :, q] = sp * wpr + cc * wqr
                vpr = Va[r, :, p]
                vqr = Va[r, :, q]
                Va[r, :, p] = cc * vpr - spc * vqr
                Va[r, :, q] = sp * vpr + cc * vqr
                rotated[r] = True
        W[idx] = Wa
        V[idx] = Va
        active[idx] = rotated
    return ~active


def _column_norms(W):
    """Column 2-norms of a (T, N, N) batch, sequential accumulation over rows."""
    T, n, _ = W.shape
    d2 = np.zeros((T, n))
    for k in range(n):
        d2 += W[:, k, :].real ** 2 + W[:, k, :].imag ** 2
    return np.sqrt(d2)


def jacobi_svd(A, need_u):
    """Full SVD of one square matrix via the batch core (T = 1)."""
    n = A.shape[0]
    W = A[None, :, :].astype(np.complex128).copy()
    V = np.broadcast_to(np.eye(n, dtype=np.complex128), (1, n, n)).copy()
    converged = bool(_jacobi_core_batch(W, V)[0])
    W = W[0]
    V = V[0]
    d_raw = np.sqrt(np.sum(np.abs(W) ** 2, axis=0))
    order = np.argsort(-d_raw, kind="stable")
    d = d_raw[order]
    Vs = V[:, order]
    Ws = W[:, order]

    U = np.eye(n, dtype=np.complex128)
    if need_u:
        for j in range(n):
            if d[j] > 0.0:
                U[:, j] = Ws[:, j] / d[j]
            else:
                for cand in range(n):
                    u = np.zeros(n, dtype=np.complex128)
                    u[cand] = 1.0
                    for _pass in range(2):
                        for prev in range(j):
                            u -= (np.conj(U[:, prev]) @ u) * U[:, prev]
                    nrm = np.linalg.norm(u)
                    if nrm > 0.5:
                        U[:, j] = u / nrm
                        break

    for j in range(n):
        k = int(np.argmax(np.abs(Vs[:, j]) ** 2))
        v = Vs[k, j]
        mag = np.abs(v)
        if mag > 0.0:
            ph = np.conj(v) / mag
            Vs[:, j] = Vs[:, j] * ph
            if need_u:
                U[:, j] = U[:, j] * ph
    return U, d, Vs, converged


def _waterfill_batch(G, dead, lam_eff, gamma):
    """Vectorised scaled-SVD waterfilling; returns (phi, b, conv)."""
    T, n, _ = G.shape
    inv_sqrt = 1.0 / np.sqrt(lam_eff)  # (T, N)
    W = G * inv_sqrt[:, None, :]
    W[dead] = 0.0
    V = np.broadcast_to(np.eye(n, dtype=np.complex128), (T, n, n)).copy()
    conv = _jacobi_core_batch(W, V)
    d2 = _column_norms(W) ** 2  # (T, N)
    live = d2 > gamma
    s = np.where(live, 1.0 - gamma / np.where(live, d2, 1.0), 0.0)
    b = np.zeros(T)
    phi = np.zeros((T, n))
    for j in range(n):
        b += np.where(live[:, j], np.log(1.0 + s[:, j] * d2[:, j] / gamma), 0.0)
        phi += (np.abs(V[:, :, j]) ** 2) * s[:, j][:, None] * inv_sqrt**2
    phi[dead] = 0.0
    b[dead] = 0.0
    return phi, b, conv


def power_eval(G, dead, lam_eff, gamma):
    """Batch powers/rates; mirrors the numba signature (phi, b, n_nonconverged)."""
    phi, b, conv = _waterfill_batch(G, dead, lam_eff, gamma)
    bad = int(np.sum(~conv & ~dead))
    return phi, b, bad


def _tone_phi(G_t, lam_t, gamma):
    phi, _b, _conv = _waterfill_batch(
        G_t[None, :, :], np.zeros(1, dtype=bool), lam_t[None, :], gamma
    )
    return phi[0]


def mask_fixup(G, dead, lam, mu, mask, gamma, eps_mask, inner_cap, bisect_cap):
    """numpy twin of the per-tone mask price adjustment (tones looped in Python)."""
    T, n, _ = G.shape
    unresolved = 0
    for t in range(T):
        if dead[t]:
            continue
        finite = np.isfinite(mask[t])
        if not finite.any():
            continue
        ok = False
        for _round in range(inner_cap):
            lam_t = lam + mu[t]
            phi_row = _tone_phi(G[t], lam_t, gamma)
            rel = np.where(finite, (phi_row - mask[t]) / np.where(finite, mask[t], 1.0), -np.inf)
            worst = int(np.argmax(rel)) if np.max(rel) > eps_mask else -1
            slack = np.where(finite & (mu[t] > 0.0), -rel, -np.inf)
            relax = int(np.argmax(slack)) if np.max(slack) > eps_mask else -1
            if worst < 0 and relax < 0:
                ok = True
                break
            line = worst if worst >= 0 else relax
            cap = mask[t, line]
            lam_t = lam + mu[t]
            lam_t[line] = lam[line]
            if _tone_phi(G[t], lam_t, gamma)[line] <= cap * (1.0 + eps_mask):
                mu[t, line] = 0.0
                continue
            lo = 0.0
            hi = mu[t, line] + lam[line] + 1.0
            for _grow in range(200):
                lam_t[line] = lam[line] + hi
                if _tone_phi(G[t], lam_t, gamma)[line] <= cap:
                    break
                hi *= 2.0
            for _step in range(bisect_cap):
                mid = 0.5 * (lo + hi)
                lam_t[line] = lam[line] + mid
                p_mid = _tone_phi(G[t], lam_t, gamma)[line]
                if p_mid > cap:
                    lo = mid
                else:
                    hi = mid
                if cap * (1.0 - eps_mask) <= p_mid <= cap:
                    break
            mu[t, line] = hi
        if not ok:
            phi_row = _tone_phi(G[t], lam + mu[t], gamma)
            if np.any(finite & (phi_row > mask[t] * (1.0 + eps_mask))):
                unresolved += 1
    return unresolved


def chol_whiten(H, R):
    """Batch L_i = chol(R_i), G_i = L_i^{-1} H_i; returns (L, G, bad)."""
    T, n, _ = H.shape
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
