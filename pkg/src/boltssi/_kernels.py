"""Compiled per-pair kernels shared by the public API and the sweep.

Everything here is ``nogil`` so the sweep can fan chunks out to a thread
pool.  Tables are float64 ``(I, J, K)`` arrays; log-likelihood kernels
follow ``sum n log mu - sum mu`` with ``0 log 0 = 0``.
"""

import math

import numpy as np
from numba import njit, types
from numba.extending import intrinsic

_JIT = dict(nogil=True, cache=True, fastmath=False)

# status codes stored per pair in sweep output
SCORED = 0
PRUNED = 1
SKIP_DEGENERATE = 2
SKIP_COLLINEAR = 3


@intrinsic
def _ctpop_u64(typingctx, x):
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctpop(args[0])

    return sig, codegen


@njit(**_JIT)
def popcount_and(words, ra, rb, start, stop):
    s = 0
    for w in range(start, stop):
        s += _ctpop_u64(words[ra, w] & words[rb, w])
    return s


@njit(**_JIT)
def popcount_row(words, ra, start, stop):
    s = 0
    for w in range(start, stop):
        s += _ctpop_u64(words[ra, w])
    return s


@njit(**_JIT)
def fill_table(words, off_i, li, off_j, lj, word_off, m, out):
    """Joint counts of (level of i, level of j, response class)."""
    for c in range(m):
        w0 = word_off[c]
        w1 = word_off[c + 1]
        for a in range(li):
            for b in range(lj):
                out[a, b, c] = popcount_and(words, off_i + a, off_j + b, w0, w1)


# ---------------------------------------------------------------------------
# log-linear pieces
# ---------------------------------------------------------------------------


@njit(**_JIT)
def loglik_kernel(n, mu):
    s = 0.0
    for a in range(n.shape[0]):
        for b in range(n.shape[1]):
            for c in range(n.shape[2]):
                v = n[a, b, c]
                u = mu[a, b, c]
                if v > 0.0:
                    s += v * math.log(u)
                s -= u
    return s


@njit(**_JIT)
def saturated_kernel(n):
    s = 0.0
    for a in range(n.shape[0]):
        for b in range(n.shape[1]):
            for c in range(n.shape[2]):
                v = n[a, b, c]
                if v > 0.0:
                    s += v * math.log(v) - v
    return s


@njit(**_JIT)
def effective_df(n):
    I, J, K = n.shape
    ei = 0
    for a in range(I):
        t = 0.0
        for b in range(J):
            for c in range(K):
                t += n[a, b, c]
        if t > 0.0:
            ei += 1
    ej = 0
    for b in range(J):
        t = 0.0
        for a in range(I):
            for c in range(K):
                t += n[a, b, c]
        if t > 0.0:
            ej += 1
    ek = 0
    for c in range(K):
        t = 0.0
        for a in range(I):
            for b in range(J):
                t += n[a, b, c]
        if t > 0.0:
            ek += 1
    return (ei - 1) * (ej - 1) * (ek - 1)


@njit(**_JIT)
def ipf(n, tol, max_cycles, mu, m_ab, m_ac, m_bc):
    """Fit the no-three-way-interaction model by proportional fitting.

    ``mu`` is overwritten with the fit; ``m_ab``, ``m_ac``, ``m_bc`` are
    scratch of shapes (I, J), (I, K), (J, K).  Returns
    ``(cycles, max_margin_discrepancy)``.
    """
    I, J, K = n.shape
    total = 0.0
    for a in range(I):
        for b in range(J):
            for c in range(K):
                total += n[a, b, c]
    start = total / (I * J * K)
    for a in range(I):
        for b in range(J):
            for c in range(K):
                mu[a, b, c] = start
    return ipf_from(n, tol, max_cycles, mu, m_ab, m_ac, m_bc)


@njit(**_JIT)
def ipf_from(n, tol, max_cycles, mu, m_ab, m_ac, m_bc):
    """Proportional fitting starting from the positive table in ``mu``."""
    I, J, K = n.shape
    disc = math.inf
    cycles = 0
    while cycles < max_cycles:
        cycles += 1
        # step 1: match n_ab+
        for a in range(I):
            for b in range(J):
                fit = 0.0
                obs = 0.0
                for c in range(K):
                    fit += mu[a, b, c]
                    obs += n[a, b, c]
                r = obs / fit if fit > 0.0 else 0.0
                for c in range(K):
                    mu[a, b, c] *= r
        # step 2: match n_a+c
        for a in range(I):
            for c in range(K):
                fit = 0.0
                obs = 0.0
                for b in range(J):
                    fit += mu[a, b, c]
                    obs += n[a, b, c]
                r = obs / fit if fit > 0.0 else 0.0
                for b in range(J):
                    mu[a, b, c] *= r
        # step 3: match n_+bc
        for b in range(J):
            for c in range(K):
                fit = 0.0
                obs = 0.0
                for a in range(I):
                    fit += mu[a, b, c]
                    obs += n[a, b, c]
                r = obs / fit if fit > 0.0 else 0.0
                for a in range(I):
                    mu[a, b, c] *= r
        # discrepancy over all three two-way margins
        for a in range(I):
            for b in range(J):
                m_ab[a, b] = 0.0
            for c in range(K):
                m_ac[a, c] = 0.0
        for b in range(J):
            for c in range(K):
                m_bc[b, c] = 0.0
        for a in range(I):
            for b in range(J):
                for c in range(K):
                    d = mu[a, b, c] - n[a, b, c]
                    m_ab[a, b] += d
                    m_ac[a, c] += d
                    m_bc[b, c] += d
        disc = 0.0
        for a in range(I):
            for b in range(J):
                disc = max(disc, abs(m_ab[a, b]))
            for c in range(K):
                disc = max(disc, abs(m_ac[a, c]))
        for b in range(J):
            for c in range(K):
                disc = max(disc, abs(m_bc[b, c]))
        if disc <= tol:
            break
    return cycles, disc


@njit(**_JIT)
def ksa_fit(n, mu, m_ab, m_ac, m_bc, m_a, m_b, m_c):
    """Kirkwood superposition estimate, normalized to the table total."""
    I, J, K = n.shape
    for a in range(I):
        m_a[a] = 0.0
        for b in range(J):
            m_ab[a, b] = 0.0
        for c in range(K):
            m_ac[a, c] = 0.0
    for b in range(J):
        m_b[b] = 0.0
        for c in range(K):
            m_bc[b, c] = 0.0
    for c in range(K):
        m_c[c] = 0.0
    total = 0.0
    for a in range(I):
        for b in range(J):
            for c in range(K):
                v = n[a, b, c]
                m_ab[a, b] += v
                m_ac[a, c] += v
                m_bc[b, c] += v
                m_a[a] += v
                m_b[b] += v
                m_c[c] += v
                total += v
    eta = 0.0
    for a in range(I):
        for b in range(J):
            for c in range(K):
                den = m_a[a] * m_b[b] * m_c[c]
                if den > 0.0:
                    v = m_ab[a, b] * m_ac[a, c] * m_bc[b, c] / den
                else:
                    v = 0.0
                mu[a, b, c] = v
                eta += v
    if eta > 0.0:
        s = total / eta
        for a in range(I):
            for b in range(J):
                for c in range(K):
                    mu[a, b, c] *= s


# ---------------------------------------------------------------------------
# marginal GLM pieces
# ---------------------------------------------------------------------------


@njit(**_JIT)
def cholesky_solve(A, rhs, k, L, out):
    """Solve the leading k x k SPD system; False if numerically singular."""
    for r in range(k):
        for c in range(r + 1):
            s = A[r, c]
            for t in range(c):
                s -= L[r, t] * L[c, t]
            if r == c:
                if s <= 1e-12 * max(A[r, r], 1e-300):
                    return False
                L[r, r] = math.sqrt(s)
            else:
                L[r, c] = s / L[c, c]
    for r in range(k):
        s = rhs[r]
        for t in range(r):
            s -= L[r, t] * out[t]
        out[r] = s / L[r, r]
    for r in range(k - 1, -1, -1):
        s = out[r]
        for t in range(r + 1, k):
            s -= L[t, r] * out[t]
        out[r] = s / L[r, r]
    return True


@njit(**_JIT)
def gaussian_increment(xi, xj, y, s_i, s_ii, s_iy, s_j, s_jj, s_jy, s_y, G, rhs, L, b3, g):
    """Per-sample drop in the gaussian kernel from adding ``xi*xj``.

    Equals ``(RSS3 - RSS4) / (2 n)``, computed through the partial
    regression of the product column on ``(1, xi, xj)``.  Returns
    ``(increment, ok)``; ``ok`` is False for a singular design.
    """
    n = xi.shape[0]
    s_ij = 0.0
    s_iij = 0.0
    s_ijj = 0.0
    s_zz = 0.0
    s_zy = 0.0
    for k in range(n):
        a = xi[k]
        b = xj[k]
        z = a * b
        s_ij += z
        s_iij += a * z
        s_ijj += z * b
        s_zz += z * z
        s_zy += z * y[k]
    G[0, 0] = n
    G[0, 1] = s_i
    G[0, 2] = s_j
    G[1, 0] = s_i
    G[1, 1] = s_ii
    G[1, 2] = s_ij
    G[2, 0] = s_j
    G[2, 1] = s_ij
    G[2, 2] = s_jj
    rhs[0] = s_y
    rhs[1] = s_iy
    rhs[2] = s_jy
    if not cholesky_solve(G, rhs, 3, L, b3):
        return 0.0, False
    # product-column cross moments with (1, xi, xj)
    rhs[0] = s_ij
    rhs[1] = s_iij
    rhs[2] = s_ijj
    ok = cholesky_solve(G, rhs, 3, L, g)
    num = s_zy - (b3[0] * s_ij + b3[1] * s_iij + b3[2] * s_ijj)
    den = s_zz - (g[0] * s_ij + g[1] * s_iij + g[2] * s_ijj)
    if not ok or den <= 1e-10 * s_zz:
        return 0.0, False
    return num * num / den / (2.0 * n), True


@njit(**_JIT)
def _logistic_nll(X, y, beta, k, eta):
    n = X.shape[0]
    s = 0.0
    for r in range(n):
        t = 0.0
        for c in range(k):
            t += X[r, c] * beta[c]
        eta[r] = t
        # log(1 + e^t) - t y, overflow-safe
        if t > 0.0:
            s += t + math.log1p(math.exp(-t)) - t * y[r]
        else:
            s += math.log1p(math.exp(t)) - t * y[r]
    return s / n


@njit(**_JIT)
def irls_logistic(X, y, k, beta, max_iter, beta_cap, eta, H, grad, L, step, trial):
    """Newton/IRLS on the canonical logistic likelihood.

    Uses the first ``k`` columns of ``X``; ``beta`` holds the warm start
    and receives the estimate.  Returns ``(nll, iterations, status)``
    where status is 0 converged, 1 iteration cap, 2 coefficient cap
    (separation), 3 singular information matrix.
    """
    n = X.shape[0]
    nll = _logistic_nll(X, y, beta, k, eta)
    it = 0
    while it < max_iter:
        it += 1
        for a in range(k):
            grad[a] = 0.0
            for b in range(k):
                H[a, b] = 0.0
        for r in range(n):
            t = eta[r]
            if t >= 0.0:
                e = math.exp(-t)
                mu = 1.0 / (1.0 + e)
            else:
                e = math.exp(t)
                mu = e / (1.0 + e)
            w = mu * (1.0 - mu)
            res = mu - y[r]
            for a in range(k):
                xa = X[r, a]
                grad[a] += xa * res
                wa = w * xa
                for b in range(a + 1):
                    H[a, b] += wa * X[r, b]
        gnorm = 0.0
        for a in range(k):
            grad[a] /= n
            gnorm = max(gnorm, abs(grad[a]))
            for b in range(a + 1):
                H[a, b] /= n
                H[b, a] = H[a, b]
        if gnorm <= 1e-10:
            return nll, it - 1, 0
        if not cholesky_solve(H, grad, k, L, step):
            return nll, it, 3
        # step-halving on likelihood increase
        scale = 1.0
        new = nll
        for _ in range(40):
            for a in range(k):
                trial[a] = beta[a] - scale * step[a]
            new = _logistic_nll(X, y, trial, k, eta)
            if new <= nll + 1e-14 * max(1.0, abs(nll)):
                break
            scale *= 0.5
        big = 0.0
        for a in range(k):
            big = max(big, abs(trial[a]))
        if big > beta_cap:
            # shrink the accepted step onto the coefficient cap
            lo = 0.0
            hi = 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                big = 0.0
                for a in range(k):
                    big = max(big, abs(beta[a] + mid * (trial[a] - beta[a])))
                if big > beta_cap:
                    hi = mid
                else:
                    lo = mid
            for a in range(k):
                beta[a] = beta[a] + lo * (trial[a] - beta[a])
            nll = _logistic_nll(X, y, beta, k, eta)
            return nll, it, 2
        dmax = 0.0
        for a in range(k):
            dmax = max(dmax, abs(trial[a] - beta[a]))
            beta[a] = trial[a]
        nll = new
        if dmax <= 1e-8:
            return nll, it, 0
    return nll, it, 1


# ---------------------------------------------------------------------------
# sweep chunks: each call handles pairs[start:stop] and writes only there
# ---------------------------------------------------------------------------


@njit(**_JIT)
def bolt_chunk(words, row_offset, arities, word_offset, m, ii, jj, start, stop,
               with_ksa, gamma_by_df, tol, max_cycles, pseudo, debug,
               score, df_out, ksa_out, status, conv, pruned_stat):
    lmax = 0
    for k in range(arities.shape[0]):
        lmax = max(lmax, arities[k])
    buf = np.zeros((lmax, lmax, m))
    mu_buf = np.empty((lmax, lmax, m))
    ab = np.empty((lmax, lmax))
    ac = np.empty((lmax, m))
    bc = np.empty((lmax, m))
    va = np.empty(lmax)
    vb = np.empty(lmax)
    vc = np.empty(m)
    for t in range(start, stop):
        i = ii[t]
        j = jj[t]
        li = arities[i]
        lj = arities[j]
        if li < 2 or lj < 2:
            status[t] = SKIP_DEGENERATE
            score[t] = np.nan
            continue
        n = buf[:li, :lj, :]
        mu = mu_buf[:li, :lj, :]
        fill_table(words, row_offset[i], li, row_offset[j], lj, word_offset, m, n)
        if pseudo != 0.0:
            for a in range(li):
                for b in range(lj):
                    for c in range(m):
                        n[a, b, c] += pseudo
        d = effective_df(n)
        df_out[t] = d
        sat = saturated_kernel(n)
        if with_ksa:
            ksa_fit(n, mu, ab[:li, :lj], ac[:li, :], bc[:lj, :], va[:li], vb[:lj], vc)
            kb = sat - loglik_kernel(n, mu)
            if kb < 0.0:
                kb = 0.0
            ksa_out[t] = kb
            if 2.0 * kb < gamma_by_df[d]:
                status[t] = PRUNED
                score[t] = np.nan
                if debug:
                    cyc, disc = ipf(n, tol, max_cycles, mu, ab[:li, :lj], ac[:li, :], bc[:lj, :])
                    inc = sat - loglik_kernel(n, mu)
                    pruned_stat[t] = 2.0 * max(inc, 0.0)
                continue
        cyc, disc = ipf(n, tol, max_cycles, mu, ab[:li, :lj], ac[:li, :], bc[:lj, :])
        inc = sat - loglik_kernel(n, mu)
        score[t] = inc if inc > 0.0 else 0.0
        conv[t] = disc <= tol
        status[t] = SCORED


@njit(**_JIT)
def ssi_gaussian_chunk(xt, y, ii, jj, start, stop, score, status):
    p = xt.shape[0]
    n = xt.shape[1]
    s1 = np.zeros(p)
    s2 = np.zeros(p)
    sy = np.zeros(p)
    for k in range(p):
        for r in range(n):
            v = xt[k, r]
            s1[k] += v
            s2[k] += v * v
            sy[k] += v * y[r]
    s_y = 0.0
    for r in range(n):
        s_y += y[r]
    G = np.empty((4, 4))
    L = np.empty((4, 4))
    rhs = np.empty(4)
    b3 = np.empty(4)
    g = np.empty(4)
    for t in range(start, stop):
        i = ii[t]
        j = jj[t]
        inc, ok = gaussian_increment(xt[i], xt[j], y, s1[i], s2[i], sy[i], s1[j], s2[j], sy[j],
                                     s_y, G, rhs, L, b3, g)
        if ok:
            score[t] = inc
            status[t] = SCORED
        else:
            score[t] = np.nan
            status[t] = SKIP_COLLINEAR


@njit(**_JIT)
def ssi_logistic_chunk(xt, y, start_beta0, ii, jj, start, stop, max_iter, beta_cap,
                       score, status, conv):
    n = xt.shape[1]
    X = np.empty((n, 4))
    eta = np.empty(n)
    H = np.empty((4, 4))
    grad = np.empty(4)
    L = np.empty((4, 4))
    step = np.empty(4)
    trial = np.empty(4)
    beta = np.empty(4)
    for r in range(n):
        X[r, 0] = 1.0
    for t in range(start, stop):
        i = ii[t]
        j = jj[t]
        for r in range(n):
            a = xt[i, r]
            b = xt[j, r]
            X[r, 1] = a
            X[r, 2] = b
            X[r, 3] = a * b
        beta[0] = start_beta0
        beta[1] = 0.0
        beta[2] = 0.0
        beta[3] = 0.0
        nll3, it3, st3 = irls_logistic(X, y, 3, beta, max_iter, beta_cap, eta, H, grad, L, step, trial)
        if st3 == 3:
            score[t] = np.nan
            status[t] = SKIP_COLLINEAR
            continue
        beta[3] = 0.0
        nll4, it4, st4 = irls_logistic(X, y, 4, beta, max_iter, beta_cap, eta, H, grad, L, step, trial)
        if st4 == 3:
            score[t] = np.nan
            status[t] = SKIP_COLLINEAR
            continue
        inc = nll3 - nll4
        score[t] = inc if inc > 0.0 else 0.0
        status[t] = SCORED
        conv[t] = st3 == 0 and st4 == 0
