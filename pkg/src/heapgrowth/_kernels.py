"""Compiled inner loops for hard-rule replay.

Arrays are 0-based here; the public API speaks 1-based columns.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def replay_free(h, cols):
    n = h.shape[0]
    for c in cols:
        m = h[c]
        if c > 0 and h[c - 1] > m:
            m = h[c - 1]
        if c < n - 1 and h[c + 1] > m:
            m = h[c + 1]
        h[c] = m + 1


@numba.njit(cache=True)
def replay_periodic(h, cols):
    n = h.shape[0]
    for c in cols:
        m = h[c]
        left = h[(c - 1) % n]
        right = h[(c + 1) % n]
        if left > m:
            m = left
        if right > m:
            m = right
        h[c] = m + 1


@numba.njit(cache=True)
def replay_trace(h, cols, periodic, hmax_out, width2_out):
    """Replay while recording max height and spatial variance after each event."""
    n = h.shape[0]
    total = 0
    total2 = 0
    hmax = 0
    for i in range(n):
        total += h[i]
        total2 += h[i] * h[i]
        if h[i] > hmax:
            hmax = h[i]
    for k in range(cols.shape[0]):
        c = cols[k]
        m = h[c]
        if periodic:
            left = h[(c - 1) % n]
            right = h[(c + 1) % n]
            if left > m:
                m = left
            if right > m:
                m = right
        else:
            if c > 0 and h[c - 1] > m:
                m = h[c - 1]
            if c < n - 1 and h[c + 1] > m:
                m = h[c + 1]
        old = h[c]
        h[c] = m + 1
        total += h[c] - old
        total2 += h[c] * h[c] - old * old
        if h[c] > hmax:
            hmax = h[c]
        hmax_out[k] = hmax
        width2_out[k] = (n * total2 - total * total) / (n * n)


def replay(h: np.ndarray, cols: np.ndarray, periodic: bool) -> None:
    cols = np.ascontiguousarray(cols, dtype=np.int64)
    if periodic:
        replay_periodic(h, cols)
    else:
        replay_free(h, cols)


@numba.njit(cache=True)
def tropical_rows_batch(p, cols, periodic):
    """Left-multiply a batch of (max,+) matrices by generators, one per step.

    ``p`` has shape (batch, N, N); ``cols`` has shape (batch,), 0-based.
    Only row ``c`` of each product changes.
    """
    batch, n, _ = p.shape
    for b in range(batch):
        c = cols[b]
        for j in range(n):
            m = p[b, c, j]
            if periodic:
                left = p[b, (c - 1) % n, j]
                right = p[b, (c + 1) % n, j]
                if left > m:
                    m = left
                if right > m:
                    m = right
            else:
                if c > 0 and p[b, c - 1, j] > m:
                    m = p[b, c - 1, j]
                if c < n - 1 and p[b, c + 1, j] > m:
                    m = p[b, c + 1, j]
            p[b, c, j] = m + 1


@numba.njit(cache=True)
def graded_log_singular_values(scales, rows, tol, max_sweeps):
    """Log singular values of ``diag(exp(scales)) @ rows``.

    One-sided Jacobi on the columns of the transpose, keeping every column
    as ``exp(s_j) * c_j`` so nothing over- or underflows.  Rotation angles
    are expressed through ``t / rho`` with ``rho = exp(s_k - s_j) <= 1``.
    Returns (values, sweeps_used); sweeps_used > max_sweeps means no
    convergence.
    """
    n = rows.shape[0]
    m = rows.shape[1]
    cols = rows.copy()  # cols[j] is column j of rows.T
    s = scales.copy()
    for j in range(n):
        nrm = 0.0
        for k in range(m):
            nrm += cols[j, k] * cols[j, k]
        nrm = np.sqrt(nrm)
        if nrm == 0.0:
            s[j] = -np.inf
        else:
            for k in range(m):
                cols[j, k] /= nrm
            s[j] += np.log(nrm)
    sweep = 0
    while sweep < max_sweeps:
        sweep += 1
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                if s[p] == -np.inf or s[q] == -np.inf:
                    continue
                # order so that column a carries the larger scale
                if s[p] >= s[q]:
                    a, b = p, q
                else:
                    a, b = q, p
                A = 0.0
                B = 0.0
                G = 0.0
                for k in range(m):
                    A += cols[a, k] * cols[a, k]
                    B += cols[b, k] * cols[b, k]
                    G += cols[a, k] * cols[b, k]
                if abs(G) <= tol * np.sqrt(A * B):
                    continue
                rotated = True
                rho = np.exp(s[b] - s[a])
                z = (rho * rho * B - A) / (2.0 * G)
                sg = 1.0 if z >= 0.0 else -1.0
                that = sg / (abs(z) + np.sqrt(rho * rho + z * z))
                c = 1.0 / np.sqrt(1.0 + that * that * rho * rho)
                r2 = rho * rho
                for k in range(m):
                    ca = cols[a, k]
                    cb = cols[b, k]
                    cols[a, k] = c * (ca - that * r2 * cb)
                    cols[b, k] = c * (that * ca + cb)
                for j in (a, b):
                    nrm = 0.0
                    for k in range(m):
                        nrm += cols[j, k] * cols[j, k]
                    nrm = np.sqrt(nrm)
                    if nrm == 0.0:
                        s[j] = -np.inf
                    else:
                        for k in range(m):
                            cols[j, k] /= nrm
                        s[j] += np.log(nrm)
        if not rotated:
            return s, sweep
    return s, max_sweeps + 1


@numba.njit(cache=True)
def refactor(w, scales, rows):
    """Re-split ``w @ diag(exp(scales)) @ rows`` as ``q @ diag(exp(s')) @ rows'``.

    Gram-Schmidt with column pivoting on the columns of ``w diag(exp(s))``,
    carried out in log scale: projections never mix scales, so nothing
    overflows.  Pivoting keeps ``s'`` descending and the triangular factor
    bounded, which keeps ``rows'`` well conditioned.
    """
    n = w.shape[0]
    c = w.copy()
    logn = np.empty(n)
    for j in range(n):
        nrm = 0.0
        for i in range(n):
            nrm += c[i, j] * c[i, j]
        logn[j] = scales[j] + 0.5 * np.log(nrm)
    piv = np.arange(n)
    q = np.zeros((n, n))
    rt = np.zeros((n, n))
    new_scales = np.empty(n)
    for k in range(n):
        best = k
        for m in range(k + 1, n):
            if logn[piv[m]] > logn[piv[best]]:
                best = m
        tmp = piv[k]
        piv[k] = piv[best]
        piv[best] = tmp
        j = piv[k]
        nrm = 0.0
        for i in range(n):
            nrm += c[i, j] * c[i, j]
        nrm = np.sqrt(nrm)
        for i in range(n):
            q[i, k] = c[i, j] / nrm
        new_scales[k] = scales[j] + np.log(nrm)
        # rt is indexed by original column, since later swaps reorder piv
        rt[k, j] = 1.0
        for m in range(k + 1, n):
            l = piv[m]
            g = 0.0
            for _ in range(2):
                dot = 0.0
                for i in range(n):
                    dot += q[i, k] * c[i, l]
                for i in range(n):
                    c[i, l] -= dot * q[i, k]
                g += dot
            rt[k, l] = g * np.exp(scales[l] - new_scales[k])
            nl = 0.0
            for i in range(n):
                nl += c[i, l] * c[i, l]
            logn[l] = scales[l] + 0.5 * np.log(nl) if nl > 0.0 else -np.inf
    new_rows = np.zeros_like(rows)
    for k in range(n):
        for src in range(n):
            f = rt[k, src]
            if f != 0.0:
                for jj in range(n):
                    new_rows[k, jj] += f * rows[src, jj]
        big = 0.0
        for jj in range(n):
            if abs(new_rows[k, jj]) > big:
                big = abs(new_rows[k, jj])
        for jj in range(n):
            new_rows[k, jj] /= big
        new_scales[k] += np.log(big)
    return q, new_scales, new_rows


@numba.njit(cache=True)
def block_log_condition(b00, b01, b10, b11):
    f = b00 * b00 + b01 * b01 + b10 * b10 + b11 * b11
    return np.log(0.5 * (f + np.sqrt(max(f * f - 4.0, 0.0))))


@numba.njit(cache=True)
def log_top_singular(w, scales, rows):
    """ln of the largest singular value of w @ diag(exp(scales)) @ rows."""
    top = scales.max()
    n = rows.shape[0]
    scaled = np.empty_like(rows)
    for i in range(n):
        f = np.exp(scales[i] - top)
        for j in range(rows.shape[1]):
            scaled[i, j] = f * rows[i, j]
    _, sv, _ = np.linalg.svd(w @ scaled)
    return top + np.log(sv[0])


@numba.njit(cache=True)
def coupled_gamma_run(n_cols, cols, blocks, block_rows, checkpoints, every, log_cond_limit):
    """One coupled trial: heap on ``n_cols`` columns plus the block product.

    ``cols`` (0-based) drives the heap; ``block_rows`` (0-based top row of
    each 2x2 block) drives the product of dimension n_cols + 1.  Returns
    h_max and mu_max at each checkpoint.
    """
    dim = n_cols + 1
    h = np.zeros(n_cols, np.int64)
    hmax = 0
    w = np.eye(dim)
    scales = np.zeros(dim)
    rows = np.eye(dim)
    out_h = np.zeros(checkpoints.shape[0], np.int64)
    out_mu = np.zeros(checkpoints.shape[0])
    k = 0
    pending = 0
    cond = 0.0
    for t in range(cols.shape[0]):
        c = cols[t]
        m = h[c]
        if c > 0 and h[c - 1] > m:
            m = h[c - 1]
        if c < n_cols - 1 and h[c + 1] > m:
            m = h[c + 1]
        h[c] = m + 1
        if h[c] > hmax:
            hmax = h[c]
        i = block_rows[t]
        for j in range(dim):
            x = w[i, j]
            y = w[i + 1, j]
            w[i, j] = blocks[t, 0, 0] * x + blocks[t, 0, 1] * y
            w[i + 1, j] = blocks[t, 1, 0] * x + blocks[t, 1, 1] * y
        pending += 1
        cond += block_log_condition(blocks[t, 0, 0], blocks[t, 0, 1], blocks[t, 1, 0], blocks[t, 1, 1])
        if pending >= every or cond > log_cond_limit:
            w, scales, rows = refactor(w, scales, rows)
            pending = 0
            cond = 0.0
        while k < checkpoints.shape[0] and checkpoints[k] == t + 1:
            out_h[k] = hmax
            out_mu[k] = log_top_singular(w, scales, rows)
            k += 1
    return out_h, out_mu
