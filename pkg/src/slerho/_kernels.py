"""Compiled numerical cores.

Everything here is deterministic given an integer seed: each path derives a
counter-based RNG stream keyed by (seed, path index), so results do not
depend on thread scheduling or block splitting.
"""

import math

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GOLD = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_SEED_SALT = U64(0xA0761D6478BD642F)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def stream_state(seed, index):
    return _mix64(_mix64(U64(seed) + _SEED_SALT) + U64(index) * _GOLD)


@njit(cache=True, inline="always")
def _u01(state):
    state = state + _GOLD
    z = _mix64(state)
    return state, (float(z >> U64(11)) + 1.0) * _INV53


@njit(cache=True, inline="always")
def _norm(state, spare, has):
    # Box-Muller with one cached spare
    if has == 1:
        return state, spare, 0.0, 0
    state, u1 = _u01(state)
    state, u2 = _u01(state)
    r = math.sqrt(-2.0 * math.log(u1))
    a = _TWO_PI * u2
    return state, r * math.cos(a), r * math.sin(a), 1


@njit(cache=True)
def _gamma_ge1(state, shape):
    # Marsaglia-Tsang; valid for shape >= 1
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    spare = 0.0
    has = 0
    while True:
        state, x, spare, has = _norm(state, spare, has)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        state, u = _u01(state)
        if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
            return state, d * v


# ---------------------------------------------------------------------------
# Bessel process sampling: Euler-Maruyama on log X with adaptive substeps.
# A macro step dt is halved (locally) while X < REFINE_C * sqrt(h): the
# inverse-square integrand is the dominant error source near the origin.
# ---------------------------------------------------------------------------

REFINE_C = 10.0
# substeps shrink with the current value (h <= (x/REFINE_C)^2) down to this
# dyadic floor; below it the macro step finishes with one exact transition
_FLOOR_SHIFT = 2.0 ** -40


@njit(cache=True, inline="always")
def _poisson_small(state, lam):
    L = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        state, u = _u01(state)
        p *= u
        if p <= L:
            return state, k
        k += 1


@njit(cache=True, inline="always")
def _advance_interval(state, spare, has, x, interval, nu):
    """Advance one macro step of length `interval`, returning the new value and
    the trapezoid increments of int ds/X and int ds/X^2 over the substeps."""
    acc1 = 0.0
    acc2 = 0.0
    remaining = interval
    h_floor = interval * _FLOOR_SHIFT
    while remaining > 0.0:
        h = remaining
        lim = (x / REFINE_C) * (x / REFINE_C)
        if h > lim:
            if lim >= h_floor:
                h = lim
            else:
                # value negligibly small relative to the remaining interval:
                # finish with the exact squared-process transition
                state, kpois = _poisson_small(state, 0.5 * x * x / remaining)
                state, g = _gamma_ge1(state, 1.0 + nu + kpois)
                xn = math.sqrt(remaining * 2.0 * g)
                invx = 1.0 / x
                invn = 1.0 / xn
                acc1 += 0.5 * remaining * (invx + invn)
                acc2 += 0.5 * remaining * (invx * invx + invn * invn)
                x = xn
                break
        state, z, spare, has = _norm(state, spare, has)
        invx = 1.0 / x
        lnew = math.log(x) + nu * h * invx * invx + math.sqrt(h) * invx * z
        xn = math.exp(lnew)
        invn = 1.0 / xn
        acc1 += 0.5 * h * (invx + invn)
        acc2 += 0.5 * h * (invx * invx + invn * invn)
        x = xn
        remaining -= h
    return state, spare, has, x, acc1, acc2


@njit(cache=True, parallel=True)
def bessel_paths(nu, x0, n_steps, dt, seed, index0, n_paths):
    X = np.empty((n_paths, n_steps + 1))
    I1 = np.empty((n_paths, n_steps + 1))
    I2 = np.empty((n_paths, n_steps + 1))
    for i in prange(n_paths):
        state = stream_state(seed, index0 + i)
        spare = 0.0
        has = 0
        x = x0
        acc1 = 0.0
        acc2 = 0.0
        X[i, 0] = x0
        I1[i, 0] = 0.0
        I2[i, 0] = 0.0
        k0 = 1
        if x0 == 0.0:
            # exact first transition: X_dt^2/dt is chi-square with 2+2nu dof;
            # the inverse integrals diverge at a zero start, so accumulation
            # begins at the first grid time
            state, g = _gamma_ge1(state, 1.0 + nu)
            x = math.sqrt(dt * 2.0 * g)
            X[i, 1] = x
            I1[i, 1] = 0.0
            I2[i, 1] = 0.0
            k0 = 2
        for k in range(k0, n_steps + 1):
            state, spare, has, x, d1, d2 = _advance_interval(state, spare, has, x, dt, nu)
            acc1 += d1
            acc2 += d2
            X[i, k] = x
            I1[i, k] = acc1
            I2[i, k] = acc2
    return X, I1, I2


@njit(cache=True, parallel=True)
def bessel_summaries(nu, x0, n_steps, dt, seed, index0, n_paths):
    """Final value and accumulated integrals of 1/X and 1/X^2 per path."""
    xT = np.empty(n_paths)
    i1 = np.empty(n_paths)
    i2 = np.empty(n_paths)
    for i in prange(n_paths):
        state = stream_state(seed, index0 + i)
        spare = 0.0
        has = 0
        x = x0
        acc1 = 0.0
        acc2 = 0.0
        k0 = 0
        if x0 == 0.0:
            state, g = _gamma_ge1(state, 1.0 + nu)
            x = math.sqrt(dt * 2.0 * g)
            k0 = 1
        for k in range(k0, n_steps):
            state, spare, has, x, d1, d2 = _advance_interval(state, spare, has, x, dt, nu)
            acc1 += d1
            acc2 += d2
        xT[i] = x
        i1[i] = acc1
        i2[i] = acc2
    return xT, i1, i2


# ---------------------------------------------------------------------------
# Loewner maps.  Each step treats the driving as constant (midpoint value);
# the elementary hull is a vertical slit of capacity dt.
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _sqrt_upper(p, q, hint):
    # branch of sqrt(p + i q) in the closed upper half-plane; for real
    # nonnegative radicands the sign follows `hint` (asymptotics ~ z - w)
    if q == 0.0:
        if p >= 0.0:
            s = math.sqrt(p)
            if hint < 0.0:
                return -s, 0.0
            return s, 0.0
        return 0.0, math.sqrt(-p)
    r = math.hypot(p, q)
    if p >= 0.0:
        u = math.sqrt(0.5 * (r + p))
        v = 0.5 * q / u
    else:
        v = math.sqrt(0.5 * (r - p))
        if q < 0.0:
            v = -v
        u = 0.5 * q / v
    if v < 0.0:
        return -u, -v
    return u, v


@njit(cache=True, inline="always")
def _tip(W, dt, k):
    # curve point at capacity k*dt: backward composition of inverse slit maps
    w = 0.5 * (W[k - 1] + W[k])
    zr = w
    zi = 2.0 * math.sqrt(dt)
    four_dt = 4.0 * dt
    for j in range(k - 1, 0, -1):
        w = 0.5 * (W[j - 1] + W[j])
        p = zr - w
        a = p * p - zi * zi - four_dt
        b = 2.0 * p * zi
        sr, si = _sqrt_upper(a, b, p)
        zr = w + sr
        zi = si
    return zr, zi


@njit(cache=True)
def backward_tips(W, dt, ks):
    out = np.empty(ks.shape[0], np.complex128)
    for idx in range(ks.shape[0]):
        zr, zi = _tip(W, dt, ks[idx])
        out[idx] = complex(zr, zi)
    return out


@njit(cache=True)
def forward_point(W, dt, zr, zi, upto):
    """Evaluate the forward chain at one point.  Returns (re, im, flag, step):
    flag 1 = swallowed real point, flag 2 = numerical breach."""
    two_sqrt_dt = 2.0 * math.sqrt(dt)
    four_dt = 4.0 * dt
    for j in range(1, upto + 1):
        w = 0.5 * (W[j - 1] + W[j])
        p = zr - w
        if zi == 0.0:
            if abs(p) <= two_sqrt_dt:
                return zr, zi, 1, j
            s = math.sqrt(p * p + four_dt)
            zr = w + s if p > 0.0 else w - s
        else:
            a = p * p - zi * zi + four_dt
            b = 2.0 * p * zi
            sr, si = _sqrt_upper(a, b, p)
            zr = w + sr
            zi = si
            if not (math.isfinite(zr) and math.isfinite(zi)):
                return zr, zi, 2, j
    return zr, zi, 0, 0


# --- hit testing of a trace against a vertical slit [ax, ax + i*ay] --------


@njit(cache=True, inline="always")
def _point_seg_dist(px, py, x1, y1, x2, y2):
    dx = x2 - x1
    dy = y2 - y1
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - x1, py - y1)
    t = ((px - x1) * dx + (py - y1) * dy) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


@njit(cache=True, inline="always")
def _seg_crosses_slit(x1, y1, x2, y2, ax, ay):
    d1 = x1 - ax
    d2 = x2 - ax
    if d1 * d2 > 0.0:
        return False
    if x1 == x2:
        return d1 == 0.0 and min(y1, y2) <= ay and max(y1, y2) >= 0.0
    t = d1 / (x1 - x2)
    if t < 0.0 or t > 1.0:
        return False
    yc = y1 + t * (y2 - y1)
    return 0.0 <= yc <= ay


@njit(cache=True, inline="always")
def _seg_dist_to_slit(x1, y1, x2, y2, ax, ay):
    if _seg_crosses_slit(x1, y1, x2, y2, ax, ay):
        return 0.0
    d = _point_seg_dist(x1, y1, ax, 0.0, ax, ay)
    d2 = _point_seg_dist(x2, y2, ax, 0.0, ax, ay)
    if d2 < d:
        d = d2
    d3 = _point_seg_dist(ax, 0.0, x1, y1, x2, y2)
    if d3 < d:
        d = d3
    d4 = _point_seg_dist(ax, ay, x1, y1, x2, y2)
    if d4 < d:
        d = d4
    return d


@njit(cache=True, parallel=True)
def restriction_hits(W, dt, stride, ax, ay, refine_r):
    """First hit step of each trace against the slit (or -1), plus the
    minimum polyline distance to the slit.

    Tips are evaluated every `stride` steps; any window that crosses the slit
    or comes within `refine_r` of it is re-evaluated at unit stride.
    """
    n, npts = W.shape
    nsteps = npts - 1
    hit_step = np.full(n, -1, np.int64)
    min_d = np.empty(n)
    for i in prange(n):
        Wr = W[i]
        pr = Wr[0]
        pi = 0.0
        hit = -1
        md = 1.0e300
        prev_k = 0
        k = stride if stride <= nsteps else nsteps
        while True:
            zr, zi = _tip(Wr, dt, k)
            d = _seg_dist_to_slit(pr, pi, zr, zi, ax, ay)
            if d < md:
                md = d
            if d <= refine_r:
                qr = pr
                qi = pi
                for kk in range(prev_k + 1, k + 1):
                    tr, ti = _tip(Wr, dt, kk)
                    dd = _seg_dist_to_slit(qr, qi, tr, ti, ax, ay)
                    if dd < md:
                        md = dd
                    if _seg_crosses_slit(qr, qi, tr, ti, ax, ay):
                        hit = kk
                        break
                    qr = tr
                    qi = ti
                if hit >= 0:
                    break
            pr = zr
            pi = zi
            if k == nsteps:
                break
            prev_k = k
            k += stride
            if k > nsteps:
                k = nsteps
        hit_step[i] = hit
        min_d[i] = md
    return hit_step, min_d


# --- forward evolution of point sets with checkpoint snapshots -------------


@njit(cache=True, parallel=True)
def forward_push_block(W, dt, z0r, z0i, check_steps, out_r, out_i, okflags):
    n = W.shape[0]
    m = z0r.shape[0]
    nc = check_steps.shape[0]
    four_dt = 4.0 * dt
    for i in prange(n):
        Wr = W[i]
        zr = z0r.copy()
        zi = z0i.copy()
        ok = 1
        ci = 0
        kmax = check_steps[nc - 1]
        for j in range(1, kmax + 1):
            w = 0.5 * (Wr[j - 1] + Wr[j])
            for q in range(m):
                p = zr[q] - w
                if zi[q] == 0.0:
                    s = math.sqrt(p * p + four_dt)
                    zr[q] = w + s if p > 0.0 else w - s
                else:
                    a = p * p - zi[q] * zi[q] + four_dt
                    b = 2.0 * p * zi[q]
                    sr, si = _sqrt_upper(a, b, p)
                    zr[q] = w + sr
                    zi[q] = si
                    if not (math.isfinite(sr) and math.isfinite(si)):
                        ok = 0
            while ci < nc and check_steps[ci] == j:
                for q in range(m):
                    out_r[i, ci, q] = zr[q]
                    out_i[i, ci, q] = zi[q]
                ci += 1
        okflags[i] = ok


# --- vertical-slit zipper: map out a sampled arc, evaluate two real probes --


@njit(cache=True, inline="always")
def _slit_real(z, dacc, u, v2):
    t = z - u
    s = math.sqrt(t * t + v2)
    if t >= 0.0:
        return u + s, dacc * (t / s)
    return u - s, dacc * (-t / s)


@njit(cache=True, parallel=True)
def zipper_probe_block(arc_r, arc_i, wp, op, out, fail):
    """Peel each arc from its foot by vertical-slit steps and push the two
    real probes through; out rows are (h(W), h(O), h'(W), h'(O))."""
    n, m = arc_r.shape
    for i in prange(n):
        ar = arc_r[i].copy()
        ai = arc_i[i].copy()
        pw = wp[i]
        po = op[i]
        dw = 1.0
        do_ = 1.0
        bad = 0
        for j in range(1, m):
            u = ar[j]
            v = ai[j]
            if not (math.isfinite(u) and math.isfinite(v)):
                bad = 1
                break
            if v < 0.0:
                if v < -1e-9 * (1.0 + abs(u)):
                    bad = 1
                    break
                v = 0.0
            if v <= 0.0:
                continue
            v2 = v * v
            for q in range(j + 1, m):
                p = ar[q] - u
                a = p * p - ai[q] * ai[q] + v2
                b = 2.0 * p * ai[q]
                sr, si = _sqrt_upper(a, b, p)
                ar[q] = u + sr
                ai[q] = si
            pw, dw = _slit_real(pw, dw, u, v2)
            po, do_ = _slit_real(po, do_, u, v2)
        out[i, 0] = pw
        out[i, 1] = po
        out[i, 2] = dw
        out[i, 3] = do_
        fail[i] = bad


@njit(cache=True)
def zipper_chain(arc_r, arc_i):
    """Elementary slit parameters (u_j, v_j) of the map-out of one arc."""
    m = arc_r.shape[0]
    ar = arc_r.copy()
    ai = arc_i.copy()
    us = np.empty(m - 1)
    vs = np.empty(m - 1)
    cnt = 0
    for j in range(1, m):
        u = ar[j]
        v = ai[j]
        if v < 0.0:
            v = 0.0
        if v <= 0.0:
            continue
        v2 = v * v
        for q in range(j + 1, m):
            p = ar[q] - u
            a = p * p - ai[q] * ai[q] + v2
            b = 2.0 * p * ai[q]
            sr, si = _sqrt_upper(a, b, p)
            ar[q] = u + sr
            ai[q] = si
        us[cnt] = u
        vs[cnt] = v
        cnt += 1
    return us[:cnt], vs[:cnt]


@njit(cache=True)
def chain_eval(us, vs, zr, zi, hint):
    """Evaluate the slit chain at one point (upper-half-plane branch)."""
    for j in range(us.shape[0]):
        p = zr - us[j]
        v2 = vs[j] * vs[j]
        if zi == 0.0:
            t = p
            s = math.sqrt(t * t + v2)
            zr = us[j] + s if (t > 0.0 or (t == 0.0 and hint > 0.0)) else us[j] - s
        else:
            a = p * p - zi * zi + v2
            b = 2.0 * p * zi
            sr, si = _sqrt_upper(a, b, p)
            zr = us[j] + sr
            zi = si
    return zr, zi


@njit(cache=True)
def chain_deriv_real(us, vs, z):
    """Derivative of the slit chain at a real point (chain rule product)."""
    d = 1.0
    for j in range(us.shape[0]):
        z, d = _slit_real(z, d, us[j], vs[j] * vs[j])
    return z, d


@njit(cache=True, inline="always")
def _orient(ax_, ay_, bx, by, cx, cy):
    v = (bx - ax_) * (cy - ay_) - (by - ay_) * (cx - ax_)
    if v > 0.0:
        return 1
    if v < 0.0:
        return -1
    return 0


@njit(cache=True)
def polyline_self_intersects(re, im):
    """True if any two non-adjacent segments of the polyline properly cross."""
    n = re.shape[0] - 1
    for i in range(n):
        for j in range(i + 2, n):
            o1 = _orient(re[i], im[i], re[i + 1], im[i + 1], re[j], im[j])
            o2 = _orient(re[i], im[i], re[i + 1], im[i + 1], re[j + 1], im[j + 1])
            if o1 == o2 or o1 == 0 or o2 == 0:
                continue
            o3 = _orient(re[j], im[j], re[j + 1], im[j + 1], re[i], im[i])
            o4 = _orient(re[j], im[j], re[j + 1], im[j + 1], re[i + 1], im[i + 1])
            if o3 != o4 and o3 != 0 and o4 != 0:
                return True
    return False


# ---------------------------------------------------------------------------
# Planar Brownian hiding experiment: Gaussian random walks in the upper
# half-plane, raster flood fill of the strip from the right edge.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _walk_survives(state, step, R):
    spare = 0.0
    has = 0
    x = 0.0
    y = 1.0
    while True:
        state, z1, spare, has = _norm(state, spare, has)
        state, z2, spare, has = _norm(state, spare, has)
        x += step * z1
        y += step * z2
        if y <= 0.0:
            return False
        if y >= R:
            return True


@njit(cache=True)
def _walk_raster(state, step, R, h, halfwidth, grid, bit, rows, cols):
    spare = 0.0
    has = 0
    x = 0.0
    y = 1.0
    overflow = 0
    # the common start point i sits on the lower strip edge
    grid[0, int(halfwidth / h)] |= bit
    while True:
        state, z1, spare, has = _norm(state, spare, has)
        state, z2, spare, has = _norm(state, spare, has)
        x += step * z1
        y += step * z2
        if y <= 0.0 or y >= R:
            return overflow
        if y >= 1.0:
            col = int((x + halfwidth) / h)
            if col < 0 or col >= cols:
                overflow = 1
            else:
                row = int((y - 1.0) / h)
                if row >= rows:
                    row = rows - 1
                grid[row, col] |= bit
    return overflow


@njit(cache=True, parallel=True)
def bm_hiding_counts(n_hidden, m_hiders, R, step, h, halfwidth, n_samples, seed):
    """Counts of (hide events, all-survive events, window overflows)."""
    rows = int(math.ceil((R - 1.0) / h))
    cols = int(math.ceil(2.0 * halfwidth / h))
    n_walks = n_hidden + m_hiders
    hide_count = 0
    survive_count = 0
    overflow_count = 0
    for s in prange(n_samples):
        base = s * n_walks
        alive = True
        for wk in range(n_walks):
            if not _walk_survives(stream_state(seed, base + wk), step, R):
                alive = False
                break
        if not alive:
            continue
        survive_count += 1
        grid = np.zeros((rows, cols), np.uint8)
        overflow = 0
        for wk in range(n_walks):
            bit = 1 if wk < n_hidden else 2
            overflow |= _walk_raster(
                stream_state(seed, base + wk), step, R, h, halfwidth, grid, bit, rows, cols
            )
        if overflow == 1:
            overflow_count += 1
            continue
        # dilate occupancy by one cell
        dil = np.zeros((rows, cols), np.uint8)
        for r in range(rows):
            for c in range(cols):
                g = grid[r, c]
                if g != 0:
                    r0 = r - 1 if r > 0 else 0
                    r1 = r + 2 if r + 2 <= rows else rows
                    c0 = c - 1 if c > 0 else 0
                    c1 = c + 2 if c + 2 <= cols else cols
                    for rr in range(r0, r1):
                        for cc in range(c0, c1):
                            dil[rr, cc] |= g
        # flood fill free cells from the right edge; 4-connectivity
        visited = np.zeros((rows, cols), np.uint8)
        queue = np.empty(rows * cols, np.int64)
        qn = 0
        exposed = False
        for r in range(rows):
            g = dil[r, cols - 1]
            if g == 0:
                visited[r, cols - 1] = 1
                queue[qn] = r * cols + (cols - 1)
                qn += 1
            elif g == 1:
                # a cell on the right edge itself faces the open right side
                exposed = True
        head = 0
        while head < qn and not exposed:
            idx = queue[head]
            head += 1
            r = idx // cols
            c = idx % cols
            for npos in range(4):
                rr = r + (1 if npos == 0 else (-1 if npos == 1 else 0))
                cc = c + (1 if npos == 2 else (-1 if npos == 3 else 0))
                if rr < 0 or rr >= rows or cc < 0 or cc >= cols:
                    continue
                g = dil[rr, cc]
                if g == 0:
                    if visited[rr, cc] == 0:
                        visited[rr, cc] = 1
                        queue[qn] = rr * cols + cc
                        qn += 1
                elif g == 1:
                    # a cell occupied solely by hidden paths faces the fill
                    exposed = True
                    break
        if not exposed:
            hide_count += 1
    return hide_count, survive_count, overflow_count
