# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.  Signatures and results match ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, sin, cos, acos, log, exp, lgamma, M_PI

cnp.import_array()

# recompute the running subset sum from scratch this often (bounds drift)
DEF REFRESH = 4096


cdef double _min_eig3(double* a) nogil:
    """Smallest eigenvalue of a symmetric 3 x 3 matrix (trigonometric form)."""
    cdef double p1 = a[1] * a[1] + a[2] * a[2] + a[5] * a[5]
    cdef double q = (a[0] + a[4] + a[8]) / 3.0
    cdef double b0 = a[0] - q, b4 = a[4] - q, b8 = a[8] - q
    cdef double p2 = b0 * b0 + b4 * b4 + b8 * b8 + 2.0 * p1
    cdef double p, r, det
    if p2 <= 0.0:
        return q
    p = sqrt(p2 / 6.0)
    det = (b0 * (b4 * b8 - a[5] * a[7]) - a[1] * (a[3] * b8 - a[5] * a[6])
           + a[2] * (a[3] * a[7] - b4 * a[6]))
    r = det / (2.0 * p * p * p)
    if r < -1.0:
        r = -1.0
    elif r > 1.0:
        r = 1.0
    return q + 2.0 * p * cos(acos(r) / 3.0 + 2.0 * M_PI / 3.0)


cdef double _min_eig(double* a, double* work, int d) nogil:
    """Smallest eigenvalue of a symmetric d x d matrix.

    Closed forms for d <= 3, cyclic Jacobi otherwise.
    """
    cdef int i, j, p, q, sweep
    cdef double off, scale, apq, app, aqq, theta, t, c, s, tau, akp, akq
    if d == 1:
        return a[0]
    if d == 2:
        return 0.5 * (a[0] + a[3]) - sqrt(0.25 * (a[0] - a[3]) * (a[0] - a[3]) + a[1] * a[1])
    if d == 3:
        return _min_eig3(a)
    for i in range(d * d):
        work[i] = a[i]
    if d == 1:
        return work[0]
    for sweep in range(60):
        off = 0.0
        scale = 0.0
        for p in range(d):
            scale += work[p * d + p] * work[p * d + p]
            for q in range(p + 1, d):
                off += work[p * d + q] * work[p * d + q]
        if off <= 1e-34 * (scale + 1e-300):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = work[p * d + q]
                if apq == 0.0:
                    continue
                app = work[p * d + p]
                aqq = work[q * d + q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                work[p * d + p] = app - t * apq
                work[q * d + q] = aqq + t * apq
                work[p * d + q] = 0.0
                work[q * d + p] = 0.0
                for i in range(d):
                    if i != p and i != q:
                        akp = work[i * d + p]
                        akq = work[i * d + q]
                        work[i * d + p] = akp - s * (akq + tau * akp)
                        work[p * d + i] = work[i * d + p]
                        work[i * d + q] = akq + s * (akp - tau * akq)
                        work[q * d + i] = work[i * d + q]
    c = work[0]
    for i in range(1, d):
        if work[i * d + i] < c:
            c = work[i * d + i]
    return c


def split_scan(cnp.ndarray[cnp.float64_t, ndim=3] P, double threshold, long cap):
    """Scan the 2^(N-1) splits {S, S^c} with the last index kept in S^c.

    ``P[n]`` is the real symmetric d x d lift of vector n.  Returns
    ``(sigma_star, best_mask, candidates, overflow)``: sigma_star is the
    minimum over splits of max(lmin(S), lmin(S^c)), candidates the masks
    (ascending) whose value is <= threshold, at most ``cap`` of them.
    """
    cdef int N = P.shape[0]
    cdef int d = P.shape[1]
    cdef long total = 1L << (N - 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] T = np.ascontiguousarray(P.sum(axis=0))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Pc = np.ascontiguousarray(P)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] S = np.zeros(d * d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] C = np.zeros(d * d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] W = np.zeros(d * d)
    cdef double* s = &S[0]
    cdef double* cc = &C[0]
    cdef double* w = &W[0]
    cdef double* t = &T[0, 0]
    cdef double* p = &Pc[0, 0, 0]
    cdef long i, gray, prev = 0, mask, best_mask = 0
    cdef int bit, j, n, dd = d * d
    cdef double ls, lc, val, best = 1e300
    cands = []
    cdef long ncand = 0
    cdef bint overflow = False
    for i in range(total):
        gray = i ^ (i >> 1)
        if i == 0:
            for j in range(dd):
                s[j] = 0.0
        elif i % REFRESH == 0:
            for j in range(dd):
                s[j] = 0.0
            for n in range(N - 1):
                if (gray >> n) & 1:
                    for j in range(dd):
                        s[j] += p[n * dd + j]
        else:
            bit = 0
            mask = gray ^ prev
            while not (mask >> bit) & 1:
                bit += 1
            if (gray >> bit) & 1:
                for j in range(dd):
                    s[j] += p[bit * dd + j]
            else:
                for j in range(dd):
                    s[j] -= p[bit * dd + j]
        prev = gray
        for j in range(dd):
            cc[j] = t[j] - s[j]
        if gray == 0:
            ls = 0.0
        else:
            ls = _min_eig(s, w, d)
        lc = _min_eig(cc, w, d)
        val = ls if ls > lc else lc
        if val < best or (val == best and gray < best_mask):
            best = val
            best_mask = gray
        if val <= threshold:
            if ncand < cap:
                cands.append(gray)
                ncand += 1
            else:
                overflow = True
    return best, best_mask, sorted(cands), overflow


cdef inline double _log_prod(double ax, int m):
    cdef double acc = 0.0
    cdef int s
    for s in range(m, 2 * m + 1):
        acc += log(ax + s)
    return acc


def sinc_gap_sq(int m, long window):
    """Sum of (|f_m(x)| - |g_m(x)|)^2 over x = k + 1/4, k + 1/2, k - 1/4, |k| <= window."""
    cdef double lg = lgamma(m + 1.0)
    cdef double total = 0.0, x, sx, logp
    cdef long k
    cdef int r
    cdef double offs[3]
    offs[0] = 0.25
    offs[1] = 0.5
    offs[2] = -0.25
    for r in range(3):
        for k in range(-window, window + 1):
            x = k + offs[r]
            sx = sin(M_PI * x)
            logp = _log_prod(fabs(x), m)
            total += 4.0 * sx * sx / (M_PI * M_PI) * exp(2.0 * (lg - logp))
    return total


cdef inline double _sinc_q(long d, double* sq):
    """sinc(pi d / 4) for integer d, sign included."""
    cdef long r = d % 8
    if r < 0:
        r += 8
    if d == 0:
        return 1.0
    return sq[r] / (M_PI * d / 4.0)


def far_gap_sum(long ja, long jb, double t, double nu, long lo, long hi):
    """Sum over labels n in [lo, hi] of (|z1 + z2| - |z1 - z2|)^2.

    z1 = sinc(pi (n - ja)/4) and z2 = (sinc(pi (n - jb)/4) - t z1) / nu.
    """
    cdef double sq[8]
    cdef int r
    for r in range(8):
        sq[r] = sin(M_PI * r / 4.0)
    cdef double total = 0.0, comp = 0.0, z1, z2, a, b, term, y, tt
    cdef long n
    for n in range(lo, hi + 1):
        z1 = _sinc_q(n - ja, sq)
        z2 = (_sinc_q(n - jb, sq) - t * z1) / nu
        a = fabs(z1 + z2)
        b = fabs(z1 - z2)
        term = (a - b) * (a - b)
        y = term - comp
        tt = total + y
        comp = (tt - total) - y
        total = tt
    return total
