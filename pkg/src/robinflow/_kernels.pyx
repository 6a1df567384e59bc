# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping kernels; same contracts as robinflow._pykernels."""
import numpy as np

from libc.math cimport atan, exp, fabs, isfinite, sin, sqrt

from ._tridiag import half_systems

NAME = "cython"


cdef inline double _g(int code, double v) noexcept nogil:
    if code == 1:
        return atan(v)
    elif code == 2:
        return -atan(v)
    elif code == 3:
        return sqrt(fabs(v)) * sin(v)
    elif code == 4:
        if v == 0.0:
            return 0.0
        return v * v * sin(1.0 / v)
    return 0.0


cdef class _Folded:
    cdef int n, ne, no
    cdef double[::1] es, ecp, einv, os, ocp, oinv
    cdef double[::1] re, ro

    def __init__(self, int n, double h, double lam, double dt, double theta):
        hs = half_systems(n, h, lam, dt, theta)
        self.n = n
        self.es, self.ecp, self.einv = self._factor(*hs.even)
        self.os, self.ocp, self.oinv = self._factor(*hs.odd)
        self.ne = self.es.shape[0]
        self.no = self.os.shape[0]
        self.re = np.empty(self.ne)
        self.ro = np.empty(self.no)

    @staticmethod
    def _factor(sub, diag, sup):
        m = diag.shape[0]
        cp = np.empty(m)
        inv = np.empty(m)
        den = diag[0]
        for i in range(m):
            if i > 0:
                den = diag[i] - sub[i] * cp[i - 1]
            if den == 0.0:
                raise np.linalg.LinAlgError("singular implicit matrix")
            inv[i] = 1.0 / den
            cp[i] = sup[i] * inv[i]
        return np.ascontiguousarray(sub, dtype=float), cp, inv

    cdef void solve(self, double[::1] r, double[::1] out) noexcept nogil:
        cdef int n = self.n, i, m, k
        cdef double[::1] re = self.re, ro = self.ro
        if n % 2 == 0:
            m = n // 2
            for i in range(m):
                re[i] = 0.5 * (r[i] + r[n - i])
                ro[i] = 0.5 * (r[i] - r[n - i])
            re[m] = r[m]
        else:
            k = (n - 1) // 2
            for i in range(k + 1):
                re[i] = 0.5 * (r[i] + r[n - i])
                ro[i] = 0.5 * (r[i] - r[n - i])
        _thomas(self.es, self.ecp, self.einv, re, self.ne)
        _thomas(self.os, self.ocp, self.oinv, ro, self.no)
        for i in range(self.no):
            out[i] = re[i] + ro[i]
            out[n - i] = re[i] - ro[i]
        if n % 2 == 0:
            out[n // 2] = re[n // 2]


cdef inline void _thomas(double[::1] sub, double[::1] cp, double[::1] inv,
                         double[::1] d, int m) noexcept nogil:
    cdef int i
    d[0] = d[0] * inv[0]
    for i in range(1, m):
        d[i] = (d[i] - sub[i] * d[i - 1]) * inv[i]
    for i in range(m - 2, -1, -1):
        d[i] = d[i] - cp[i] * d[i + 1]


cdef inline void _explicit(double[::1] u, double[::1] r, int n, double h, double lam,
                           double coef, double b0, double bn) noexcept nogil:
    cdef double a = 1.0 / (h * h)
    cdef double db = (-2.0 + 2.0 * h * lam) * a - 1.0
    cdef int i
    for i in range(1, n):
        r[i] = u[i] + coef * (a * ((u[i - 1] + u[i + 1]) - 2.0 * u[i]) - u[i])
    r[0] = u[0] + coef * (db * u[0] + 2.0 * a * u[1]) + b0
    r[n] = u[n] + coef * (db * u[n] + 2.0 * a * u[n - 1]) + bn


cdef inline double _norm2(double[::1] v, int n, double h) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(n + 1):
        s += v[i] * v[i]
    return h * (s - 0.5 * (v[0] * v[0] + v[n] * v[n]))


cdef inline double _flux(double[::1] u, int n, double h, double lam, double g0, double gn) noexcept nogil:
    cdef double grad = 0.0, d
    cdef int i
    for i in range(n):
        d = u[i + 1] - u[i]
        grad += d * d
    return (lam * (u[0] * u[0] + u[n] * u[n]) + g0 * u[0] + gn * u[n]
            - (grad / h + _norm2(u, n, h)))


def pde_advance(double[::1] u, long n_steps, double dt, double lam, double h, double theta,
                int g_code, g_func, double threshold):
    cdef int n = u.shape[0] - 1
    cdef _Folded solver = _Folded(n, h, lam, dt, theta)
    cdef double[::1] r = np.empty(n + 1)
    cdef double[::1] v = np.empty(n + 1)
    cdef double ex = (1.0 - theta) * dt, bscale = 2.0 * dt / h
    cdef double thr2 = threshold * threshold if threshold > 0 else float("inf")
    cdef double g0 = 0.0, gn = 0.0, nrm2
    cdef long k
    cdef long taken = n_steps
    cdef int i
    cdef bint native = g_code >= 0
    if native:
        with nogil:
            for k in range(n_steps):
                g0 = _g(g_code, u[0])
                gn = _g(g_code, u[n])
                _explicit(u, r, n, h, lam, ex, bscale * g0, bscale * gn)
                solver.solve(r, v)
                nrm2 = _norm2(v, n, h)
                if not isfinite(nrm2):
                    taken = -1
                    break
                u[:] = v
                if nrm2 >= thr2:
                    taken = k + 1
                    break
        return taken
    for k in range(n_steps):
        g0 = g_func(u[0])
        gn = g_func(u[n])
        _explicit(u, r, n, h, lam, ex, bscale * g0, bscale * gn)
        solver.solve(r, v)
        nrm2 = _norm2(v, n, h)
        if not isfinite(nrm2):
            return -1
        u[:] = v
        if nrm2 >= thr2:
            return k + 1
    return n_steps


cdef inline double _gz(int code, object func, double z, double v) except? -1.5e308:
    if z <= 1e-12 or code == 0:
        return 0.0
    if code > 0:
        return z * _g(code, v / z)
    if z == 1.0:
        return func(v)
    return z * <double>func(v / z)


def sphere_advance(double[::1] U, double z, long n_steps, double dt, double lam, double h,
                   double theta, int g_code, g_func):
    cdef int n = U.shape[0] - 1
    cdef _Folded solver = _Folded(n, h, lam, dt, theta)
    cdef double[::1] r = np.empty(n + 1)
    cdef double[::1] v = np.empty(n + 1)
    cdef double ex = (1.0 - theta) * dt, bscale = 2.0 * dt / h
    cdef double g0, gn, q, f, w, tot, s, drift = 0.0
    cdef long k
    cdef int i
    cdef bint native = g_code >= 0
    cdef bint bad = False
    if native:
        with nogil:
            for k in range(n_steps):
                if z <= 1e-12 or g_code == 0:
                    g0 = 0.0
                    gn = 0.0
                else:
                    g0 = z * _g(g_code, U[0] / z)
                    gn = z * _g(g_code, U[n] / z)
                q = _flux(U, n, h, lam, g0, gn)
                _explicit(U, r, n, h, lam, ex, bscale * g0, bscale * gn)
                solver.solve(r, v)
                f = exp(-dt * q)
                w = z * f
                tot = f * f * _norm2(v, n, h) + w * w
                if not isfinite(tot):
                    bad = True
                    break
                if fabs(tot - 1.0) > drift:
                    drift = fabs(tot - 1.0)
                s = f / sqrt(tot)
                for i in range(n + 1):
                    U[i] = v[i] * s
                z = w / sqrt(tot)
        if bad:
            raise FloatingPointError("numerical overflow in hemisphere flow")
        return z, drift
    for k in range(n_steps):
        g0 = _gz(g_code, g_func, z, U[0])
        gn = _gz(g_code, g_func, z, U[n])
        q = _flux(U, n, h, lam, g0, gn)
        _explicit(U, r, n, h, lam, ex, bscale * g0, bscale * gn)
        solver.solve(r, v)
        f = exp(-dt * q)
        w = z * f
        tot = f * f * _norm2(v, n, h) + w * w
        if not isfinite(tot):
            raise FloatingPointError("numerical overflow in hemisphere flow")
        if fabs(tot - 1.0) > drift:
            drift = fabs(tot - 1.0)
        s = f / sqrt(tot)
        for i in range(n + 1):
            U[i] = v[i] * s
        z = w / sqrt(tot)
    return z, drift
