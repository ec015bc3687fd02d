# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path kernels; bit-identical twin of ``pure.py``.

Every floating-point expression mirrors the pure backend in the same
order (the extension is compiled with -ffp-contract=off so nothing gets
fused), and both sides draw normals through the same scipy ndtri, so runs
agree bitwise across backends.  Keep the two files in sync.
"""

import math

import numpy as np

from libc.math cimport sqrt, fabs, cos, sin, ldexp, ceil, isnan, NAN
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc, realloc
from scipy.special.cython_special cimport ndtri

NAME = "fast"

ABS_LMAX = 34
T_FINE = 2.0 ** (-ABS_LMAX)

STREAM_BRIDGE = 0
STREAM_CLONE = 1
STREAM_THETA = 2

STOP_HORIZON = 0
STOP_STABILIZED = 1
STOP_ALL_SWALLOWED = 2
STOP_THRESHOLD = 3
STOP_VETO_FIRST = 4
STOP_DISCARDED = 5
STOP_NO_EVENT = 6

MODE_STABILIZE = 0
MODE_THRESHOLD = 1
MODE_ORDERED = 2

GUARD_FLOOR = 1e-8
DIST_EVAL_STRIDE = 64

cdef int _ABS_LMAX = 34
cdef double _T_FINE = ldexp(1.0, -34)
cdef double _TWO_NEG53 = ldexp(1.0, -53)
cdef double _GUARD_FLOOR = 1e-8
cdef int64_t _DIST_STRIDE = 64
cdef int _MODE_STABILIZE = 0
cdef int _MODE_THRESHOLD = 1
cdef int _MODE_ORDERED = 2
cdef int _STOP_HORIZON = 0
cdef int _STOP_STABILIZED = 1
cdef int _STOP_ALL_SWALLOWED = 2
cdef int _STOP_THRESHOLD = 3
cdef int _STOP_VETO_FIRST = 4
cdef int _STOP_DISCARDED = 5
cdef int _STOP_NO_EVENT = 6

cdef uint64_t _M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t _M1 = 0xCA5A826395121157ULL
cdef uint64_t _W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t _W1 = 0xBB67AE8584CAA73BULL

cdef double _BRIDGE_DEV[35]
cdef int _i
for _i in range(35):
    _BRIDGE_DEV[_i] = 0.0 if _i == 0 else 0.5 * sqrt(ldexp(1.0, 1 - _i))

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t slemc_mulhi64(uint64_t a, uint64_t b, uint64_t* lo) {
        __uint128_t p = (__uint128_t)a * (__uint128_t)b;
        *lo = (uint64_t)p;
        return (uint64_t)(p >> 64);
    }
    """
    uint64_t slemc_mulhi64(uint64_t a, uint64_t b, uint64_t* lo) nogil


cdef inline void _philox4(uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3,
                          uint64_t k0, uint64_t k1, uint64_t* out) noexcept nogil:
    cdef int r
    cdef uint64_t hi0, lo0, hi1, lo1
    for r in range(10):
        hi0 = slemc_mulhi64(_M0, c0, &lo0)
        hi1 = slemc_mulhi64(_M1, c2, &lo1)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline double _gauss(uint64_t seed, uint64_t pid, uint64_t stream,
                          uint64_t hi, uint64_t lo) noexcept nogil:
    cdef uint64_t out[4]
    _philox4(stream, hi, lo, 0, seed, pid, out)
    cdef double u = (<double> (out[0] >> 11) + 0.5) * _TWO_NEG53
    return ndtri(u)


def philox4(c0, c1, c2, c3, k0, k1):
    """One Philox4x64-10 block; returns four 64-bit words."""
    cdef uint64_t out[4]
    _philox4(<uint64_t> c0, <uint64_t> c1, <uint64_t> c2, <uint64_t> c3,
             <uint64_t> k0, <uint64_t> k1, out)
    return out[0], out[1], out[2], out[3]


def gauss(seed, pid, stream, hi, lo):
    """Standard normal addressed by (seed, pid, stream, hi, lo)."""
    return _gauss(<uint64_t> seed, <uint64_t> pid, <uint64_t> stream,
                  <uint64_t> hi, <uint64_t> lo)


cdef inline void _csqrt_im(double re, double im, double* ore, double* oim) noexcept nogil:
    cdef double m, t, u
    if im == 0.0:
        if re >= 0.0:
            ore[0] = sqrt(re)
            oim[0] = 0.0
        else:
            ore[0] = 0.0
            oim[0] = sqrt(-re)
        return
    m = sqrt(re * re + im * im)
    if re >= 0.0:
        t = sqrt(0.5 * (m + re))
        u = im / (2.0 * t)
        if u >= 0.0:
            ore[0] = t
            oim[0] = u
        else:
            ore[0] = -t
            oim[0] = -u
        return
    u = sqrt(0.5 * (m - re))
    t = fabs(im) / (2.0 * u)
    if im >= 0.0:
        ore[0] = t
        oim[0] = u
    else:
        ore[0] = -t
        oim[0] = u


def csqrt_im(re, im):
    """Square root of re + i*im on the branch with Im >= 0."""
    cdef double ore, oim
    _csqrt_im(re, im, &ore, &oim)
    return ore, oim


cdef double _tip_distance(double* du, double* dts, Py_ssize_t k, double a,
                          double x0, double y0) noexcept nogil:
    cdef double vre = 0.0
    cdef double vim = 0.0
    cdef double tad, valre, valim, sre, sim, dx, dy
    cdef Py_ssize_t j
    for j in range(k - 1, -1, -1):
        tad = 2.0 * a * dts[j]
        valre = vre * vre - vim * vim - tad
        valim = 2.0 * vre * vim
        _csqrt_im(valre, valim, &sre, &sim)
        if sim == 0.0 and vre < 0.0:
            sre = -sre
        vre = du[j] + sre
        vim = sim
    dx = vre - x0
    dy = vim - y0
    return sqrt(dx * dx + dy * dy)


def trace_points(du, dts, a, idx):
    """Trace points gamma(t_k) for the requested 1-based step indices."""
    cdef double[::1] du_v = np.ascontiguousarray(du, dtype=np.float64)
    cdef double[::1] dt_v = np.ascontiguousarray(dts, dtype=np.float64)
    cdef int64_t[::1] idx_v = np.ascontiguousarray(idx, dtype=np.int64)
    out = np.empty(len(idx_v), dtype=np.complex128)
    cdef double complex[::1] out_v = out
    cdef double aa = a
    cdef Py_ssize_t n, j
    cdef int64_t k
    cdef double vre, vim, tad, valre, valim, sre, sim
    for n in range(idx_v.shape[0]):
        k = idx_v[n]
        vre = 0.0
        vim = 0.0
        for j in range(k - 1, -1, -1):
            tad = 2.0 * aa * dt_v[j]
            valre = vre * vre - vim * vim - tad
            valim = 2.0 * vre * vim
            _csqrt_im(valre, valim, &sre, &sim)
            if sim == 0.0 and vre < 0.0:
                sre = -sre
            vre = du_v[j] + sre
            vim = sim
        out_v[n] = vre + 1j * vim
    return out


cdef double _bridge_incr(uint64_t seed, uint64_t pid, int level, int64_t idx,
                         int64_t* cidx, double* cval) noexcept nogil:
    cdef double v, parent, dev
    if cidx[level] == idx:
        return cval[level]
    if level == 0:
        v = _gauss(seed, pid, 0, 0, <uint64_t> idx)
    else:
        parent = _bridge_incr(seed, pid, level - 1, idx >> 1, cidx, cval)
        dev = _BRIDGE_DEV[level] * _gauss(seed, pid, 0, <uint64_t> level,
                                          <uint64_t> (idx >> 1))
        if idx & 1:
            v = parent * 0.5 - dev
        else:
            v = parent * 0.5 + dev
    cidx[level] = idx
    cval[level] = v
    return v


def bridge_increment(seed, pid, level, idx):
    """Brownian-bridge increment of the dyadic cell (level, idx); for tests."""
    cdef int64_t cidx[35]
    cdef double cval[35]
    cdef int i
    for i in range(35):
        cidx[i] = -1
    return _bridge_incr(<uint64_t> seed, <uint64_t> pid, <int> level,
                        <int64_t> idx, cidx, cval)


cdef enum:
    MAXM = 8

ctypedef signed char int8_item
ctypedef int8_item[:, ::1] int8_t_view


cdef class _Ctx:
    cdef uint64_t seed, pid
    cdef int m, mode, level0
    cdef double a, two_a, drift_coef, swallow_tol
    cdef double z0re[MAXM]
    cdef double z0im[MAXM]
    cdef double thr[MAXM]
    cdef double zre[MAXM]
    cdef double zim[MAXM]
    cdef double absg[MAXM]
    cdef double ups[MAXM]
    cdef double sine[MAXM]
    cdef bint active[MAXM]
    cdef bint thr_done[MAXM]
    cdef int64_t lev_idx[MAXM]
    cdef int64_t bidx[35]
    cdef double bval[35]
    cdef double min_d[MAXM]
    cdef int64_t last_eval[MAXM]
    cdef int64_t n_evals, n_steps, big_drops
    cdef int tie_flag
    cdef bint want_min_dist, record_driving
    cdef double* du_rec
    cdef double* dt_rec
    cdef Py_ssize_t rec_len, rec_cap
    cdef Py_ssize_t p

    cdef double[::1] rec_levels
    cdef int64_t[::1] rec_offsets
    cdef int8_t_view o_status
    cdef double[:, ::1] o_t_swallow, o_thr_t, o_thr_ups, o_thr_sine
    cdef double[:, ::1] o_lev_ups, o_lev_sine
    cdef double[::1] o_du_base
    cdef double[:, ::1] o_ups_base, o_sine_base

    def __cinit__(self):
        self.du_rec = NULL
        self.dt_rec = NULL
        self.rec_cap = 0

    def __dealloc__(self):
        if self.du_rec != NULL:
            free(self.du_rec)
        if self.dt_rec != NULL:
            free(self.dt_rec)

    cdef int _grow(self) except -1:
        cdef Py_ssize_t newcap = self.rec_cap * 2 if self.rec_cap else 8192
        self.du_rec = <double*> realloc(self.du_rec, newcap * sizeof(double))
        self.dt_rec = <double*> realloc(self.dt_rec, newcap * sizeof(double))
        if self.du_rec == NULL or self.dt_rec == NULL:
            raise MemoryError()
        self.rec_cap = newcap
        return 0

    cdef void reset(self, uint64_t pid):
        cdef int i
        self.pid = pid
        self.rec_len = 0
        self.n_evals = 0
        self.n_steps = 0
        self.big_drops = 0
        self.tie_flag = 0
        for i in range(35):
            self.bidx[i] = -1
        for i in range(self.m):
            self.zre[i] = self.z0re[i]
            self.zim[i] = self.z0im[i]
            self.absg[i] = 1.0
            self.ups[i] = self.z0im[i]
            self.sine[i] = self.z0im[i] / sqrt(self.z0re[i] * self.z0re[i] + self.z0im[i] * self.z0im[i])
            self.active[i] = True
            self.thr_done[i] = self.thr[i] <= 0.0
            self.lev_idx[i] = self.rec_offsets[i]
            self.min_d[i] = self.z0im[i]
            self.last_eval[i] = -_DIST_STRIDE

    cdef int record_crossings(self, double t_end) except -1:
        cdef int i
        cdef int64_t j, hi
        cdef bint crossed0 = False
        cdef bint crossed1 = False
        for i in range(self.m):
            j = self.lev_idx[i]
            hi = self.rec_offsets[i + 1]
            while j < hi and self.ups[i] <= self.rec_levels[j]:
                self.o_lev_ups[self.p, j] = self.ups[i]
                self.o_lev_sine[self.p, j] = self.sine[i]
                j += 1
            self.lev_idx[i] = j
        for i in range(self.m):
            if not self.thr_done[i] and self.ups[i] <= self.thr[i]:
                self.thr_done[i] = True
                self.o_thr_t[self.p, i] = t_end
                self.o_thr_ups[self.p, i] = self.ups[i]
                self.o_thr_sine[self.p, i] = self.sine[i]
                if i == 0:
                    crossed0 = True
                elif i == 1:
                    crossed1 = True
        if self.mode == _MODE_THRESHOLD and crossed0:
            return _STOP_THRESHOLD
        if self.mode == _MODE_ORDERED:
            if crossed0 and crossed1:
                self.tie_flag = 1
                if self.ups[0] / self.thr[0] <= self.ups[1] / self.thr[1]:
                    return _STOP_THRESHOLD
                return _STOP_VETO_FIRST
            if crossed0:
                return _STOP_THRESHOLD
            if crossed1:
                return _STOP_VETO_FIRST
        return 0

    cdef int apply_increment(self, double dU, double dt) except -1:
        """One slit step for all active marks; returns swallow bitmask."""
        cdef int swallowed = 0
        cdef int i
        cdef double wre, wim, valre, valim, sre, sim, new_ups
        for i in range(self.m):
            if not self.active[i]:
                continue
            wre = self.zre[i] - dU
            wim = self.zim[i]
            valre = wre * wre - wim * wim + self.two_a * dt
            valim = 2.0 * wre * wim
            _csqrt_im(valre, valim, &sre, &sim)
            if sim < self.swallow_tol:
                self.active[i] = False
                swallowed |= 1 << i
                continue
            self.absg[i] = self.absg[i] * sqrt((wre * wre + wim * wim) / (sre * sre + sim * sim))
            self.zre[i] = sre
            self.zim[i] = sim
            new_ups = sim / self.absg[i]
            if new_ups > self.ups[i] * (1.0 + 1e-9):
                raise RuntimeError("conformal radius increased along the flow")
            self.ups[i] = new_ups
            self.sine[i] = sim / sqrt(sre * sre + sim * sim)
        return swallowed

    cdef int exec_interval(self, int64_t tf, int64_t sf) except -1:
        cdef int lvl = _ABS_LMAX
        cdef int64_t w = sf
        cdef int i, ev, swl
        cdef double dt, dW, dU, r2, d, proxy, t_end
        cdef double s_zre[MAXM]
        cdef double s_zim[MAXM]
        cdef double s_absg[MAXM]
        cdef double s_ups[MAXM]
        cdef double s_sine[MAXM]
        cdef bint s_active[MAXM]
        cdef double pre_ups[MAXM]
        cdef bint t_cross, v_cross
        cdef Py_ssize_t k, cell
        while w > 1:
            w >>= 1
            lvl -= 1
        dt = ldexp(1.0, -lvl)
        dW = _bridge_incr(self.seed, self.pid, lvl, tf >> (_ABS_LMAX - lvl),
                          self.bidx, self.bval)
        if self.drift_coef != 0.0:
            r2 = self.zre[0] * self.zre[0] + self.zim[0] * self.zim[0]
            dU = -(self.drift_coef * self.zre[0] / r2 * dt + dW)
        else:
            dU = -dW
        if self.mode == _MODE_ORDERED and sf > 1:
            for i in range(self.m):
                s_zre[i] = self.zre[i]
                s_zim[i] = self.zim[i]
                s_absg[i] = self.absg[i]
                s_ups[i] = self.ups[i]
                s_sine[i] = self.sine[i]
                s_active[i] = self.active[i]
        for i in range(self.m):
            pre_ups[i] = self.ups[i]
        swl = self.apply_increment(dU, dt)
        if self.mode == _MODE_ORDERED and sf > 1:
            t_cross = (not self.thr_done[0]) and self.ups[0] <= self.thr[0]
            v_cross = (not self.thr_done[1]) and self.ups[1] <= self.thr[1]
            if t_cross and v_cross:
                for i in range(self.m):
                    self.zre[i] = s_zre[i]
                    self.zim[i] = s_zim[i]
                    self.absg[i] = s_absg[i]
                    self.ups[i] = s_ups[i]
                    self.sine[i] = s_sine[i]
                    self.active[i] = s_active[i]
                ev = self.exec_interval(tf, sf >> 1)
                if ev:
                    return ev
                return self.exec_interval(tf + (sf >> 1), sf >> 1)
        self.n_steps += 1
        t_end = <double> (tf + sf) * _T_FINE
        for i in range(self.m):
            if swl & (1 << i):
                self.o_t_swallow[self.p, i] = t_end
                self.o_status[self.p, i] = 1
            elif self.active[i] and self.ups[i] < 0.5 * pre_ups[i]:
                self.big_drops += 1
        if self.want_min_dist:
            if self.rec_len >= self.rec_cap:
                self._grow()
            self.du_rec[self.rec_len] = dU
            self.dt_rec[self.rec_len] = dt
            self.rec_len += 1
            k = self.rec_len
            for i in range(self.m):
                if 0.5 * self.ups[i] >= self.min_d[i]:
                    continue
                proxy = self.ups[i] / (4.0 * self.sine[i]) if self.active[i] else 0.0
                if proxy < self.min_d[i] or k - self.last_eval[i] >= _DIST_STRIDE:
                    d = _tip_distance(self.du_rec, self.dt_rec, k, self.a,
                                      self.z0re[i], self.z0im[i])
                    if d < self.min_d[i]:
                        self.min_d[i] = d
                    self.last_eval[i] = k
                    self.n_evals += 1
        if self.record_driving:
            cell = tf >> (_ABS_LMAX - self.level0)
            self.o_du_base[cell] = self.o_du_base[cell] + dU
            for i in range(self.m):
                self.o_ups_base[cell, i] = self.ups[i]
                self.o_sine_base[cell, i] = self.sine[i]
        return self.record_crossings(t_end)


def run_paths(seed, pid0, n_paths, a, drift_coef, z_re, z_im, level0, t_max,
              step_frac, thr, mode, stab_t0, stab_tol, swallow_tol,
              ups_refine_target, rec_levels, rec_offsets, want_min_dist,
              discard_on_swallow0, record_driving):
    """Run ``n_paths`` adaptive Loewner paths; mirrors pure.run_paths."""
    cdef int m = len(z_re)
    if m > MAXM:
        raise ValueError(f"at most {MAXM} marked points per run")
    rec_levels = np.ascontiguousarray(rec_levels, dtype=np.float64)
    rec_offsets = np.ascontiguousarray(rec_offsets, dtype=np.int64)
    cdef int64_t nlev_total = rec_offsets[m]
    cdef double dt0 = ldexp(1.0, -<int> level0)
    cdef int64_t n_base = <int64_t> ceil(<double> t_max / dt0 - 1e-12)
    cdef int64_t t_fine_end = n_base << (_ABS_LMAX - <int> level0)
    cdef double reach_c = <double> step_frac * <double> step_frac / (2.0 * <double> a)
    if record_driving and n_paths != 1:
        raise ValueError("record_driving supports a single path per call")

    cdef Py_ssize_t n = n_paths
    out = {
        "status": np.zeros((n, m), dtype=np.int8),
        "t_swallow": np.full((n, m), np.nan),
        "ups": np.zeros((n, m)),
        "ups_prev": np.full((n, m), np.nan),
        "sine": np.zeros((n, m)),
        "zre": np.zeros((n, m)),
        "zim": np.zeros((n, m)),
        "absg": np.zeros((n, m)),
        "thr_t": np.full((n, m), np.nan),
        "thr_ups": np.full((n, m), np.nan),
        "thr_sine": np.full((n, m), np.nan),
        "lev_ups": np.full((n, nlev_total), np.nan),
        "lev_sine": np.full((n, nlev_total), np.nan),
        "min_dist": np.full((n, m), np.nan),
        "stop_reason": np.zeros(n, dtype=np.int8),
        "t_stop": np.zeros(n),
        "t_stop_fine": np.zeros(n, dtype=np.int64),
        "n_steps": np.zeros(n, dtype=np.int64),
        "ties": np.zeros(n, dtype=np.int8),
        "n_dist_evals": np.zeros(n, dtype=np.int64),
        "big_drops": np.zeros(n, dtype=np.int64),
    }

    cdef _Ctx ctx = _Ctx()
    ctx.seed = <uint64_t> seed
    ctx.m = m
    ctx.mode = <int> mode
    ctx.level0 = <int> level0
    ctx.a = <double> a
    ctx.two_a = 2.0 * <double> a
    ctx.drift_coef = <double> drift_coef
    ctx.swallow_tol = <double> swallow_tol
    ctx.want_min_dist = bool(want_min_dist)
    ctx.record_driving = bool(record_driving)
    cdef int i
    for i in range(m):
        ctx.z0re[i] = <double> z_re[i]
        ctx.z0im[i] = <double> z_im[i]
        ctx.thr[i] = <double> thr[i]
    ctx.rec_levels = rec_levels
    ctx.rec_offsets = rec_offsets
    ctx.o_status = out["status"]
    ctx.o_t_swallow = out["t_swallow"]
    ctx.o_thr_t = out["thr_t"]
    ctx.o_thr_ups = out["thr_ups"]
    ctx.o_thr_sine = out["thr_sine"]
    ctx.o_lev_ups = out["lev_ups"]
    ctx.o_lev_sine = out["lev_sine"]
    if record_driving:
        out["du_base"] = np.zeros(n_base)
        out["ups_base"] = np.full((n_base, m), np.nan)
        out["sine_base"] = np.full((n_base, m), np.nan)
        ctx.o_du_base = out["du_base"]
        ctx.o_ups_base = out["ups_base"]
        ctx.o_sine_base = out["sine_base"]

    cdef double[:, ::1] o_ups = out["ups"]
    cdef double[:, ::1] o_ups_prev = out["ups_prev"]
    cdef double[:, ::1] o_sine = out["sine"]
    cdef double[:, ::1] o_zre = out["zre"]
    cdef double[:, ::1] o_zim = out["zim"]
    cdef double[:, ::1] o_absg = out["absg"]
    cdef double[:, ::1] o_min_dist = out["min_dist"]
    cdef int8_t_view o_status = out["status"]
    cdef signed char[::1] o_reason = out["stop_reason"]
    cdef double[::1] o_t_stop = out["t_stop"]
    cdef int64_t[::1] o_t_stop_fine = out["t_stop_fine"]
    cdef int64_t[::1] o_n_steps = out["n_steps"]
    cdef signed char[::1] o_ties = out["ties"]
    cdef int64_t[::1] o_n_evals = out["n_dist_evals"]
    cdef int64_t[::1] o_big = out["big_drops"]

    cdef double _stab_t0 = <double> stab_t0
    cdef double _stab_tol = <double> stab_tol
    cdef double _ups_target = <double> ups_refine_target
    cdef bint _discard0 = bool(discard_on_swallow0)
    cdef int _mode = <int> mode
    cdef int _level0 = <int> level0

    cdef Py_ssize_t p
    cdef int reason, level
    cdef int64_t t_fine, s_fine, low
    cdef double next_check, t_now, cap, c, z2, u4, rr, width
    cdef int checks_done
    cdef double prev_ups[MAXM]
    cdef double out_prev[MAXM]
    cdef bint any_active, stable

    for p in range(n):
        ctx.p = p
        ctx.reset(<uint64_t> pid0 + <uint64_t> p)
        t_fine = 0
        next_check = _stab_t0
        checks_done = 0
        for i in range(m):
            prev_ups[i] = NAN
            out_prev[i] = NAN

        reason = ctx.record_crossings(0.0)
        while reason == 0:
            if t_fine >= t_fine_end:
                reason = _STOP_HORIZON
                break
            any_active = False
            for i in range(m):
                if ctx.active[i]:
                    any_active = True
                    break
            if not any_active:
                reason = _STOP_ALL_SWALLOWED
                break
            if _mode == _MODE_ORDERED and (
                    (not ctx.active[0] and not ctx.thr_done[0])
                    or (not ctx.active[1] and not ctx.thr_done[1])):
                reason = _STOP_NO_EVENT
                break

            cap = dt0
            for i in range(m):
                if ctx.active[i]:
                    z2 = ctx.zre[i] * ctx.zre[i] + ctx.zim[i] * ctx.zim[i]
                    if z2 < _GUARD_FLOOR:
                        z2 = _GUARD_FLOOR
                    c = reach_c * z2
                    if c < cap:
                        cap = c
            if _ups_target > 0.0 and ctx.active[0]:
                u4 = 4.0 * _ups_target
                if ctx.ups[0] < u4:
                    rr = ctx.ups[0] / u4
                    c = dt0 * rr * rr
                    if c < cap:
                        cap = c
            level = _level0
            width = dt0
            while level < _ABS_LMAX and width > cap:
                width *= 0.5
                level += 1
            s_fine = (<int64_t> 1) << (_ABS_LMAX - level)
            if t_fine != 0:
                low = t_fine & (-t_fine)
                if low < s_fine:
                    s_fine = low

            reason = ctx.exec_interval(t_fine, s_fine)
            t_fine += s_fine
            if reason:
                break
            if _discard0 and not ctx.active[0]:
                reason = _STOP_DISCARDED
                break

            t_now = <double> t_fine * _T_FINE
            while t_now >= next_check * (1.0 - 1e-12):
                if checks_done >= 1:
                    stable = True
                    for i in range(m):
                        if ctx.active[i] and not (prev_ups[i] - ctx.ups[i] <= _stab_tol * ctx.ups[i]):
                            stable = False
                            break
                    for i in range(m):
                        out_prev[i] = prev_ups[i]
                    if stable:
                        reason = _STOP_STABILIZED
                        break
                for i in range(m):
                    prev_ups[i] = ctx.ups[i]
                next_check *= 2.0
                checks_done += 1

        for i in range(m):
            o_ups[p, i] = ctx.ups[i]
            o_sine[p, i] = ctx.sine[i]
            o_zre[p, i] = ctx.zre[i]
            o_zim[p, i] = ctx.zim[i]
            o_absg[p, i] = ctx.absg[i]
            o_ups_prev[p, i] = out_prev[i]
            if not ctx.active[i]:
                o_status[p, i] = 1
            if ctx.want_min_dist:
                o_min_dist[p, i] = ctx.min_d[i]
        o_reason[p] = <signed char> reason
        o_t_stop[p] = <double> t_fine * _T_FINE
        o_t_stop_fine[p] = t_fine
        o_n_steps[p] = ctx.n_steps
        o_ties[p] = <signed char> ctx.tie_flag
        o_n_evals[p] = ctx.n_evals
        o_big[p] = ctx.big_drops

    return out


def continue_paths(seed, pids, t_fine0, wzre, wzim, wabsg, a, level0, t_max,
                   step_frac, delta_thr, stab_t0, stab_tol, swallow_tol,
                   n_clones):
    """Independent continuations for splitting; mirrors pure.continue_paths."""
    cdef int64_t[::1] pids_v = np.ascontiguousarray(pids, dtype=np.int64)
    cdef int64_t[::1] tf0_v = np.ascontiguousarray(t_fine0, dtype=np.int64)
    cdef double[::1] zre_v = np.ascontiguousarray(wzre, dtype=np.float64)
    cdef double[::1] zim_v = np.ascontiguousarray(wzim, dtype=np.float64)
    cdef double[::1] absg_v = np.ascontiguousarray(wabsg, dtype=np.float64)
    cdef Py_ssize_t n = pids_v.shape[0]
    cdef double aa = <double> a
    cdef double two_a = 2.0 * aa
    cdef int _level0 = <int> level0
    cdef double dt0 = ldexp(1.0, -_level0)
    cdef int64_t n_base = <int64_t> ceil(<double> t_max / dt0 - 1e-12)
    cdef int64_t t_fine_end = n_base << (_ABS_LMAX - _level0)
    cdef double reach_c = <double> step_frac * <double> step_frac / two_a
    cdef double _delta = <double> delta_thr
    cdef double _stab_t0 = <double> stab_t0
    cdef double _stab_tol = <double> stab_tol
    cdef double _swallow_tol = <double> swallow_tol
    cdef int K = <int> n_clones
    cdef uint64_t _seed = <uint64_t> seed

    succ = np.zeros(n, dtype=np.int64)
    horizon_hits = np.zeros(n, dtype=np.int64)
    steps = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] succ_v = succ
    cdef int64_t[::1] hor_v = horizon_hits
    cdef int64_t[::1] steps_v = steps

    cdef Py_ssize_t i
    cdef int c, level, lvl
    cdef uint64_t pid, seq
    cdef int64_t t_fine, s_fine, low, w
    cdef double zre, zim, absg, ups, next_check, prev_ups, cap, c2, z2, u4, r
    cdef double width, dt, dW, dU, wre, wim, valre, valim, sre, sim, t_now
    cdef bint stop

    for i in range(n):
        pid = <uint64_t> pids_v[i]
        for c in range(K):
            seq = 0
            zre = zre_v[i]
            zim = zim_v[i]
            absg = absg_v[i]
            ups = zim / absg
            t_fine = tf0_v[i]
            next_check = _stab_t0
            while next_check * (1.0 - 1e-12) <= <double> t_fine * _T_FINE:
                next_check *= 2.0
            prev_ups = NAN
            if ups <= _delta:
                succ_v[i] += 1
                continue
            while True:
                if t_fine >= t_fine_end:
                    hor_v[i] += 1
                    break
                cap = dt0
                z2 = zre * zre + zim * zim
                if z2 < _GUARD_FLOOR:
                    z2 = _GUARD_FLOOR
                c2 = reach_c * z2
                if c2 < cap:
                    cap = c2
                u4 = 4.0 * _delta
                if ups < u4:
                    r = ups / u4
                    c2 = dt0 * r * r
                    if c2 < cap:
                        cap = c2
                level = _level0
                width = dt0
                while level < _ABS_LMAX and width > cap:
                    width *= 0.5
                    level += 1
                s_fine = (<int64_t> 1) << (_ABS_LMAX - level)
                if t_fine != 0:
                    low = t_fine & (-t_fine)
                    if low < s_fine:
                        s_fine = low
                        lvl = _ABS_LMAX
                        w = s_fine
                        while w > 1:
                            w >>= 1
                            lvl -= 1
                        level = lvl
                dt = ldexp(1.0, -level)
                dW = sqrt(dt) * _gauss(_seed, pid, 1, <uint64_t> c, seq)
                seq += 1
                dU = -dW
                wre = zre - dU
                wim = zim
                valre = wre * wre - wim * wim + two_a * dt
                valim = 2.0 * wre * wim
                _csqrt_im(valre, valim, &sre, &sim)
                steps_v[i] += 1
                t_fine += s_fine
                if sim < _swallow_tol:
                    break
                absg = absg * sqrt((wre * wre + wim * wim) / (sre * sre + sim * sim))
                zre = sre
                zim = sim
                ups = sim / absg
                if ups <= _delta:
                    succ_v[i] += 1
                    break
                t_now = <double> t_fine * _T_FINE
                stop = False
                while t_now >= next_check * (1.0 - 1e-12):
                    if not isnan(prev_ups) and prev_ups - ups <= _stab_tol * ups:
                        stop = True
                        break
                    prev_ups = ups
                    next_check *= 2.0
                if stop:
                    break
    return {"succ": succ, "horizon_hits": horizon_hits, "n_steps": steps}


cdef double _theta_step(uint64_t seed, uint64_t pid, double th, double h,
                        double two_a, int depth, int max_depth,
                        uint64_t* seq) except -100.0:
    cdef double edge = th if th < 3.141592653589793 - th else 3.141592653589793 - th
    cdef double drift = two_a * (cos(th) / sin(th))
    cdef double xi, th2
    if depth < max_depth and (fabs(drift) * h > 0.1 or 36.0 * h > edge * edge):
        th = _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
        return _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
    xi = _gauss(seed, pid, 2, 0, seq[0])
    seq[0] += 1
    th2 = th + drift * h + sqrt(h) * xi
    if not (0.0 < th2 < 3.141592653589793):
        if depth >= max_depth:
            raise RuntimeError("angle step left (0, pi) at the deepest refinement")
        th = _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
        return _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
    return th2


def theta_paths(seed, pid0, n_paths, two_a, theta0, dt, n_steps, burn_steps,
                stride, max_depth=20):
    """Euler-Maruyama angle paths; mirrors pure.theta_paths."""
    cdef Py_ssize_t n_keep = (<Py_ssize_t> n_steps - <Py_ssize_t> burn_steps) // <Py_ssize_t> stride
    out = np.empty((n_paths, n_keep))
    cdef double[:, ::1] out_v = out
    cdef uint64_t _seed = <uint64_t> seed
    cdef double _two_a = <double> two_a
    cdef double _dt = <double> dt
    cdef double _theta0 = <double> theta0
    cdef Py_ssize_t _nsteps = n_steps
    cdef Py_ssize_t _burn = burn_steps
    cdef Py_ssize_t _stride = stride
    cdef int _maxd = <int> max_depth
    cdef Py_ssize_t p, k, kept
    cdef uint64_t pid, seq
    cdef double th
    for p in range(n_paths):
        pid = <uint64_t> pid0 + <uint64_t> p
        seq = 0
        th = _theta0
        kept = 0
        for k in range(1, _nsteps + 1):
            th = _theta_step(_seed, pid, th, _dt, _two_a, 0, _maxd, &seq)
            if k > _burn and (k - _burn) % _stride == 0:
                out_v[p, kept] = th
                kept += 1
    return out
