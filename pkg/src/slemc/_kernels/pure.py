"""Pure-Python path kernels (reference implementation).

The compiled twin in ``fastk.pyx`` mirrors this module operation for
operation; every floating-point expression is written in the same order in
both so that a run is bit-identical across backends.  Keep the two files in
sync when touching either.

Randomness is counter-addressed: a Philox4x64-10 block cipher keyed by
(seed, path_id) turns a (stream, hi, lo) address into one standard normal
via the inverse normal CDF.  Driving noise is a Brownian bridge on the
absolute dyadic grid (level L = intervals of length 2^-L capacity time), so
a path is a well-defined Brownian function independent of how the solver
chooses to step through it: halving the base step refines the same path.

Streams: 0 = driving bridge, 1 = clone continuations, 2 = angle sampler.
"""

import math

import numpy as np
from scipy.special import ndtri as _ndtri

NAME = "pure"

ABS_LMAX = 34                # finest dyadic level, dt_min = 2^-34
T_FINE = 2.0 ** (-ABS_LMAX)  # capacity time per fine unit

STREAM_BRIDGE = 0
STREAM_CLONE = 1
STREAM_THETA = 2

# stop reasons
STOP_HORIZON = 0
STOP_STABILIZED = 1
STOP_ALL_SWALLOWED = 2
STOP_THRESHOLD = 3
STOP_VETO_FIRST = 4
STOP_DISCARDED = 5
STOP_NO_EVENT = 6            # ordered mode: event impossible (mark swallowed high)

MODE_STABILIZE = 0
MODE_THRESHOLD = 1
MODE_ORDERED = 2

GUARD_FLOOR = 1e-8           # drop the image-distance guard below this |Z|^2
DIST_EVAL_STRIDE = 64        # backstop stride for exact trace evaluations
EXC_EVAL_STRIDE = 16         # stride for tip-excursion evaluations

_M0 = 0xD2E7470EE14C6C93
_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B
_MASK = (1 << 64) - 1

# child deviation scale for the midpoint bridge split at level l >= 1: the
# increment over a level-(l-1) cell of width h splits into h/2 +- dev*xi
# with dev = sqrt(h)/2 and xi ~ N(0,1)
_BRIDGE_DEV = [0.0] + [0.5 * math.sqrt(2.0 ** (1 - l)) for l in range(1, ABS_LMAX + 1)]
_TWO_NEG53 = 2.0 ** -53


def philox4(c0, c1, c2, c3, k0, k1):
    """One Philox4x64-10 block; returns four 64-bit words."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = (p0 >> 64) & _MASK, p0 & _MASK
        hi1, lo1 = (p1 >> 64) & _MASK, p1 & _MASK
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = (hi0 ^ c3 ^ k1) & _MASK
        c3 = lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


def gauss(seed, pid, stream, hi, lo):
    """Standard normal addressed by (seed, pid, stream, hi, lo)."""
    x0, _, _, _ = philox4(stream & _MASK, hi & _MASK, lo & _MASK, 0,
                          seed & _MASK, pid & _MASK)
    u = ((x0 >> 11) + 0.5) * _TWO_NEG53
    return float(_ndtri(u))


class _Bridge:
    """Dyadic Brownian-bridge increments for one path, with an ancestor cache."""

    __slots__ = ("seed", "pid", "_idx", "_val")

    def __init__(self, seed, pid):
        self.seed = seed
        self.pid = pid
        self._idx = [-1] * (ABS_LMAX + 1)
        self._val = [0.0] * (ABS_LMAX + 1)

    def incr(self, level, idx):
        """W increment over the dyadic cell (level, idx) of width 2^-level."""
        if self._idx[level] == idx:
            return self._val[level]
        if level == 0:
            v = gauss(self.seed, self.pid, STREAM_BRIDGE, 0, idx)
        else:
            parent = self.incr(level - 1, idx >> 1)
            dev = _BRIDGE_DEV[level] * gauss(self.seed, self.pid, STREAM_BRIDGE,
                                             level, idx >> 1)
            if idx & 1:
                v = parent * 0.5 - dev
            else:
                v = parent * 0.5 + dev
        self._idx[level] = idx
        self._val[level] = v
        return v


def csqrt_im(re, im):
    """Square root of re + i*im on the branch with nonnegative imaginary part.

    Stable two-case formula; a negative real input maps to i*sqrt(-re).
    """
    if im == 0.0:
        if re >= 0.0:
            return math.sqrt(re), 0.0
        return 0.0, math.sqrt(-re)
    m = math.sqrt(re * re + im * im)
    if re >= 0.0:
        t = math.sqrt(0.5 * (m + re))
        u = im / (2.0 * t)
        if u >= 0.0:
            return t, u
        return -t, -u
    u = math.sqrt(0.5 * (m - re))
    t = abs(im) / (2.0 * u)
    if im >= 0.0:
        return t, u
    return -t, u


def tip_distance(du, dts, k, a, x0, y0):
    """Euclidean distance from (x0, y0) to the trace point after step k.

    Backward composition of inverse slit maps over steps k..1 applied to
    the tip image 0.
    """
    vre = 0.0
    vim = 0.0
    for j in range(k - 1, -1, -1):
        tad = 2.0 * a * dts[j]
        valre = vre * vre - vim * vim - tad
        valim = 2.0 * vre * vim
        sre, sim = csqrt_im(valre, valim)
        if sim == 0.0 and vre < 0.0:
            sre = -sre
        vre = du[j] + sre
        vim = sim
    dx = vre - x0
    dy = vim - y0
    return math.sqrt(dx * dx + dy * dy)


def trace_points(du, dts, a, idx):
    """Trace points gamma(t_k) for the requested 1-based step indices.

    Backward composition of inverse slit maps, O(sum(idx)); index 0
    yields the curve base 0.
    """
    du = np.asarray(du, dtype=np.float64)
    dts = np.asarray(dts, dtype=np.float64)
    out = np.empty(len(idx), dtype=np.complex128)
    for n, k in enumerate(idx):
        vre = 0.0
        vim = 0.0
        for j in range(int(k) - 1, -1, -1):
            tad = 2.0 * a * dts[j]
            valre = vre * vre - vim * vim - tad
            valim = 2.0 * vre * vim
            sre, sim = csqrt_im(valre, valim)
            if sim == 0.0 and vre < 0.0:
                sre = -sre
            vre = du[j] + sre
            vim = sim
        out[n] = complex(vre, vim)
    return out


class _PathState:
    __slots__ = ("m", "zre", "zim", "absg", "ups", "sine", "active")

    def __init__(self, z_re, z_im):
        self.m = len(z_re)
        self.zre = [float(x) for x in z_re]
        self.zim = [float(y) for y in z_im]
        self.absg = [1.0] * self.m
        self.ups = list(self.zim)
        self.sine = [self.zim[i] / math.sqrt(self.zre[i] * self.zre[i] + self.zim[i] * self.zim[i])
                     for i in range(self.m)]
        self.active = [True] * self.m

    def snapshot(self):
        return (list(self.zre), list(self.zim), list(self.absg),
                list(self.ups), list(self.sine), list(self.active))

    def restore(self, snap):
        self.zre[:], self.zim[:], self.absg[:], self.ups[:], self.sine[:], self.active[:] = (
            list(snap[0]), list(snap[1]), list(snap[2]), list(snap[3]), list(snap[4]), list(snap[5]))


def _apply_increment(st, dU, dt, two_a, swallow_tol):
    """Advance all active marks through one slit step with driving jump dU.

    Returns a bitmask of marks swallowed during this step.  A swallowed
    mark keeps its pre-step Upsilon and sine (the value at T_z-).
    """
    swallowed = 0
    for i in range(st.m):
        if not st.active[i]:
            continue
        wre = st.zre[i] - dU
        wim = st.zim[i]
        valre = wre * wre - wim * wim + two_a * dt
        valim = 2.0 * wre * wim
        sre, sim = csqrt_im(valre, valim)
        if sim < swallow_tol:
            st.active[i] = False
            swallowed |= 1 << i
            continue
        st.absg[i] = st.absg[i] * math.sqrt((wre * wre + wim * wim) / (sre * sre + sim * sim))
        st.zre[i] = sre
        st.zim[i] = sim
        new_ups = sim / st.absg[i]
        if new_ups > st.ups[i] * (1.0 + 1e-9):
            raise RuntimeError("conformal radius increased along the flow")
        st.ups[i] = new_ups
        st.sine[i] = sim / math.sqrt(sre * sre + sim * sim)
    return swallowed


class _Runner:
    """State machine for one adaptive path; drives _apply_increment."""

    def __init__(self, out, p, pid, cfg):
        self.out = out
        self.p = p
        self.cfg = cfg
        self.bridge = _Bridge(cfg["seed"], pid)
        self.st = _PathState(cfg["z_re"], cfg["z_im"])
        m = self.st.m
        self.thr_done = [cfg["thr"][i] <= 0.0 for i in range(m)]
        self.lev_idx = [int(cfg["rec_offsets"][i]) for i in range(m)]
        self.n_steps = 0
        self.tie_flag = 0
        self.big_drops = 0
        self.n_evals = 0
        self.du_rec = []
        self.dt_rec = []
        self.min_d = [float(y) for y in cfg["z_im"]]
        self.last_eval = [-DIST_EVAL_STRIDE] * m
        self.last_exc_eval = -EXC_EVAL_STRIDE

    def record_crossings(self, t_end):
        """Threshold and level records after a committed sub-step.

        Returns a stop-reason event code or 0.  Simultaneous target/veto
        crossings resolve in favor of the deeper relative crossing (the
        recursive sub-stepping in exec_interval makes this case a measure-
        zero leftover at the finest level).
        """
        out, p, st, cfg = self.out, self.p, self.st, self.cfg
        mode = cfg["mode"]
        for i in range(st.m):
            j = self.lev_idx[i]
            hi = int(cfg["rec_offsets"][i + 1])
            while j < hi and st.ups[i] <= cfg["rec_levels"][j]:
                out["lev_ups"][p, j] = st.ups[i]
                out["lev_sine"][p, j] = st.sine[i]
                j += 1
            self.lev_idx[i] = j
        crossed0 = False
        crossed1 = False
        for i in range(st.m):
            if not self.thr_done[i] and st.ups[i] <= cfg["thr"][i]:
                self.thr_done[i] = True
                out["thr_t"][p, i] = t_end
                out["thr_ups"][p, i] = st.ups[i]
                out["thr_sine"][p, i] = st.sine[i]
                if i == 0:
                    crossed0 = True
                elif i == 1:
                    crossed1 = True
        if mode == MODE_THRESHOLD and crossed0:
            return STOP_THRESHOLD
        if mode == MODE_ORDERED:
            if crossed0 and crossed1:
                self.tie_flag = 1
                if st.ups[0] / cfg["thr"][0] <= st.ups[1] / cfg["thr"][1]:
                    return STOP_THRESHOLD
                return STOP_VETO_FIRST
            if crossed0:
                return STOP_THRESHOLD
            if crossed1:
                return STOP_VETO_FIRST
        return 0

    def exec_interval(self, tf, sf):
        """Execute the aligned dyadic interval [tf, tf+sf) of fine units.

        Splits recursively when the ordered mode sees both thresholds cross
        within one sub-step.  Returns a stop-reason event code or 0.
        """
        out, p, st, cfg = self.out, self.p, self.st, self.cfg
        mode = cfg["mode"]
        lvl = ABS_LMAX
        w = sf
        while w > 1:
            w >>= 1
            lvl -= 1
        dt = 2.0 ** (-lvl)
        dW = self.bridge.incr(lvl, tf >> (ABS_LMAX - lvl))
        if cfg["drift_coef"] != 0.0:
            r2 = st.zre[0] * st.zre[0] + st.zim[0] * st.zim[0]
            dU = -(cfg["drift_coef"] * st.zre[0] / r2 * dt + dW)
        else:
            dU = -dW
        snap = st.snapshot() if (mode == MODE_ORDERED and sf > 1) else None
        pre_ups = list(st.ups)
        swl = _apply_increment(st, dU, dt, 2.0 * cfg["a"], cfg["swallow_tol"])
        if mode == MODE_ORDERED and sf > 1:
            t_cross = (not self.thr_done[0]) and st.ups[0] <= cfg["thr"][0]
            v_cross = (not self.thr_done[1]) and st.ups[1] <= cfg["thr"][1]
            if t_cross and v_cross:
                st.restore(snap)
                ev = self.exec_interval(tf, sf >> 1)
                if ev:
                    return ev
                return self.exec_interval(tf + (sf >> 1), sf >> 1)
        # committed sub-step: bookkeeping
        self.n_steps += 1
        t_end = (tf + sf) * T_FINE
        for i in range(st.m):
            if swl & (1 << i):
                out["t_swallow"][p, i] = t_end
                out["status"][p, i] = 1
            elif st.active[i] and st.ups[i] < 0.5 * pre_ups[i]:
                self.big_drops += 1
        if cfg["want_min_dist"] or cfg["want_tip_exc"]:
            self.du_rec.append(dU)
            self.dt_rec.append(dt)
        k = len(self.du_rec)
        if cfg["want_min_dist"]:
            for i in range(st.m):
                if 0.5 * st.ups[i] >= self.min_d[i]:
                    continue
                proxy = st.ups[i] / (4.0 * st.sine[i]) if st.active[i] else 0.0
                if proxy < self.min_d[i] or k - self.last_eval[i] >= DIST_EVAL_STRIDE:
                    d = tip_distance(self.du_rec, self.dt_rec, k, cfg["a"],
                                     cfg["z_re"][i], cfg["z_im"][i])
                    if d < self.min_d[i]:
                        self.min_d[i] = d
                    self.last_eval[i] = k
                    self.n_evals += 1
        if cfg["record_driving"]:
            cell = tf >> (ABS_LMAX - cfg["level0"])
            cfg["du_base"][cell] += dU
            cfg["ups_base"][cell] = st.ups
            cfg["sine_base"][cell] = st.sine
        lev0_before = self.lev_idx[0]
        event = self.record_crossings(t_end)
        if cfg["want_tip_exc"]:
            off0 = int(cfg["rec_offsets"][0])
            if self.lev_idx[0] > off0 and (
                    self.lev_idx[0] != lev0_before or event != 0
                    or k - self.last_exc_eval >= EXC_EVAL_STRIDE):
                d = tip_distance(self.du_rec, self.dt_rec, k, cfg["a"],
                                 cfg["z_re"][0], cfg["z_im"][0])
                for j in range(off0, self.lev_idx[0]):
                    if d > out["exc_dist"][p, j]:
                        out["exc_dist"][p, j] = d
                self.last_exc_eval = k
        return event


def run_paths(seed, pid0, n_paths, a, drift_coef, z_re, z_im, level0, t_max,
              step_frac, thr, mode, stab_t0, stab_tol, swallow_tol,
              ups_refine_target, rec_levels, rec_offsets, want_min_dist,
              discard_on_swallow0, record_driving, want_tip_exc=0):
    """Run ``n_paths`` adaptive Loewner paths; see the module docstring.

    ``rec_levels`` is a flat array of descending Upsilon levels at which
    (Upsilon, sine) snapshots are taken; ``rec_offsets`` (length m+1)
    slices it per mark.  With ``want_tip_exc``, the maximal Euclidean tip
    distance from mark 0 after each of its level crossings is tracked in
    ``exc_dist``.  Returns a dict of per-path output arrays.
    """
    m = len(z_re)
    nlev_total = int(rec_offsets[m])
    dt0 = 2.0 ** (-level0)
    n_base = int(math.ceil(t_max / dt0 - 1e-12))
    t_fine_end = n_base << (ABS_LMAX - level0)
    reach_c = step_frac * step_frac / (2.0 * a)
    if record_driving and n_paths != 1:
        raise ValueError("record_driving supports a single path per call")

    out = {
        "status": np.zeros((n_paths, m), dtype=np.int8),
        "t_swallow": np.full((n_paths, m), np.nan),
        "ups": np.zeros((n_paths, m)),
        "ups_prev": np.full((n_paths, m), np.nan),
        "sine": np.zeros((n_paths, m)),
        "zre": np.zeros((n_paths, m)),
        "zim": np.zeros((n_paths, m)),
        "absg": np.zeros((n_paths, m)),
        "thr_t": np.full((n_paths, m), np.nan),
        "thr_ups": np.full((n_paths, m), np.nan),
        "thr_sine": np.full((n_paths, m), np.nan),
        "lev_ups": np.full((n_paths, nlev_total), np.nan),
        "lev_sine": np.full((n_paths, nlev_total), np.nan),
        "min_dist": np.full((n_paths, m), np.nan),
        "stop_reason": np.zeros(n_paths, dtype=np.int8),
        "t_stop": np.zeros(n_paths),
        "t_stop_fine": np.zeros(n_paths, dtype=np.int64),
        "n_steps": np.zeros(n_paths, dtype=np.int64),
        "ties": np.zeros(n_paths, dtype=np.int8),
        "n_dist_evals": np.zeros(n_paths, dtype=np.int64),
        "big_drops": np.zeros(n_paths, dtype=np.int64),
    }

    cfg = {
        "seed": seed, "a": a, "drift_coef": drift_coef,
        "z_re": [float(x) for x in z_re], "z_im": [float(y) for y in z_im],
        "level0": level0, "thr": [float(x) for x in thr], "mode": mode,
        "swallow_tol": swallow_tol,
        "rec_levels": np.asarray(rec_levels, dtype=np.float64),
        "rec_offsets": np.asarray(rec_offsets, dtype=np.int64),
        "want_min_dist": bool(want_min_dist),
        "record_driving": bool(record_driving),
    }
    if record_driving:
        out["du_base"] = np.zeros(n_base)
        out["ups_base"] = np.full((n_base, m), np.nan)
        out["sine_base"] = np.full((n_base, m), np.nan)
        cfg["du_base"] = out["du_base"]
        cfg["ups_base"] = out["ups_base"]
        cfg["sine_base"] = out["sine_base"]

    for p in range(n_paths):
        run = _Runner(out, p, pid0 + p, cfg)
        st = run.st
        t_fine = 0
        next_check = stab_t0
        checks_done = 0
        prev_ups = [math.nan] * m
        out_prev = [math.nan] * m

        reason = run.record_crossings(0.0)
        while reason == 0:
            if t_fine >= t_fine_end:
                reason = STOP_HORIZON
                break
            if not any(st.active):
                reason = STOP_ALL_SWALLOWED
                break
            if mode == MODE_ORDERED and (
                    (not st.active[0] and not run.thr_done[0])
                    or (not st.active[1] and not run.thr_done[1])):
                # a mark was swallowed above its threshold: the ordered
                # event can no longer happen on this path
                reason = STOP_NO_EVENT
                break

            # choose the step width
            cap = dt0
            for i in range(m):
                if st.active[i]:
                    z2 = st.zre[i] * st.zre[i] + st.zim[i] * st.zim[i]
                    if z2 < GUARD_FLOOR:
                        z2 = GUARD_FLOOR
                    c = reach_c * z2
                    if c < cap:
                        cap = c
            if ups_refine_target > 0.0 and st.active[0]:
                u4 = 4.0 * ups_refine_target
                if st.ups[0] < u4:
                    r = st.ups[0] / u4
                    c = dt0 * r * r
                    if c < cap:
                        cap = c
            level = level0
            width = dt0
            while level < ABS_LMAX and width > cap:
                width *= 0.5
                level += 1
            s_fine = 1 << (ABS_LMAX - level)
            if t_fine != 0:
                low = t_fine & (-t_fine)
                if low < s_fine:
                    s_fine = low

            reason = run.exec_interval(t_fine, s_fine)
            t_fine += s_fine
            if reason:
                break
            if discard_on_swallow0 and not st.active[0]:
                reason = STOP_DISCARDED
                break

            t_now = t_fine * T_FINE
            while t_now >= next_check * (1.0 - 1e-12):
                if checks_done >= 1:
                    stable = True
                    for i in range(m):
                        if st.active[i] and not (prev_ups[i] - st.ups[i] <= stab_tol * st.ups[i]):
                            stable = False
                            break
                    out_prev = list(prev_ups)
                    if stable:
                        reason = STOP_STABILIZED
                        break
                prev_ups = list(st.ups)
                next_check *= 2.0
                checks_done += 1

        for i in range(m):
            out["ups"][p, i] = st.ups[i]
            out["sine"][p, i] = st.sine[i]
            out["zre"][p, i] = st.zre[i]
            out["zim"][p, i] = st.zim[i]
            out["absg"][p, i] = st.absg[i]
            out["ups_prev"][p, i] = out_prev[i]
            if not st.active[i]:
                out["status"][p, i] = 1
            if cfg["want_min_dist"]:
                out["min_dist"][p, i] = run.min_d[i]
        out["stop_reason"][p] = reason
        out["t_stop"][p] = t_fine * T_FINE
        out["t_stop_fine"][p] = t_fine
        out["n_steps"][p] = run.n_steps
        out["ties"][p] = run.tie_flag
        out["n_dist_evals"][p] = run.n_evals
        out["big_drops"][p] = run.big_drops

    return out


def continue_paths(seed, pids, t_fine0, wzre, wzim, wabsg, a, level0, t_max,
                   step_frac, delta_thr, stab_t0, stab_tol, swallow_tol,
                   n_clones):
    """Independent continuations of captured paths for splitting estimators.

    For each input state i (one mark: the pending target w), runs
    ``n_clones`` continuations with fresh sequential noise (stream 1,
    counter hi = clone index) until the mark's Upsilon drops to
    ``delta_thr`` (success), the mark is swallowed, the radius stabilizes,
    or ``t_max`` is exceeded.  Returns per-path success counts.
    """
    n = len(pids)
    two_a = 2.0 * a
    dt0 = 2.0 ** (-level0)
    n_base = int(math.ceil(t_max / dt0 - 1e-12))
    t_fine_end = n_base << (ABS_LMAX - level0)
    reach_c = step_frac * step_frac / two_a

    succ = np.zeros(n, dtype=np.int64)
    horizon_hits = np.zeros(n, dtype=np.int64)
    steps = np.zeros(n, dtype=np.int64)

    for i in range(n):
        pid = int(pids[i])
        for c in range(n_clones):
            seq = 0
            zre = float(wzre[i])
            zim = float(wzim[i])
            absg = float(wabsg[i])
            ups = zim / absg
            t_fine = int(t_fine0[i])
            next_check = stab_t0
            while next_check * (1.0 - 1e-12) <= t_fine * T_FINE:
                next_check *= 2.0
            prev_ups = math.nan
            if ups <= delta_thr:
                succ[i] += 1
                continue
            while True:
                if t_fine >= t_fine_end:
                    horizon_hits[i] += 1
                    break
                cap = dt0
                z2 = zre * zre + zim * zim
                if z2 < GUARD_FLOOR:
                    z2 = GUARD_FLOOR
                c2 = reach_c * z2
                if c2 < cap:
                    cap = c2
                u4 = 4.0 * delta_thr
                if ups < u4:
                    r = ups / u4
                    c2 = dt0 * r * r
                    if c2 < cap:
                        cap = c2
                level = level0
                width = dt0
                while level < ABS_LMAX and width > cap:
                    width *= 0.5
                    level += 1
                s_fine = 1 << (ABS_LMAX - level)
                if t_fine != 0:
                    low = t_fine & (-t_fine)
                    if low < s_fine:
                        s_fine = low
                        lvl = ABS_LMAX
                        w = s_fine
                        while w > 1:
                            w >>= 1
                            lvl -= 1
                        level = lvl
                dt = 2.0 ** (-level)
                dW = math.sqrt(dt) * gauss(seed, pid, STREAM_CLONE, c, seq)
                seq += 1
                dU = -dW
                wre = zre - dU
                wim = zim
                valre = wre * wre - wim * wim + two_a * dt
                valim = 2.0 * wre * wim
                sre, sim = csqrt_im(valre, valim)
                steps[i] += 1
                t_fine += s_fine
                if sim < swallow_tol:
                    break
                absg = absg * math.sqrt((wre * wre + wim * wim) / (sre * sre + sim * sim))
                zre = sre
                zim = sim
                ups = sim / absg
                if ups <= delta_thr:
                    succ[i] += 1
                    break
                t_now = t_fine * T_FINE
                stop = False
                while t_now >= next_check * (1.0 - 1e-12):
                    if not math.isnan(prev_ups) and prev_ups - ups <= stab_tol * ups:
                        stop = True
                        break
                    prev_ups = ups
                    next_check *= 2.0
                if stop:
                    break
    return {"succ": succ, "horizon_hits": horizon_hits, "n_steps": steps}


def theta_paths(seed, pid0, n_paths, two_a, theta0, dt, n_steps, burn_steps,
                stride, max_depth=20):
    """Euler-Maruyama paths of d(theta) = two_a*cot(theta) dt + dW on (0, pi).

    Boundary-safe stepping: a step is recursively halved (up to
    ``max_depth`` levels) whenever the drift would move the angle by more
    than 0.1 or the 6-sigma noise range reaches half the distance to the
    boundary; a proposal that still exits raises StepSizeError at the
    deepest level.  Records the angle every ``stride`` base steps after
    ``burn_steps``; returns the samples as an (n_paths, n_keep) array.
    """
    n_keep = (n_steps - burn_steps) // stride
    out = np.empty((n_paths, n_keep))
    for p in range(n_paths):
        pid = pid0 + p
        seq = 0
        th = float(theta0)
        kept = 0
        for k in range(1, n_steps + 1):
            th, seq = _theta_step(seed, pid, th, dt, two_a, 0, max_depth, seq)
            if k > burn_steps and (k - burn_steps) % stride == 0:
                out[p, kept] = th
                kept += 1
    return out


def _theta_step(seed, pid, th, h, two_a, depth, max_depth, seq):
    edge = th if th < math.pi - th else math.pi - th
    drift = two_a * (math.cos(th) / math.sin(th))
    if depth < max_depth and (abs(drift) * h > 0.1 or 36.0 * h > edge * edge):
        th, seq = _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
        return _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
    xi = gauss(seed, pid, STREAM_THETA, 0, seq)
    seq += 1
    th2 = th + drift * h + math.sqrt(h) * xi
    if not 0.0 < th2 < math.pi:
        if depth >= max_depth:
            raise RuntimeError("angle step left (0, pi) at the deepest refinement")
        th, seq = _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
        return _theta_step(seed, pid, th, 0.5 * h, two_a, depth + 1, max_depth, seq)
    return th2, seq
