"""Closed-loop simulation of the observer-predictor feedback law.

Plant and sensing:

    Z'(t) = A Z(t) + B U(phi1(t))          (input applied with delay D1)
    Y(t)  = C Z(phi2(t))                   (measurement delayed by D2)

Control law, three stages evaluated at every step:

    xi'(t)  = phi2'(t) [A xi + B U(phi1(phi2(t))) + L (Y - C xi)]
    Zhat(t) = e^{A (t - phi2(t))} xi(t)
              + integral_{phi2(t)}^{t} e^{A(t-tau)} B U(phi1(tau)) dtau
    Phat(t) = e^{A psi(t)} Zhat(t)
              + integral_{t}^{t+psi(t)} e^{A(t+psi-s)} B U(phi1(s)) ds
    U(t)    = K Phat(t)

xi estimates the delayed state Z(phi2(t)); Zhat rolls it forward to the
present by variation of constants; Phat aims one prediction horizon
ahead so the input lands exactly when it is applied.

Fixed-step RK4 co-integrates (Z, xi); the convolution integrals use
composite trapezoid on the simulation grid with matrix weights taken
from a cached power table of e^{A dt}. Control histories interpolate
linearly. Lookups past the newest control sample clamp to it; such a
lookup beyond t + 1e-9 (possible only when the horizon estimate
overshoots) is counted on the trace.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .delays import DelayFunction, DelayPair, DelayParams, check_assumptions
from .errors import (AssumptionViolation, ConfigError, DegenerateTrace,
                     HistoryUnderflow, NormTooLarge, NotHurwitz)
from .horizon import HorizonSeries, oracle_psi, euler_psi, rk4_psi


# --------------------------------------------------------------------------
# matrix exponential

def matrix_exponential(M, t: float = 1.0) -> np.ndarray:
    """e^{M t} by scaling-and-squaring around an adaptive Taylor core.

    Sized for control work: square M with n <= 32, relative accuracy
    ~1e-12 for ||M t||_1 <= 20; refuses ||M t||_1 > 100.
    """
    A = np.asarray(M, dtype=float) * t
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    n = A.shape[0]
    if n > 32:
        raise ValueError(f"n = {n} above the supported 32")
    norm = float(np.linalg.norm(A, 1))
    if not np.isfinite(norm):
        raise NormTooLarge("non-finite matrix entries")
    if norm > 100.0:
        raise NormTooLarge(f"||M t||_1 = {norm:.3g} > 100")

    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    B = A / (2.0 ** s)
    E = np.eye(n)
    term = np.eye(n)
    for k in range(1, 40):
        term = term @ B / k
        E = E + term
        if np.linalg.norm(term, 1) <= 1e-18 * np.linalg.norm(E, 1):
            break
    for _ in range(s):
        E = E @ E
    return E


def _expm_frac(A: np.ndarray, delta: float, order: int = 8) -> np.ndarray:
    # Horner-form Taylor for tiny arguments (delta below one sim step).
    n = A.shape[0]
    B = A * delta
    E = np.eye(n)
    for k in range(order, 0, -1):
        E = np.eye(n) + (B @ E) / k
    return E


# --------------------------------------------------------------------------
# plant description and initial data

@dataclass(frozen=True)
class PlantSpec:
    """State-space data plus the nominal feedback and observer gains."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "C", "K", "L"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        n, m, p = self.n, self.m, self.p
        shapes = {"A": (n, n), "B": (n, m), "C": (p, n), "K": (m, n), "L": (n, p)}
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise ConfigError(f"plant matrix {name}: shape {got}, expected {want}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def validate_gains(self) -> None:
        """Both design targets must be Hurwitz for the law to make sense."""
        for name, M in (("A + B K", self.A + self.B @ self.K),
                        ("A - L C", self.A - self.L @ self.C)):
            worst = float(np.max(np.linalg.eigvals(M).real))
            if worst >= 0.0:
                raise NotHurwitz(f"{name} has an eigenvalue with Re = {worst:.3g} >= 0")


@dataclass(frozen=True)
class HistorySpec:
    """Initial history segment: a constant vector or a sample table."""

    kind: str
    const: np.ndarray | None = None
    times: np.ndarray | None = None
    values: np.ndarray | None = None

    @classmethod
    def constant(cls, v) -> "HistorySpec":
        return cls(kind="constant", const=np.atleast_1d(np.asarray(v, dtype=float)))

    @classmethod
    def table(cls, times, values) -> "HistorySpec":
        times = np.asarray(times, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] != times.size:
            raise ConfigError("history table: len(times) must match rows of values")
        return cls(kind="table", times=times, values=values)

    def sample(self, ts: np.ndarray, dim: int) -> np.ndarray:
        if self.kind == "constant":
            if self.const.size != dim:
                raise ConfigError(f"history constant has dim {self.const.size}, expected {dim}")
            return np.tile(self.const, (ts.size, 1))
        if self.values.shape[1] != dim:
            raise ConfigError(f"history table has dim {self.values.shape[1]}, expected {dim}")
        if ts.min() < self.times.min() - 1e-9:
            raise HistoryUnderflow(
                f"history table starts at {self.times.min():g}, need {ts.min():g}")
        out = np.empty((ts.size, dim))
        for j in range(dim):
            out[:, j] = np.interp(ts, self.times, self.values[:, j])
        return out


@dataclass(frozen=True)
class InitialData:
    Z0: np.ndarray
    xi0: np.ndarray
    u_history: HistorySpec
    z_history: HistorySpec

    def __post_init__(self):
        object.__setattr__(self, "Z0", np.atleast_1d(np.asarray(self.Z0, dtype=float)))
        object.__setattr__(self, "xi0", np.atleast_1d(np.asarray(self.xi0, dtype=float)))

    @classmethod
    def basic(cls, Z0, xi0, m: int) -> "InitialData":
        """Zero input history, state history frozen at Z0."""
        return cls(Z0=Z0, xi0=xi0,
                   u_history=HistorySpec.constant(np.zeros(m)),
                   z_history=HistorySpec.constant(np.asarray(Z0, dtype=float)))


# --------------------------------------------------------------------------
# history buffer

class HistoryBuffer:
    """Append-only time series with linear interpolation lookups."""

    def __init__(self, dim: int, capacity: int = 1024):
        self.dim = dim
        self._t = np.empty(capacity)
        self._v = np.empty((capacity, dim))
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def t_min(self) -> float:
        return float(self._t[0])

    @property
    def t_max(self) -> float:
        return float(self._t[self._n - 1])

    def times(self) -> np.ndarray:
        return self._t[: self._n]

    def samples(self) -> np.ndarray:
        return self._v[: self._n]

    def append(self, t: float, v) -> None:
        if self._n and t <= self._t[self._n - 1]:
            raise ValueError(f"append at t = {t:g} not after t_max = {self.t_max:g}")
        if self._n == self._t.size:
            self._t = np.concatenate([self._t, np.empty(self._n)])
            self._v = np.concatenate([self._v, np.empty((self._n, self.dim))])
        self._t[self._n] = t
        self._v[self._n] = v
        self._n += 1

    def value(self, t: float) -> np.ndarray:
        """Scalar-time lookup; must lie inside the buffered interval."""
        n = self._n
        ts = self._t
        if t < ts[0] - 1e-12:
            raise HistoryUnderflow(f"lookup at t = {t:g} before buffer start {ts[0]:g}")
        if t >= ts[n - 1]:
            if t > ts[n - 1] + 1e-9:
                raise HistoryUnderflow(
                    f"lookup at t = {t:g} after buffer end {ts[n - 1]:g}")
            return self._v[n - 1].copy()
        i = int(np.searchsorted(ts[:n], t, side="right")) - 1
        i = max(i, 0)
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return self._v[i] + w * (self._v[i + 1] - self._v[i])

    def values_at(self, ts, clamp_end: bool = False) -> np.ndarray:
        """Vectorized lookup; clamp_end holds queries past t_max at the
        newest sample (the caller decides whether that is an event worth
        counting)."""
        q = np.asarray(ts, dtype=float)
        n = self._n
        t_arr = self._t[:n]
        v = self._v[:n]
        if np.any(q < t_arr[0] - 1e-12):
            raise HistoryUnderflow(
                f"lookup at t = {q.min():g} before buffer start {t_arr[0]:g}")
        if not clamp_end and np.any(q > t_arr[-1] + 1e-9):
            raise HistoryUnderflow(
                f"lookup at t = {q.max():g} after buffer end {t_arr[-1]:g}")
        if n == 1:
            return np.tile(v[0], (q.size, 1))
        qc = np.clip(q, t_arr[0], t_arr[-1])
        i = np.clip(np.searchsorted(t_arr, qc, side="right") - 1, 0, n - 2)
        w = (qc - t_arr[i]) / (t_arr[i + 1] - t_arr[i])
        return v[i] + w[:, None] * (v[i + 1] - v[i])

    def window_max_norm2(self, t_lo: float) -> float:
        """max |v|^2 over buffered samples with t >= t_lo."""
        n = self._n
        i0 = int(np.searchsorted(self._t[:n], t_lo - 1e-12))
        seg = self._v[min(i0, n - 1): n]
        return float(np.einsum("ij,ij->i", seg, seg).max())


# --------------------------------------------------------------------------
# convolution quadrature

class _ExpCache:
    """Powers of e^{A dt}: matrix weight for any lag j*dt + delta."""

    def __init__(self, A: np.ndarray, dt: float):
        self.A = A
        self.dt = dt
        n = A.shape[0]
        self._pow = np.empty((64, n, n))
        self._pow[0] = np.eye(n)
        self._E = matrix_exponential(A, dt)
        self._len = 1

    def powers(self, j_max: int) -> np.ndarray:
        while self._len <= j_max:
            if self._len == self._pow.shape[0]:
                self._pow = np.concatenate([self._pow, np.empty_like(self._pow)])
            self._pow[self._len] = self._pow[self._len - 1] @ self._E
            self._len += 1
        return self._pow

    def frac(self, delta: float) -> np.ndarray:
        return _expm_frac(self.A, delta)


def _trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    w = np.zeros(nodes.size)
    if nodes.size < 2:
        return w
    d = np.diff(nodes)
    w[0] = d[0] / 2
    w[-1] = d[-1] / 2
    w[1:-1] = (d[:-1] + d[1:]) / 2
    return w


def _zhat_quad(plant: PlantSpec, d1, d2, u_buf: HistoryBuffer, xi: np.ndarray,
               t: float, dt: float, cache: _ExpCache) -> np.ndarray:
    """Zhat(t): roll the delayed estimate forward by variation of constants."""
    D2 = float(d2.value(t))
    p2 = t - D2
    # grid nodes of the sim step lattice inside (p2, t], plus p2 itself
    k_min = int(np.floor(p2 / dt + 1e-9)) + 1
    n_now = round(t / dt)
    js = np.arange(n_now - k_min, -1, -1)              # lags of grid nodes, in dt units
    nodes = np.concatenate([[p2], (k_min + np.arange(js.size)) * dt])

    j_e = int(np.floor(D2 / dt + 1e-12))
    pw = cache.powers(max(j_e, int(js[0])))
    W_end = pw[j_e] @ cache.frac(D2 - j_e * dt)

    w = _trapezoid_weights(nodes)
    u = u_buf.values_at(nodes - np.asarray(d1.value(nodes)))
    bu = (u @ plant.B.T) * w[:, None]
    mats = np.concatenate([W_end[None], pw[js]])
    integral = np.einsum("jab,jb->a", mats, bu)
    return W_end @ xi + integral


def _phat_quad(plant: PlantSpec, d1, u_buf: HistoryBuffer, zhat: np.ndarray,
               psi: float, t: float, dt: float, cache: _ExpCache) -> tuple[np.ndarray, int]:
    """Phat(t): aim one horizon ahead; returns (Phat, noncausal lookup count)."""
    if psi <= 0.0:
        return matrix_exponential(plant.A, psi) @ zhat, 0
    M = int(np.floor(psi / dt + 1e-12))
    delta = psi - M * dt
    frac = cache.frac(delta)
    pw = cache.powers(M)

    s_grid = t + np.arange(M + 1) * dt
    q_grid = s_grid - np.asarray(d1.value(s_grid))
    s_end = t + psi
    q_end = s_end - float(d1.value(s_end))

    clamped = int(np.sum(q_grid > t + 1e-9)) + int(q_end > t + 1e-9)

    u_grid = u_buf.values_at(q_grid, clamp_end=True)
    u_end = u_buf.values_at(np.array([q_end]), clamp_end=True)[0]

    if delta > 1e-15:
        w = np.full(M + 1, dt)
        w[0] = dt / 2
        w[-1] = (dt + delta) / 2
        w_end = delta / 2
    else:
        w = np.full(M + 1, dt)
        w[0] = dt / 2
        w[-1] = dt / 2
        w_end = 0.0
    if M == 0:
        w[:] = psi / 2 if delta > 1e-15 else 0.0

    bu = (u_grid @ plant.B.T) * w[:, None]
    core = pw[M] @ zhat + np.einsum("jab,jb->a", pw[np.arange(M, -1, -1)], bu)
    return frac @ core + w_end * (plant.B @ u_end), clamped


def reconstruct_zhat(plant: PlantSpec, pair: DelayPair, xi, u_buffer: HistoryBuffer,
                     t: float, dt: float = 1e-3) -> np.ndarray:
    """Standalone present-state reconstruction (builds its own caches)."""
    cache = _ExpCache(plant.A, dt)
    return _zhat_quad(plant, pair.d1, pair.d2, u_buffer, np.asarray(xi, dtype=float),
                      t, dt, cache)


def predict_phat(plant: PlantSpec, pair: DelayPair, zhat, u_buffer: HistoryBuffer,
                 psi_hat: float, t: float, dt: float = 1e-3) -> tuple[np.ndarray, int]:
    """Standalone prediction; returns (Phat, count of non-causal lookups)."""
    cache = _ExpCache(plant.A, dt)
    return _phat_quad(plant, pair.d1, u_buffer, np.asarray(zhat, dtype=float),
                      float(psi_hat), t, dt, cache)


# --------------------------------------------------------------------------
# simulation

@dataclass
class SimulationTrace:
    t: np.ndarray
    Z: np.ndarray
    xi: np.ndarray
    Zhat: np.ndarray
    Phat: np.ndarray
    U: np.ndarray
    Y: np.ndarray
    psi_hat: np.ndarray
    gamma: np.ndarray
    dt: float
    method: str
    clamp_count: int = 0

    def columns(self) -> list:
        n = self.Z.shape[1]
        m = self.U.shape[1]
        p = self.Y.shape[1]
        cols = ["t"]
        cols += [f"Z_{i+1}" for i in range(n)]
        cols += [f"xi_{i+1}" for i in range(n)]
        cols += [f"Zhat_{i+1}" for i in range(n)]
        cols += [f"Phat_{i+1}" for i in range(n)]
        cols += [f"U_{i+1}" for i in range(m)]
        cols += [f"Y_{i+1}" for i in range(p)]
        cols += ["psi_hat", "gamma"]
        return cols

    def to_csv(self, path) -> None:
        data = np.column_stack([self.t, self.Z, self.xi, self.Zhat, self.Phat,
                                self.U, self.Y, self.psi_hat, self.gamma])
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(self.columns())
            for row in data:
                w.writerow([f"{x:.17g}" for x in row])

    @classmethod
    def from_csv(cls, path) -> "SimulationTrace":
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        header, body = rows[0], np.array([[float(x) for x in r] for r in rows[1:]])
        counts = {}
        for c in header:
            base = c.rsplit("_", 1)[0] if "_" in c and c.split("_")[-1].isdigit() else c
            counts[base] = counts.get(base, 0) + 1
        n, m, p = counts.get("Z", 0), counts.get("U", 0), counts.get("Y", 0)
        i = 1
        Z = body[:, i:i + n]; i += n
        xi = body[:, i:i + n]; i += n
        Zhat = body[:, i:i + n]; i += n
        Phat = body[:, i:i + n]; i += n
        U = body[:, i:i + m]; i += m
        Y = body[:, i:i + p]; i += p
        t = body[:, 0]
        dt = float(t[1] - t[0]) if t.size > 1 else 0.0
        return cls(t=t, Z=Z, xi=xi, Zhat=Zhat, Phat=Phat, U=U, Y=Y,
                   psi_hat=body[:, i], gamma=body[:, i + 1], dt=dt, method="unknown")


def _make_horizon_fn(horizon, d1, T: float, dt: float):
    if callable(horizon) and not isinstance(horizon, HorizonSeries):
        return horizon, "callable"
    if isinstance(horizon, HorizonSeries):
        if horizon.grid[0] > 1e-12 or horizon.grid[-1] < T - 1e-9:
            raise ConfigError(
                f"horizon series covers [{horizon.grid[0]:g}, {horizon.grid[-1]:g}], "
                f"simulation needs [0, {T:g}]")
        return (lambda t: float(horizon.interp(t))), horizon.method
    if horizon == "oracle":
        series = oracle_psi(d1, np.arange(round(T / dt) + 1) * dt)
    elif horizon == "euler":
        series = euler_psi(d1, dt, round(T / dt) * dt)
    elif horizon == "rk4":
        series = rk4_psi(d1, dt, round(T / dt) * dt)
    else:
        raise ConfigError(f"unknown horizon method {horizon!r}")
    return (lambda t: float(series.interp(t))), series.method


def simulate(plant: PlantSpec, pair: DelayPair, init: InitialData, T: float,
             dt: float = 1e-3, horizon="oracle", validate: bool = True) -> SimulationTrace:
    """Run the closed loop on [0, T]; see the module docstring for the law."""
    plant.validate_gains()
    n, m, p = plant.n, plant.m, plant.p
    if init.Z0.size != n or init.xi0.size != n:
        raise ConfigError(f"Z0/xi0 must have dim {n}")
    N = round(T / dt)
    if abs(N * dt - T) > 1e-9 * max(1.0, T) or N < 1:
        raise ConfigError(f"T = {T:g} must be a positive integer multiple of dt = {dt:g}")

    if validate:
        r1, r2 = pair.reports(T, min(dt, 1e-3))
        for label, r in (("d1", r1), ("d2", r2)):
            if not r.valid:
                raise AssumptionViolation(
                    f"{label} violates the delay assumptions at t = {r.first_violation_time:g}",
                    report=r)
        if dt > r1.pi0_star / 2 or dt > r2.pi0_star / 2:
            raise ConfigError(
                f"dt = {dt:g} too coarse: needs dt <= pi0*/2 = "
                f"{min(r1.pi0_star, r2.pi0_star) / 2:g} so stage lookups stay historical")

    d1, d2 = pair.d1, pair.d2
    D2_0 = float(d2.value(0.0))
    p2_0 = -D2_0
    if isinstance(d1, DelayParams) and d1.b != 0.0 and p2_0 <= -1.0 + 1e-9:
        raise ConfigError(
            f"phi2(0) = {p2_0:g} <= -1: the 1/(1+t) delay term cannot be evaluated "
            "over the required input history")

    horizon_fn, method = _make_horizon_fn(horizon, d1, T, dt)

    # seed the state history on [phi2(0), 0] and the input history on
    # [min phi1 over that range, 0)
    kz = int(np.ceil(D2_0 / dt)) + 2
    ts_z = np.arange(-kz, 0) * dt
    z_hist = init.z_history.sample(ts_z, n)
    z_buf = HistoryBuffer(n, capacity=kz + N + 2)
    for t_i, v in zip(ts_z, z_hist):
        z_buf.append(t_i, v)
    z_buf.append(0.0, init.Z0)

    scan = np.linspace(p2_0, 0.0, max(kz, 2) * 4)
    u_low = float(np.min(scan - np.asarray(d1.value(scan))))
    ku = int(np.ceil(-u_low / dt)) + 2
    ts_u = np.arange(-ku, 0) * dt
    u_hist = init.u_history.sample(ts_u, m)
    u_buf = HistoryBuffer(m, capacity=ku + N + 2)
    for t_i, v in zip(ts_u, u_hist):
        u_buf.append(t_i, v)

    cache = _ExpCache(plant.A, dt)
    A, B, C, K, L = plant.A, plant.B, plant.C, plant.K, plant.L

    def rhs(tau: float, Z: np.ndarray, xi: np.ndarray):
        u1 = u_buf.value(tau - float(d1.value(tau)))
        p2 = tau - float(d2.value(tau))
        u12 = u_buf.value(p2 - float(d1.value(p2)))
        y = C @ z_buf.value(p2)
        dZ = A @ Z + B @ u1
        dxi = (1.0 - float(d2.slope(tau))) * (A @ xi + B @ u12 + L @ (y - C @ xi))
        return dZ, dxi

    tr_t = np.arange(N + 1) * dt
    tr = {name: np.empty((N + 1, dim)) for name, dim in
          (("Z", n), ("xi", n), ("Zhat", n), ("Phat", n), ("U", m), ("Y", p))}
    tr_psi = np.empty(N + 1)
    tr_gamma = np.empty(N + 1)
    clamp_count = 0

    Z = init.Z0.copy()
    xi = init.xi0.copy()
    for i in range(N + 1):
        t = i * dt
        y = C @ z_buf.value(t - float(d2.value(t)))
        zhat = _zhat_quad(plant, d1, d2, u_buf, xi, t, dt, cache)
        psi = horizon_fn(t)
        phat, n_cl = _phat_quad(plant, d1, u_buf, zhat, psi, t, dt, cache)
        clamp_count += n_cl
        u = K @ phat
        u_buf.append(t, u)

        tr["Z"][i] = Z
        tr["xi"][i] = xi
        tr["Zhat"][i] = zhat
        tr["Phat"][i] = phat
        tr["U"][i] = u
        tr["Y"][i] = y
        tr_psi[i] = psi
        err = Z - zhat
        tr_gamma[i] = float(Z @ Z + err @ err
                            + u_buf.window_max_norm2(t - float(d1.value(t))))

        if i == N:
            break
        # classical RK4 on the stacked state
        k1z, k1x = rhs(t, Z, xi)
        k2z, k2x = rhs(t + dt / 2, Z + dt / 2 * k1z, xi + dt / 2 * k1x)
        k3z, k3x = rhs(t + dt / 2, Z + dt / 2 * k2z, xi + dt / 2 * k2x)
        k4z, k4x = rhs(t + dt, Z + dt * k3z, xi + dt * k3x)
        Z = Z + dt * (k1z + 2 * k2z + 2 * k3z + k4z) / 6
        xi = xi + dt * (k1x + 2 * k2x + 2 * k3x + k4x) / 6
        z_buf.append(t + dt, Z)

    return SimulationTrace(t=tr_t, Z=tr["Z"], xi=tr["xi"], Zhat=tr["Zhat"],
                           Phat=tr["Phat"], U=tr["U"], Y=tr["Y"], psi_hat=tr_psi,
                           gamma=tr_gamma, dt=dt, method=method,
                           clamp_count=clamp_count)


def gamma_decay_fit(trace: SimulationTrace, window: tuple | None = None) -> tuple[float, float]:
    """Fit gamma(t) ~ M e^{-C t} on the post-transient window.

    Least squares on log gamma over [T/4, T] by default; returns (M, C).
    """
    T = float(trace.t[-1])
    lo, hi = window if window is not None else (T / 4, T)
    mask = (trace.t >= lo - 1e-12) & (trace.t <= hi + 1e-12) & (trace.gamma > 0)
    if int(mask.sum()) < 10:
        raise DegenerateTrace(f"only {int(mask.sum())} positive points in the fit window")
    slope, intercept = np.polyfit(trace.t[mask], np.log(trace.gamma[mask]), 1)
    return float(np.exp(intercept)), float(-slope)
