"""Inference for the learned delay -> horizon operator.

The operator maps the delay function D sampled on a fixed uniform grid of
`resolution` points over [0, H] to the horizon psi on the same grid:

    normalize -> [d_norm ; x] -> lift (2 -> C) ->
    L x { irfft(R_l * rfft(v)|_modes) + W_l v + b_l -> gelu } ->
    project (C -> C -> 1, one hidden gelu, linear head) -> denormalize

Conventions pinned by the container contract (the trainer must mirror
them exactly):
  * half-spectrum rfft/irfft with numpy scaling (inverse carries 1/n);
    imaginary parts of the DC and Nyquist bins do not reach the output,
    so their weight components are dead parameters kept at zero;
  * the coordinate channel is x = j/(n-1) in [0, 1], not stat-normalized;
  * activation is the tanh-form gelu, identical formula on both sides.

Training lives outside the primary component; this module only loads,
validates and evaluates weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import read_container, write_container
from .delays import DelayFunction
from .errors import LengthMismatch, NonFiniteWeight, ShapeMismatch
from .horizon import HorizonSeries

ACTIVATION = "gelu_tanh"
_SQRT_2_OVER_PI = 0.7978845608028654


def gelu(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * x * (1.0 + np.tanh(_SQRT_2_OVER_PI * (x + 0.044715 * x ** 3)))


@dataclass
class OperatorWeights:
    resolution: int
    modes: int
    channels: int
    layers: int
    H: float
    lift_w: np.ndarray                 # (C, 2)
    lift_b: np.ndarray                 # (C,)
    spectral: list                     # layers x complex (C, C, modes)
    pointwise_w: list                  # layers x (C, C)
    pointwise_b: list                  # layers x (C,)
    project_w1: np.ndarray             # (C, C)
    project_b1: np.ndarray             # (C,)
    project_w2: np.ndarray             # (1, C)
    project_b2: np.ndarray             # (1,)
    in_mean: np.ndarray                # scalar or (n,)
    in_std: np.ndarray
    out_mean: np.ndarray
    out_std: np.ndarray
    metadata: dict = field(default_factory=dict)

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.H, self.resolution)


_META_KEYS = ("resolution", "modes", "channels", "layers", "input_channels",
              "activation", "H")


def _expect(tensors: dict, name: str, shape: tuple) -> np.ndarray:
    if name not in tensors:
        raise ShapeMismatch(f"missing tensor {name!r}")
    arr = tensors[name]
    if tuple(arr.shape) != tuple(shape):
        raise ShapeMismatch(f"tensor {name!r}: shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):       # complex: checks both components
        raise NonFiniteWeight(f"tensor {name!r} contains non-finite values")
    return arr


def _expect_stat(tensors: dict, name: str, n: int) -> np.ndarray:
    if name not in tensors:
        raise ShapeMismatch(f"missing tensor {name!r}")
    arr = np.asarray(tensors[name], dtype=float)
    if arr.shape not in ((), (1,), (n,)):
        raise ShapeMismatch(f"tensor {name!r}: shape {arr.shape}, expected scalar or ({n},)")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteWeight(f"tensor {name!r} contains non-finite values")
    return arr.reshape(-1) if arr.shape == (1,) else arr


def load_weights(path) -> OperatorWeights:
    metadata, tensors = read_container(path)
    for k in _META_KEYS:
        if k not in metadata:
            raise ShapeMismatch(f"weights metadata missing key {k!r}")
    if metadata["activation"] != ACTIVATION:
        raise ShapeMismatch(
            f"activation {metadata['activation']!r} not supported (want {ACTIVATION!r})")
    if metadata["input_channels"] != 2:
        raise ShapeMismatch("input-channel convention must be 2: [D_norm; coordinate]")

    n = int(metadata["resolution"])
    m = int(metadata["modes"])
    C = int(metadata["channels"])
    L = int(metadata["layers"])
    if not (n >= 2 and 1 <= m <= n // 2 + 1 and C >= 1 and L >= 1):
        raise ShapeMismatch(f"inconsistent architecture: n={n}, modes={m}, C={C}, L={L}")

    w = OperatorWeights(
        resolution=n, modes=m, channels=C, layers=L, H=float(metadata["H"]),
        lift_w=_expect(tensors, "lift_w", (C, 2)),
        lift_b=_expect(tensors, "lift_b", (C,)),
        spectral=[_expect(tensors, f"spectral_{l}", (C, C, m)) for l in range(L)],
        pointwise_w=[_expect(tensors, f"pointwise_w_{l}", (C, C)) for l in range(L)],
        pointwise_b=[_expect(tensors, f"pointwise_b_{l}", (C,)) for l in range(L)],
        project_w1=_expect(tensors, "project_w1", (C, C)),
        project_b1=_expect(tensors, "project_b1", (C,)),
        project_w2=_expect(tensors, "project_w2", (1, C)),
        project_b2=_expect(tensors, "project_b2", (1,)),
        in_mean=_expect_stat(tensors, "in_mean", n),
        in_std=_expect_stat(tensors, "in_std", n),
        out_mean=_expect_stat(tensors, "out_mean", n),
        out_std=_expect_stat(tensors, "out_std", n),
        metadata=metadata,
    )
    for name, std in (("in_std", w.in_std), ("out_std", w.out_std)):
        if np.any(np.asarray(std) <= 0):
            raise NonFiniteWeight(f"{name} must be strictly positive")
    return w


def save_weights(path, w: OperatorWeights, extra_metadata: dict | None = None) -> None:
    metadata = {
        "resolution": w.resolution, "modes": w.modes, "channels": w.channels,
        "layers": w.layers, "input_channels": 2, "activation": ACTIVATION,
        "H": w.H,
    }
    metadata.update(w.metadata or {})
    metadata.update(extra_metadata or {})
    tensors = {
        "lift_w": np.asarray(w.lift_w, np.float32),
        "lift_b": np.asarray(w.lift_b, np.float32),
    }
    for l in range(w.layers):
        tensors[f"spectral_{l}"] = np.asarray(w.spectral[l], np.complex64)
        tensors[f"pointwise_w_{l}"] = np.asarray(w.pointwise_w[l], np.float32)
        tensors[f"pointwise_b_{l}"] = np.asarray(w.pointwise_b[l], np.float32)
    tensors.update({
        "project_w1": np.asarray(w.project_w1, np.float32),
        "project_b1": np.asarray(w.project_b1, np.float32),
        "project_w2": np.asarray(w.project_w2, np.float32),
        "project_b2": np.asarray(w.project_b2, np.float32),
        "in_mean": np.asarray(w.in_mean, np.float64),
        "in_std": np.asarray(w.in_std, np.float64),
        "out_mean": np.asarray(w.out_mean, np.float64),
        "out_std": np.asarray(w.out_std, np.float64),
    })
    write_container(path, metadata, tensors)


def spectral_apply(R: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """One spectral path: keep the lowest `modes` bins, mix channels there.

    v is (n, C) real; R is complex (C, C, modes). Linear in v by
    construction -- the truncation and the per-mode channel mixing are
    both linear maps.
    """
    m = R.shape[2]
    F = np.fft.rfft(v, axis=0)                       # (n//2+1, C)
    G = np.zeros_like(F)
    G[:m] = np.einsum("oik,ki->ko", R, F[:m])
    return np.fft.irfft(G, n=n, axis=0)


def fno_forward(w: OperatorWeights, d_values) -> np.ndarray:
    """Evaluate the operator on one delay sample vector (resolution,)."""
    d = np.asarray(d_values, dtype=float)
    if d.shape != (w.resolution,):
        raise LengthMismatch(f"input length {d.shape}, operator resolution {w.resolution}")

    n = w.resolution
    x = np.arange(n, dtype=float) / (n - 1)
    dn = (d - w.in_mean) / w.in_std
    v = np.stack([dn, x], axis=1)                    # (n, 2)
    v = v @ np.asarray(w.lift_w, float).T + np.asarray(w.lift_b, float)

    for l in range(w.layers):
        s = spectral_apply(np.asarray(w.spectral[l], complex), v, n)
        p = v @ np.asarray(w.pointwise_w[l], float).T + np.asarray(w.pointwise_b[l], float)
        v = gelu(s + p)

    h = gelu(v @ np.asarray(w.project_w1, float).T + np.asarray(w.project_b1, float))
    y = (h @ np.asarray(w.project_w2, float).T + np.asarray(w.project_b2, float))[:, 0]
    return y * w.out_std + w.out_mean


def neural_psi(w: OperatorWeights, delay: DelayFunction) -> HorizonSeries:
    """Sample D on the operator grid, evaluate, return a horizon series."""
    grid = w.grid()
    values = fno_forward(w, np.asarray(delay.value(grid)))
    return HorizonSeries(grid, values, "neural", float(grid[1] - grid[0]))


@dataclass(frozen=True)
class ConsistencyReport:
    """How well a horizon series satisfies phi(t + psi) = t."""

    grid: np.ndarray
    residuals: np.ndarray
    max_residual: float
    mean_residual: float


def consistency_error(delay: DelayFunction, series: HorizonSeries) -> ConsistencyReport:
    res = series.residuals(delay)
    return ConsistencyReport(grid=series.grid, residuals=res,
                             max_residual=float(res.max()),
                             mean_residual=float(res.mean()))


def synth_constant_weights(constant: float, resolution: int = 1024,
                           modes: int = 32, channels: int = 64,
                           layers: int = 4, H: float = 12.0) -> OperatorWeights:
    """All-zero network whose linear head outputs `constant` everywhere.

    Zero lift and zero layer weights pin every activation at gelu(0) = 0,
    so the output is exactly the projection bias. Used to exercise the
    neural path without any trained weights.
    """
    C, m = channels, modes
    return OperatorWeights(
        resolution=resolution, modes=m, channels=C, layers=layers, H=H,
        lift_w=np.zeros((C, 2), np.float32), lift_b=np.zeros(C, np.float32),
        spectral=[np.zeros((C, C, m), np.complex64) for _ in range(layers)],
        pointwise_w=[np.zeros((C, C), np.float32) for _ in range(layers)],
        pointwise_b=[np.zeros(C, np.float32) for _ in range(layers)],
        project_w1=np.zeros((C, C), np.float32), project_b1=np.zeros(C, np.float32),
        project_w2=np.zeros((1, C), np.float32),
        project_b2=np.array([constant], np.float32),
        in_mean=np.array(0.0), in_std=np.array(1.0),
        out_mean=np.array(0.0), out_std=np.array(1.0),
    )
