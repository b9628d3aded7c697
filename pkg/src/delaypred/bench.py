"""Dataset generation for the learned horizon solver, and a small
benchmark harness comparing the solver variants.

Datasets are reproducible down to the byte: sample i always uses the
derived seed (base_seed + i), so the same (seed, n_samples, resolution)
triple yields the same container regardless of worker count or the
order workers finish in. The train/val/test split is a seeded shuffle
of the index range with an 80/10/10 cut.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .container import write_container
from .delays import DEFAULT_RANGES, DelayFunction, ParamRanges, sample_delay
from .errors import NumericError
from .horizon import (HorizonSeries, euler_psi, oracle_psi, rk4_psi,
                      windowed_psi)
from .rng import SplitMix64


# --------------------------------------------------------------------------
# dataset generation

def _one_sample(args) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    seed, ranges, H, resolution = args
    params, _ = sample_delay(seed, ranges=ranges, horizon=H)
    grid = np.linspace(0.0, H, resolution)
    d = np.asarray(params.value(grid))
    psi = oracle_psi(params, grid).values
    return params.as_row(), d, psi


def split_indices(n_samples: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded shuffle, then 80/10/10 train/val/test."""
    order = list(range(n_samples))
    SplitMix64(seed).shuffle(order)
    n_train = int(0.8 * n_samples)
    n_val = int(0.1 * n_samples)
    idx = np.asarray(order, dtype=np.float64)
    return idx[:n_train], idx[n_train:n_train + n_val], idx[n_train + n_val:]


def gen_dataset(n_samples: int, seed: int, path, resolution: int = 1024,
                H: float = 12.0, ranges: ParamRanges = DEFAULT_RANGES,
                threads: int = 1, extra_metadata: dict | None = None) -> dict:
    """Sample delays, solve their horizons on a shared grid, write one
    container. Returns the metadata that was stored."""
    if n_samples < 1:
        raise NumericError("n_samples must be positive")
    jobs = [(seed + i, ranges, H, resolution) for i in range(n_samples)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_one_sample, jobs, chunksize=16))
    else:
        rows = [_one_sample(j) for j in jobs]

    params = np.stack([r[0] for r in rows])
    D = np.stack([r[1] for r in rows])
    psi = np.stack([r[2] for r in rows])
    train_idx, val_idx, test_idx = split_indices(n_samples, seed)

    metadata = {
        "H": H,
        "kind": "horizon-dataset",
        "n_samples": n_samples,
        "resolution": resolution,
        "seed": seed,
    }
    if extra_metadata:
        metadata.update(extra_metadata)
    write_container(path, metadata, {
        "D": D,
        "grid": np.linspace(0.0, H, resolution),
        "params": params,
        "psi": psi,
        "test_idx": test_idx,
        "train_idx": train_idx,
        "val_idx": val_idx,
    })
    return metadata


# --------------------------------------------------------------------------
# benchmark

@dataclass(frozen=True)
class BenchResult:
    method: str
    n_evals: int
    mean_ms: float
    p50_ms: float
    p95_ms: float
    mean_residual: float
    failures: int


def _run_method(method: str, delay: DelayFunction, h: float, T: float,
                weights=None, window: float = 1.0) -> HorizonSeries:
    if method == "oracle":
        grid = np.arange(round(T / h) + 1) * h
        return oracle_psi(delay, grid)
    if method == "euler":
        return euler_psi(delay, h, T)
    if method == "rk4":
        return rk4_psi(delay, h, T)
    if method == "windowed":
        return windowed_psi(delay, window, T, h)
    if method == "fno":
        from .fno import neural_psi
        if weights is None:
            raise NumericError("fno benchmarking needs loaded weights")
        return neural_psi(weights, delay)
    raise NumericError(f"unknown method {method!r}")


def bench_methods(delays, methods, h: float = 1e-2, T: float = 12.0,
                  weights=None, window: float = 1.0) -> list:
    """Time each method over the delay list; residuals are measured
    against the implicit horizon equation itself, so no reference run
    is needed. Failures are excluded from the timing stats."""
    out = []
    for method in methods:
        times_ms = []
        residuals = []
        failures = 0
        for delay in delays:
            t0 = time.perf_counter()
            try:
                series = _run_method(method, delay, h, T, weights=weights,
                                     window=window)
            except Exception:
                failures += 1
                continue
            times_ms.append((time.perf_counter() - t0) * 1e3)
            residuals.append(float(series.residuals(delay).mean()))
        if times_ms:
            arr = np.asarray(times_ms)
            out.append(BenchResult(
                method=method, n_evals=len(times_ms),
                mean_ms=float(arr.mean()),
                p50_ms=float(np.percentile(arr, 50)),
                p95_ms=float(np.percentile(arr, 95)),
                mean_residual=float(np.mean(residuals)),
                failures=failures))
        else:
            out.append(BenchResult(method=method, n_evals=0, mean_ms=float("nan"),
                                   p50_ms=float("nan"), p95_ms=float("nan"),
                                   mean_residual=float("nan"), failures=failures))
    return out


def bench_to_csv(results, path) -> None:
    import csv
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "n", "mean_ms", "p50_ms", "p95_ms",
                    "mean_residual", "failures"])
        for r in results:
            w.writerow([r.method, r.n_evals, f"{r.mean_ms:.6g}", f"{r.p50_ms:.6g}",
                        f"{r.p95_ms:.6g}", f"{r.mean_residual:.6g}", r.failures])
