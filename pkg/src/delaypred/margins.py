"""Stability margins for the predictor loop: explicit constants, a
perturbation budget eps*, and the transformed-coordinate norm bounds.

Everything here is computable from the plant matrices and the four
delay bounds (pi0*..pi3*). The chain, in evaluation order:

    P  solves  (A + B K)^T P + P (A + B K) = -Q
    S  solves  (A - L C)^T S + S (A - L C) = -R
    b      = (1 - pi3*) max{1, 1/pi3*} + 1e-6
    beta*  = min{ b - 1 + pi3*,  (b + 1) pi3* - 1 }
    Omega1 = ||K|| e^{||A|| / pi1*}
    delta1(eps) = Omega1 (e^{||A|| eps} - 1)
    alpha1 = 3 (1 + ||K||^2 ||B||^2 (e^{2||A||/pi1*} - 1) / (2 pi1* ||A||))
    alpha2 = 3 ||K||^2 pi1* (e^{2||A||/pi1*} - 1) / (2 ||A||)
    beta1, beta2 = the same two with A + B K in place of A
    Omega2 = 6 ||P B||^2 e^b / (pi0* pi1* pi2* lambda_min(Q))
    mu     = 1.1 * (2 Omega2 Omega1^2 + lambda_min(Q)/2) e^{2||A||/pi1*}
                 / (pi2* lambda_min(R))

With delta = Omega1 eps + delta1(eps) / pi1*:

    c1(eps) = lambda_min(Q)/2 - Omega2 (delta1^2 + 3 beta2 ||B||^2 delta^2)
    c2(eps) = 4 ||P B||^2 beta* / lambda_min(Q)
              - 2 Omega2 beta1 ||B||^2 delta^2
    c3(eps) = mu pi2* lambda_min(R)
              - Omega2 (Omega1 + delta1)^2 e^{2||A||/pi1*}
    c4(eps) = min{ c1/lambda_max(P), c2 pi1* lambda_min(Q) / (4 ||P B||^2),
                   c3 / (mu lambda_max(S)) }

eps* is the largest eps in [0, 1] keeping a sufficient-condition
surrogate below its threshold (bisection); the honest feasibility check
is c_i(eps) > 0 for the eps actually asked about. All norms are
spectral; for the scale of plant this library targets (n <= 32) the
constants are conservative by construction, so eps* being tiny is the
expected outcome, not a failure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .delays import AssumptionReport
from .errors import AssumptionViolation, NumericError
from .plant import PlantSpec, matrix_exponential
from .rng import SplitMix64


# --------------------------------------------------------------------------
# Lyapunov solves

def solve_lyapunov(A, Q) -> np.ndarray:
    """Solve A^T P + P A = -Q for symmetric P via the Kronecker system."""
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n = A.shape[0]
    I = np.eye(n)
    lhs = np.kron(I, A.T) + np.kron(A.T, I)
    try:
        P = np.linalg.solve(lhs, -Q.reshape(-1)).reshape(n, n)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Lyapunov system is singular: {exc}") from None
    P = (P + P.T) / 2
    resid = float(np.linalg.norm(A.T @ P + P @ A + Q, 2))
    if resid > 1e-8 * max(1.0, float(np.linalg.norm(Q, 2))):
        raise NumericError(f"Lyapunov residual {resid:.3g} too large")
    return P


def _spd_check(M: np.ndarray, name: str) -> float:
    evals = np.linalg.eigvalsh(M)
    if evals[0] <= 0:
        raise NumericError(f"{name} not positive definite: lambda_min = {evals[0]:.3g}")
    return float(evals[0])


# --------------------------------------------------------------------------
# margins report

@dataclass(frozen=True)
class MarginReport:
    P: np.ndarray
    S: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    pi0_star: float
    pi1_star: float
    pi2_star: float
    pi3_star: float
    b: float
    beta_star: float
    omega1: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    omega2: float
    mu: float
    eps_star: float
    feasible: bool
    infeasible_term: str | None
    lam_min_Q: float
    lam_min_R: float
    lam_max_P: float
    lam_max_S: float
    norm_A: float
    norm_K: float
    norm_B: float
    norm_PB2: float

    def delta1(self, eps: float) -> float:
        return self.omega1 * np.expm1(self.norm_A * eps)

    def _delta(self, eps: float) -> float:
        return self.omega1 * eps + self.delta1(eps) / self.pi1_star

    def c1(self, eps: float) -> float:
        d1 = self.delta1(eps)
        d = self._delta(eps)
        return self.lam_min_Q / 2 - self.omega2 * (d1 ** 2 + 3 * self.beta2 * self.norm_B ** 2 * d ** 2)

    def c2(self, eps: float) -> float:
        d = self._delta(eps)
        return (4 * self.norm_PB2 * self.beta_star / self.lam_min_Q
                - 2 * self.omega2 * self.beta1 * self.norm_B ** 2 * d ** 2)

    def c3(self, eps: float) -> float:
        d1 = self.delta1(eps)
        grow = np.exp(2 * self.norm_A / self.pi1_star)
        return (self.mu * self.pi2_star * self.lam_min_R
                - self.omega2 * (self.omega1 + d1) ** 2 * grow)

    def c4(self, eps: float) -> float:
        w_L = 4 * self.norm_PB2 / (self.pi1_star * self.lam_min_Q)
        return min(self.c1(eps) / self.lam_max_P,
                   self.c2(eps) / w_L,
                   self.c3(eps) / (self.mu * self.lam_max_S))


def _eps_budget(rep: "MarginReport") -> float:
    """Largest eps in [0, 1] passing the sufficient-condition surrogate."""
    o1, o2 = rep.omega1, rep.omega2
    nA = rep.norm_A
    thr = min(rep.lam_min_Q / (12 * o2 * rep.beta2 * rep.norm_B ** 2),
              2 * rep.norm_PB2 * rep.beta_star / (o2 * rep.beta1 * rep.norm_B ** 2 * rep.lam_min_Q),
              rep.lam_min_Q / 4)

    def excess(eps: float) -> float:
        g = np.expm1(nA * eps)
        lhs = max(o2 * o1 ** 2 * g ** 2,
                  o1 ** 2 * (eps + g / rep.pi1_star) ** 2)
        return lhs - thr

    if excess(1.0) <= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if excess(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


def compute_margins(plant: PlantSpec, report: AssumptionReport,
                    Q=None, R=None) -> MarginReport:
    """Assemble the margin constants for a plant under the delay bounds
    in `report` (use AssumptionReport.combine for a pair)."""
    plant.validate_gains()
    if not report.valid:
        raise AssumptionViolation("delay assumptions do not hold", report=report)
    n = plant.n
    Q = np.eye(n) if Q is None else np.asarray(Q, dtype=float)
    R = np.eye(n) if R is None else np.asarray(R, dtype=float)
    _spd_check(Q, "Q")
    _spd_check(R, "R")

    P = solve_lyapunov(plant.A + plant.B @ plant.K, Q)
    S = solve_lyapunov(plant.A - plant.L @ plant.C, R)
    _spd_check(P, "P")
    _spd_check(S, "S")

    pi0, pi1, pi2, pi3 = (report.pi0_star, report.pi1_star,
                          report.pi2_star, report.pi3_star)
    lam_min_Q = float(np.linalg.eigvalsh(Q)[0])
    lam_min_R = float(np.linalg.eigvalsh(R)[0])
    lam_max_P = float(np.linalg.eigvalsh(P)[-1])
    lam_max_S = float(np.linalg.eigvalsh(S)[-1])
    nA = float(np.linalg.norm(plant.A, 2))
    nK = float(np.linalg.norm(plant.K, 2))
    nB = float(np.linalg.norm(plant.B, 2))
    nPB2 = float(np.linalg.norm(P @ plant.B, 2)) ** 2

    b = (1.0 - pi3) * max(1.0, 1.0 / pi3) + 1e-6
    beta_star = min(b - 1.0 + pi3, (b + 1.0) * pi3 - 1.0)
    omega1 = nK * np.exp(nA / pi1)

    def _alpha_pair(M: np.ndarray) -> tuple[float, float]:
        nM = float(np.linalg.norm(M, 2))
        if nM < 1e-14:
            # limit of (e^{2 nM T} - 1) / (2 nM) as nM -> 0 is T
            grow = 1.0 / pi1
        else:
            grow = np.expm1(2 * nM / pi1) / (2 * nM)
        a1 = 3.0 * (1.0 + nK ** 2 * nB ** 2 * grow / pi1)
        a2 = 3.0 * nK ** 2 * pi1 * grow
        return a1, a2

    alpha1, alpha2 = _alpha_pair(plant.A)
    beta1, beta2 = _alpha_pair(plant.A + plant.B @ plant.K)

    omega2 = 6.0 * nPB2 * np.exp(b) / (pi0 * pi1 * pi2 * lam_min_Q)
    mu_min = ((2 * omega2 * omega1 ** 2 + lam_min_Q / 2)
              * np.exp(2 * nA / pi1) / (pi2 * lam_min_R))
    mu = 1.1 * mu_min

    rep = MarginReport(
        P=P, S=S, Q=Q, R=R,
        pi0_star=pi0, pi1_star=pi1, pi2_star=pi2, pi3_star=pi3,
        b=b, beta_star=beta_star, omega1=omega1,
        alpha1=alpha1, alpha2=alpha2, beta1=beta1, beta2=beta2,
        omega2=omega2, mu=mu, eps_star=0.0, feasible=True, infeasible_term=None,
        lam_min_Q=lam_min_Q, lam_min_R=lam_min_R,
        lam_max_P=lam_max_P, lam_max_S=lam_max_S,
        norm_A=nA, norm_K=nK, norm_B=nB, norm_PB2=nPB2)

    eps_star = _eps_budget(rep)
    feasible, term = True, None
    for name, fn in (("beta*", lambda: rep.beta_star),
                     ("c1(0)", lambda: rep.c1(0.0)),
                     ("c2(0)", lambda: rep.c2(0.0)),
                     ("c3(0)", lambda: rep.c3(0.0))):
        if fn() <= 0:
            feasible, term = False, name
            break

    return MarginReport(
        **{**rep.__dict__, "eps_star": eps_star,
           "feasible": feasible, "infeasible_term": term})


# --------------------------------------------------------------------------
# transformed-coordinate norm equivalence

@dataclass(frozen=True)
class NormEquivalenceResult:
    norm_u2: float
    norm_w2: float
    norm_z2: float
    bound_w2: float
    bound_u2: float
    recon_error: float
    ok: bool


def _volterra_transform(plant: PlantSpec, M: np.ndarray, gain: np.ndarray,
                        u: np.ndarray, z: np.ndarray, psi: float) -> np.ndarray:
    """w(x) = u(x) - gain e^{M x psi} z - gain psi int_0^x e^{M(x-y) psi} B u(y) dy
    on the unit grid carrying u (composite trapezoid)."""
    N = u.shape[0]
    h = 1.0 / (N - 1)
    # e^{M (x_i - y_j) psi} depends on i - j only; one power table serves all pairs
    E = matrix_exponential(M, h * psi)
    pw = np.empty((N, plant.n, plant.n))
    pw[0] = np.eye(plant.n)
    for k in range(1, N):
        pw[k] = pw[k - 1] @ E
    bu = u @ plant.B.T                      # (N, n)
    out = np.empty_like(u)
    for i in range(N):
        if i == 0:
            integral = np.zeros(plant.n)
        else:
            w = _trap_w(i + 1, h)
            integral = np.einsum("j,jab,jb->a", w, pw[i::-1], bu[: i + 1])
        out[i] = u[i] - gain @ (pw[i] @ z) - psi * (gain @ integral)
    return out


def _trap_w(k: int, h: float) -> np.ndarray:
    w = np.full(k, h)
    w[0] = h / 2
    w[-1] = h / 2
    return w


def norm_equivalence_check(plant: PlantSpec, report_or_margins,
                           u_values, z, psi: float | None = None,
                           slack: float = 1e-9) -> NormEquivalenceResult:
    """Verify the two-sided norm bounds between the input segment and its
    transformed image, and that the inverse transform restores the input.

        ||w||^2 <= alpha1 ||u||^2 + alpha2 |z|^2
        ||u||^2 <= beta1 ||w||^2 + beta2 |z|^2
    """
    rep = report_or_margins
    u = np.atleast_2d(np.asarray(u_values, dtype=float))
    if u.shape[0] == 1 and plant.m == 1 and u.shape[1] != 1:
        u = u.T
    z = np.asarray(z, dtype=float)
    if psi is None:
        psi = (rep.pi0_star + 1.0 / rep.pi1_star) / 2

    w = _volterra_transform(plant, plant.A, plant.K, u, z, psi)
    u_back = _volterra_transform(plant, plant.A + plant.B @ plant.K,
                                 -plant.K, w, z, psi)
    # the inverse uses the shifted generator and negated gain; w + Kz-terms
    # cancel so u_back should reproduce u up to quadrature error
    N = u.shape[0]
    h = 1.0 / (N - 1)
    wq = _trap_w(N, h)
    norm_u2 = float(np.einsum("j,jk,jk->", wq, u, u))
    norm_w2 = float(np.einsum("j,jk,jk->", wq, w, w))
    norm_z2 = float(z @ z)
    bound_w2 = rep.alpha1 * norm_u2 + rep.alpha2 * norm_z2
    bound_u2 = rep.beta1 * norm_w2 + rep.beta2 * norm_z2
    recon = float(np.sqrt(np.max(np.sum((u_back - u) ** 2, axis=1))))
    scale = 1.0 + norm_u2 + norm_z2
    ok = (norm_w2 <= bound_w2 + slack * scale
          and norm_u2 <= bound_u2 + slack * scale)
    return NormEquivalenceResult(norm_u2=norm_u2, norm_w2=norm_w2, norm_z2=norm_z2,
                                 bound_w2=bound_w2, bound_u2=bound_u2,
                                 recon_error=recon, ok=ok)


def random_norm_equivalence_trials(plant: PlantSpec, margins: MarginReport,
                                   n_trials: int = 100, seed: int = 0,
                                   n_grid: int = 256) -> list:
    """Monte Carlo sweep of the norm bounds; returns the per-draw results."""
    rng = SplitMix64(seed)
    out = []
    psi_lo = margins.pi0_star
    psi_hi = 1.0 / margins.pi1_star
    for _ in range(n_trials):
        psi = rng.uniform(psi_lo, psi_hi)
        z = np.array([rng.uniform(-2.0, 2.0) for _ in range(plant.n)])
        # smooth random input: a few random Fourier modes keep the
        # quadrature honest at 256 points
        xs = np.linspace(0.0, 1.0, n_grid)
        u = np.zeros((n_grid, plant.m))
        for j in range(plant.m):
            for k in range(1, 4):
                amp = rng.uniform(-1.5, 1.5)
                phase = rng.uniform(0.0, 2 * np.pi)
                u[:, j] += amp * np.sin(2 * np.pi * k * xs + phase)
            u[:, j] += rng.uniform(-1.0, 1.0)
        out.append(norm_equivalence_check(plant, margins, u, z, psi))
    return out
