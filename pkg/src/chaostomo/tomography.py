"""Noisy measurement records, linear least-squares state estimation, and the
projection onto physical states.

The record is the time series of ensemble expectation values of an evolving
observable plus additive Gaussian noise. Estimation inverts the linear map
from Bloch components to expectations with a rank-revealing pseudoinverse,
then finds the closest physical state in the noise-weighted metric by
projected gradient descent (Euclidean projection = eigenvalue projection
onto the probability simplex).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import MetricSeries
from .spin_algebra import pure_state_density

__all__ = [
    "MeasurementRecord",
    "CovarianceMatrix",
    "TomographyEstimate",
    "ProjectionConvergenceError",
    "simulate_record",
    "design_matrix",
    "covariance",
    "ml_estimate",
    "psd_project",
    "reconstruct",
    "fidelity",
    "fidelity_matrix",
    "ensemble_average_fidelity",
]

DEFAULT_RCOND = 1e-10
DEFAULT_PROJECTION_TOL = 1e-8
DEFAULT_PROJECTION_MAX_ITER = 10_000
# Prefix sweeps re-solve 200 closely related problems; the few steps that land
# in a thin valley of the constrained landscape need a larger budget than the
# single-shot default.
DEFAULT_SWEEP_MAX_ITER = 50_000

_OBJECTIVE_FLOOR = 1e-30

# Iterations used by the most recent projection call; profiling aid only.
_last_iterations = 0

# Iterate-displacement scale (relative to max(1, |r_ml|)) below which a
# projection step counts as stagnant. Must sit above the float-resolution
# wobble of the project/eigh pipeline.
_MOVE_FLOOR_SCALE = 2e-11


@dataclass
class MeasurementRecord:
    """Expectation-value time series M_1..M_n and the noise spread used."""

    values: np.ndarray
    noise_sigma: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return self.values.size


@dataclass
class CovarianceMatrix:
    """Pseudoinverse of the normal matrix and its numerical rank.

    Rank 0 (all-zero design) is signaled through the ``rank`` field rather
    than an exception; the entries are then all zero.
    """

    entries: np.ndarray
    rank: int


@dataclass
class TomographyEstimate:
    """Least-squares estimate, its physical projection, and optional fidelity."""

    r_ml: np.ndarray
    r_bar: np.ndarray
    rho_bar: np.ndarray
    fidelity: float | None = None


class ProjectionConvergenceError(RuntimeError):
    """Physicality projection hit the iteration cap.

    Carries the best (feasible) iterate reached so far in ``r_bar`` /
    ``rho_bar``.
    """

    def __init__(self, message: str, r_bar: np.ndarray, rho_bar: np.ndarray):
        super().__init__(message)
        self.r_bar = r_bar
        self.rho_bar = rho_bar


def simulate_record(rho0: np.ndarray, traj: np.ndarray, sigma: float, seed) -> MeasurementRecord:
    """Record M_k = Tr(O_k rho0) + w_k over steps 1..n of the trajectory.

    Step 0 (the unevolved observable) is not measured. The noise terms are
    i.i.d. Gaussian with standard deviation ``sigma``.
    """
    rho0 = np.asarray(rho0)
    traj = np.asarray(traj)
    if rho0.shape != traj.shape[1:]:
        raise ValueError(f"state shape {rho0.shape} does not match trajectory {traj.shape[1:]}")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    expectations = np.einsum("kij,ji->k", traj[1:], rho0).real
    noise = np.random.default_rng(seed).normal(0.0, sigma, size=expectations.size)
    return MeasurementRecord(expectations + noise, sigma)


def design_matrix(traj: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real matrix of basis components Tr(O_k E_a), one row per operator given."""
    traj = np.asarray(traj)
    if traj.shape[1:] != basis.shape[1:]:
        raise ValueError(f"trajectory shape {traj.shape[1:]} does not match basis {basis.shape[1:]}")
    flat_traj = traj.reshape(len(traj), -1)
    flat_basis_t = basis.transpose(0, 2, 1).reshape(basis.shape[0], -1)
    return (flat_traj @ flat_basis_t.T).real


def covariance(design: np.ndarray, rcond: float = DEFAULT_RCOND) -> CovarianceMatrix:
    """Moore-Penrose pseudoinverse of design^T design.

    Eigenvalues at or below ``rcond`` times the largest are treated as zero;
    the count of retained eigenvalues is reported as the rank.
    """
    if rcond <= 0:
        raise ValueError("rcond must be > 0")
    design = np.asarray(design, dtype=float)
    normal = design.T @ design
    normal = (normal + normal.T) / 2
    w, v = np.linalg.eigh(normal)
    w_max = w[-1] if w.size else 0.0
    if w_max <= 0:
        return CovarianceMatrix(np.zeros_like(normal), 0)
    keep = w > rcond * w_max
    vk = v[:, keep]
    entries = (vk / w[keep]) @ vk.T
    entries = (entries + entries.T) / 2
    return CovarianceMatrix(entries, int(np.count_nonzero(keep)))


def ml_estimate(cov: CovarianceMatrix, design: np.ndarray, record: MeasurementRecord) -> np.ndarray:
    """Least-squares Bloch estimate C design^T M; zero on the unmeasured subspace."""
    design = np.asarray(design, dtype=float)
    if design.shape[0] != len(record):
        raise ValueError(
            f"design has {design.shape[0]} rows but record has {len(record)} samples"
        )
    if cov.entries.shape != (design.shape[1], design.shape[1]):
        raise ValueError("covariance shape does not match design columns")
    return cov.entries @ (design.T @ record.values)


def _simplex_project(w: np.ndarray) -> np.ndarray:
    """Euclidean projection of spectra onto the probability simplex (batched)."""
    u = np.sort(w, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1)
    counts = np.arange(1, w.shape[-1] + 1)
    positive = u + (1.0 - css) / counts > 0
    last = w.shape[-1] - 1 - np.argmax(positive[..., ::-1], axis=-1)
    css_last = np.take_along_axis(css, last[..., None], axis=-1)
    shift = (1.0 - css_last) / (last + 1)[..., None]
    return np.maximum(w + shift, 0.0)


class _BasisKernel:
    """Flattened-basis transforms staged as single real matmuls.

    A complex (d, d) matrix viewed as float64 interleaves re/im pairs, so both
    Bloch directions become one real gemm against an interleaved basis table.
    """

    def __init__(self, basis: np.ndarray):
        self.d = basis.shape[1]
        n_basis = basis.shape[0]
        flat = basis.reshape(n_basis, -1)
        # (n_basis, 2 d^2): columns alternate Re E_a, Im E_a entrywise.
        table = np.empty((n_basis, 2 * self.d * self.d))
        table[:, 0::2] = flat.real
        table[:, 1::2] = flat.imag
        self.table = table
        self.table_t = np.ascontiguousarray(table.T)
        mixed = (np.eye(self.d) / self.d).astype(complex).reshape(-1)
        self.mixed_interleaved = mixed.view(np.float64)

    def matrices(self, r: np.ndarray) -> np.ndarray:
        """I/d + sum_a r_a E_a for each row of r."""
        rho_view = r @ self.table
        rho_view += self.mixed_interleaved
        return rho_view.view(complex).reshape(-1, self.d, self.d)

    def components(self, rho: np.ndarray) -> np.ndarray:
        """Tr(rho E_a) per row; Hermiticity of rho and E_a makes this real."""
        rho_view = np.ascontiguousarray(rho.reshape(len(rho), -1)).view(np.float64)
        return rho_view @ self.table_t


def _project_feasible(r: np.ndarray, kernel: _BasisKernel) -> tuple[np.ndarray, np.ndarray]:
    """Closest physical state (Frobenius norm) to I/d + sum r_a E_a, batched."""
    rho = kernel.matrices(r)
    rho = (rho + np.conjugate(np.swapaxes(rho, -1, -2))) / 2
    w, v = np.linalg.eigh(rho)
    w_proj = _simplex_project(w)
    rho_proj = (v * w_proj[:, None, :]) @ np.conjugate(np.swapaxes(v, -1, -2))
    r_proj = kernel.components(rho_proj)
    return r_proj, rho_proj


def _projected_gradient(
    a: np.ndarray,
    r_ml: np.ndarray,
    kernel: _BasisKernel,
    lam_max: float,
    tol: float,
    max_iter: int,
    r_start: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimize (r - r_ml)^T a (r - r_ml) over physical states, batched over rows.

    Projected gradient with fixed step 1/lam_max, Nesterov momentum, and a
    function restart whenever the (feasible) objective rises; the momentum
    cuts the iteration count by roughly the square root of the condition
    number without changing the minimum. A batch row is frozen once its
    relative objective change falls below ``tol`` or it stops moving at float
    resolution, so stragglers do not keep the whole batch iterating. Raises
    ProjectionConvergenceError at the iteration cap.
    """
    global _last_iterations
    r, rho = _project_feasible(r_start if r_start is not None else r_ml, kernel)
    if lam_max <= 0:
        # Zero objective everywhere; any feasible point is optimal.
        return r, rho, np.zeros(len(r))
    grad = (r - r_ml) @ a
    obj = np.einsum("bi,bi->b", r - r_ml, grad)
    move_floor = _MOVE_FLOOR_SCALE * max(1.0, float(np.max(np.abs(r_ml))))
    # Momentum-point state; the gradient is linear in its argument, so the
    # gradient at y comes from combining feasible-point gradients, one matmul
    # per iteration in total.
    y = r.copy()
    y_grad = grad.copy()
    momentum = np.zeros(len(r))
    active = np.arange(len(r))
    for iteration in range(max_iter):
        r_new, rho_new = _project_feasible(y[active] - y_grad[active] / lam_max, kernel)
        diff = r_new - r_ml[active]
        grad_new = diff @ a
        obj_new = np.einsum("bi,bi->b", diff, grad_new)
        rose = obj_new > obj[active]
        momentum[active] = np.where(rose, 0.0, momentum[active] + 1.0)
        beta = (momentum[active] / (momentum[active] + 3.0))[:, None]
        y[active] = r_new + beta * (r_new - r[active])
        y_grad[active] = grad_new + beta * (grad_new - grad[active])
        moved = np.max(np.abs(r_new - r[active]), axis=1)
        done = (
            np.abs(obj[active] - obj_new) <= tol * np.maximum(obj_new, 0.0) + _OBJECTIVE_FLOOR
        ) | (moved <= move_floor)
        r[active], rho[active] = r_new, rho_new
        grad[active], obj[active] = grad_new, obj_new
        if done.any():
            active = active[~done]
            if active.size == 0:
                _last_iterations = iteration + 1
                return r, rho, obj
    _last_iterations = max_iter
    raise ProjectionConvergenceError(
        f"physicality projection did not converge within {max_iter} iterations",
        r_bar=r,
        rho_bar=rho,
    )


def psd_project(
    r_ml: np.ndarray,
    c_inv: np.ndarray,
    basis: np.ndarray,
    tol: float = DEFAULT_PROJECTION_TOL,
    max_iter: int = DEFAULT_PROJECTION_MAX_ITER,
    warm_start: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Closest physical Bloch vector to r_ml in the metric of c_inv = design^T design.

    Returns the projected components and the corresponding density matrix
    (positive semidefinite, unit trace).
    """
    r_ml = np.asarray(r_ml, dtype=float)
    c_inv = np.asarray(c_inv, dtype=float)
    n_basis = basis.shape[0]
    if r_ml.shape != (n_basis,) or c_inv.shape != (n_basis, n_basis):
        raise ValueError("r_ml / weight matrix shapes do not match the basis")
    c_inv = (c_inv + c_inv.T) / 2
    lam_max = float(np.linalg.eigvalsh(c_inv)[-1])
    start = None if warm_start is None else np.asarray(warm_start, float)[None, :]
    try:
        r_bar, rho_bar, _ = _projected_gradient(
            c_inv, r_ml[None, :], _BasisKernel(basis), lam_max, tol, max_iter, start
        )
    except ProjectionConvergenceError as err:
        raise ProjectionConvergenceError(
            str(err), r_bar=err.r_bar[0], rho_bar=err.rho_bar[0]
        ) from None
    return r_bar[0], rho_bar[0]


def fidelity(psi0: np.ndarray, rho: np.ndarray) -> float:
    """Overlap <psi0| rho |psi0>, clamped to [0, 1] for reporting."""
    psi0 = np.asarray(psi0)
    rho = np.asarray(rho)
    if rho.shape != (psi0.size, psi0.size):
        raise ValueError("state and density matrix dimensions do not match")
    value = (psi0.conj() @ rho @ psi0).real
    return float(min(max(value, 0.0), 1.0))


def reconstruct(
    record: MeasurementRecord,
    experimenter_traj: np.ndarray,
    basis: np.ndarray,
    rcond: float = DEFAULT_RCOND,
    tol: float = DEFAULT_PROJECTION_TOL,
    psi0: np.ndarray | None = None,
    max_iter: int = DEFAULT_PROJECTION_MAX_ITER,
) -> TomographyEstimate:
    """Full estimation pipeline using the experimenter's operator trajectory.

    The trajectory must include the unmeasured step-0 observable, i.e. have
    one more entry than the record. When the record came from different
    (true) dynamics, the estimate is correspondingly biased — that mismatch
    is the object of study, not an error.
    """
    traj = np.asarray(experimenter_traj)
    if len(traj) != len(record) + 1:
        raise ValueError(
            f"trajectory must hold {len(record) + 1} operators (step 0 included), got {len(traj)}"
        )
    design = design_matrix(traj[1:], basis)
    cov = covariance(design, rcond)
    r_ml = ml_estimate(cov, design, record)
    r_bar, rho_bar = psd_project(r_ml, design.T @ design, basis, tol=tol, max_iter=max_iter)
    fid = fidelity(psi0, rho_bar) if psi0 is not None else None
    return TomographyEstimate(r_ml=r_ml, r_bar=r_bar, rho_bar=rho_bar, fidelity=fid)


def fidelity_matrix(
    states: np.ndarray,
    traj_true: np.ndarray,
    traj_ideal: np.ndarray,
    basis: np.ndarray,
    sigma: float,
    noise_seed,
    rcond: float = DEFAULT_RCOND,
    tol: float = DEFAULT_PROJECTION_TOL,
    max_iter: int = DEFAULT_SWEEP_MAX_ITER,
) -> np.ndarray:
    """Per-state reconstruction fidelity at every record length, shape (n_states, n).

    Records are simulated from the true trajectory (rows of ``states`` get
    independent noise streams spawned from ``noise_seed``); estimation uses
    the experimenter's (ideal) trajectory. Each reconstruction reuses the
    previous record length's solution as a warm start, which leaves the
    minimizer unchanged but cuts the iteration count sharply.
    """
    psi = np.atleast_2d(np.asarray(states))
    traj_true = np.asarray(traj_true)
    traj_ideal = np.asarray(traj_ideal)
    if traj_true.shape != traj_ideal.shape:
        raise ValueError("true and experimenter trajectories must have equal shape")
    n_steps = len(traj_true) - 1
    n_batch = len(psi)
    n_basis = basis.shape[0]

    seed_seq = noise_seed if isinstance(noise_seed, np.random.SeedSequence) else np.random.SeedSequence(noise_seed)
    children = seed_seq.spawn(n_batch)
    records = np.stack(
        [
            simulate_record(pure_state_density(s), traj_true, sigma, child).values
            for s, child in zip(psi, children)
        ]
    )

    design = design_matrix(traj_ideal[1:], basis)
    kernel = _BasisKernel(basis)
    normal = np.zeros((n_basis, n_basis))
    rhs = np.zeros((n_batch, n_basis))
    r_warm = np.zeros((n_batch, n_basis))
    fid = np.empty((n_batch, n_steps))
    for k in range(n_steps):
        row = design[k]
        normal += np.outer(row, row)
        rhs += records[:, k, None] * row
        w, v = np.linalg.eigh(normal)
        w_max = w[-1]
        if w_max <= 0:
            r_ml = np.zeros_like(rhs)
        else:
            keep = w > rcond * w_max
            vk = v[:, keep]
            r_ml = ((rhs @ vk) / w[keep]) @ vk.T
        r_warm, rho_bar, _ = _projected_gradient(
            normal, r_ml, kernel, w_max, tol, max_iter, r_warm
        )
        overlap = np.einsum("bi,bij,bj->b", psi.conj(), rho_bar, psi).real
        fid[:, k] = np.clip(overlap, 0.0, 1.0)
    return fid


def ensemble_average_fidelity(
    states: np.ndarray,
    traj_true: np.ndarray,
    traj_ideal: np.ndarray,
    basis: np.ndarray,
    sigma: float,
    noise_seed,
    rcond: float = DEFAULT_RCOND,
    tol: float = DEFAULT_PROJECTION_TOL,
    max_iter: int = DEFAULT_SWEEP_MAX_ITER,
    params: dict | None = None,
) -> MetricSeries:
    """Mean reconstruction fidelity over a state ensemble, with standard error."""
    if len(states) == 0:
        raise ValueError("need at least one state")
    fid = fidelity_matrix(
        states, traj_true, traj_ideal, basis, sigma, noise_seed,
        rcond=rcond, tol=tol, max_iter=max_iter,
    )
    mean = fid.mean(axis=0)
    if fid.shape[0] > 1:
        stderr = fid.std(axis=0, ddof=1) / np.sqrt(fid.shape[0])
    else:
        stderr = np.zeros_like(mean)
    times = np.arange(1, fid.shape[1] + 1)
    return MetricSeries("fidelity", times, mean, stderr, dict(params or {}))
