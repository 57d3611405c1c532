"""
Brute-force references: finite-box Anderson Hamiltonians, disorder-averaged
resolvents, eigenvalue counting and high-precision quadrature.
"""
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from loguru import logger
from scipy import sparse
from scipy.sparse import linalg as splinalg

from kernel.runner import TaskRunner, chunked
from ..core.config import DIRECT_SOLVE_MAX_DIM, ITERATIVE_TOL, TASK_TIMEOUT
from ..core.errors import ConfigError, SolverFailure, ToleranceNotMet
from ..models.lattice import Site, add_sites, origin
from .covariant import CovariantPolynomial, to_sparse_matrix
from .densities import AnalyticDensity
from .walks import lattice_steps

BOUNDARIES = ("open", "periodic")


@dataclass(frozen=True)
class FiniteBox:
    d: int
    L: int
    boundary: str = "open"
    sites: Tuple[Site, ...] = field(init=False, repr=False, compare=False)
    _index: Dict[Site, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1 or self.L < 0:
            raise ConfigError("box", f"Need d >= 1 and L >= 0, got d={self.d}, L={self.L}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError("boundary", f"Expected one of {BOUNDARIES}, got {self.boundary!r}")
        sites = tuple(itertools.product(range(-self.L, self.L + 1), repeat=self.d))
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(sites)})

    @property
    def size(self) -> int:
        return (2 * self.L + 1) ** self.d

    @property
    def width(self) -> int:
        return 2 * self.L + 1

    def index_of(self, site: Site) -> int:
        return self._index[tuple(site)]

    def resolve(self, site: Site) -> Optional[Site]:
        """The box site representing `site`, or None outside an open box."""
        site = tuple(site)
        if site in self._index:
            return site
        if self.boundary == "open":
            return None
        w = self.width
        return tuple((c + self.L) % w - self.L for c in site)

    def margin(self) -> int:
        """Graph distance from the origin to the outside of an open box."""
        return self.L + 1 if self.boundary == "open" else math.inf


@dataclass(frozen=True)
class DisorderSample:
    seed: Tuple[int, int]
    values: np.ndarray = field(repr=False, compare=False)

    def potentials(self, box: FiniteBox) -> Dict[Site, float]:
        return dict(zip(box.sites, self.values.tolist()))


def draw_sample(box: FiniteBox, g: AnalyticDensity, master_seed: int, index: int) -> DisorderSample:
    """Sample `index` of the stream keyed by master_seed; independent of worker layout."""
    rng = np.random.Generator(np.random.Philox(master_seed).jumped(index))
    return DisorderSample((int(master_seed), int(index)), np.asarray(g.sample(rng, box.size), dtype=float))


def hopping_matrix(box: FiniteBox) -> sparse.csr_matrix:
    rows, cols = [], []
    for x in box.sites:
        i = box.index_of(x)
        for step in lattice_steps(box.d):
            y = box.resolve(add_sites(x, step))
            if y is not None:
                rows.append(i)
                cols.append(box.index_of(y))
    data = np.ones(len(rows))
    # duplicate entries (L = 0 periodic) are summed by the constructor
    return sparse.csr_matrix((data, (rows, cols)), shape=(box.size, box.size))


def build_hamiltonian(box: FiniteBox, lam: float, sample: DisorderSample) -> sparse.csr_matrix:
    """H = lam * (nearest-neighbour adjacency) + diag(V)."""
    return (lam * hopping_matrix(box) + sparse.diags(sample.values)).tocsr()


def _solve(matrix: sparse.spmatrix, rhs: np.ndarray) -> np.ndarray:
    if matrix.shape[0] <= DIRECT_SOLVE_MAX_DIM:
        try:
            solution = splinalg.spsolve(matrix.tocsc(), rhs)
        except RuntimeError as e:
            raise SolverFailure(f"Direct solve failed: {e}")
        if not np.all(np.isfinite(solution)):
            raise SolverFailure("Direct solve returned non-finite values")
        return solution
    solution, info = splinalg.bicgstab(matrix, rhs, rtol=ITERATIVE_TOL)
    if info != 0:
        logger.warning(f"bicgstab did not converge (info={info}), retrying with gmres")
        solution, info = splinalg.gmres(matrix, rhs, rtol=ITERATIVE_TOL)
        if info != 0:
            raise SolverFailure(f"Iterative solve did not converge (info={info})")
    return solution


def resolvent_element(H: sparse.spmatrix, box: FiniteBox, z: complex) -> complex:
    """<0|(H - z)^-1|0>."""
    e0 = np.zeros(box.size, dtype=complex)
    e0[box.index_of(origin(box.d))] = 1.0
    shifted = (H - z * sparse.identity(box.size, format="csr")).astype(complex)
    return complex(_solve(shifted, e0)[box.index_of(origin(box.d))])


def npoint_element(H: sparse.spmatrix, box: FiniteBox, matrices: Sequence[sparse.spmatrix],
                   z: Sequence[complex]) -> complex:
    """<0|(H - z_1)^-1 A_1 ... (H - z_N)^-1 A_N|0> by N solves from the right."""
    idx = box.index_of(origin(box.d))
    w = np.zeros(box.size, dtype=complex)
    w[idx] = 1.0
    eye = sparse.identity(box.size, format="csr")
    for A, zk in zip(reversed(list(matrices)), reversed(list(z))):
        w = A @ w
        w = _solve((H - zk * eye).astype(complex), w)
    return complex(w[idx])


@dataclass
class MonteCarloEstimate:
    mean: complex
    stderr: float
    samples: int
    seed: int
    config: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "config": self.config,
            "mean_re": self.mean.real,
            "mean_im": self.mean.imag,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }


def _estimate(values: np.ndarray, seed: int, config: dict) -> MonteCarloEstimate:
    values = np.asarray(values, dtype=complex)
    n = len(values)
    if n == 0:
        raise ConfigError("samples", "At least one sample is required")
    mean = complex(math.fsum(values.real) / n, math.fsum(values.imag) / n)
    if n > 1:
        spread = float(np.var(values.real, ddof=1) + np.var(values.imag, ddof=1))
        stderr = math.sqrt(spread / n)
    else:
        stderr = math.inf
    return MonteCarloEstimate(mean, stderr, n, seed, config)


def check_margin(box: FiniteBox, margin: int):
    if box.margin() < margin:
        raise ConfigError("box_L", f"Origin is {box.margin()} sites from the boundary, need at least {margin}")


def _sample_values(payload) -> List[complex]:
    box, g, lam, seed, indices, kind, args = payload
    out = []
    for index in indices:
        sample = draw_sample(box, g, seed, index)
        H = build_hamiltonian(box, lam, sample)
        if kind == "green":
            out.append(resolvent_element(H, box, args))
        else:
            polys, z = args
            matrices = [to_sparse_matrix(p, box, sample.potentials(box)) for p in polys]
            out.append(npoint_element(H, box, matrices, z))
    return out


def _run_samples(box, g, lam, seed, samples, kind, args, threads) -> np.ndarray:
    chunks = chunked(range(samples), max(1, threads) * 4 if threads > 1 else 1)
    runner = TaskRunner(threads, TASK_TIMEOUT)
    results = runner.map(_sample_values, [(box, g, lam, seed, list(c), kind, args) for c in chunks])
    return np.asarray([v for chunk in results for v in chunk], dtype=complex)


def mc_green(box: FiniteBox, lam: float, z: complex, samples: int, master_seed: int, g: AnalyticDensity,
             margin: int = 0, threads: int = 1) -> MonteCarloEstimate:
    z = complex(z)
    if z.imag == 0:
        raise ConfigError("z", f"Monte Carlo resolvents need Im z != 0, got {z}")
    check_margin(box, margin)
    values = _run_samples(box, g, lam, master_seed, samples, "green", z, threads)
    estimate = _estimate(values, master_seed, {"d": box.d, "L": box.L, "boundary": box.boundary,
                                                "lambda": lam, "z": [z.real, z.imag], "density": g.to_spec()})
    logger.info(f"mc_green z={z} over {samples} samples: {estimate.mean:.6g} +/- {estimate.stderr:.2g}")
    return estimate


def mc_npoint(box: FiniteBox, lam: float, observables: Sequence[CovariantPolynomial], z: Sequence[complex],
              samples: int, master_seed: int, g: AnalyticDensity, margin: int = 0,
              threads: int = 1) -> MonteCarloEstimate:
    z = [complex(zk) for zk in z]
    if len(z) != len(observables):
        raise ConfigError("z", f"Expected {len(observables)} spectral points, got {len(z)}")
    if any(zk.imag == 0 for zk in z):
        raise ConfigError("z", f"Monte Carlo resolvents need Im z != 0, got {z}")
    check_margin(box, margin)
    values = _run_samples(box, g, lam, master_seed, samples, "npoint", (tuple(observables), z), threads)
    config = {"d": box.d, "L": box.L, "boundary": box.boundary, "lambda": lam,
              "z": [[zk.real, zk.imag] for zk in z], "observables": [p.label for p in observables],
              "density": g.to_spec()}
    return _estimate(values, master_seed, config)


def _dos_weights(payload):
    box, g, lam, seed, indices = payload
    idx = box.index_of(origin(box.d))
    out = []
    for index in indices:
        H = build_hamiltonian(box, lam, draw_sample(box, g, seed, index)).toarray()
        eigenvalues, vectors = np.linalg.eigh(H)
        out.append((eigenvalues, np.abs(vectors[idx]) ** 2))
    return out


def smoothed_dos(box: FiniteBox, lam: float, eps: float, grid: Sequence[float], samples: int,
                 master_seed: int, g: AnalyticDensity, threads: int = 1) -> List[Tuple[float, float]]:
    """(1/pi) E[Im <0|(H - E - i eps)^-1|0>] on the grid, as (mean, stderr) pairs."""
    if eps <= 0:
        raise ConfigError("eps", f"Smoothing must be positive, got {eps}")
    grid = np.asarray(grid, dtype=float)
    chunks = chunked(range(samples), threads * 4 if threads > 1 else 1)
    runner = TaskRunner(threads, TASK_TIMEOUT)
    spectra = [s for part in runner.map(_dos_weights, [(box, g, lam, master_seed, list(c)) for c in chunks])
               for s in part]
    values = np.empty((len(spectra), len(grid)))
    for k, (eigenvalues, weights) in enumerate(spectra):
        lorentz = eps / ((eigenvalues[None, :] - grid[:, None]) ** 2 + eps * eps)
        values[k] = lorentz @ weights / math.pi
    means = values.mean(axis=0)
    errs = values.std(axis=0, ddof=1) / math.sqrt(len(spectra)) if len(spectra) > 1 else np.full(len(grid), math.inf)
    return list(zip(means.tolist(), errs.tolist()))


def ids_count(box: FiniteBox, lam: float, sample: DisorderSample, E: float) -> float:
    """#{eigenvalues of H restricted to the box <= E} / |box|."""
    eigenvalues = np.linalg.eigvalsh(build_hamiltonian(box, lam, sample).toarray())
    return float(np.count_nonzero(eigenvalues <= E)) / box.size


def quad_reference(f: Callable, interval: Sequence = (-mpmath.inf, mpmath.inf), tol: float = 1e-12,
                   dps: int = 30) -> complex:
    """Adaptive high-precision integral of f over the interval (breakpoints allowed inside)."""
    points = [mpmath.mpf(p) if not isinstance(p, mpmath.mpf) else p for p in interval]
    with mpmath.workdps(dps):
        value, error = mpmath.quad(f, points, error=True, maxdegree=10)
    if error > tol * max(1.0, abs(value)):
        raise ToleranceNotMet(f"Reference quadrature error {float(error):.3g} exceeds {tol:g}")
    return complex(value)
