"""Classical ground truth: diagonalize H_B and extract Franck-Condon profiles.

The oracle pipeline is diagonalize -> stick spectrum -> 1 cm^-1 histogram ->
Gaussian broadening -> L1 comparisons, plus the cutoff-convergence sweep and
the finite-temperature (Boltzmann-weighted) profile.  Everything here is
deterministic dense linear algebra; it is the reference the sampling
emulator is tested against.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .fock import FockSpace, ManyBodyOperator
from .hamiltonian import build_b_dagger, build_hamiltonian
from .problem import ModeCutoffs, ThermalConfig, VibronicProblem

#: Dense full eigendecomposition is used up to this dimension.
DENSE_EIG_LIMIT = 8192

#: Default histogram bin width and Gaussian broadening, both cm^-1.
DEFAULT_BIN_WIDTH = 1.0
DEFAULT_SIGMA = 100.0

_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


class OracleScaleError(ValueError):
    """Raised when a space is too large for full dense diagonalization."""


@dataclass
class StickSpectrum:
    """Raw eigenvalue/intensity pairs, sorted by energy."""

    energies: np.ndarray
    intensities: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def total_intensity(self) -> float:
        return float(self.intensities.sum())

    @property
    def leakage(self) -> float:
        """Intensity deficit 1 - sum; zero for a complete eigenbasis."""
        return 1.0 - self.total_intensity


@dataclass
class BinnedSpectrum:
    """Histogram of stick intensity on a uniform grid of bins.

    ``first_bin`` is the integer index of the lowest stored bin relative to
    ``origin`` (negative-energy sticks from hot bands land in negative bins).
    """

    width: float
    origin: float
    first_bin: int
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def bin_centers(self) -> np.ndarray:
        idx = np.arange(self.first_bin, self.first_bin + len(self.values))
        return self.origin + (idx + 0.5) * self.width

    @property
    def total_intensity(self) -> float:
        return float(self.values.sum())


@dataclass
class BroadenedSpectrum:
    """Intensity density (per cm^-1) on a uniform energy grid."""

    grid_start: float
    grid_step: float
    values: np.ndarray
    sigma: float
    convention: str
    metadata: dict = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return self.grid_start + self.grid_step * np.arange(len(self.values))

    @property
    def area(self) -> float:
        return float(self.values.sum() * self.grid_step)


def eigensolve(h: ManyBodyOperator) -> tuple[np.ndarray, np.ndarray]:
    """Full Hermitian eigendecomposition, real-symmetric fast path."""
    d = h.space.dimension
    if d > DENSE_EIG_LIMIT:
        raise OracleScaleError(
            f"space dimension {d} exceeds the dense diagonalization limit "
            f"{DENSE_EIG_LIMIT}; reduce the cutoffs"
        )
    mat = h.to_dense()
    if np.abs(mat.imag).max(initial=0.0) < 1e-12:
        return np.linalg.eigh(mat.real)
    return np.linalg.eigh(mat)


def diagonalize_fcp(
    h: ManyBodyOperator,
    space: FockSpace | None = None,
    initial_flat_index: int = 0,
    metadata: dict | None = None,
) -> StickSpectrum:
    """Stick spectrum of H: eigenvalues vs |<initial|psi_i>|^2.

    The default initial state is the vacuum (flat index 0), giving the
    zero-temperature Franck-Condon profile.  Degenerate eigenvalues stay as
    separate sticks.
    """
    if not h.verify_hermitian():
        raise ValueError(
            f"Hamiltonian is not Hermitian (deviation {h.hermiticity_deviation():.2e})"
        )
    space = space or h.space
    evals, evecs = eigensolve(h)
    fcf = np.abs(evecs[initial_flat_index, :]) ** 2
    meta = {"cutoffs": list(space.cutoffs)}
    meta.update(metadata or {})
    return StickSpectrum(energies=evals, intensities=fcf, metadata=meta)


def bin_spectrum(
    sticks: StickSpectrum,
    width: float = DEFAULT_BIN_WIDTH,
    origin: float = 0.0,
) -> BinnedSpectrum:
    """Histogram stick intensity into bins of the given width."""
    if width <= 0:
        raise ValueError(f"bin width must be positive, got {width}")
    if len(sticks.energies) == 0:
        raise ValueError("cannot bin an empty stick spectrum")
    idx = np.floor((sticks.energies - origin) / width).astype(int)
    first = int(idx.min())
    last = int(idx.max())
    values = np.zeros(last - first + 1)
    np.add.at(values, idx - first, sticks.intensities)
    return BinnedSpectrum(
        width=width,
        origin=origin,
        first_bin=first,
        values=values,
        metadata=dict(sticks.metadata),
    )


def sigma_from_convention(width: float, convention: str) -> float:
    if convention == "stdev":
        return width
    if convention == "fwhm":
        return width * _FWHM_TO_SIGMA
    raise ValueError(f"unknown broadening convention {convention!r}")


def broaden(
    binned: BinnedSpectrum,
    sigma: float = DEFAULT_SIGMA,
    convention: str = "stdev",
) -> BroadenedSpectrum:
    """Convolve the histogram with a unit-area Gaussian sampled on the grid."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    sig = sigma_from_convention(sigma, convention)
    width = binned.width
    half = int(math.ceil(6.0 * sig / width))
    x = np.arange(-half, half + 1) * width
    kernel = np.exp(-(x**2) / (2.0 * sig**2)) / (sig * math.sqrt(2.0 * math.pi))
    values = np.convolve(binned.values, kernel, mode="full")
    start_bin = binned.first_bin - half
    meta = dict(binned.metadata)
    meta.update({"sigma": sigma, "sigma_convention": convention})
    return BroadenedSpectrum(
        grid_start=binned.origin + (start_bin + 0.5) * width,
        grid_step=width,
        values=values,
        sigma=sigma,
        convention=convention,
        metadata=meta,
    )


def _resample(spec: BroadenedSpectrum, grid: np.ndarray) -> np.ndarray:
    return np.interp(grid, spec.grid, spec.values, left=0.0, right=0.0)


def l1_distance(a: BroadenedSpectrum, b: BroadenedSpectrum) -> float:
    """Integral of |a - b| over energy; 2 for disjoint unit-norm spectra.

    Identical grids are compared bin for bin; otherwise both are resampled
    onto the union grid at the finer step.
    """
    same_grid = (
        a.grid_step == b.grid_step
        and a.grid_start == b.grid_start
        and len(a.values) == len(b.values)
    )
    if same_grid:
        return float(np.abs(a.values - b.values).sum() * a.grid_step)
    step = min(a.grid_step, b.grid_step)
    lo = min(a.grid_start, b.grid_start)
    hi = max(a.grid[-1], b.grid[-1])
    n = int(round((hi - lo) / step)) + 1
    grid = lo + step * np.arange(n)
    return float(np.abs(_resample(a, grid) - _resample(b, grid)).sum() * step)


def spectrum_pipeline(
    problem: VibronicProblem,
    cutoffs: ModeCutoffs,
    route: str = "qp",
    sigma: float = DEFAULT_SIGMA,
    convention: str = "stdev",
    bin_width: float = DEFAULT_BIN_WIDTH,
) -> tuple[StickSpectrum, BinnedSpectrum, BroadenedSpectrum]:
    """Build H, diagonalize, bin and broaden in one call."""
    report = build_hamiltonian(problem, cutoffs, route=route)
    sticks = diagonalize_fcp(
        report.hamiltonian,
        report.space,
        metadata={"problem": problem.label, "route": route},
    )
    binned = bin_spectrum(sticks, width=bin_width)
    broad = broaden(binned, sigma=sigma, convention=convention)
    return sticks, binned, broad


@dataclass
class SweepResult:
    """Outcome of a varied-mode cutoff convergence sweep."""

    varied_mode: int
    converged_l_max: int | None
    trace: list[tuple[int, float]]
    vs_exact: list[tuple[int, float]]
    monotone: bool
    threshold: float


def converge_sweep(
    problem: VibronicProblem,
    varied_mode: int,
    fixed_cutoffs: dict[int, int],
    threshold: float = 1e-4,
    l_start: int = 1,
    l_cap: int = 100,
    route: str = "qp",
    sigma: float = DEFAULT_SIGMA,
    convention: str = "stdev",
    jobs: int = 1,
) -> SweepResult:
    """Increase the varied mode's L_max until successive broadened spectra agree.

    Convergence is declared once the L1 distance between the spectra at L
    and L-1 drops below ``threshold``; the reported converged cutoff is L-1,
    the smallest cutoff whose spectrum the next one no longer improves (so a
    single-stick identity problem converges at 1).  The trace of successive
    distances is returned along with an L1-vs-final curve for error-decay
    plots.  A non-monotone trace is flagged, not rejected.
    """
    if varied_mode in fixed_cutoffs:
        raise ValueError("varied mode cannot also have a fixed cutoff")
    if set(fixed_cutoffs) | {varied_mode} != set(range(problem.n_modes)):
        raise ValueError("fixed_cutoffs must cover every non-varied mode")

    def cutoffs_for(l_max: int) -> ModeCutoffs:
        levels = [0] * problem.n_modes
        for mode, l in fixed_cutoffs.items():
            levels[mode] = l
        levels[varied_mode] = l_max
        return ModeCutoffs(tuple(levels))

    def broadened_at(l_max: int) -> BroadenedSpectrum:
        _, _, broad = spectrum_pipeline(
            problem, cutoffs_for(l_max), route=route, sigma=sigma, convention=convention
        )
        return broad

    levels = list(range(l_start, l_cap + 1))
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        spectra: dict[int, BroadenedSpectrum] = {}
        converged = None
        trace: list[tuple[int, float]] = []
        chunk = max(2 * jobs, 4)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for base in range(0, len(levels), chunk):
                batch = levels[base : base + chunk]
                for l, spec in zip(batch, pool.map(broadened_at, batch)):
                    spectra[l] = spec
                for l in batch:
                    if l - 1 in spectra:
                        d = l1_distance(spectra[l], spectra[l - 1])
                        trace.append((l, d))
                        if converged is None and d < threshold:
                            converged = l - 1
                if converged is not None:
                    break
    else:
        spectra = {}
        trace = []
        converged = None
        prev = None
        for l in levels:
            spec = broadened_at(l)
            spectra[l] = spec
            if prev is not None:
                d = l1_distance(spec, prev)
                trace.append((l, d))
                if d < threshold:
                    converged = l - 1
                    break
            prev = spec

    top = max(spectra)
    vs_exact = [
        (l, l1_distance(spectra[l], spectra[top])) for l in sorted(spectra) if l < top
    ]
    dists = [d for _, d in trace]
    monotone = all(b <= a * 1.5 for a, b in zip(dists, dists[1:]))
    return SweepResult(
        varied_mode=varied_mode,
        converged_l_max=converged,
        trace=trace,
        vs_exact=vs_exact,
        monotone=monotone,
        threshold=threshold,
    )


def thermal_fcp_oracle(
    problem: VibronicProblem,
    cutoffs: ModeCutoffs,
    thermal: ThermalConfig,
    route: str = "qp",
) -> StickSpectrum:
    """Finite-temperature profile: sticks at eps_i - E_A(n), Boltzmann weighted.

    Initial states |n> are weighted by p_n(beta) = prod_k (1-e^{-b w_k})
    e^{-b w_k n_k}, renormalized over the truncated space; each contributes
    its own transition energies relative to E_A(n).
    """
    beta = thermal.beta
    space = FockSpace.from_cutoffs(cutoffs)
    report = build_hamiltonian(problem, cutoffs, route=route)
    evals, evecs = eigensolve(report.hamiltonian)

    occupations = space.all_multi_indices()
    e_a = (occupations + 0.5) @ problem.omega_A
    if thermal.is_zero_temperature:
        weights = np.zeros(space.dimension)
        weights[0] = 1.0
    else:
        log_w = -beta * (occupations @ problem.omega_A)
        weights = np.exp(log_w - log_w.max())
        weights /= weights.sum()

    keep = np.nonzero(weights > 1e-16)[0]
    energies = []
    intensities = []
    for flat in keep:
        overlaps = np.abs(evecs[flat, :]) ** 2
        energies.append(evals - e_a[flat])
        intensities.append(weights[flat] * overlaps)
    energies = np.concatenate(energies)
    intensities = np.concatenate(intensities)
    order = np.argsort(energies)
    return StickSpectrum(
        energies=energies[order],
        intensities=intensities[order],
        metadata={
            "problem": problem.label,
            "route": route,
            "cutoffs": list(cutoffs.levels),
            "beta_invcm": beta,
        },
    )


def mode_occupation_levels(
    problem: VibronicProblem,
    h: ManyBodyOperator,
    evecs: np.ndarray,
    mode: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Assign a final-surface quantum number to every eigenstate.

    Uses the expectation of the transformed number operator b_k^dag b_k;
    returns (rounded levels, rounding residuals).  Residuals near 0.5 mark
    boundary-distorted states whose label is not trustworthy.
    """
    bd = build_b_dagger(problem, h.space)
    nmat = (bd[mode] @ bd[mode].dagger()).to_dense()
    if np.abs(nmat.imag).max(initial=0.0) < 1e-12:
        nmat = nmat.real
    occ = np.einsum("ji,jk,ki->i", evecs.conj(), nmat, evecs).real
    levels = np.rint(occ).astype(int)
    return levels, np.abs(occ - levels)


def cumulative_fcf_by_level(
    problem: VibronicProblem,
    cutoffs: ModeCutoffs,
    mode: int,
    route: str = "qp",
) -> np.ndarray:
    """Total FCF carried by each final-surface level of one mode.

    Entry l is sum over all other modes' quantum numbers of |<0|n'>|^2 with
    n'_mode = l, the quantity that controls how far the mode's progression
    reaches.
    """
    report = build_hamiltonian(problem, cutoffs, route=route)
    evals, evecs = eigensolve(report.hamiltonian)
    fcf = np.abs(evecs[0, :]) ** 2
    levels, _ = mode_occupation_levels(problem, report.hamiltonian, evecs, mode)
    out = np.zeros(cutoffs.levels[mode] + 1)
    for l, f in zip(levels, fcf):
        if 0 <= l < len(out):
            out[l] += f
    return out


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance between two histograms (normalized first)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.sum() <= 0 or q.sum() <= 0:
        raise ValueError("histograms must have positive total mass")
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())


def rebin(binned: BinnedSpectrum, new_width: float, origin: float = 0.0) -> BinnedSpectrum:
    """Aggregate a histogram into coarser bins (new width need not divide evenly)."""
    centers = binned.bin_centers
    idx = np.floor((centers - origin) / new_width).astype(int)
    first = int(idx.min())
    values = np.zeros(int(idx.max()) - first + 1)
    np.add.at(values, idx - first, binned.values)
    return BinnedSpectrum(
        width=new_width,
        origin=origin,
        first_bin=first,
        values=values,
        metadata=dict(binned.metadata),
    )


# -- file output -------------------------------------------------------


def sticks_to_csv(sticks: StickSpectrum) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["energy_cm1", "intensity"])
    for e, i in zip(sticks.energies, sticks.intensities):
        writer.writerow([f"{e:.10g}", f"{i:.10g}"])
    return buf.getvalue()


def binned_to_csv(binned: BinnedSpectrum) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["energy_cm1", "intensity"])
    for e, v in zip(binned.bin_centers, binned.values):
        writer.writerow([f"{e:.10g}", f"{v:.10g}"])
    return buf.getvalue()


def broadened_to_csv(broad: BroadenedSpectrum) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["energy_cm1", "density"])
    for e, v in zip(broad.grid, broad.values):
        writer.writerow([f"{e:.10g}", f"{v:.10g}"])
    return buf.getvalue()


def read_spectrum_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column spectrum CSV (either sticks or broadened)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or len(rows[0]) < 2:
        raise ValueError("spectrum CSV must have a two-column header")
    data = np.array([[float(r[0]), float(r[1])] for r in rows[1:]])
    if data.size == 0:
        raise ValueError("spectrum CSV has no data rows")
    return data[:, 0], data[:, 1]


def metadata_json(meta: dict) -> str:
    return json.dumps(meta, indent=2, sort_keys=True, default=float)
