"""Dense non-Hermitian eigensolver wrapper and spectrum post-processing.

Eigenvalues come from LAPACK's dense QR pipeline (balancing, Hessenberg
reduction, shifted QR) via scipy.  Post-processing classifies reality,
separates grid-localized bound states from discretized continuum, matches
computed levels against analytic ones, and measures how well a closed-form
eigenfunction satisfies the discrete eigenvalue equation.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .generator import effective_potential

TAU_REAL = 1e-5
TAU_SOLVER = 1e-8
BOUND_MASS_FRACTION = 0.999
INNER_FRACTION = 0.8


class EigenSolverError(RuntimeError):
    """The QR iteration failed to converge."""


class ZeroEigenfunctionError(ValueError):
    """A supplied eigenfunction is numerically zero on the grid."""


@dataclass(frozen=True)
class LevelMatch:
    level: float
    eigenvalue: complex
    distance: float
    matched: bool


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues sorted by real part, with right-eigenvector residuals
    ||Mv - lambda v||_2 / (||M||_F ||v||_2) and reality flags
    |Im| <= TAU_REAL * max(1, |Re|)."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    reality_flags: np.ndarray
    eigenvectors: np.ndarray
    grid: object = None
    matches: tuple = field(default_factory=tuple)


def _matrix(op):
    matrix = op.matrix if hasattr(op, "matrix") else np.asarray(op)
    return np.asarray(matrix, dtype=complex)


def is_real_eigenvalue(value, tol=TAU_REAL):
    return abs(value.imag) <= tol * max(1.0, abs(value.real))


def eig(op):
    """Full spectrum with right eigenvectors and per-eigenvalue residuals."""
    matrix = _matrix(op)
    if not np.all(np.isfinite(matrix)):
        raise EigenSolverError("matrix contains non-finite entries")
    try:
        values, vectors = scipy.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError("QR iteration did not converge: %s" % exc) from exc
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    scale = np.linalg.norm(matrix)
    defect = matrix @ vectors - vectors * values
    residuals = np.linalg.norm(defect, axis=0) / (
        scale * np.linalg.norm(vectors, axis=0)
    )
    flags = np.array([is_real_eigenvalue(v) for v in values])
    grid = op.grid if hasattr(op, "grid") else None
    return SpectrumReport(
        eigenvalues=values,
        residuals=residuals,
        reality_flags=flags,
        eigenvectors=vectors,
        grid=grid,
    )


def bound_state_filter(report, grid, v_inf):
    """Keep eigenvalues below v_inf whose eigenvectors hold at least 99.9%
    of their l2 mass in the inner 80% of the grid."""
    n = grid.n
    margin = int(round(0.5 * (1.0 - INNER_FRACTION) * n))
    inner = slice(margin, n - margin)
    keep = []
    for i, value in enumerate(report.eigenvalues):
        if value.real >= v_inf:
            continue
        vec = report.eigenvectors[:, i]
        total = np.sum(np.abs(vec) ** 2)
        if np.sum(np.abs(vec[inner]) ** 2) >= BOUND_MASS_FRACTION * total:
            keep.append(i)
    keep = np.array(keep, dtype=int)
    return SpectrumReport(
        eigenvalues=report.eigenvalues[keep],
        residuals=report.residuals[keep],
        reality_flags=report.reality_flags[keep],
        eigenvectors=report.eigenvectors[:, keep],
        grid=grid,
        matches=(),
    )


def match_levels(report, analytic, tol):
    """Greedy nearest pairing of analytic levels with computed eigenvalues.

    Pairs are assigned in order of increasing distance, each eigenvalue
    used at most once; a pair with distance > tol leaves its level
    unmatched.  The result is ordered like sorted(analytic), so it does
    not depend on the input permutation.
    """
    levels = sorted(analytic)
    values = report.eigenvalues
    if not levels:
        return []
    if values.size == 0:
        return [LevelMatch(lv, complex("nan"), float("inf"), False) for lv in levels]
    pairs = sorted(
        ((abs(values[j] - lv), i, j) for i, lv in enumerate(levels) for j in range(values.size)),
        key=lambda t: (t[0], t[1], t[2]),
    )
    assigned = {}
    used = set()
    for distance, i, j in pairs:
        if i in assigned or j in used:
            continue
        assigned[i] = (values[j], distance)
        used.add(j)
    out = []
    for i, lv in enumerate(levels):
        value, distance = assigned.get(i, (complex("nan"), float("inf")))
        out.append(LevelMatch(lv, complex(value), float(distance), distance <= tol))
    return out


def with_matches(report, analytic, tol):
    return replace(report, matches=tuple(match_levels(report, analytic, tol)))


def eigenfunction_residual(model, grid, psi, energy):
    """||H psi - E psi||_2 / ||psi||_2 with the difference stencil applied
    directly to psi sampled on the closed interval [a, b].

    Sampling the two boundary points from the callable keeps the stencil
    consistent in the outermost rows, where the Dirichlet matrix would
    otherwise inject the truncation error of psi(a), psi(b) at 1/h^2.
    """
    closed = grid.a + grid.h * np.arange(0, grid.n + 2)
    samples = np.asarray(psi(closed), dtype=complex)
    if samples.shape != closed.shape:
        samples = np.array([psi(t) for t in closed], dtype=complex)
    inner = samples[1:-1]
    norm = np.linalg.norm(inner)
    if norm < 1e-12 * grid.n:
        raise ZeroEigenfunctionError(
            "eigenfunction is numerically zero on the grid (norm %.3g)" % norm
        )
    second = (-samples[:-2] + 2.0 * inner - samples[2:]) / grid.h**2
    applied = second + effective_potential(model, grid.points) * inner
    return float(np.linalg.norm(applied - energy * inner) / norm)


def report_to_dict(report):
    """JSON-ready form: eigenvalues as [re, im] sorted by real part."""
    data = {
        "eigenvalues": [[float(v.real), float(v.imag)] for v in report.eigenvalues],
        "residuals": [float(r) for r in report.residuals],
        "reality_flags": [bool(f) for f in report.reality_flags],
    }
    if report.matches:
        data["matches"] = [
            {
                "level": float(m.level),
                "eigenvalue": [float(m.eigenvalue.real), float(m.eigenvalue.imag)],
                "distance": float(m.distance),
                "matched": bool(m.matched),
            }
            for m in report.matches
        ]
    return data


def report_to_csv(report, path):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["re", "im", "residual", "real_flag"])
        for value, residual, flag in zip(
            report.eigenvalues, report.residuals, report.reality_flags
        ):
            writer.writerow(
                [
                    repr(float(value.real)),
                    repr(float(value.imag)),
                    repr(float(residual)),
                    int(flag),
                ]
            )
