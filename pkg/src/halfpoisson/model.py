"""Problem data for constant-coefficient elliptic systems on the half-space.

A problem consists of a homogeneous interior operator of order ``2m``,

    A(D) = sum_{|alpha| = 2m} a_alpha D^alpha,      D = -i * d/dx,

together with ``m`` boundary operators ``B_j(D)`` of orders ``m_j < 2m`` acting
on the boundary ``x_n = 0`` of the half-space ``x_n > 0``.  The parameter
``lambda`` ranges over a sector of opening angle ``phi`` around the positive
real axis, and well-posedness requires

* parameter-ellipticity: ``A(xi)`` stays outside the closed sector of angle
  ``phi_prime`` for every real frequency ``xi != 0``;
* the Lopatinskii-Shapiro condition: at each tangential frequency the boundary
  operators restrict to an isomorphism on the stable subspace of the normal
  ODE (checked numerically on a frequency sample, see
  :func:`check_lopatinskii_shapiro`).

Multi-indices are plain integer tuples of length ``n``.  In JSON problem files
they serialize as comma-joined strings, e.g. ``"0,2"``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "BoundaryOperator",
    "ModelProblem",
    "SectorSample",
    "EllipticityReport",
    "LopatinskiiReport",
    "symbol_A",
    "symbol_B",
    "check_ellipticity",
    "check_lopatinskii_shapiro",
    "k_max",
    "load_problem",
    "loads_problem",
    "problem_to_json",
    "dirichlet_laplacian",
    "neumann_laplacian",
    "clamped_bilaplacian",
    "bundled_problem_path",
]

MultiIndex = tuple[int, ...]


def _validate_multi_index(key: MultiIndex, n: int, order: int, what: str) -> None:
    if len(key) != n:
        raise ValueError(f"{what}: multi-index {key} has length {len(key)}, expected {n}")
    if any(k < 0 for k in key):
        raise ValueError(f"{what}: multi-index {key} has negative entries")
    if sum(key) != order:
        raise ValueError(
            f"{what}: multi-index {key} has order {sum(key)}, expected {order} (homogeneous)"
        )


@dataclass(frozen=True)
class BoundaryOperator:
    """One boundary operator ``B_j(D) = sum_{|beta| = m_j} b_beta D^beta``."""

    order: int
    coeffs: Mapping[MultiIndex, complex]

    def normal_orders(self) -> list[int]:
        """Normal-derivative orders ``beta_n`` with a nonzero coefficient."""
        return sorted({beta[-1] for beta, c in self.coeffs.items() if c != 0})


@dataclass(frozen=True)
class ModelProblem:
    """Immutable problem data ``(A, B_1, ..., B_m)`` plus sector angles."""

    n: int
    m: int
    interior_coeffs: Mapping[MultiIndex, complex]
    boundary_ops: Sequence[BoundaryOperator]
    phi_prime: float
    phi: float
    name: str = "problem"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        order = 2 * self.m
        if not self.interior_coeffs:
            raise ValueError("interior operator has no coefficients")
        for key in self.interior_coeffs:
            _validate_multi_index(key, self.n, order, "interior")
        pure_normal = (0,) * (self.n - 1) + (order,)
        if self.interior_coeffs.get(pure_normal, 0) == 0:
            raise ValueError(
                "pure-normal coefficient a_(0,...,0,2m) vanishes; the normal ODE "
                "degenerates and the half-space problem is ill posed"
            )
        if len(self.boundary_ops) != self.m:
            raise ValueError(
                f"need exactly m = {self.m} boundary operators, got {len(self.boundary_ops)}"
            )
        for j, bop in enumerate(self.boundary_ops):
            if not (0 <= bop.order < order):
                raise ValueError(f"boundary operator {j}: order {bop.order} not in [0, 2m)")
            if not any(c != 0 for c in bop.coeffs.values()):
                raise ValueError(f"boundary operator {j} is identically zero")
            for key in bop.coeffs:
                _validate_multi_index(key, self.n, bop.order, f"boundary[{j}]")
        if not (0 < self.phi_prime <= math.pi):
            raise ValueError("phi_prime must lie in (0, pi]")
        if not (0 < self.phi < self.phi_prime):
            raise ValueError("phi must lie in (0, phi_prime)")

    @property
    def order(self) -> int:
        return 2 * self.m

    @property
    def boundary_orders(self) -> tuple[int, ...]:
        return tuple(b.order for b in self.boundary_ops)

    @property
    def a_top(self) -> complex:
        """Coefficient of the pure normal monomial ``tau^{2m}``."""
        return complex(self.interior_coeffs[(0,) * (self.n - 1) + (self.order,)])

    def normal_symbol_coeffs(self, xi_prime) -> np.ndarray:
        """Coefficients ``c_l`` with ``A(xi', tau) = sum_l c_l tau^l``.

        Returned in increasing order of ``l``, length ``2m + 1``.
        """
        xi_prime = np.atleast_1d(np.asarray(xi_prime, dtype=float))
        if xi_prime.shape != (self.n - 1,):
            raise ValueError(f"xi_prime must have length n-1 = {self.n - 1}")
        c = np.zeros(self.order + 1, dtype=complex)
        for alpha, a in self.interior_coeffs.items():
            tang = np.prod(xi_prime ** np.array(alpha[:-1])) if self.n > 1 else 1.0
            c[alpha[-1]] += a * tang
        return c


@dataclass(frozen=True)
class SectorSample:
    """Sample of the parameter sector: rays (arguments) x log-spaced moduli."""

    rays: tuple[float, ...]
    moduli: tuple[float, ...]
    sigma_floor: float

    def __post_init__(self):
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be positive")
        if any(mod < self.sigma_floor for mod in self.moduli):
            raise ValueError("all moduli must be >= sigma_floor")

    @staticmethod
    def default(phi: float, sigma_floor: float = 1.0, n_rays: int = 5,
                n_moduli: int = 24, mod_max: float = 1e6) -> "SectorSample":
        rays = tuple(np.linspace(-phi, phi, n_rays))
        moduli = tuple(np.logspace(math.log10(sigma_floor), math.log10(mod_max), n_moduli))
        return SectorSample(rays=rays, moduli=moduli, sigma_floor=sigma_floor)

    def points(self):
        """All sampled lambda values, as a flat complex array."""
        out = [mod * cmath.exp(1j * theta) for theta in self.rays for mod in self.moduli]
        return np.array(out, dtype=complex)


def symbol_A(problem: ModelProblem, xi) -> complex:
    """Evaluate the interior symbol ``A(xi) = sum a_alpha xi^alpha``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (problem.n,):
        raise ValueError(f"xi must have length n = {problem.n}")
    total = 0j
    for alpha, a in problem.interior_coeffs.items():
        total += a * np.prod(xi ** np.array(alpha))
    return complex(total)


def symbol_B(problem: ModelProblem, j: int, xi) -> complex:
    """Evaluate the j-th boundary symbol ``B_j(xi)`` at a full frequency xi."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (problem.n,):
        raise ValueError(f"xi must have length n = {problem.n}")
    bop = problem.boundary_ops[j]
    total = 0j
    for beta, b in bop.coeffs.items():
        total += b * np.prod(xi ** np.array(beta))
    return complex(total)


@dataclass(frozen=True)
class EllipticityReport:
    passed: bool
    worst_margin: float
    worst_direction: tuple[float, ...] | None


@dataclass(frozen=True)
class LopatinskiiReport:
    passed: bool
    min_singular_value: float
    worst_point: tuple | None
    condition_number: float
    threshold: float


def _sector_margin(z: complex, phi_prime: float) -> float:
    """Angular distance of z from the closed sector |arg| <= phi_prime.

    Positive when z lies strictly outside the sector.
    """
    if z == 0:
        return -phi_prime
    return abs(cmath.phase(z)) - phi_prime


def unit_directions(n: int, count: int, seed: int = 7) -> np.ndarray:
    """Deterministic sample of unit vectors on the sphere in R^n."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def check_ellipticity(problem: ModelProblem, directions=None) -> EllipticityReport:
    """Sample-based parameter-ellipticity check on the unit sphere.

    Passes iff ``A(xi)`` keeps a positive angular margin to the sector of
    half-angle ``phi_prime`` for every sampled unit direction (homogeneity
    reduces the check to the sphere).
    """
    if directions is None:
        directions = unit_directions(problem.n, 64)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if directions.size == 0:
        raise ValueError("directions sample must be nonempty")
    worst = math.inf
    worst_dir = None
    for xi in directions:
        margin = _sector_margin(symbol_A(problem, xi), problem.phi_prime)
        if margin < worst:
            worst = margin
            worst_dir = tuple(xi)
    return EllipticityReport(passed=worst > 0, worst_margin=worst, worst_direction=worst_dir)


def check_lopatinskii_shapiro(
    problem: ModelProblem,
    sample: SectorSample | None = None,
    tangential_dirs=None,
    tangential_moduli=(0.0, 0.5, 1.0, 4.0, 32.0),
    threshold: float = 1e-8,
) -> LopatinskiiReport:
    """Verify unique decaying solvability of the boundary ODE on a sample.

    For each sampled ``(xi', lambda)`` the companion system is built and the
    boundary map restricted to the stable subspace must be invertible; the
    report carries the worst (smallest) normalized singular value.
    """
    from . import companion

    if sample is None:
        sample = SectorSample.default(problem.phi)
    if tangential_dirs is None:
        if problem.n == 1:
            tangential_dirs = [np.zeros(0)]
        else:
            tangential_dirs = unit_directions(problem.n - 1, 8)
    min_sv = math.inf
    worst_cond = 0.0
    worst_point = None
    for lam in sample.points():
        for d in np.atleast_2d(np.asarray(tangential_dirs, dtype=float)):
            for t in tangential_moduli:
                xi_prime = t * d if d.size else np.zeros(0)
                if np.allclose(xi_prime, 0) and lam == 0:
                    raise ValueError("degenerate frequency point (0, 0)")
                fp = companion.make_frequency_point(xi_prime, lam, problem.m)
                sv, cond = companion.boundary_map_conditioning(problem, fp)
                if sv < min_sv:
                    min_sv = sv
                    worst_point = (tuple(xi_prime), complex(lam))
                    worst_cond = cond
    return LopatinskiiReport(
        passed=min_sv > threshold,
        min_singular_value=min_sv,
        worst_point=worst_point,
        condition_number=worst_cond,
        threshold=threshold,
    )


def k_max(problem: ModelProblem) -> int:
    """Minimal normal-derivative order present among the boundary operators."""
    return min(min(b.normal_orders()) for b in problem.boundary_ops)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def _key_to_str(key: MultiIndex) -> str:
    return ",".join(str(k) for k in key)


def _str_to_key(s: str) -> MultiIndex:
    return tuple(int(part) for part in s.split(","))


def problem_to_json(problem: ModelProblem) -> str:
    doc = {
        "n": problem.n,
        "m": problem.m,
        "interior": {
            _key_to_str(k): [complex(v).real, complex(v).imag]
            for k, v in sorted(problem.interior_coeffs.items())
        },
        "boundary": [
            {
                "order": b.order,
                "coeffs": {
                    _key_to_str(k): [complex(v).real, complex(v).imag]
                    for k, v in sorted(b.coeffs.items())
                },
            }
            for b in problem.boundary_ops
        ],
        "phi_prime": problem.phi_prime,
        "phi": problem.phi,
    }
    return json.dumps(doc, indent=2)


def loads_problem(text: str, name: str = "problem") -> ModelProblem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed problem JSON: {exc}") from exc
    try:
        interior = {
            _str_to_key(k): complex(v[0], v[1]) for k, v in doc["interior"].items()
        }
        boundary = [
            BoundaryOperator(
                order=int(entry["order"]),
                coeffs={
                    _str_to_key(k): complex(v[0], v[1])
                    for k, v in entry["coeffs"].items()
                },
            )
            for entry in doc["boundary"]
        ]
        return ModelProblem(
            n=int(doc["n"]),
            m=int(doc["m"]),
            interior_coeffs=interior,
            boundary_ops=boundary,
            phi_prime=float(doc["phi_prime"]),
            phi=float(doc["phi"]),
            name=name,
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ValueError(f"problem JSON missing or malformed field: {exc}") from exc


def load_problem(path) -> ModelProblem:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    import os

    return loads_problem(text, name=os.path.splitext(os.path.basename(str(path)))[0])


# ---------------------------------------------------------------------------
# Bundled problems
# ---------------------------------------------------------------------------

def _laplacian_interior(n: int) -> dict[MultiIndex, complex]:
    # Laplacian = -sum_j D_j^2, so A(xi) = -|xi|^2
    coeffs = {}
    for j in range(n):
        key = tuple(2 if i == j else 0 for i in range(n))
        coeffs[key] = -1.0 + 0j
    return coeffs


def dirichlet_laplacian(n: int = 2) -> ModelProblem:
    """Laplacian with the trace boundary condition, A(xi) = -|xi|^2."""
    trace = BoundaryOperator(order=0, coeffs={(0,) * n: 1.0 + 0j})
    return ModelProblem(
        n=n, m=1,
        interior_coeffs=_laplacian_interior(n),
        boundary_ops=[trace],
        phi_prime=math.pi - 0.01,
        phi=0.75 * math.pi,
        name="dirichlet_laplacian",
    )


def neumann_laplacian(n: int = 2) -> ModelProblem:
    """Laplacian with the normal-derivative boundary condition B = D_n."""
    dn = BoundaryOperator(order=1, coeffs={(0,) * (n - 1) + (1,): 1.0 + 0j})
    return ModelProblem(
        n=n, m=1,
        interior_coeffs=_laplacian_interior(n),
        boundary_ops=[dn],
        phi_prime=math.pi - 0.01,
        phi=0.75 * math.pi,
        name="neumann_laplacian",
    )


def clamped_bilaplacian(n: int = 2) -> ModelProblem:
    """Bi-Laplacian A(xi) = -|xi|^4 with clamped conditions (trace, D_n)."""
    # expand -(sum xi_j^2)^2 into monomials
    coeffs: dict[MultiIndex, complex] = {}
    for i in range(n):
        for j in range(n):
            key = [0] * n
            key[i] += 2
            key[j] += 2
            key = tuple(key)
            coeffs[key] = coeffs.get(key, 0) - 1.0
    trace = BoundaryOperator(order=0, coeffs={(0,) * n: 1.0 + 0j})
    dn = BoundaryOperator(order=1, coeffs={(0,) * (n - 1) + (1,): 1.0 + 0j})
    return ModelProblem(
        n=n, m=2,
        interior_coeffs=coeffs,
        boundary_ops=[trace, dn],
        phi_prime=math.pi - 0.01,
        phi=0.75 * math.pi,
        name="clamped_bilaplacian",
    )


BUNDLED = {
    "dirichlet_laplacian": dirichlet_laplacian,
    "neumann_laplacian": neumann_laplacian,
    "clamped_bilaplacian": clamped_bilaplacian,
}


def bundled_problem_path(name: str):
    """Filesystem path of a bundled problem JSON (for the CLI --problem flag)."""
    if name not in BUNDLED:
        raise ValueError(f"unknown bundled problem {name!r}; have {sorted(BUNDLED)}")
    return resources.files("halfpoisson").joinpath("problems", name + ".json")
