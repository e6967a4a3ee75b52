"""Haar-random matrices from the compact classical groups.

Angles are always fractions of a full turn in ``[0, 1)``; eigenvalue
``e(theta) = exp(2 pi i theta)``.
"""
from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

log = logging.getLogger(__name__)

MAX_DIM = 200
MAX_WEYL_VARIABLES = 3


class Group(enum.Enum):
    UNITARY = "U"
    SO_EVEN = "SO-even"
    SO_ODD = "SO-odd"
    USP = "USp"
    # 50/50 mixture of SO(2N) and SO(2N+1); matrix_dim holds the even size
    O_MIXTURE = "O"


_ALIASES = {
    "u": Group.UNITARY, "unitary": Group.UNITARY, "cue": Group.UNITARY,
    "so-even": Group.SO_EVEN, "so_even": Group.SO_EVEN, "soeven": Group.SO_EVEN,
    "o+": Group.SO_EVEN,
    "so-odd": Group.SO_ODD, "so_odd": Group.SO_ODD, "soodd": Group.SO_ODD, "o-": Group.SO_ODD,
    "usp": Group.USP, "sp": Group.USP,
    "o": Group.O_MIXTURE,
}


class EigenSolverError(RuntimeError):
    """The dense eigen-solver failed on one sample."""

    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} (sample index {index})")
        self.index = index


@dataclass(frozen=True)
class SymmetryClass:
    group: Group
    matrix_dim: int

    def __post_init__(self):
        if isinstance(self.group, str):
            object.__setattr__(self, "group", parse_group(self.group))
        d = self.matrix_dim
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ValueError(f"matrix_dim must be a positive integer, got {d!r}")
        if d > MAX_DIM:
            raise ValueError(f"matrix_dim {d} exceeds the desk-scale limit {MAX_DIM}")
        if self.group in (Group.SO_EVEN, Group.USP, Group.O_MIXTURE) and d % 2:
            raise ValueError(f"{self.group.value} needs an even matrix_dim, got {d}")
        if self.group is Group.SO_ODD and d % 2 == 0:
            raise ValueError(f"SO-odd needs an odd matrix_dim, got {d}")

    @property
    def n_angles(self) -> int:
        """Number of free Weyl angle variables."""
        if self.group is Group.UNITARY:
            return self.matrix_dim
        return self.matrix_dim // 2

    @property
    def label(self) -> str:
        return f"{self.group.value}({self.matrix_dim})"

    @property
    def symmetry_label(self) -> str:
        """Symmetry type used by the analytic densities."""
        return {
            Group.UNITARY: "U",
            Group.USP: "Sp",
            Group.SO_EVEN: "O+",
            Group.SO_ODD: "O-",
            Group.O_MIXTURE: "O",
        }[self.group]

    @classmethod
    def parse(cls, group: str, dim: int) -> "SymmetryClass":
        return cls(parse_group(group), int(dim))


def parse_group(name) -> Group:
    if isinstance(name, Group):
        return name
    key = str(name).strip().lower()
    for g in Group:
        if key == g.value.lower():
            return g
    if key in _ALIASES:
        return _ALIASES[key]
    raise ValueError(f"unknown group {name!r}")


def symplectic_form(n: int) -> np.ndarray:
    """The 2n x 2n matrix ((0, I), (-I, 0))."""
    z = np.zeros((2 * n, 2 * n))
    z[:n, n:] = np.eye(n)
    z[n:, :n] = -np.eye(n)
    return z


@dataclass(frozen=True)
class UnitarySample:
    entries: np.ndarray
    cls: SymmetryClass
    seed_path: tuple

    def residuals(self) -> dict:
        a = self.entries
        d = a.shape[0]
        out = {"unitarity": float(np.max(np.abs(a @ a.conj().T - np.eye(d))))}
        if self.cls.group in (Group.SO_EVEN, Group.SO_ODD):
            out["imag"] = float(np.max(np.abs(np.imag(a))))
            out["det"] = float(abs(np.linalg.det(a.real) - 1.0))
        if self.cls.group is Group.USP:
            z = symplectic_form(d // 2)
            out["symplectic"] = float(np.max(np.abs(a @ z @ a.T - z)))
        return out


@dataclass(frozen=True)
class EigenAngles:
    angles: np.ndarray
    cls: SymmetryClass

    def __len__(self):
        return self.angles.shape[0]


def rng_for(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, index); independent of call order."""
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return np.random.Generator(np.random.Philox(key))


def _haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _haar_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diagonal(r))


def _haar_special_orthogonal(n, rng):
    # rejection keeps exactly the det=+1 half of Haar O(n)
    while True:
        q = _haar_orthogonal(n, rng)
        if np.linalg.det(q) > 0:
            return q


def _quaternion_partner(v, n):
    # (x; y) -> (-conj(y); conj(x)): the column paired with v under the J-structure
    return np.concatenate([-np.conj(v[n:]), np.conj(v[:n])])


def _haar_symplectic(n, rng):
    """Gram-Schmidt over the quaternions on an n x n quaternion-Gaussian matrix."""
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    b = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    cols = np.concatenate([a, -np.conj(b)], axis=0)
    q = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        v = cols[:, j].copy()
        for _ in range(2):  # re-orthogonalise once for stability
            for k in range(j):
                for w in (q[:, k], q[:, k + n]):
                    v -= np.vdot(w, v) * w
        v /= np.linalg.norm(v)
        q[:, j] = v
        q[:, j + n] = _quaternion_partner(v, n)
    return q


def _concrete_class(cls: SymmetryClass, rng) -> SymmetryClass:
    if cls.group is not Group.O_MIXTURE:
        return cls
    if rng.random() < 0.5:
        return SymmetryClass(Group.SO_EVEN, cls.matrix_dim)
    return SymmetryClass(Group.SO_ODD, cls.matrix_dim + 1)


def sample_haar(cls: SymmetryClass, seed: int, index: int) -> UnitarySample:
    """Haar-distributed matrix; a pure function of ``(cls, seed, index)``.

    For the ``O`` mixture the returned sample's class is the SO variant that
    was drawn.
    """
    rng = rng_for(seed, index)
    concrete = _concrete_class(cls, rng)
    d = concrete.matrix_dim
    g = concrete.group
    if g is Group.UNITARY:
        a = _haar_unitary(d, rng)
    elif g in (Group.SO_EVEN, Group.SO_ODD):
        a = _haar_special_orthogonal(d, rng).astype(complex)
    else:
        a = _haar_symplectic(d // 2, rng)
    return UnitarySample(a, concrete, (int(seed), int(index)))


def angles_of(eigenvalues) -> np.ndarray:
    th = np.mod(np.angle(eigenvalues) / (2.0 * math.pi), 1.0)
    th[th >= 1.0] = 0.0
    return th


def eigen_angles(sample: UnitarySample) -> EigenAngles:
    try:
        ev = np.linalg.eigvals(sample.entries)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue computation failed: {exc}",
                               sample.seed_path[1] if sample.seed_path else None) from exc
    if not np.all(np.isfinite(ev)):
        raise EigenSolverError("non-finite eigenvalues",
                               sample.seed_path[1] if sample.seed_path else None)
    th = angles_of(ev)
    if sample.cls.group is Group.SO_ODD:
        # the forced eigenvalue 1 is exact; pin it instead of trusting rounding
        th[np.argmin(np.abs(ev - 1.0))] = 0.0
    th.sort()
    return EigenAngles(th, sample.cls)


def _one(args):
    cls, seed, i = args
    try:
        return eigen_angles(sample_haar(cls, seed, i))
    except EigenSolverError as exc:
        raise EigenSolverError(str(exc).split(" (sample")[0], i) from exc


def sample_angle_batch(cls: SymmetryClass, seed: int, count: int,
                       threads: int = 1) -> list[EigenAngles]:
    """``[eigen_angles(sample_haar(cls, seed, i)) for i in range(count)]``.

    ``threads`` changes wall time only.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    jobs = [(cls, seed, i) for i in range(count)]
    if threads <= 1:
        return [_one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_one, jobs))


def char_poly_modulus(sample, x: float = 0.0) -> float:
    """``|det(A - I exp(-i x))|`` as a product over eigenangles (x in radians)."""
    if isinstance(sample, EigenAngles):
        th = sample.angles
    elif isinstance(sample, UnitarySample):
        th = eigen_angles(sample).angles
    else:
        th = np.asarray(sample, dtype=float)
    z = np.exp(-1j * x)
    return float(np.prod(np.abs(np.exp(2j * math.pi * th) - z)))


def char_poly_moduli(batch: Sequence[EigenAngles], x: float = 0.0) -> np.ndarray:
    return np.array([char_poly_modulus(a, x) for a in batch])


# ---------------------------------------------------------------------------
# Weyl integration (direct quadrature oracle, at most 3 angle variables)
# ---------------------------------------------------------------------------


def _weyl_density(group, nodes, n):
    """Weyl density (with its printed constant) on the tensor grid ``nodes``."""
    if group is Group.UNITARY:
        e = np.exp(2j * math.pi * nodes)
        dens = np.ones(nodes.shape[:-1])
        for j in range(n):
            for k in range(j + 1, n):
                dens = dens * np.abs(e[..., j] - e[..., k]) ** 2
        return dens / math.factorial(n)
    c = np.cos(math.pi * nodes)
    dens = np.ones(nodes.shape[:-1])
    for j in range(n):
        for k in range(j + 1, n):
            dens = dens * (c[..., j] - c[..., k]) ** 2
    if group is Group.USP:
        dens = dens * np.prod(np.sin(math.pi * nodes) ** 2, axis=-1)
        return dens * 2.0 ** (n * n) / math.factorial(n)
    if group is Group.SO_EVEN:
        return dens * 2.0 ** ((n - 1) ** 2) / math.factorial(n)
    if group is Group.SO_ODD:
        dens = dens * np.prod(np.sin(0.5 * math.pi * nodes) ** 2, axis=-1)
        return dens * 2.0 ** (n * n) / math.factorial(n)
    raise ValueError(f"no Weyl density for {group}")


def _matrix_angles(group, nodes):
    """Map Weyl variables to the full list of eigenangles of the matrix."""
    if group is Group.UNITARY:
        return nodes
    half = 0.5 * nodes
    full = np.concatenate([half, np.mod(1.0 - half, 1.0)], axis=-1)
    if group is Group.SO_ODD:
        full = np.concatenate([full, np.zeros(nodes.shape[:-1] + (1,))], axis=-1)
    return full


def weyl_average(cls: SymmetryClass, integrand: Callable[[np.ndarray], np.ndarray],
                 quad_points_per_dim: int = 32) -> float:
    """Haar average of a symmetric function of the eigenangles by tensor quadrature.

    ``integrand`` receives an array of shape ``(..., matrix_dim)`` holding all
    eigenangles (turn fractions) and must return an array of shape ``(...)``.
    For USp/SO the Weyl variable ``theta`` in ``[0, 1]`` corresponds to the
    eigenvalue pair ``e(+-theta/2)``.
    """
    if cls.group is Group.O_MIXTURE:
        even = weyl_average(SymmetryClass(Group.SO_EVEN, cls.matrix_dim), integrand,
                            quad_points_per_dim)
        odd = weyl_average(SymmetryClass(Group.SO_ODD, cls.matrix_dim + 1), integrand,
                           quad_points_per_dim)
        return 0.5 * (even + odd)
    n = cls.n_angles
    if n > MAX_WEYL_VARIABLES:
        raise ValueError(f"weyl_average supports at most {MAX_WEYL_VARIABLES} angle "
                         f"variables, {cls.label} has {n}")
    if quad_points_per_dim < 16:
        raise ValueError("quad_points_per_dim must be >= 16")
    if n == 0:
        # SO(1) = {1}
        val = float(np.asarray(integrand(np.zeros((1, 1))))[0])
        if not math.isfinite(val):
            raise ValueError("integrand returned a non-finite value")
        return val
    x, w = np.polynomial.legendre.leggauss(quad_points_per_dim)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    grids = np.meshgrid(*([x] * n), indexing="ij")
    nodes = np.stack(grids, axis=-1)
    weights = np.ones(nodes.shape[:-1])
    for wg in np.meshgrid(*([w] * n), indexing="ij"):
        weights = weights * wg
    dens = _weyl_density(cls.group, nodes, n)
    values = np.asarray(integrand(_matrix_angles(cls.group, nodes)), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("integrand returned a non-finite value")
    total = float(np.sum(weights * dens * values))
    mass = float(np.sum(weights * dens))
    if abs(mass - 1.0) > 1e-9:
        log.warning("Weyl constant for %s integrates to %.12g; using the self-normalised "
                    "quotient", cls.label, mass)
        return total / mass
    return total


def det_minus_identity(angles: np.ndarray, x: float = 0.0) -> np.ndarray:
    """``|det(A - I exp(-ix))|`` from an angle array of shape ``(..., d)``."""
    return np.prod(np.abs(np.exp(2j * math.pi * angles) - np.exp(-1j * x)), axis=-1)


def write_angle_csv(path, batch: Sequence[EigenAngles], cls: SymmetryClass, seed: int):
    width = max(len(b) for b in batch)
    with open(path, "w", newline="") as fh:
        fh.write(f"# class={cls.group.value} dim={cls.matrix_dim} seed={seed} "
                 f"count={len(batch)}\n")
        fh.write(",".join(f"theta_{i + 1}" for i in range(width)) + "\n")
        for b in batch:
            cells = [repr(float(v)) for v in b.angles] + [""] * (width - len(b))
            fh.write(",".join(cells) + "\n")


def read_angle_csv(path) -> tuple[SymmetryClass, int, list[EigenAngles]]:
    with open(path) as fh:
        head = fh.readline()
        if not head.startswith("#"):
            raise ValueError(f"{path}: missing '# class=... seed=...' header")
        meta = dict(tok.split("=", 1) for tok in head[1:].split())
        cls = SymmetryClass.parse(meta["class"], int(meta["dim"]))
        fh.readline()
        rows = []
        for lineno, line in enumerate(fh, start=3):
            line = line.strip()
            if not line:
                continue
            try:
                vals = np.array([float(c) for c in line.split(",") if c != ""])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            member = cls
            if cls.group is Group.O_MIXTURE:
                member = (SymmetryClass(Group.SO_EVEN, vals.size) if vals.size % 2 == 0
                          else SymmetryClass(Group.SO_ODD, vals.size))
            rows.append(EigenAngles(np.sort(vals), member))
    return cls, int(meta["seed"]), rows
