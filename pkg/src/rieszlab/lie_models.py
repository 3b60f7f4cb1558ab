"""Concrete realizations of the model groups G(rho) for rho in {0, 1, -1}.

The Heisenberg group is realized both in exponential coordinates (x, y, z)
with the law ``(x1+x2, y1+y2, z1+z2 + (x1*y2 - y1*x2)/2)`` and as 3x3 unit
upper-triangular matrices. SU(2) and SL(2) are 2x2 matrix groups.

Charts are cylindric: ``(r, theta, z) -> exp(r cos(theta) X + r sin(theta) Y) exp(z Z)``.
For the Heisenberg group the chart is ``(r cos(theta), r sin(theta), z)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

GROUP_NAMES = ("heisenberg", "su2", "sl2")
_ALIASES = {"h": "heisenberg", "heisenberg": "heisenberg", "H": "heisenberg",
            "su2": "su2", "SU2": "su2", "sl2": "sl2", "SL2": "sl2"}

FD_STEP_FIRST = 1e-4
FD_STEP_SECOND = 1e-3
CHART_EPS = 1e-3


class ManifoldError(ValueError):
    """Raised when a matrix is not (numerically) an element of the group."""


class ChartSingularityError(ValueError):
    """Raised when a coordinate field is evaluated where the chart degenerates."""


@dataclass(frozen=True, eq=False)
class ModelSpace:
    name: str
    rho: int
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    r_range: tuple[float, float]
    theta_range: tuple[float, float]
    z_range: tuple[float, float]

    @property
    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.X, self.Y, self.Z

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.X.shape[0], dtype=complex)

    def element(self, name: str) -> np.ndarray:
        return {"X": self.X, "Y": self.Y, "Z": self.Z}[name]


def _heisenberg() -> ModelSpace:
    X = np.zeros((3, 3), complex)
    Y = np.zeros((3, 3), complex)
    Z = np.zeros((3, 3), complex)
    X[0, 1] = 1.0
    Y[1, 2] = 1.0
    Z[0, 2] = 1.0
    return ModelSpace("heisenberg", 0, X, Y, Z,
                      (0.0, np.inf), (0.0, 2 * np.pi), (-np.inf, np.inf))


def _su2() -> ModelSpace:
    X = 0.5 * np.array([[0, 1], [-1, 0]], dtype=complex)
    Y = 0.5 * np.array([[0, 1j], [1j, 0]], dtype=complex)
    Z = 0.5 * np.array([[1j, 0], [0, -1j]], dtype=complex)
    return ModelSpace("su2", 1, X, Y, Z,
                      (0.0, np.pi), (0.0, 2 * np.pi), (-2 * np.pi, 2 * np.pi))


def _sl2() -> ModelSpace:
    X = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
    Y = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
    Z = 0.5 * np.array([[0, 1], [-1, 0]], dtype=complex)
    return ModelSpace("sl2", -1, X, Y, Z,
                      (0.0, np.inf), (0.0, 2 * np.pi), (-2 * np.pi, 2 * np.pi))


HEISENBERG = _heisenberg()
SU2 = _su2()
SL2 = _sl2()
_MODELS = {"heisenberg": HEISENBERG, "su2": SU2, "sl2": SL2}


def get_model(name: str | ModelSpace) -> ModelSpace:
    if isinstance(name, ModelSpace):
        return name
    try:
        return _MODELS[_ALIASES[name]]
    except KeyError:
        raise ValueError(f"unknown group {name!r}; expected one of h, su2, sl2") from None


def bracket(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def commutator_residual(m: ModelSpace) -> float:
    """Largest Frobenius residual of the three structure relations of ``m``."""
    X, Y, Z = m.basis
    res = (
        bracket(X, Y) - Z,
        bracket(X, Z) + m.rho * Y,
        bracket(Y, Z) - m.rho * X,
    )
    return float(max(np.linalg.norm(r) for r in res))


# -- Heisenberg coordinates ---------------------------------------------------

def heis_mul(p, q) -> np.ndarray:
    """Group law in exponential coordinates; broadcasts over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    x = p[..., 0] + q[..., 0]
    y = p[..., 1] + q[..., 1]
    z = p[..., 2] + q[..., 2] + 0.5 * (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0])
    return np.stack([x, y, z], axis=-1)


def heis_inv(p) -> np.ndarray:
    return -np.asarray(p, dtype=float)


def heis_to_matrix(p) -> np.ndarray:
    x, y, z = (float(v) for v in p)
    return np.array([[1.0, x, z + 0.5 * x * y], [0.0, 1.0, y], [0.0, 0.0, 1.0]], dtype=complex)


def heis_from_matrix(g: np.ndarray) -> np.ndarray:
    x = g[0, 1].real
    y = g[1, 2].real
    return np.array([x, y, g[0, 2].real - 0.5 * x * y])


# -- group points -------------------------------------------------------------

def check_point(g: np.ndarray, m: ModelSpace, tol: float = 1e-12) -> None:
    """Raise :class:`ManifoldError` unless ``g`` lies on the group of ``m``."""
    g = np.asarray(g)
    if m.name == "heisenberg":
        lower = np.tril(g, -1)
        if np.abs(np.diag(g) - 1).max() > tol or np.abs(lower).max() > tol \
                or np.abs(g.imag).max() > tol:
            raise ManifoldError("left the group manifold (not unit upper-triangular)")
        return
    det = np.linalg.det(g)
    if abs(det - 1) > tol:
        raise ManifoldError(f"left the group manifold (det - 1 = {abs(det - 1):.3e})")
    if m.name == "su2":
        if np.abs(g.conj().T @ g - np.eye(2)).max() > tol:
            raise ManifoldError("left the group manifold (not unitary)")
    elif np.abs(g.imag).max() > tol:
        raise ManifoldError("left the group manifold (SL(2) point is not real)")


def group_mul(g: np.ndarray, h: np.ndarray, m: ModelSpace, tol: float = 1e-12) -> np.ndarray:
    out = np.asarray(g) @ np.asarray(h)
    check_point(out, m, tol)
    return out


def _check_chart(r, theta, z, m: ModelSpace) -> None:
    lo, hi = m.r_range
    if not lo <= r <= hi:
        raise ValueError(f"r={r} outside chart range {m.r_range}")
    lo, hi = m.theta_range
    if not lo <= theta <= hi:
        raise ValueError(f"theta={theta} outside chart range {m.theta_range}")
    lo, hi = m.z_range
    if not lo <= z <= hi:
        raise ValueError(f"z={z} outside chart range {m.z_range}")


def chart_to_group(r: float, theta: float, z: float, m: ModelSpace, check: bool = True) -> np.ndarray:
    """Matrix of the group element with cylindric coordinates ``(r, theta, z)``."""
    if check:
        _check_chart(r, theta, z, m)
    if m.name == "heisenberg":
        return heis_to_matrix((r * np.cos(theta), r * np.sin(theta), z))
    if m.name == "su2":
        c, s = np.cos(r / 2), np.sin(r / 2)
        return np.array([
            [c * np.exp(0.5j * z), s * np.exp(1j * (theta - z / 2))],
            [-s * np.exp(-1j * (theta - z / 2)), c * np.exp(-0.5j * z)],
        ])
    # sl2: exp of a symmetric traceless matrix times a rotation
    ch, sh = np.cosh(r / 2), np.sinh(r / 2)
    first = np.array([
        [ch + sh * np.cos(theta), sh * np.sin(theta)],
        [sh * np.sin(theta), ch - sh * np.cos(theta)],
    ], dtype=complex)
    rot = np.array([[np.cos(z / 2), np.sin(z / 2)], [-np.sin(z / 2), np.cos(z / 2)]], dtype=complex)
    return first @ rot


def chart_to_group_expm(r: float, theta: float, z: float, m: ModelSpace) -> np.ndarray:
    """Same as :func:`chart_to_group` through generic matrix exponentials."""
    return expm(r * np.cos(theta) * m.X + r * np.sin(theta) * m.Y) @ expm(z * m.Z)


# -- finite-difference ground truth -------------------------------------------

def left_invariant_derivative(f: Callable[[np.ndarray], complex], g: np.ndarray,
                              A: np.ndarray, h: float = FD_STEP_FIRST) -> complex:
    """Central difference of ``s -> f(g exp(sA))`` at ``s = 0``."""
    if h <= 0:
        raise ValueError("step must be positive")
    fp = f(g @ expm(h * A))
    fm = f(g @ expm(-h * A))
    if not (np.isfinite(fp) and np.isfinite(fm)):
        raise FloatingPointError("non-finite function value in finite difference")
    return (fp - fm) / (2 * h)


def right_invariant_derivative(f: Callable[[np.ndarray], complex], g: np.ndarray,
                               A: np.ndarray, h: float = FD_STEP_FIRST) -> complex:
    """Central difference of ``s -> f(exp(sA) g)`` at ``s = 0``."""
    if h <= 0:
        raise ValueError("step must be positive")
    fp = f(expm(h * A) @ g)
    fm = f(expm(-h * A) @ g)
    if not (np.isfinite(fp) and np.isfinite(fm)):
        raise FloatingPointError("non-finite function value in finite difference")
    return (fp - fm) / (2 * h)


# -- coordinate vector fields -------------------------------------------------

def _heis_coeffs(which: str, r: float, theta: float, z: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    e = np.exp(-1j * theta)
    if which == "Z":
        return np.array([0, 0, 1], complex)
    if r == 0:
        raise ChartSingularityError("cylindric Heisenberg chart is singular at r = 0")
    table = {
        "X": (c, -s / r, -r * s / 2),
        "Y": (s, c / r, r * c / 2),
        "W": (e, -1j * e / r, -1j * e * r / 2),
        "What": (e, -1j * e / r, 1j * e * r / 2),
        "Xhat": (c, -s / r, r * s / 2),
        "Yhat": (s, c / r, -r * c / 2),
    }
    return np.array(table[which], dtype=complex)


def heisenberg_W_dr_variant(r: float, theta: float, sign: int = -1) -> np.ndarray:
    """Complex gradient with ``d/dr`` where ``d/dtheta`` belongs in the second term.

    ``sign=-1`` gives the left-invariant variant, ``+1`` the right-invariant one.
    Kept so finite differences can show that this variant is not the field.
    """
    e = np.exp(-1j * theta)
    return np.array([e - 1j * e / r, 0.0, sign * 1j * e * r / 2], dtype=complex)


def _su2_coeffs(which: str, r: float, theta: float, z: float) -> np.ndarray:
    if which == "Z":
        return np.array([0, 0, 1], complex)
    if r <= 0 or r >= np.pi:
        raise ChartSingularityError("SU(2) cylindric chart is singular at r in {0, pi}")
    phi = -theta + z
    t = np.tan(r / 2)
    k = 0.5 * (t + 1 / t)
    X = np.array([np.cos(phi), np.sin(phi) * k, np.sin(phi) * t], dtype=complex)
    Y = np.array([-np.sin(phi), np.cos(phi) * k, np.cos(phi) * t], dtype=complex)
    if which == "X":
        return X
    if which == "Y":
        return Y
    if which == "W":
        e = np.exp(1j * phi)
        return np.array([e, -1j * e * k, -1j * e * t], dtype=complex)
    raise ValueError(f"field {which!r} not available on su2")


def _sl2_coeffs(which: str, r: float, theta: float, z: float) -> np.ndarray:
    if which == "Z":
        return np.array([0, 0, 1], complex)
    if r <= 0:
        raise ChartSingularityError("SL(2) cylindric chart is singular at r = 0")
    psi = theta + z
    t = np.tanh(r / 2)
    k = 0.5 * (1 / t - t)
    X = np.array([np.cos(psi), -np.sin(psi) * k, -np.sin(psi) * t], dtype=complex)
    Y = np.array([np.sin(psi), np.cos(psi) * k, np.cos(psi) * t], dtype=complex)
    if which == "X":
        return X
    if which == "Y":
        return Y
    if which == "W":
        return X - 1j * Y
    raise ValueError(f"field {which!r} not available on sl2")


_COEFFS = {"heisenberg": _heis_coeffs, "su2": _su2_coeffs, "sl2": _sl2_coeffs}


def chart_partials(f: Callable[[float, float, float], complex], point, h: float = FD_STEP_FIRST) -> np.ndarray:
    r, theta, z = point
    return np.array([
        (f(r + h, theta, z) - f(r - h, theta, z)) / (2 * h),
        (f(r, theta + h, z) - f(r, theta - h, z)) / (2 * h),
        (f(r, theta, z + h) - f(r, theta, z - h)) / (2 * h),
    ])


@dataclass(frozen=True)
class CoordinateField:
    """A first-order operator ``a dr + b dtheta + c dz`` in chart coordinates."""

    model: ModelSpace
    which: str

    def coefficients(self, r: float, theta: float, z: float) -> np.ndarray:
        return _COEFFS[self.model.name](self.which, r, theta, z)

    def apply_partials(self, partials, point) -> complex:
        return complex(self.coefficients(*point) @ np.asarray(partials))

    def apply(self, f: Callable[[float, float, float], complex], point, h: float = FD_STEP_FIRST) -> complex:
        return self.apply_partials(chart_partials(f, point, h), point)

    def of(self, f: Callable[[float, float, float], complex], h: float = FD_STEP_FIRST):
        """The chart function ``point -> (field f)(point)``."""
        return lambda r, theta, z: self.apply(f, (r, theta, z), h)


def coordinate_vector_field(m: ModelSpace | str, which: str) -> CoordinateField:
    m = get_model(m)
    if which not in ("X", "Y", "Z", "W", "What", "Xhat", "Yhat"):
        raise ValueError(f"unknown field {which!r}")
    if which in ("What", "Xhat", "Yhat") and m.name != "heisenberg":
        raise ValueError("right-invariant coordinate fields are only provided on the Heisenberg group")
    return CoordinateField(m, which)


def frame_matrix(m: ModelSpace | str, r: float, theta: float, z: float) -> np.ndarray:
    """Rows: coefficients of X, Y, Z in the coordinate frame (d_r, d_theta, d_z)."""
    m = get_model(m)
    return np.array([_COEFFS[m.name](w, r, theta, z) for w in ("X", "Y", "Z")])


def haar_density(m: ModelSpace | str, r: float, theta: float = 0.0, z: float = 0.0,
                 coords: str = "cylindric") -> float:
    """Haar density in chart coordinates, up to a global constant.

    For the Heisenberg group ``coords="cartesian"`` gives the density with
    respect to ``dx dy dz``, which is identically one.
    """
    m = get_model(m)
    if m.name == "heisenberg" and coords == "cartesian":
        x, y = r * np.cos(theta), r * np.sin(theta)
        F = np.array([[1, 0, -y / 2], [0, 1, x / 2], [0, 0, 1]], dtype=float)
        return float(1 / abs(np.linalg.det(F)))
    det = np.linalg.det(frame_matrix(m, r, theta, z))
    if abs(det) < 1e-300 or not np.isfinite(det):
        raise ChartSingularityError("singular frame matrix")
    return float(1 / abs(det))


def field_bracket_residual(m: ModelSpace | str, f: Callable[[float, float, float], complex],
                           point, h: float = FD_STEP_FIRST) -> float:
    """Largest bracket residual of the coordinate fields applied to ``f`` at ``point``.

    Uses nested central differences, so the error is of order ``h**2`` times
    the size of the third derivatives of ``f``.
    """
    m = get_model(m)
    X, Y, Z = (coordinate_vector_field(m, w) for w in "XYZ")

    def br(A, B):
        return A.apply(B.of(f, h), point, h) - B.apply(A.of(f, h), point, h)

    res = (
        br(X, Y) - Z.apply(f, point, h),
        br(X, Z) + m.rho * Y.apply(f, point, h),
        br(Y, Z) - m.rho * X.apply(f, point, h),
    )
    return float(max(abs(v) for v in res))


def chart_function(F: Callable[[np.ndarray], complex], m: ModelSpace):
    """Lift a function on group matrices to a function of chart coordinates."""
    return lambda r, theta, z: F(chart_to_group(r, theta, z, m, check=False))
