"""Uniform periodic grid, transforms, Fourier multipliers, projectors, norms.

Fixed conventions (each one is asserted by the test suite):

* grid:      x_j = -L/2 + j*dx,  dx = L/n,  j = 0..n-1
* modes:     xi_k = 2*pi*k/L,  k = -n/2..n/2-1  (stored in this centered order)

             modes[k] = dx * (-1)**k * fft(values)[k mod n]

  which approximates the continuum transform
  u_hat(xi) = integral u(x) exp(-i*xi*x) dx for fields supported on
  [-L/2, L/2); the (-1)**k factor is exp(-i*xi_k*x_0) with x_0 = -L/2.
* Parseval:  sum(|values|^2)*dx == sum(|modes|^2)/L
* Sobolev:   ||u||_{H^s}^2 = (1/L)*sum((1+xi^2)^s * |modes|^2), so s=0 is the
  plain L^2 norm.

The conserved functionals of the half-wave flow (mass, momentum, energy) and
the Gagliardo-Nirenberg energy lower bound are grid quadratures living here.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Grid1D",
    "SpectralField",
    "MultiplierSymbol",
    "identity_symbol",
    "abs_d_symbol",
    "d_symbol",
    "bracket_symbol",
    "apply_multiplier",
    "project_plus",
    "project_minus",
    "real_inner",
    "sobolev_norm",
    "l2_norm",
    "conserved_triple",
    "zero_mode_mass",
    "gn_energy_gap",
    "field_to_csv",
    "field_from_csv",
    "field_to_binary",
    "field_from_binary",
]


class Grid1D:
    """Uniform periodic grid on [-L/2, L/2) with n points, n a power of two.

    Attributes
    ----------
    n : int        number of points (power of two, >= 16)
    length : float periodic domain length L
    dx : float     spacing L/n
    x : ndarray    sample points -L/2 + j*dx
    k : ndarray    integer mode numbers -n/2 .. n/2-1
    xi : ndarray   frequencies 2*pi*k/L in the same (centered) order
    """

    def __init__(self, n: int, length: float):
        n = int(n)
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 16, got {n}")
        if not (length > 0):
            raise ValueError(f"length must be positive, got {length}")
        self.n = n
        self.length = float(length)
        self.dx = self.length / n
        self.x = -self.length / 2 + self.dx * np.arange(n)
        self.k = np.arange(-n // 2, n // 2)
        self.xi = (2.0 * np.pi / self.length) * self.k
        # phase relating numpy's fft ordering to the centered-mode convention
        self._sign = np.where(self.k % 2 == 0, 1.0, -1.0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid1D)
            and self.n == other.n
            and self.length == other.length
        )

    def __hash__(self):
        return hash((self.n, self.length))

    def __repr__(self):
        return f"Grid1D(n={self.n}, length={self.length})"


def _forward(grid: Grid1D, values: np.ndarray) -> np.ndarray:
    return grid.dx * grid._sign * np.fft.fftshift(np.fft.fft(values))


def _inverse(grid: Grid1D, modes: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.fft.ifftshift(modes * grid._sign / grid.dx))


class SpectralField:
    """Complex field on a Grid1D with lazily computed Fourier modes.

    Treat instances as immutable: operations return new fields.
    """

    __slots__ = ("grid", "_values", "_modes")

    def __init__(self, grid: Grid1D, values=None, modes=None):
        if values is None and modes is None:
            raise ValueError("need values or modes")
        self.grid = grid
        self._values = None if values is None else np.asarray(values, complex).copy()
        self._modes = None if modes is None else np.asarray(modes, complex).copy()
        for arr in (self._values, self._modes):
            if arr is not None and arr.shape != (grid.n,):
                raise ValueError(f"array shape {arr.shape} does not match grid n={grid.n}")

    @classmethod
    def from_values(cls, grid: Grid1D, values) -> "SpectralField":
        return cls(grid, values=values)

    @classmethod
    def from_modes(cls, grid: Grid1D, modes) -> "SpectralField":
        return cls(grid, modes=modes)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = _inverse(self.grid, self._modes)
        return self._values

    @property
    def modes(self) -> np.ndarray:
        if self._modes is None:
            self._modes = _forward(self.grid, self._values)
        return self._modes

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, values=self._values, modes=self._modes)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, values=self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, values=self.values - other.values)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, values=self.values * complex(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField({self.grid!r})"


def _check_same_grid(u: SpectralField, v: SpectralField):
    if u.grid != v.grid:
        raise ValueError(f"grid mismatch: {u.grid!r} vs {v.grid!r}")


@dataclass(frozen=True)
class MultiplierSymbol:
    """A Fourier multiplier: a pure function xi -> complex plus a tag.

    Symbols must evaluate to finite values on every grid frequency
    (symbols with a xi=0 ambiguity must bake in an explicit value there).
    """

    fn: Callable[[np.ndarray], np.ndarray]
    tag: str

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(xi), dtype=complex)


def identity_symbol() -> MultiplierSymbol:
    return MultiplierSymbol(lambda xi: np.ones_like(xi, dtype=complex), "1")


def abs_d_symbol(power: float = 1.0) -> MultiplierSymbol:
    """|D|^power, symbol |xi|^power (value 0 at xi=0 for power > 0)."""
    if power < 0:
        raise ValueError("power must be >= 0")
    return MultiplierSymbol(lambda xi: np.abs(xi) ** power, f"|xi|^{power}")


def d_symbol() -> MultiplierSymbol:
    """D = -i d/dx, symbol xi."""
    return MultiplierSymbol(lambda xi: xi.astype(complex), "xi")


def bracket_symbol(s: float) -> MultiplierSymbol:
    """Japanese bracket <xi>^s = (1+xi^2)^{s/2}."""
    return MultiplierSymbol(lambda xi: (1.0 + xi**2) ** (s / 2.0), f"<xi>^{s}")


def apply_multiplier(field: SpectralField, sym: MultiplierSymbol) -> SpectralField:
    """Return the field whose modes are sym(xi_k) * modes_k."""
    vals = sym(field.grid.xi)
    if not np.all(np.isfinite(vals)):
        bad = field.grid.xi[~np.isfinite(vals)]
        raise ValueError(f"symbol {sym.tag!r} is non-finite at xi={bad[0]}")
    return SpectralField(field.grid, modes=vals * field.modes)


def project_plus(field: SpectralField) -> SpectralField:
    """Szego projector: keep modes with xi_k >= 0 (xi=0 assigned here)."""
    return SpectralField(field.grid, modes=np.where(field.grid.xi >= 0, field.modes, 0.0))


def project_minus(field: SpectralField) -> SpectralField:
    """Complementary projector: keep modes with xi_k < 0."""
    return SpectralField(field.grid, modes=np.where(field.grid.xi < 0, field.modes, 0.0))


def real_inner(u: SpectralField, v: SpectralField) -> float:
    """Real inner product Re(sum u*conj(v))*dx."""
    _check_same_grid(u, v)
    return float(np.sum(u.values * np.conj(v.values)).real * u.grid.dx)


def sobolev_norm(field: SpectralField, s: float) -> float:
    """H^s norm: sqrt((1/L) * sum (1+xi^2)^s |modes|^2); s=0 is the L^2 norm."""
    if s < 0:
        raise ValueError("s must be >= 0")
    w = (1.0 + field.grid.xi**2) ** s
    return float(np.sqrt(np.sum(w * np.abs(field.modes) ** 2) / field.grid.length))


def l2_norm(field: SpectralField) -> float:
    return float(np.sqrt(np.sum(np.abs(field.values) ** 2) * field.grid.dx))


def conserved_triple(field: SpectralField) -> tuple[float, float, float]:
    """(mass, momentum, energy) of the half-wave flow by grid quadrature.

    mass     = int |u|^2
    momentum = Re int (D u) conj(u)          (= (1/L) sum xi |modes|^2)
    energy   = (1/2) int | |D|^{1/2} u |^2 - (1/4) int |u|^4
    """
    vals = field.values
    modes2 = np.abs(field.modes) ** 2
    L = field.grid.length
    dx = field.grid.dx
    mass = float(np.sum(np.abs(vals) ** 2) * dx)
    momentum = float(np.sum(field.grid.xi * modes2) / L)
    kinetic = float(np.sum(np.abs(field.grid.xi) * modes2) / L)
    quartic = float(np.sum(np.abs(vals) ** 4) * dx)
    return mass, momentum, 0.5 * kinetic - 0.25 * quartic


def zero_mode_mass(field: SpectralField) -> float:
    """Mass carried by the xi=0 mode, (1/L)|modes_0|^2 (diagnostic)."""
    return float(np.abs(field.modes[field.grid.n // 2]) ** 2 / field.grid.length)


def gn_energy_gap(field: SpectralField, ground_state_mass: float) -> float:
    """energy(u) - (1/2)(1 - mass(u)/mass(ground state)) * int ||D|^{1/2}u|^2.

    Nonnegative (up to quadrature error) whenever mass(u) is below the ground
    state mass: the sharp interpolation lower bound on the energy.
    """
    mass, _, energy = conserved_triple(field)
    kinetic = float(
        np.sum(np.abs(field.grid.xi) * np.abs(field.modes) ** 2) / field.grid.length
    )
    return energy - 0.5 * (1.0 - mass / ground_state_mass) * kinetic


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def field_to_csv(field: SpectralField, path) -> None:
    """Write columns x,re,im (header row, LF line endings, '.' decimals)."""
    vals = field.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for x, v in zip(field.grid.x, vals):
            w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def field_from_csv(path) -> SpectralField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    x = data[:, 0]
    n = len(x)
    dx = x[1] - x[0]
    length = dx * n
    grid = Grid1D(n, length)
    if not np.allclose(grid.x, x, rtol=0, atol=1e-9 * max(1.0, length)):
        raise ValueError(f"{path}: sample points are not a uniform [-L/2, L/2) grid")
    return SpectralField(grid, values=data[:, 1] + 1j * data[:, 2])


def field_to_binary(field: SpectralField, path) -> None:
    """Little-endian f64 dump: n, L, then n (re, im) pairs."""
    vals = field.values
    out = np.empty(2 + 2 * field.grid.n, dtype="<f8")
    out[0] = field.grid.n
    out[1] = field.grid.length
    out[2::2] = vals.real
    out[3::2] = vals.imag
    out.tofile(path)


def field_from_binary(path) -> SpectralField:
    raw = np.fromfile(path, dtype="<f8")
    if raw.size < 2:
        raise ValueError(f"{path}: truncated field dump")
    n = int(raw[0])
    length = float(raw[1])
    if raw.size != 2 + 2 * n:
        raise ValueError(f"{path}: expected {2 + 2 * n} f64 values, got {raw.size}")
    values = raw[2::2] + 1j * raw[3::2]
    return SpectralField(Grid1D(n, length), values=values)
