"""Symbol specifications and their evaluation on dual points.

A symbol spec is a small declarative object describing a matrix-valued
function on the dual.  Scalar families cover the weights used throughout:

  RadialWeight(s)        <xi>^{-s} = (1+lambda)^{-s/nu}, nu from the geometry
  BesselPotential(s, nu) (1+lambda)^{-s/nu} with its own fixed nu
  PowerOfEigenvalue(s, shift) (shift+lambda)^{-s}
  ModulusWeight(s)       (1+sqrt(lambda))^{-s}, the lattice modulus on tori
  Scaled(c, inner), SymbolSum(parts) linear combinators

Matrix families read per-label tables from text files:

  DiagonalTable(path)    label line + one line of d diagonal entries
  FullMatrixTable(path)  label line + d lines of d entries

ClassOneMask(inner) zeroes everything outside the top-left k x k block of a
point, the structure class-one (homogeneous-space) symbols carry.  The
homogeneous picture applies this mask implicitly.

Nuclear traces of evaluated blocks are sums of singular values.  Per the
design contract the symbol side computes them with its own one-sided Jacobi
iteration (plus exact diagonal and Hermitian eigenvalue fast paths) so the
LAPACK SVD used by the brute-force oracle remains an independent check.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (ConfigError, DomainError, NumericError, SizeError,
                     SpectrumFormatError, TableLookupError)
from .geometry import DualPoint, Geometry, label_text

HERMITIAN_TOL = 1e-13
JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60


class SymbolSpec:
    """Marker base class; concrete specs are the dataclasses below."""


@dataclass(frozen=True)
class RadialWeight(SymbolSpec):
    s: float


@dataclass(frozen=True)
class BesselPotential(SymbolSpec):
    s: float
    nu: float = 2.0

    def __post_init__(self):
        if not (self.nu > 0):
            raise ConfigError("BesselPotential nu must be positive")


@dataclass(frozen=True)
class PowerOfEigenvalue(SymbolSpec):
    s: float
    shift: float = 0.0

    def __post_init__(self):
        if self.shift < 0:
            raise ConfigError("PowerOfEigenvalue shift must be >= 0")


@dataclass(frozen=True)
class ModulusWeight(SymbolSpec):
    s: float


@dataclass(frozen=True)
class Scaled(SymbolSpec):
    c: float
    inner: SymbolSpec


@dataclass(frozen=True)
class SymbolSum(SymbolSpec):
    parts: tuple

    def __init__(self, parts: Sequence[SymbolSpec]):
        object.__setattr__(self, "parts", tuple(parts))
        if not self.parts:
            raise ConfigError("SymbolSum needs at least one part")


@dataclass(frozen=True)
class ClassOneMask(SymbolSpec):
    inner: SymbolSpec


@dataclass(frozen=True)
class DiagonalTable(SymbolSpec):
    path: str
    entries: dict = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.entries is None:
            object.__setattr__(self, "entries", _load_table(self.path, diagonal=True))


@dataclass(frozen=True)
class FullMatrixTable(SymbolSpec):
    path: str
    entries: dict = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.entries is None:
            object.__setattr__(self, "entries", _load_table(self.path, diagonal=False))


def parse_symbol(text: str) -> SymbolSpec:
    """Parse a CLI symbol string.

    Forms: radial:s, bessel:s:nu, power:s[:shift], modulus:s, diag:PATH,
    matrix:PATH, scaled:c:INNER, mask:INNER.
    """
    head, _, tail = text.partition(":")
    head = head.strip().lower()
    try:
        if head == "radial":
            return RadialWeight(float(tail))
        if head == "bessel":
            s_s, _, nu_s = tail.partition(":")
            return BesselPotential(float(s_s), float(nu_s) if nu_s else 2.0)
        if head == "power":
            s_s, _, shift_s = tail.partition(":")
            return PowerOfEigenvalue(float(s_s), float(shift_s) if shift_s else 0.0)
        if head == "modulus":
            return ModulusWeight(float(tail))
        if head == "scaled":
            c_s, _, inner = tail.partition(":")
            return Scaled(float(c_s), parse_symbol(inner))
        if head == "mask":
            return ClassOneMask(parse_symbol(tail))
        if head == "diag":
            return DiagonalTable(tail)
        if head == "matrix":
            return FullMatrixTable(tail)
    except ValueError:
        raise ConfigError("bad numeric field in symbol %r" % (text,)) from None
    raise ConfigError("unknown symbol spec %r" % (text,))


def is_radial_scalar(spec: SymbolSpec) -> bool:
    """True when the spec is a scalar function of the eigenvalue alone."""
    if isinstance(spec, (RadialWeight, BesselPotential, PowerOfEigenvalue, ModulusWeight)):
        return True
    if isinstance(spec, Scaled):
        return is_radial_scalar(spec.inner)
    if isinstance(spec, SymbolSum):
        return all(is_radial_scalar(p) for p in spec.parts)
    return False


def scalar_values(spec: SymbolSpec, lam: np.ndarray, geom: Geometry) -> np.ndarray:
    """Vectorized scalar evaluation on an eigenvalue array."""
    if isinstance(spec, RadialWeight):
        return (1.0 + lam) ** (-spec.s / geom.nu)
    if isinstance(spec, BesselPotential):
        return (1.0 + lam) ** (-spec.s / spec.nu)
    if isinstance(spec, PowerOfEigenvalue):
        base = spec.shift + lam
        if spec.s > 0 and np.any(base == 0.0):
            raise DomainError("PowerOfEigenvalue with shift 0 hit eigenvalue 0")
        return base ** (-spec.s)
    if isinstance(spec, ModulusWeight):
        return (1.0 + np.sqrt(lam)) ** (-spec.s)
    if isinstance(spec, Scaled):
        return spec.c * scalar_values(spec.inner, lam, geom)
    if isinstance(spec, SymbolSum):
        acc = scalar_values(spec.parts[0], lam, geom)
        for p in spec.parts[1:]:
            acc = acc + scalar_values(p, lam, geom)
        return acc
    raise ConfigError("not a scalar spec: %r" % (spec,))


def eval_symbol(spec: SymbolSpec, point: DualPoint, geom: Geometry,
                masked: bool = False) -> np.ndarray:
    """Evaluate the spec at one dual point as a rep_dim x rep_dim matrix.

    masked=True (or a ClassOneMask wrapper) zeroes entries outside the
    top-left class_one_dim block.
    """
    if isinstance(spec, ClassOneMask):
        return eval_symbol(spec.inner, point, geom, masked=True)
    d = point.rep_dim
    if isinstance(spec, Scaled):
        return spec.c * eval_symbol(spec.inner, point, geom, masked=masked)
    if isinstance(spec, SymbolSum):
        acc = eval_symbol(spec.parts[0], point, geom, masked=masked)
        for p in spec.parts[1:]:
            acc = acc + eval_symbol(p, point, geom, masked=masked)
        return acc
    if isinstance(spec, (RadialWeight, BesselPotential, PowerOfEigenvalue, ModulusWeight)):
        value = float(scalar_values(spec, np.array([point.eigenvalue]), geom)[0])
        if not math.isfinite(value):
            raise DomainError("symbol value not finite at label %s" % label_text(point))
        m = np.zeros((d, d), dtype=np.complex128)
        k = point.class_one_dim if masked else d
        np.fill_diagonal(m[:k, :k], value)
        return m
    if isinstance(spec, (DiagonalTable, FullMatrixTable)):
        key = label_text(point)
        try:
            entry = spec.entries[key]
        except KeyError:
            raise TableLookupError("table %s has no entry for label %s"
                                   % (spec.path, key)) from None
        if isinstance(spec, DiagonalTable):
            if entry.shape[0] != d:
                raise SizeError("table %s label %s has %d entries, point has rep_dim %d"
                                % (spec.path, key, entry.shape[0], d))
            m = np.zeros((d, d), dtype=np.complex128)
            np.fill_diagonal(m, entry)
        else:
            if entry.shape != (d, d):
                raise SizeError("table %s label %s is %s, point has rep_dim %d"
                                % (spec.path, key, entry.shape, d))
            m = entry.astype(np.complex128, copy=True)
        if not np.all(np.isfinite(m.view(np.float64))):
            raise DomainError("symbol value not finite at label %s" % key)
        if masked:
            k = point.class_one_dim
            out = np.zeros_like(m)
            out[:k, :k] = m[:k, :k]
            return out
        return m
    raise ConfigError("unknown symbol spec %r" % (spec,))


# ---------------------------------------------------------------------------
# Singular values of small dense blocks
# ---------------------------------------------------------------------------

def singular_values(m: np.ndarray, label: str | None = None) -> np.ndarray:
    """Singular values of a small square matrix, descending.

    Exact diagonal path, Hermitian eigenvalue path within HERMITIAN_TOL,
    otherwise a one-sided Jacobi iteration with relative tolerance
    JACOBI_REL_TOL; non-convergence raises NumericError naming the label.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SizeError("singular_values expects a square matrix, got %s" % (m.shape,))
    d = m.shape[0]
    if d == 0:
        return np.zeros(0)
    off = m - np.diag(np.diag(m))
    if not off.any():
        return np.sort(np.abs(np.diag(m)))[::-1]
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) <= HERMITIAN_TOL * scale:
        return np.sort(np.abs(np.linalg.eigvalsh(m)))[::-1]
    return _jacobi_singular_values(m, label)


def _jacobi_singular_values(m: np.ndarray, label: str | None) -> np.ndarray:
    """One-sided Jacobi: rotate column pairs until they are all orthogonal."""
    a = m.astype(np.complex128, copy=True)
    d = a.shape[0]
    tol = JACOBI_REL_TOL
    for _ in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for i in range(d - 1):
            for j in range(i + 1, d):
                u = a[:, i]
                v = a[:, j]
                alpha = float(np.real(np.vdot(u, u)))
                beta = float(np.real(np.vdot(v, v)))
                gamma = complex(np.vdot(u, v))
                g = abs(gamma)
                if g <= tol * math.sqrt(alpha * beta) or g == 0.0:
                    continue
                rotated = True
                phase = gamma / g
                tau = (beta - alpha) / (2.0 * g)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                new_u = c * u - s * np.conj(phase) * v
                new_v = s * phase * u + c * v
                a[:, i] = new_u
                a[:, j] = new_v
        if not rotated:
            break
    else:
        raise NumericError("Jacobi singular value iteration did not converge "
                           "within %d sweeps%s" % (JACOBI_MAX_SWEEPS,
                                                   " at label %s" % label if label else ""))
    sv = np.sqrt(np.real(np.sum(a.conj() * a, axis=0)))
    return np.sort(sv)[::-1]


def nuclear_trace_abs(m: np.ndarray, label: str | None = None) -> float:
    """Sum of singular values; exactly d*|c| for c times the identity."""
    m = np.asarray(m, dtype=np.complex128)
    d = m.shape[0]
    if d > 0:
        diag = np.diag(m)
        off = m - np.diag(diag)
        if not off.any() and np.all(diag == diag[0]):
            return d * abs(complex(diag[0]))
    return float(np.sum(singular_values(m, label)))


def group_block_lift(point: DualPoint, trace_abs: float) -> float:
    """Lift a d x d block trace to the full eigenspace: d copies per block."""
    return point.rep_dim * trace_abs


# ---------------------------------------------------------------------------
# Table files
# ---------------------------------------------------------------------------

def parse_complex(tok: str) -> complex:
    """Parse `re`, `re+imi` or `re-imi` (also accepts python's j suffix)."""
    text = tok.strip().replace("i", "j")
    try:
        return complex(text)
    except ValueError:
        raise SpectrumFormatError("bad complex literal %r" % (tok,)) from None


def _load_table(path: str, diagonal: bool) -> dict:
    """Read records: a label line, then the entry lines for that label.

    Full tables require d lines of d entries.  Diagonal tables take one line
    of d entries, or the full square shape when its off-diagonal part is zero.
    """
    entries: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [(no, ln.strip()) for no, ln in enumerate(fh, start=1)]
    except OSError as exc:
        raise ConfigError("cannot read symbol table %s: %s" % (path, exc)) from None
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    pos = 0
    while pos < len(lines):
        lineno, label = lines[pos]
        if len(label.split()) != 1:
            raise SpectrumFormatError("%s:%d: expected a label line, got %r"
                                      % (path, lineno, label))
        pos += 1
        if pos >= len(lines):
            raise SpectrumFormatError("%s:%d: label %r has no entries"
                                      % (path, lineno, label))
        first_no, first = lines[pos]
        row = [parse_complex(t) for t in first.split()]
        d = len(row)
        pos += 1
        if diagonal:
            # one row of d entries, unless a full d x d block follows
            more = []
            while (len(more) < d - 1 and pos < len(lines)
                   and len(lines[pos][1].split()) == d
                   and _is_row_of_numbers(lines[pos][1])):
                more.append([parse_complex(t) for t in lines[pos][1].split()])
                pos += 1
            if more:
                if len(more) != d - 1:
                    raise SpectrumFormatError(
                        "%s:%d: diagonal table label %r has %d rows, expected 1 or %d"
                        % (path, first_no, label, 1 + len(more), d))
                full = np.array([row] + more, dtype=np.complex128)
                if np.any(full - np.diag(np.diag(full)) != 0):
                    raise SpectrumFormatError(
                        "%s:%d: diagonal table label %r has nonzero off-diagonal entries"
                        % (path, first_no, label))
                entries[label] = np.diag(full).copy()
            else:
                entries[label] = np.array(row, dtype=np.complex128)
        else:
            rows = [row]
            for _ in range(d - 1):
                if pos >= len(lines):
                    raise SpectrumFormatError(
                        "%s:%d: label %r matrix is truncated" % (path, first_no, label))
                rno, rline = lines[pos]
                vals = [parse_complex(t) for t in rline.split()]
                if len(vals) != d:
                    raise SpectrumFormatError(
                        "%s:%d: expected %d entries, got %d" % (path, rno, d, len(vals)))
                rows.append(vals)
                pos += 1
            entries[label] = np.array(rows, dtype=np.complex128)
    return entries


def _is_row_of_numbers(line: str) -> bool:
    try:
        for t in line.split():
            parse_complex(t)
        return True
    except SpectrumFormatError:
        return False
