"""System representation, on-disk grammar, and validation.

A system is a list of equations

    ``A X_alpha^s B - C X_beta^t D = E``

over n-by-n complex matrices; ``s`` and ``t`` are star flags (identity,
transpose, or conjugate transpose).  Periodic systems are the special
shape where equation k links unknown k to unknown k+1 cyclically and
only the wrap-around equation may carry a star.

File grammar (line oriented, ``#`` starts a comment)::

    n=<int> r=<int>
    eq alpha=<int> s=<1|T|H> beta=<int> t=<1|T|H>
    A
    <n rows of n complex entries "re im">
    B
    ...          # blocks A B C D E, in this order, for each equation

Unknown indices are 1-based in the file format and in the public API.
Complex entries are written with 17 significant digits, so binary64
values round-trip exactly.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError

__all__ = [
    "StarFlag", "Equation", "SylvesterSystem", "PeriodicSystem",
    "parse_system", "serialize_system", "validate", "apply_star",
]


class StarFlag(enum.Enum):
    """Operator applied to an unknown occurrence: none, T, or H."""

    NONE = "1"
    TRANSPOSE = "T"
    CONJTRANSPOSE = "H"

    def __str__(self):
        return self.value


def apply_star(M, flag):
    """Apply a star flag to a matrix (no copy for ``NONE``)."""
    if flag is StarFlag.NONE:
        return M
    if flag is StarFlag.TRANSPOSE:
        return M.T
    return np.conj(M.T)


@dataclass
class Equation:
    """One equation ``A X_alpha^s B - C X_beta^t D = E``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    alpha: int
    beta: int
    s_flag: StarFlag = StarFlag.NONE
    t_flag: StarFlag = StarFlag.NONE

    def __post_init__(self):
        for name in "ABCDE":
            setattr(self, name, np.asarray(getattr(self, name),
                                           dtype=np.complex128))

    @property
    def n(self):
        return self.A.shape[0]

    def matrices(self):
        return self.A, self.B, self.C, self.D, self.E

    def residual(self, X_alpha, X_beta):
        """Frobenius norm of ``A Xa^s B - C Xb^t D - E``."""
        lhs = (self.A @ apply_star(X_alpha, self.s_flag) @ self.B
               - self.C @ apply_star(X_beta, self.t_flag) @ self.D)
        return float(np.linalg.norm(lhs - self.E))


@dataclass
class SylvesterSystem:
    """A list of coupled equations over 1-based unknown indices."""

    n: int
    equations: list
    unknown_count: int = 0

    def __post_init__(self):
        if self.unknown_count == 0 and self.equations:
            self.unknown_count = max(max(e.alpha, e.beta)
                                     for e in self.equations)

    @property
    def r(self):
        return len(self.equations)

    def unknowns_used(self):
        used = set()
        for e in self.equations:
            used.add(e.alpha)
            used.add(e.beta)
        return used

    def star_type(self):
        """The single non-NONE flag used, or NONE; raises if mixed."""
        kinds = {f for e in self.equations for f in (e.s_flag, e.t_flag)
                 if f is not StarFlag.NONE}
        if len(kinds) > 1:
            raise ValueError("system mixes transpose and conjugate-transpose")
        return kinds.pop() if kinds else StarFlag.NONE


@dataclass
class PeriodicSystem:
    """Cyclic chain: eq k links X_k to X_{k+1}; eq r links X_r to X_1^s."""

    n: int
    A: list
    B: list
    C: list
    D: list
    E: list
    s: StarFlag = StarFlag.NONE

    def __post_init__(self):
        for name in "ABCDE":
            setattr(self, name, [np.asarray(M, dtype=np.complex128)
                                 for M in getattr(self, name)])

    @property
    def r(self):
        return len(self.A)

    def as_general(self):
        """View as a SylvesterSystem (1-based cyclic indices)."""
        eqs = []
        r = self.r
        for k in range(r):
            beta = k + 2 if k + 1 < r else 1
            t = self.s if k + 1 == r else StarFlag.NONE
            eqs.append(Equation(self.A[k], self.B[k], self.C[k], self.D[k],
                                self.E[k], alpha=k + 1, beta=beta,
                                t_flag=t))
        return SylvesterSystem(self.n, eqs, unknown_count=r)

    @classmethod
    def from_general(cls, sys):
        """Convert a canonical cyclic SylvesterSystem; validates shape."""
        r = sys.r
        for k, e in enumerate(sys.equations):
            want_beta = k + 2 if k + 1 < r else 1
            if e.alpha != k + 1 or e.beta != want_beta:
                raise ValueError(f"equation {k + 1} is not in cyclic form")
            if e.s_flag is not StarFlag.NONE:
                raise ValueError(f"equation {k + 1} carries a star on X_alpha")
            if k + 1 < r and e.t_flag is not StarFlag.NONE:
                raise ValueError(f"equation {k + 1} carries an interior star")
        s = sys.equations[-1].t_flag if r else StarFlag.NONE
        return cls(sys.n,
                   [e.A for e in sys.equations], [e.B for e in sys.equations],
                   [e.C for e in sys.equations], [e.D for e in sys.equations],
                   [e.E for e in sys.equations], s=s)

    def residuals(self, X):
        """Per-equation residual norms for a list of solutions X_1..X_r."""
        out = []
        for k in range(self.r):
            Xn = X[(k + 1) % self.r]
            if k + 1 == self.r:
                Xn = apply_star(X[0], self.s)
            lhs = self.A[k] @ X[k] @ self.B[k] - self.C[k] @ Xn @ self.D[k]
            out.append(float(np.linalg.norm(lhs - self.E[k])))
        return out


# ---------------------------------------------------------------------------
# parsing / serialization

_HEADER_RE = re.compile(r"^n=(\d+)\s+r=(\d+)$")
_EQ_RE = re.compile(r"^eq\s+alpha=(\d+)\s+s=([1TH])\s+beta=(\d+)\s+t=([1TH])$")


def _fmt(x):
    return f"{x:.17g}"


def parse_system(text):
    """Parse the system grammar into a :class:`SylvesterSystem`.

    Raises :class:`ParseError` with the offending line number on syntax
    errors, dimension mismatches, or out-of-range indices.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((lineno, stripped))
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 1
            raise ParseError(f"unexpected end of input, expected {what}", last)
        item = lines[pos]
        pos += 1
        return item

    lineno, header = take("header 'n=<int> r=<int>'")
    m = _HEADER_RE.match(header)
    if not m:
        raise ParseError("expected header 'n=<int> r=<int>'", lineno)
    n, r = int(m.group(1)), int(m.group(2))

    equations = []
    for _ in range(r):
        lineno, eqline = take("'eq' line")
        m = _EQ_RE.match(eqline)
        if not m:
            raise ParseError(
                "expected 'eq alpha=<int> s=<1|T|H> beta=<int> t=<1|T|H>'",
                lineno)
        alpha, beta = int(m.group(1)), int(m.group(3))
        if alpha < 1 or beta < 1:
            raise ParseError("unknown index out of range (must be >= 1)",
                             lineno)
        s_flag = StarFlag(m.group(2))
        t_flag = StarFlag(m.group(4))
        blocks = {}
        for label in "ABCDE":
            lineno, lab = take(f"block label '{label}'")
            if lab != label:
                raise ParseError(f"missing block {label}", lineno)
            rows = []
            for _ in range(n):
                lineno, rowtext = take(f"row of block {label}")
                parts = rowtext.split()
                if len(parts) != 2 * n:
                    raise ParseError(
                        f"block {label}: expected {2 * n} numbers per row, "
                        f"got {len(parts)}", lineno)
                try:
                    vals = [float(p) for p in parts]
                except ValueError:
                    raise ParseError(f"block {label}: bad number", lineno)
                rows.append([complex(vals[2 * i], vals[2 * i + 1])
                             for i in range(n)])
            M = np.array(rows, dtype=np.complex128) if n else \
                np.zeros((0, 0), dtype=np.complex128)
            if not np.all(np.isfinite(M.real)) or not np.all(np.isfinite(M.imag)):
                raise ParseError(f"block {label}: non-finite entry", lineno)
            blocks[label] = M
        equations.append(Equation(blocks["A"], blocks["B"], blocks["C"],
                                  blocks["D"], blocks["E"], alpha, beta,
                                  s_flag, t_flag))
    if pos != len(lines):
        raise ParseError("trailing content after last equation",
                         lines[pos][0])
    return SylvesterSystem(n, equations)


def serialize_system(sys):
    """Canonical text form; ``parse_system`` round-trips it exactly."""
    out = [f"n={sys.n} r={sys.r}"]
    for e in sys.equations:
        out.append(f"eq alpha={e.alpha} s={e.s_flag} beta={e.beta} "
                   f"t={e.t_flag}")
        for label, M in zip("ABCDE", e.matrices()):
            out.append(label)
            for i in range(sys.n):
                out.append(" ".join(
                    f"{_fmt(M[i, j].real)} {_fmt(M[i, j].imag)}"
                    for j in range(sys.n)))
    return "\n".join(out) + "\n"


def validate(sys):
    """Well-formedness report; empty list iff the system is clean.

    Checks matrix shapes, equation/unknown count balance, that every
    unknown in range is used, and that transpose and conjugate-transpose
    stars are not mixed.  Violations are returned as strings; the input
    is never mutated.
    """
    issues = []
    n = sys.n
    for k, e in enumerate(sys.equations, start=1):
        for label, M in zip("ABCDE", e.matrices()):
            if M.shape != (n, n):
                issues.append(f"equation {k}: matrix {label} has shape "
                              f"{M.shape}, expected ({n}, {n})")
    counts = {u: 0 for u in range(1, sys.unknown_count + 1)}
    for e in sys.equations:
        for u in (e.alpha, e.beta):
            counts[u] = counts.get(u, 0) + 1
    for u in sorted(counts):
        if counts[u] == 0:
            issues.append(f"unused unknown {u}")
    if sys.r != sys.unknown_count:
        issues.append(f"count mismatch: {sys.r} equations, "
                      f"{sys.unknown_count} unknowns")
    kinds = {f for e in sys.equations for f in (e.s_flag, e.t_flag)
             if f is not StarFlag.NONE}
    if len(kinds) > 1:
        issues.append("mixed star operators (both T and H present)")
    return issues
