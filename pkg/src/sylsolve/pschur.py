"""Periodic Schur decomposition of signed factor sequences.

A :class:`SignedSequence` represents a formal matrix product

    ``Pi = G_{p-1}^{e_{p-1}} ... G_1^{e_1} G_0^{e_0}``

with exponents ``e_k`` in ``{+1, -1}`` and ``G_0`` applied first (i.e.
rightmost).  The decomposition computes a cyclic chain of unitary
matrices ``V_0, ..., V_{p-1}`` (with ``V_p = V_0``) such that

    ``V_{k+1}^H G_k V_k``   is upper triangular when ``e_k = +1``,
    ``V_k^H G_k V_{k+1}``   is upper triangular when ``e_k = -1``.

Inserting ``V_j V_j^H`` between consecutive factors triangularizes every
factor of ``Pi`` simultaneously, and the eigenvalues of the product are
the ratios of the diagonal-entry products of the ``+1`` and ``-1``
factors.  The ratios remain meaningful even when inverted factors are
singular, which is exactly what the nonsingularity certificates need.

The algorithm is the usual two-phase scheme: a finite reduction to
Hessenberg-triangular form (one factor upper Hessenberg, all others
upper triangular) followed by implicitly shifted QZ-type sweeps with
deflation.  Shifts are Wilkinson shifts computed product-free from
trailing 2x2 blocks; breakdowns and stalls fall back to seeded random
exceptional shifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IrregularPencilError, NonConvergenceError
from .kernel import EPS, PlaneRotation, make_givens

__all__ = [
    "SignedSequence",
    "PeriodicSchurForm",
    "SpectrumReport",
    "periodic_schur",
    "formal_eigenvalues",
    "cyclic_pencil",
    "pencil_eigenvalues",
    "chordal_distance",
]


@dataclass
class SignedSequence:
    """Factors of a formal product, rightmost factor first."""

    factors: list
    signs: list

    def __post_init__(self):
        if len(self.factors) != len(self.signs):
            raise ValueError("factors and signs must have equal length")
        if any(s not in (+1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        self.factors = [np.asarray(F, dtype=np.complex128) for F in self.factors]
        n = self.factors[0].shape[0] if self.factors else 0
        for F in self.factors:
            if F.shape != (n, n):
                raise ValueError("all factors must be square of equal size")

    @property
    def n(self):
        return self.factors[0].shape[0] if self.factors else 0

    @property
    def p(self):
        return len(self.factors)

    def explicit_product(self):
        """Form the product with actual inversions (testing helper)."""
        P = np.eye(self.n, dtype=np.complex128)
        for F, s in zip(self.factors, self.signs):
            P = (np.linalg.inv(F) if s < 0 else F) @ P
        return P

    @classmethod
    def from_pairs(cls, Ms, Ns):
        """Alternating sequence for ``N_r^{-1} M_r ... N_1^{-1} M_1``."""
        factors, signs = [], []
        for M, N in zip(Ms, Ns):
            factors.extend([M, N])
            signs.extend([+1, -1])
        return cls(factors, signs)


@dataclass
class PeriodicSchurForm:
    """Result of :func:`periodic_schur`.

    ``triangular[k]`` is the transformed factor ``k`` (upper triangular;
    upper Hessenberg only if the iteration was stopped early), and
    ``chain[j]`` is the unitary ``V_j``.  For alternating pair sequences
    the ``Q``/``Z`` accessors recover the classical indexing with the
    cyclic wrap ``Z(r+1) = Z(1)``.
    """

    sequence: SignedSequence
    triangular: list
    chain: list
    converged: bool = True
    sweeps: int = 0

    @property
    def signs(self):
        return self.sequence.signs

    @property
    def n(self):
        return self.sequence.n

    def left_right_nodes(self, k):
        """Chain indices (l, r) with ``triangular[k] = V_l^H G_k V_r``."""
        p = self.sequence.p
        if self.signs[k] > 0:
            return (k + 1) % p, k
        return k, (k + 1) % p

    def _check_pairs(self):
        p = self.sequence.p
        if p % 2 != 0 or any(s != (1 if k % 2 == 0 else -1)
                             for k, s in enumerate(self.signs)):
            raise ValueError("Q/Z accessors need an alternating pair sequence")

    def Q(self, k):
        """Left unitary of pair ``k`` (1-based), alternating sequences."""
        self._check_pairs()
        return self.chain[(2 * k - 1) % len(self.chain)]

    def Z(self, k):
        """Right unitary of pair ``k`` (1-based); wraps cyclically."""
        self._check_pairs()
        return self.chain[(2 * (k - 1)) % len(self.chain)]

    def T(self, k):
        """Triangularized ``M_k`` of pair ``k`` (1-based)."""
        self._check_pairs()
        return self.triangular[2 * (k - 1)]

    def R(self, k):
        """Triangularized ``N_k`` of pair ``k`` (1-based)."""
        self._check_pairs()
        return self.triangular[2 * k - 1]

    def reconstruction_residual(self):
        """``max_k ||V_l^H G_k V_r - triangular_k||_F / ||G_k||_F``."""
        worst = 0.0
        for k, G in enumerate(self.sequence.factors):
            l, r = self.left_right_nodes(k)
            res = np.linalg.norm(
                np.conj(self.chain[l].T) @ G @ self.chain[r] - self.triangular[k])
            scale = max(np.linalg.norm(G), 1e-300)
            worst = max(worst, res / scale)
        return worst

    def unitarity_residual(self):
        worst = 0.0
        eye = np.eye(self.n)
        for V in self.chain:
            worst = max(worst, np.linalg.norm(np.conj(V.T) @ V - eye))
        return worst


@dataclass
class SpectrumReport:
    """Projective eigenvalues ``(num_i, den_i)`` of a formal product.

    ``num_i / den_i`` is eigenvalue ``i``; infinity is encoded as
    ``den_i == 0``.  ``regular`` is False exactly when some index has
    both products flagged zero under the per-factor zero tolerance.
    """

    num: np.ndarray
    den: np.ndarray
    regular: bool
    num_zero: np.ndarray = field(default=None)
    den_zero: np.ndarray = field(default=None)

    def __post_init__(self):
        self.num = np.asarray(self.num, dtype=np.complex128)
        self.den = np.asarray(self.den, dtype=np.complex128)
        if self.num_zero is None:
            self.num_zero = self.num == 0
        if self.den_zero is None:
            self.den_zero = self.den == 0

    @classmethod
    def from_values(cls, values):
        """Build a report from plain values; ``np.inf`` means infinity."""
        num, den = [], []
        for v in values:
            if np.isinf(v):
                num.append(1.0 + 0j)
                den.append(0j)
            else:
                num.append(complex(v))
                den.append(1.0 + 0j)
        return cls(np.array(num, dtype=np.complex128),
                   np.array(den, dtype=np.complex128), regular=True)

    def __len__(self):
        return len(self.num)

    def normalized_pairs(self):
        """Pairs scaled to unit 2-norm, suitable for projective tests."""
        a, b = self.num.copy(), self.den.copy()
        scale = np.hypot(np.abs(a), np.abs(b))
        scale[scale == 0] = 1.0
        return a / scale, b / scale

    def values(self):
        """Eigenvalues as complex numbers, with ``inf`` for den == 0."""
        out = np.empty(len(self.num), dtype=np.complex128)
        for i, (a, b) in enumerate(zip(self.num, self.den)):
            out[i] = np.inf if b == 0 else a / b
        return out


def chordal_distance(a1, b1, a2=None, b2=None):
    """Chordal distance between projective pairs (or plain values).

    ``chordal_distance(x, y)`` treats ``x`` and ``y`` as eigenvalues
    (``np.inf`` allowed); the four-argument form takes two (num, den)
    pairs directly.
    """
    if a2 is None:
        a1, b1, a2, b2 = _as_pair(a1) + _as_pair(b1)
    n1 = np.hypot(abs(a1), abs(b1))
    n2 = np.hypot(abs(a2), abs(b2))
    if n1 == 0 or n2 == 0:
        return 0.0
    return abs(a1 * b2 - a2 * b1) / (n1 * n2)


def _as_pair(x):
    if np.isinf(x):
        return (1.0 + 0j, 0j)
    return (complex(x), 1.0 + 0j)


# ---------------------------------------------------------------------------
# rotation plumbing


def _rot_rows(F, i1, i2, c, s):
    """Rows (i1, i2) of F <- [[c, s], [-conj(s), c]] @ rows."""
    r1 = F[i1, :].copy()
    r2 = F[i2, :]
    F[i1, :] = c * r1 + s * r2
    F[i2, :] = -np.conj(s) * r1 + c * r2


def _rot_cols_h(F, i1, i2, c, s):
    """Cols (i1, i2) of F <- cols @ A^H with A = [[c, s], [-conj(s), c]]."""
    c1 = F[:, i1].copy()
    c2 = F[:, i2]
    F[:, i1] = c * c1 + np.conj(s) * c2
    F[:, i2] = -s * c1 + c * c2


def _right_zero(diag, offender):
    """Rotation A with (M @ A^H) zeroing ``offender`` against ``diag``.

    For a column update on (i1, i2), the new (i2, i1) entry is
    ``c * offender + conj(s) * diag``; flipping the sign of ``s`` from
    :func:`make_givens` makes it vanish.
    """
    rot, _ = make_givens(diag, offender)
    return PlaneRotation(rot.c, -rot.s)


def _rq(A):
    """RQ decomposition ``A = R Q`` (R upper triangular, Q unitary)."""
    B = np.conj((A[::-1, :]).T)        # (J A)^H
    Q1, R1 = np.linalg.qr(B)
    R = np.conj(R1.T)[::-1, ::-1]      # J R1^H J
    Q = np.conj(Q1.T)[::-1, :]         # J Q1^H
    return R, Q


def _solve_tri2(T, B):
    """Solve T X = B for upper triangular 2x2 T."""
    X = np.empty_like(B)
    X[1] = B[1] / T[1, 1]
    X[0] = (B[0] - T[0, 1] * X[1]) / T[0, 0]
    return X


def _wilkinson(M):
    """Eigenvalue of a 2x2 matrix closest to its (1, 1) entry."""
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    t = 0.5 * (a + d)
    disc = np.sqrt((0.5 * (a - d)) ** 2 + b * c + 0j)
    e1, e2 = t + disc, t - disc
    return e1 if abs(e1 - d) <= abs(e2 - d) else e2


class _Engine:
    """Mutable state of one decomposition run.

    Node ``j`` of the cyclic chain joins factor ``j-1`` and factor ``j``
    (indices mod p).  A node update ``V_j <- V_j A^H`` applies ``A`` to
    the rows of factors having node ``j`` on their left and ``A^H`` to
    the columns of factors having it on their right; exactly factors
    ``j-1`` and ``j`` are touched (both roles coincide when p == 1).
    """

    def __init__(self, factors, signs, seed=0):
        self.H = [np.array(F, dtype=np.complex128, order="F") for F in factors]
        self.signs = list(signs)
        self.p = len(factors)
        self.n = self.H[0].shape[0]
        self.V = [np.eye(self.n, dtype=np.complex128, order="F")
                  for _ in range(self.p)]
        self.rng = np.random.default_rng(seed)
        self.sweeps = 0

    def update(self, node, rot, i1, i2):
        c, s = rot.c, rot.s
        f1 = (node - 1) % self.p
        f2 = node % self.p
        # factor f1 has node on its left iff its sign is +1
        if self.signs[f1] > 0:
            _rot_rows(self.H[f1], i1, i2, c, s)
        else:
            _rot_cols_h(self.H[f1], i1, i2, c, s)
        # factor f2 has node on its right iff its sign is +1
        if self.signs[f2] > 0:
            _rot_cols_h(self.H[f2], i1, i2, c, s)
        else:
            _rot_rows(self.H[f2], i1, i2, c, s)
        _rot_cols_h(self.V[node], i1, i2, c, s)

    def update_full(self, node, A):
        """Node update by a full unitary (V_node <- V_node A^H)."""
        f1 = (node - 1) % self.p
        f2 = node % self.p
        AH = np.conj(A.T)
        if self.signs[f1] > 0:
            self.H[f1] = np.asfortranarray(A @ self.H[f1])
        else:
            self.H[f1] = np.asfortranarray(self.H[f1] @ AH)
        if self.signs[f2] > 0:
            self.H[f2] = np.asfortranarray(self.H[f2] @ AH)
        else:
            self.H[f2] = np.asfortranarray(A @ self.H[f2])
        self.V[node] = np.asfortranarray(self.V[node] @ AH)

    # -- phase 1: Hessenberg-triangular reduction ----------------------

    def reduce(self):
        p, n = self.p, self.n
        if n < 2:
            return
        # triangularize factors p-1 .. 1 through their far node, so the
        # complementary disturbance always lands on a not-yet-processed
        # factor (ultimately on factor 0, the Hessenberg carrier)
        for k in range(p - 1, 0, -1):
            if self.signs[k] > 0:
                _, Q = _rq(self.H[k])
                self.update_full(k, Q)
            else:
                Q, _ = np.linalg.qr(self.H[k])
                self.update_full(k, np.conj(Q.T))
            self.H[k] = np.asfortranarray(np.triu(self.H[k]))
        # reduce factor 0 to upper Hessenberg, keeping the rest triangular
        H0 = self.H[0]
        for j in range(n - 2):
            for i in range(n - 1, j + 1, -1):
                if H0[i, j] == 0:
                    continue
                rot, _ = make_givens(H0[i - 1, j], H0[i, j])
                self.update(1 % p, rot, i - 1, i)
                H0[i, j] = 0.0
                self._propagate(i - 1, i)

    def _propagate(self, i1, i2):
        """Restore factors 1..p-1 after a node-1 row rotation.

        Each restoring rotation lands on the next node, so the ring ends
        with a node-0 column update on the Hessenberg carrier.
        """
        for m in range(1, self.p):
            Hm = self.H[m]
            if self.signs[m] > 0:
                rot, _ = make_givens(Hm[i1, i1], Hm[i2, i1])
            else:
                rot = _right_zero(Hm[i2, i2], Hm[i2, i1])
            self.update((m + 1) % self.p, rot, i1, i2)
            Hm[i2, i1] = 0.0

    # -- phase 2: implicit QZ sweeps -----------------------------------

    def iterate(self, max_sweeps):
        n = self.n
        H0 = self.H[0]
        if n < 2:
            return True
        hi = n - 1
        stall = 0
        last_hi = hi
        while hi > 0:
            fnorm = np.linalg.norm(H0)
            for i in range(hi):
                t = EPS * (abs(H0[i, i]) + abs(H0[i + 1, i + 1]))
                if t == 0.0:
                    t = EPS * fnorm
                if abs(H0[i + 1, i]) <= t:
                    H0[i + 1, i] = 0.0
            while hi > 0 and H0[hi, hi - 1] == 0:
                hi -= 1
            if hi == 0:
                break
            lo = hi
            while lo > 0 and H0[lo, lo - 1] != 0:
                lo -= 1
            if hi != last_hi:
                stall = 0
                last_hi = hi
            else:
                stall += 1
            if self.sweeps >= max_sweeps:
                return False
            intro = None
            if not (stall > 0 and stall % 10 == 0):
                intro = self._shift_vector(lo, hi)
            if intro is None:
                z = self.rng.standard_normal(4)
                intro = (complex(z[0], z[1]), complex(z[2], z[3]))
            self._sweep(lo, hi, *intro)
            self.sweeps += 1
        return True

    def _shift_vector(self, lo, hi):
        """First column of (Pi_window - sigma I), up to a common scale.

        The trailing 2x2 of the window product (for the Wilkinson shift)
        and the leading 2x2 of the product of factors 1..p-1 are exact
        for triangular/Hessenberg structure, and are accumulated with a
        shared power-of-two rescale so only the direction survives.
        Returns None on breakdown (tiny divisor in an inverted factor).
        """
        T2 = np.eye(2, dtype=np.complex128)
        S2 = np.eye(2, dtype=np.complex128)
        for k in range(self.p):
            Hk = self.H[k]
            B2 = Hk[hi - 1:hi + 1, hi - 1:hi + 1]
            L2 = Hk[lo:lo + 2, lo:lo + 2]
            if self.signs[k] > 0:
                T2 = B2 @ T2
                if k > 0:
                    S2 = L2 @ S2
            else:
                tiny = EPS * max(np.abs(B2).max(), np.abs(L2).max(), 1e-300)
                if min(abs(B2[0, 0]), abs(B2[1, 1]), abs(L2[0, 0]),
                       abs(L2[1, 1])) <= tiny:
                    return None
                T2 = _solve_tri2(B2, T2)
                S2 = _solve_tri2(L2, S2)
            m = max(np.abs(T2).max(), np.abs(S2).max())
            if not np.isfinite(m):
                return None
            if m > 2.0 ** 128 or (0 < m < 2.0 ** -128):
                d = 2.0 ** np.floor(np.log2(m))
                T2 /= d
                S2 /= d
        sigma = _wilkinson(T2)
        y = S2 @ self.H[0][lo:lo + 2, lo]
        x1 = y[0] - sigma
        x2 = y[1]
        if not (np.isfinite(x1) and np.isfinite(x2)) or (x1 == 0 and x2 == 0):
            return None
        return x1, x2

    def _sweep(self, lo, hi, x1, x2):
        p = self.p
        H0 = self.H[0]
        rot, _ = make_givens(x1, x2)
        self.update(0, rot, lo, lo + 1)
        # restore factors p-1 .. 1 at (lo, lo+1); fills cascade downwards
        for m in range(p - 1, 0, -1):
            Hm = self.H[m]
            if self.signs[m] > 0:
                rot2 = _right_zero(Hm[lo + 1, lo + 1], Hm[lo + 1, lo])
            else:
                rot2, _ = make_givens(Hm[lo, lo], Hm[lo + 1, lo])
            self.update(m, rot2, lo, lo + 1)
            Hm[lo + 1, lo] = 0.0
        # chase the bulge down the window
        for i in range(lo, hi - 1):
            rot, _ = make_givens(H0[i + 1, i], H0[i + 2, i])
            self.update(1 % p, rot, i + 1, i + 2)
            H0[i + 2, i] = 0.0
            self._propagate(i + 1, i + 2)


def periodic_schur(seq, *, max_sweeps_per_eig=30, seed=0):
    """Compute a periodic Schur form of a signed factor sequence.

    Parameters
    ----------
    seq : SignedSequence
        Factors and exponents; any signature pattern is accepted.
    max_sweeps_per_eig : int
        The overall sweep budget is ``max_sweeps_per_eig * n``.
    seed : int
        Seed for the exceptional-shift fallback, for determinism.

    Raises
    ------
    NonConvergenceError
        If the sweep cap is exhausted; the partial form is attached.
    """
    factors = seq.factors
    signs = list(seq.signs)
    p = len(factors)
    if p == 0:
        raise ValueError("empty sequence")
    n = seq.n

    if all(s < 0 for s in signs):
        # the constraints V_k^H G_k V_{k+1} coincide with those of the
        # reversed all-positive sequence under W_j = V_{(p-j) mod p}
        rev = SignedSequence(list(factors[::-1]), [+1] * p)
        form = periodic_schur(rev, max_sweeps_per_eig=max_sweeps_per_eig,
                              seed=seed)
        chain = [form.chain[(p - j) % p] for j in range(p)]
        tri = [form.triangular[p - 1 - k] for k in range(p)]
        return PeriodicSchurForm(seq, tri, chain, form.converged, form.sweeps)

    # rotate the cycle so the Hessenberg carrier (factor 0) has sign +1
    rot = next(k for k, s in enumerate(signs) if s > 0)
    eng = _Engine(factors[rot:] + factors[:rot], signs[rot:] + signs[:rot],
                  seed=seed)
    eng.reduce()
    cap = max(60, max_sweeps_per_eig * max(n, 1))
    converged = eng.iterate(cap)

    tri = [None] * p
    chain = [None] * p
    for m in range(p):
        tri[(m + rot) % p] = eng.H[m]
        chain[(m + rot) % p] = eng.V[m]
    form = PeriodicSchurForm(seq, tri, chain, converged, eng.sweeps)
    if not converged:
        raise NonConvergenceError(
            f"periodic QZ did not converge within {cap} sweeps",
            partial_form=form)
    return form


def formal_eigenvalues(form, *, zero_tol=1.0):
    """Diagonal-product spectrum of a periodic Schur form.

    Products are accumulated with joint power-of-two rescaling whenever
    either magnitude leaves ``[2^-512, 2^512]``.  A diagonal entry counts
    as zero when ``<= zero_tol * n * u * ||factor||_F``; an index where
    both the ``+1`` and ``-1`` products vanish marks the formal product
    singular.
    """
    n = form.n
    num = np.ones(n, dtype=np.complex128)
    den = np.ones(n, dtype=np.complex128)
    num_zero = np.zeros(n, dtype=bool)
    den_zero = np.zeros(n, dtype=bool)
    for Hk, sk in zip(form.triangular, form.signs):
        d = np.diag(Hk).copy()
        tol = zero_tol * n * EPS * np.linalg.norm(Hk)
        zmask = np.abs(d) <= tol
        if sk > 0:
            num_zero |= zmask
            num *= d
        else:
            den_zero |= zmask
            den *= d
        m = np.maximum(np.abs(num), np.abs(den))
        mask = (m > 2.0 ** 512) | ((m > 0) & (m < 2.0 ** -512))
        if np.any(mask):
            scale = 2.0 ** np.floor(np.log2(m[mask]))
            num[mask] /= scale
            den[mask] /= scale
    num[num_zero] = 0.0
    den[den_zero] = 0.0
    regular = not bool(np.any(num_zero & den_zero))
    return SpectrumReport(num, den, regular, num_zero, den_zero)


def cyclic_pencil(seq):
    """Block-cyclic linearization of an alternating formal product.

    For ``seq`` holding ``M_1^{-1} N_1 ... M_r^{-1} N_r`` (rightmost
    factor ``N_r`` first, signature ``+,-,+,-,...``), returns the pair
    ``(P0, P1)`` of the ``rn x rn`` pencil

        ``Q(lambda) = lambda * diag(M_1..M_r) - superdiag(N_1..N_{r-1})
                      - corner(N_r)``

    whose eigenvalues are the r-th roots of the eigenvalues of the
    product (``inf`` mapping to ``inf``).
    """
    p = seq.p
    if p % 2 != 0:
        raise ValueError("alternating sequence of even length required")
    expected = [(+1 if k % 2 == 0 else -1) for k in range(p)]
    if list(seq.signs) != expected:
        raise ValueError("signature must alternate starting with +1")
    rev = seq.factors[::-1]
    Ms = rev[0::2]
    Ns = rev[1::2]
    r = len(Ms)
    n = seq.n
    P1 = np.zeros((r * n, r * n), dtype=np.complex128)
    P0 = np.zeros((r * n, r * n), dtype=np.complex128)
    for k in range(r):
        P1[k * n:(k + 1) * n, k * n:(k + 1) * n] = Ms[k]
        col = (k + 1) % r
        P0[k * n:(k + 1) * n, col * n:(col + 1) * n] -= Ns[k]
    return P0, P1


def pencil_eigenvalues(P0, P1, *, zero_tol=1.0):
    """Spectrum of the pencil ``Q(lambda) = lambda P1 + P0`` via QZ.

    This is the length-2 specialization of the periodic Schur machinery;
    it is delegated to LAPACK's QZ (through scipy), whose deflation of
    infinite eigenvalues is more robust than the generic sweep here.
    Returns projective pairs, with infinity encoded as ``den == 0``.

    Raises
    ------
    IrregularPencilError
        If the pencil is detected identically singular (an index where
        both diagonal products vanish under the zero-cluster tolerance).
    """
    import scipy.linalg

    P0 = np.asarray(P0, dtype=np.complex128)
    P1 = np.asarray(P1, dtype=np.complex128)
    n = P0.shape[0]
    if n == 0:
        return SpectrumReport(np.empty(0, np.complex128),
                              np.empty(0, np.complex128), regular=True)
    AA, BB, _, _ = scipy.linalg.qz(-P0, P1, output="complex")
    num = np.diag(AA).copy()
    den = np.diag(BB).copy()
    num_zero = np.abs(num) <= zero_tol * n * EPS * np.linalg.norm(AA)
    den_zero = np.abs(den) <= zero_tol * n * EPS * np.linalg.norm(BB)
    num[num_zero] = 0.0
    den[den_zero] = 0.0
    regular = not bool(np.any(num_zero & den_zero))
    report = SpectrumReport(num, den, regular, num_zero, den_zero)
    if not regular:
        raise IrregularPencilError("pencil is identically singular",
                                   report=report)
    return report
