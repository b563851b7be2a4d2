"""Exact index algebra: permutation symbols, Kronecker arrays, frame densities.

Everything here is finite combinatorics over exact rationals (or sparse
polynomials), so each identity check is an equality of exact objects and a
"pass" means the residual vanished identically, not approximately.

Index conventions used throughout the package:
  * all indices are 0-based and run over range(n);
  * the permutation symbol has epsilon(0, 1, ..., n-1) = +1, and upper and
    lower placements share the same numeric values;
  * square frame matrices are indexed frame[row][col] with the internal
    index first, so frame[I][mu] is the coefficient of coordinate
    differential mu in co-frame leg I;
  * normalized antisymmetrization over k slots carries the 1/k! weight, so
    the unnormalized Kronecker array is k! times the bracketed product.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Mapping, Sequence

from .checks import CheckRecord, assertive
from .symcore import Poly, Rational

__all__ = [
    "levi_civita",
    "perm_parity",
    "generalized_kronecker",
    "antisymmetrized_delta",
    "epsilon_identity_suite",
    "vielbein_determinant",
    "matrix_inverse",
    "vielbein_density",
    "frame_epsilon_relations",
    "scalar_density_reduction_residual",
    "eh_palatini_reduction_check",
    "random_antisym_pair_array",
    "random_frame",
    "lorentzian_diag",
    "signature_parity",
]


def perm_parity(seq: Sequence[int]) -> int:
    """Sign of the permutation given as a sequence of distinct values."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        while seq[i] != i:
            j = seq[i]
            seq[i], seq[j] = seq[j], seq[i]
            sign = -sign
    return sign


def levi_civita(indices: Sequence[int], n: int) -> int:
    """Totally antisymmetric symbol on n slots, +1 on (0, 1, ..., n-1)."""
    if len(indices) != n:
        raise ValueError(f"expected {n} indices, got {len(indices)}")
    for i in indices:
        if not 0 <= i < n:
            raise ValueError(f"index {i} out of range for n={n}")
    if len(set(indices)) != n:
        return 0
    return perm_parity(indices)


def generalized_kronecker(upper: Sequence[int], lower: Sequence[int], n: int) -> int:
    """Determinant-style delta: sum over S_p of sgn(s) * prod delta(u_i, l_s(i)).

    Evaluates to the sign of the permutation aligning ``lower`` with
    ``upper`` when both are duplicate-free with equal value sets, else 0.
    """
    if len(upper) != len(lower):
        raise ValueError("upper and lower index lists must have equal length")
    for i in itertools.chain(upper, lower):
        if not 0 <= i < n:
            raise ValueError(f"index {i} out of range for n={n}")
    p = len(upper)
    if p == 0:
        return 1
    if len(set(upper)) != p or set(upper) != set(lower):
        return 0
    pos = {v: i for i, v in enumerate(lower)}
    return perm_parity([pos[v] for v in upper])


def antisymmetrized_delta(upper: Sequence[int], lower: Sequence[int]) -> Fraction:
    """Normalized bracket product delta^[u1 ... up]_[l1 ... lp], weight 1/p!.

    Computed by the explicit signed sum over permutations of the lower
    slots; this is deliberately independent of generalized_kronecker so
    the two can cross-check each other.
    """
    p = len(upper)
    if p != len(lower):
        raise ValueError("upper and lower index lists must have equal length")
    if p == 0:
        return Fraction(1)
    total = 0
    for perm in itertools.permutations(range(p)):
        term = 1
        for i in range(p):
            if upper[i] != lower[perm[i]]:
                term = 0
                break
        if term:
            total += perm_parity(perm)
    return Fraction(total, _factorial(p))


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# permutation-symbol identity suite


def epsilon_identity_suite(n: int) -> list:
    """Exhaustive contraction identities between epsilon pairs and deltas.

    Three families, each checked over every free index tuple:
      * trailing contraction: (1/p!) sum_r eps(m..., r...) eps(v..., r...)
        equals the generalized Kronecker array on the free slots;
      * leading contraction: sum_m eps(m..., a...) eps(m..., b...) equals
        p! (n-p)! times the normalized antisymmetrized delta product;
      * full contraction of an epsilon pair equals n!.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    records = []

    for p in range(n + 1):
        free = n - p
        bad = 0
        for mus in itertools.product(range(n), repeat=free):
            for nus in itertools.product(range(n), repeat=free):
                lhs = 0
                for rhos in itertools.product(range(n), repeat=p):
                    e1 = levi_civita(tuple(mus) + rhos, n)
                    if e1 == 0:
                        continue
                    e2 = levi_civita(tuple(nus) + rhos, n)
                    if e2:
                        lhs += e1 * e2
                if Fraction(lhs, _factorial(p)) != generalized_kronecker(mus, nus, n):
                    bad += 1
        records.append(
            assertive(
                f"epsilon_trailing_contraction_n{n}_p{p}",
                bad,
                "epsilon pair summed over trailing slots vs Kronecker array",
            )
        )

    for p in range(n + 1):
        free = n - p
        weight = _factorial(p) * _factorial(free)
        bad = 0
        for alphas in itertools.product(range(n), repeat=free):
            for betas in itertools.product(range(n), repeat=free):
                lhs = 0
                for mus in itertools.product(range(n), repeat=p):
                    e1 = levi_civita(mus + tuple(alphas), n)
                    if e1 == 0:
                        continue
                    e2 = levi_civita(mus + tuple(betas), n)
                    if e2:
                        lhs += e1 * e2
                rhs = weight * antisymmetrized_delta(alphas, betas)
                if Fraction(lhs) != rhs:
                    bad += 1
        records.append(
            assertive(
                f"epsilon_leading_contraction_n{n}_p{p}",
                bad,
                "epsilon pair summed over leading slots vs weighted bracket product",
            )
        )

    total = sum(
        levi_civita(mus, n) ** 2 for mus in itertools.permutations(range(n))
    )
    records.append(
        assertive(
            f"epsilon_full_contraction_n{n}",
            0 if total == _factorial(n) else 1,
            "fully contracted epsilon pair equals n!",
        )
    )
    return records


# ---------------------------------------------------------------------------
# determinants, inverses, densities


def vielbein_determinant(matrix: Sequence[Sequence], mode: str = "epsilon_formula"):
    """Exact determinant of a square matrix of Poly or rational entries.

    mode "epsilon_formula" uses the double permutation-symbol sum with the
    1/n! weight; mode "cofactor" uses a Laplace expansion.  Both are exact
    and serve as independent oracles for each other.
    """
    n = len(matrix)
    for row in matrix:
        if len(row) != n:
            raise ValueError("matrix must be square")
    if mode == "epsilon_formula":
        total = 0
        for rows in itertools.permutations(range(n)):
            s_r = perm_parity(rows)
            for cols in itertools.permutations(range(n)):
                term = s_r * perm_parity(cols)
                prod = None
                for k in range(n):
                    entry = matrix[rows[k]][cols[k]]
                    prod = entry if prod is None else prod * entry
                total = total + prod * Fraction(term, _factorial(n))
        return total
    if mode == "cofactor":
        return _laplace(matrix)
    raise ValueError(f"unknown mode {mode!r}")


def _laplace(matrix):
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        minor = [list(r) for r in minor]
        term = matrix[0][j] * _laplace(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def matrix_inverse(matrix: Sequence[Sequence[Rational]]):
    """Gauss-Jordan inverse over exact rationals; raises on singular input."""
    n = len(matrix)
    work = [[Fraction(v) for v in row] for row in matrix]
    out = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        out[col], out[pivot] = out[pivot], out[col]
        inv = 1 / work[col][col]
        work[col] = [v * inv for v in work[col]]
        out[col] = [v * inv for v in out[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [a - f * b for a, b in zip(work[r], work[col])]
                out[r] = [a - f * b for a, b in zip(out[r], out[col])]
    return out


def vielbein_density(frame: Sequence[Sequence], n: int, mode: str) -> Mapping:
    """Momentum-sector density tables built from a co-frame matrix.

    frame[I][mu] may hold Poly or rational entries.  mode "single" returns
    the adjugate-type table keyed (mu, I): determinant times inverse frame,
    realized as the (n-1)-fold permutation-symbol sum so the result is
    polynomial in the frame entries.  mode "pair" returns the antisymmetric
    table keyed (mu, nu, I, J): determinant times the antisymmetrized
    double inverse, realized through its closed epsilon-contraction form
    (one frame factor for n=3, two for n=4).
    """
    if len(frame) != n or any(len(row) != n for row in frame):
        raise ValueError("frame must be n x n")
    numeric = all(not isinstance(v, Poly) for row in frame for v in row)
    if numeric and vielbein_determinant(frame, mode="cofactor") == 0:
        raise ValueError("frame is singular")
    if mode == "single":
        weight = Fraction(1, _factorial(n - 1))
        table = {}
        for mu in range(n):
            for i_int in range(n):
                total = 0
                for mus in itertools.permutations([m for m in range(n) if m != mu]):
                    e1 = perm_parity((mu,) + mus)
                    for ints in itertools.permutations(
                        [k for k in range(n) if k != i_int]
                    ):
                        sgn = e1 * perm_parity((i_int,) + ints)
                        prod = Fraction(sgn) * weight
                        for k in range(n - 1):
                            prod = prod * frame[ints[k]][mus[k]]
                        total = total + prod
                table[(mu, i_int)] = total
        return table
    if mode == "pair":
        if n not in (3, 4):
            raise ValueError("pair densities implemented for n in {3, 4}")
        weight = Fraction(1, 2) if n == 3 else Fraction(1, 4)
        table = {}
        for mu in range(n):
            for nu in range(n):
                for i_int in range(n):
                    for j_int in range(n):
                        total = 0
                        if mu != nu and i_int != j_int:
                            rest_s = [m for m in range(n) if m not in (mu, nu)]
                            rest_i = [k for k in range(n) if k not in (i_int, j_int)]
                            for mus in itertools.permutations(rest_s):
                                e1 = perm_parity((mu, nu) + mus)
                                for ints in itertools.permutations(rest_i):
                                    sgn = e1 * perm_parity((i_int, j_int) + ints)
                                    prod = Fraction(sgn) * weight
                                    for k in range(n - 2):
                                        prod = prod * frame[ints[k]][mus[k]]
                                    total = total + prod
                        table[(mu, nu, i_int, j_int)] = total
        return table
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# metric helpers


def lorentzian_diag(n: int):
    """Internal flat metric signature (-, +, ..., +)."""
    return (-1,) + (1,) * (n - 1)


def signature_parity(diag: Sequence[int]) -> int:
    """(-1) to the number of negative eigenvalues."""
    neg = sum(1 for v in diag if v < 0)
    return -1 if neg % 2 else 1


def random_frame(n: int, rng: random.Random, positive_det: bool = True):
    """Random invertible rational co-frame; det > 0 when positive_det.

    Keeping the determinant positive makes the absolute-value and signed
    determinant readings of the scalar-density identities agree at the
    sample, which is what the reduction checks assert.
    """
    while True:
        frame = [
            [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)]
            for _ in range(n)
        ]
        det = vielbein_determinant(frame, mode="cofactor")
        if det == 0:
            continue
        if positive_det and det < 0:
            frame[0] = [-v for v in frame[0]]
            det = -det
        return frame


# ---------------------------------------------------------------------------
# curved-epsilon relations at a rational frame


def frame_epsilon_relations(
    frame: Sequence[Sequence[Rational]], diag: Sequence[int] | None = None
) -> list:
    """Exhaustive checks tying the frame-weighted permutation symbols,
    the inverse frame, and the metric built from the frame.

    The lowered curved symbol is det(e) * eps; the raised one is
    parity * det(e)^-1 * eps where parity is the signature sign.  Checks:
      * lowered symbol equals the internal symbol saturated with frame legs;
      * raising the lowered symbol with the inverse metric of g = e^T h e
        lands exactly on the raised symbol (this pins the parity factor);
      * the internal symbol is recovered by saturating the lowered curved
        symbol with inverse-frame legs;
      * fully contracting raised against lowered gives parity * n!.
    """
    n = len(frame)
    if diag is None:
        diag = lorentzian_diag(n)
    parity = signature_parity(diag)
    det = vielbein_determinant(frame, mode="cofactor")
    if det == 0:
        raise ValueError("frame is singular")
    inv = matrix_inverse(frame)  # inv[mu][I]

    records = []

    bad = 0
    for mus in itertools.product(range(n), repeat=n):
        lhs = 0
        for ints in itertools.permutations(range(n)):
            term = Fraction(perm_parity(ints))
            for k in range(n):
                term *= frame[ints[k]][mus[k]]
            lhs += term
        if lhs != det * levi_civita(mus, n):
            bad += 1
    records.append(
        assertive(
            f"curved_epsilon_lowered_n{n}",
            bad,
            "internal symbol saturated with frame legs equals det-weighted symbol",
        )
    )

    g = [
        [
            sum(Fraction(diag[i]) * frame[i][mu] * frame[i][nu] for i in range(n))
            for nu in range(n)
        ]
        for mu in range(n)
    ]
    ginv = matrix_inverse(g)
    bad = 0
    for mus in itertools.product(range(n), repeat=n):
        raised = 0
        for nus in itertools.product(range(n), repeat=n):
            eps = levi_civita(nus, n)
            if eps == 0:
                continue
            term = det * Fraction(eps)
            for k in range(n):
                term *= ginv[mus[k]][nus[k]]
            raised += term
        if raised != Fraction(parity * levi_civita(mus, n), 1) / det:
            bad += 1
    records.append(
        assertive(
            f"curved_epsilon_raised_n{n}",
            bad,
            "metric-raised lowered symbol equals parity/det weighted symbol",
        )
    )

    bad = 0
    for ints in itertools.product(range(n), repeat=n):
        lhs = 0
        for mus in itertools.permutations(range(n)):
            term = det * Fraction(perm_parity(mus))
            for k in range(n):
                term *= inv[mus[k]][ints[k]]
            lhs += term
        if lhs != levi_civita(ints, n):
            bad += 1
    records.append(
        assertive(
            f"frame_epsilon_inversion_n{n}",
            bad,
            "lowered curved symbol saturated with inverse legs recovers internal symbol",
        )
    )

    total = 0
    for mus in itertools.permutations(range(n)):
        low = det * Fraction(levi_civita(mus, n))
        high = Fraction(parity * levi_civita(mus, n), 1) / det
        total += low * high
    records.append(
        assertive(
            f"curved_epsilon_full_contraction_n{n}",
            0 if total == parity * _factorial(n) else 1,
            "raised against lowered full contraction equals parity * n!",
        )
    )

    records.append(
        assertive(
            f"signature_parity_n{n}",
            0 if parity == -1 else 1,
            "single-minus signature has parity -1",
        )
    )
    return records


# ---------------------------------------------------------------------------
# first-order action reduction at random samples


def random_antisym_pair_array(n: int, rng: random.Random):
    """Array R[(a, b, r, s)] antisymmetric in (a, b) and in (r, s), generic."""
    data = {}
    for a in range(n):
        for b in range(a + 1, n):
            for r in range(n):
                for s in range(r + 1, n):
                    data[(a, b, r, s)] = Fraction(
                        rng.randint(-9, 9), rng.randint(1, 4)
                    )

    def entry(a, b, r, s):
        sign = 1
        if a == b or r == s:
            return Fraction(0)
        if a > b:
            a, b = b, a
            sign = -sign
        if r > s:
            r, s = s, r
            sign = -sign
        return sign * data[(a, b, r, s)]

    return entry


def scalar_density_reduction_residual(frame, R, n: int) -> Fraction:
    """Residual of the curvature-contraction density against its
    epsilon-epsilon frame form, at one co-frame and one curvature array.

      n=4:  |det e| * d^[r_a d^s]_b R^ab_rs
              - (1/4) eps_IJKL eps^mnrs e^I_m e^J_n F^KL_rs
      n=3:  |det e| * d^[r_a d^s]_b R^ab_rs
              - (1/2) eps_IJK eps^mrs e^I_m F^JK_rs
    with F^AB_rs = e^A_a e^B_b R^ab_rs.  R is a callable on 4 indices,
    antisymmetric in its first and in its last pair.  Vanishes exactly
    whenever det e > 0 (the absolute value matches the signed
    determinant, under which the two sides agree identically).
    """
    if n not in (3, 4):
        raise ValueError("reduction check implemented for n in {3, 4}")
    det = vielbein_determinant(frame, mode="cofactor")
    if det == 0:
        raise ValueError("frame is singular")
    absdet = det if det > 0 else -det

    contracted = Fraction(0)
    for a in range(n):
        for b in range(n):
            for r in range(n):
                for s in range(n):
                    w = Fraction(
                        (1 if (r == a and s == b) else 0)
                        - (1 if (s == a and r == b) else 0),
                        2,
                    )
                    if w:
                        contracted += w * R(a, b, r, s)
    lhs = absdet * contracted

    def F(A, B, r, s):
        total = Fraction(0)
        for a in range(n):
            for b in range(n):
                v = R(a, b, r, s)
                if v:
                    total += frame[A][a] * frame[B][b] * v
        return total

    rhs = Fraction(0)
    if n == 4:
        for ints in itertools.permutations(range(4)):
            ei = perm_parity(ints)
            I, J, K, L = ints
            for mus in itertools.permutations(range(4)):
                em = perm_parity(mus)
                m, nu, r, s = mus
                rhs += (
                    Fraction(ei * em, 4)
                    * frame[I][m]
                    * frame[J][nu]
                    * F(K, L, r, s)
                )
    else:
        for ints in itertools.permutations(range(3)):
            ei = perm_parity(ints)
            I, J, K = ints
            for mus in itertools.permutations(range(3)):
                em = perm_parity(mus)
                m, r, s = mus
                rhs += Fraction(ei * em, 2) * frame[I][m] * F(J, K, r, s)

    return lhs - rhs


def eh_palatini_reduction_check(n: int, seed: int = 0, samples: int = 5) -> list:
    """Seeded suite over random positive-determinant co-frames and generic
    two-pair-antisymmetric curvature arrays; every residual from
    scalar_density_reduction_residual is asserted to vanish exactly."""
    rng = random.Random(seed)
    records = []
    for k in range(samples):
        frame = random_frame(n, rng, positive_det=True)
        R = random_antisym_pair_array(n, rng)
        residual = scalar_density_reduction_residual(frame, R, n)
        records.append(
            assertive(
                f"scalar_density_reduction_n{n}_sample{k}",
                0 if residual == 0 else 1,
                "curvature contraction density equals epsilon-epsilon frame form",
            )
        )
    return records
