"""GASP polynomial codes for secure distributed matrix multiplication.

The user splits A into K row blocks and B into L column blocks, hides them
behind T uniformly random blocks, and packs everything into two masked
polynomials whose exponents come from a combinatorial degree table.  Each
of N servers receives one evaluation of each polynomial, multiplies them,
and returns the result; interpolating the product polynomial recovers all
K*L useful block products while any T colluding servers see only uniform
noise.

Exponent layout: the K data exponents of the first polynomial count
0..K-1 and the L data exponents of the second go in steps of K, so the
pairwise data sums enumerate 0..KL-1 exactly once.  Mask exponents start
at KL (steps of 1 on one side, steps of K on the other), keeping every
mixed sum at KL or above.  The largest table entry is then
2KL + (T-1)(K+1), and the number of servers N is the number of distinct
entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

from .errors import ConstructionError, ParameterError
from .field import MAX_MODULUS_BITS, PrimeField, SeededSource, next_prime
from .matrix import (
    MatrixF,
    assemble_grid,
    block_split_multiply,
    mat_mul_standard,
    mat_mul_strassen,
    partition_cols,
    partition_rows,
)

DEFAULT_POINT_RETRIES = 1000


@dataclass(frozen=True)
class GaspParams:
    """Partition counts K, L, collusion threshold T, input shape r, s, t."""

    K: int
    L: int
    T: int
    r: int
    s: int
    t: int

    def __post_init__(self) -> None:
        for name in ("K", "L", "T", "r", "s", "t"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")

    @property
    def block_rows(self) -> int:
        """Rows per A block after zero-padding r up to a multiple of K."""
        return -(-self.r // self.K)

    @property
    def block_cols(self) -> int:
        """Columns per B block after zero-padding t up to a multiple of L."""
        return -(-self.t // self.L)


def gasp_exponents(K: int, L: int, T: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Exponent vectors (data exponents first, then mask exponents)."""
    if min(K, L, T) < 1:
        raise ParameterError("K, L, T must be >= 1")
    alpha = tuple(range(K)) + tuple(K * L + i for i in range(T))
    beta = tuple(K * j for j in range(L)) + tuple(K * L + K * i for i in range(T))
    return alpha, beta


@dataclass(frozen=True)
class DegreeTable:
    """Pairwise exponent sums of the two vectors, plus the distinct set."""

    K: int
    L: int
    T: int
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    table: tuple[tuple[int, ...], ...]
    exponents: tuple[int, ...]

    @property
    def n_servers(self) -> int:
        return len(self.exponents)

    @property
    def max_entry(self) -> int:
        return self.exponents[-1]

    @property
    def exponent_sum(self) -> int:
        return sum(self.exponents)


def build_degree_table(
    alpha: tuple[int, ...], beta: tuple[int, ...], K: int, L: int, T: int
) -> DegreeTable:
    """Validate an exponent assignment and derive its degree table.

    Any assignment is accepted as long as it satisfies the structural
    rules: the K*L data sums are exactly 0..KL-1 and occur nowhere else in
    the table, the largest entry is 2KL + (T-1)(K+1), and the distinct
    count N lies in [KL, (K+T)(L+T)].
    """
    if len(alpha) != K + T or len(beta) != L + T:
        raise ConstructionError("exponent vector lengths do not match K+T / L+T")
    if any(e < 0 for e in alpha + beta):
        raise ConstructionError("exponents must be non-negative")
    table = tuple(tuple(a + b for b in beta) for a in alpha)
    useful = [table[k][j] for k in range(K) for j in range(L)]
    if sorted(useful) != list(range(K * L)):
        raise ConstructionError("data exponent sums must enumerate 0..KL-1 exactly")
    flat = [e for row in table for e in row]
    for e in useful:
        if flat.count(e) != 1:
            raise ConstructionError(f"data exponent {e} collides with a mask sum")
    exponents = tuple(sorted(set(flat)))
    want_max = 2 * K * L + (T - 1) * (K + 1)
    if exponents[-1] != want_max:
        raise ConstructionError(
            f"largest table entry {exponents[-1]} != expected {want_max}"
        )
    n = len(exponents)
    if not K * L <= n <= (K + T) * (L + T):
        raise ConstructionError(f"distinct entry count {n} outside [KL, (K+T)(L+T)]")
    return DegreeTable(K, L, T, tuple(alpha), tuple(beta), table, exponents)


def degree_table_for(params: GaspParams) -> DegreeTable:
    alpha, beta = gasp_exponents(params.K, params.L, params.T)
    return build_degree_table(alpha, beta, params.K, params.L, params.T)


def required_field_size(dt: DegreeTable) -> int:
    """Sufficient field-size bound (2*C(N,T)+1) * sum(exponents), exact.

    A modulus strictly larger than this value guarantees the evaluation
    point search succeeds; smaller moduli may still work and can be
    accepted with an explicit override.
    """
    bound = (2 * math.comb(dt.n_servers, dt.T) + 1) * dt.exponent_sum
    if bound >= 1 << MAX_MODULUS_BITS:
        raise ParameterError(
            f"sufficient field size {bound} exceeds the {MAX_MODULUS_BITS}-bit modulus cap"
        )
    return bound


def smallest_admissible_prime(bound: int) -> int:
    """Smallest prime strictly above the bound, within the modulus cap."""
    p = next_prime(bound)
    if p.bit_length() > MAX_MODULUS_BITS:
        raise ParameterError(
            f"no admissible prime under the {MAX_MODULUS_BITS}-bit cap above {bound}"
        )
    return p


def auto_modulus(params: GaspParams) -> int:
    return smallest_admissible_prime(required_field_size(degree_table_for(params)))


def _invert(field: PrimeField, rows: list[list[int]]) -> list[list[int]] | None:
    """Counted Gauss-Jordan inverse mod p; None when singular."""
    n = len(rows)
    p = field.p
    aug = [list(rows[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    muls = adds = invs = 0
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] % p != 0), None)
        if piv is None:
            field.counter.tally(adds=adds, muls=muls, invs=invs)
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pinv = pow(aug[col][col], p - 2, p)
        invs += 1
        aug[col] = [v * pinv % p for v in aug[col]]
        muls += 2 * n
        for r in range(n):
            if r != col and aug[r][col] % p != 0:
                f = aug[r][col]
                aug[r] = [(u - f * v) % p for u, v in zip(aug[r], aug[col])]
                muls += 2 * n
                adds += 2 * n
    field.counter.tally(adds=adds, muls=muls, invs=invs)
    return [row[n:] for row in aug]


def _successive_power_rows(field: PrimeField, points, exponents) -> list[list[int]]:
    """Rows a**e for e in exponents, via counted running products."""
    p = field.p
    top = exponents[-1]
    rows = []
    for a in points:
        powers = [1 % p] * (top + 1)
        for e in range(1, top + 1):
            powers[e] = powers[e - 1] * a % p
        rows.append([powers[e] for e in exponents])
    field.counter.tally(muls=len(points) * top)
    return rows


def point_power_table(
    field: PrimeField, points, exponents
) -> list[dict[int, int]]:
    """Per-point powers for the encode exponents, square-and-multiply.

    Costs at most 2*log2(max exponent) counted multiplies per (point,
    exponent) pair; done once per code so a session's encode phase only
    pays for the block combinations themselves.
    """
    return [{e: field.pow_residue(a, e) for e in exponents} for a in points]


def _security_submatrices_ok(field: PrimeField, dt: DegreeTable, points) -> bool:
    """Every T-subset of points must invert both mask-exponent matrices.

    The T mask blocks enter each colluding server's view through the
    matrix (a**e) for a in the subset and e over the mask exponents; if it
    is invertible the masks wash the view to uniform regardless of the
    inputs.
    """
    t = dt.T
    for exps in (dt.alpha[dt.K :], dt.beta[dt.L :]):
        for subset in combinations(points, t):
            m = [[field.pow_residue(a, e) for e in exps] for a in subset]
            if _invert(field, m) is None:
                return False
    return True


def choose_eval_points(
    field: PrimeField,
    dt: DegreeTable,
    rng: SeededSource,
    max_retries: int = DEFAULT_POINT_RETRIES,
    require_admissible: bool = True,
) -> tuple[tuple[int, ...], list[list[int]]]:
    """Randomized draw-and-verify search for N evaluation points.

    Draws N distinct nonzero candidates, then checks full interpolation
    (the generalized Vandermonde over the exponent set inverts) and the
    T-subset mask conditions.  Verification failures trigger a fresh draw,
    up to max_retries attempts.
    """
    if require_admissible and field.p <= required_field_size(dt):
        raise ParameterError(
            f"modulus {field.p} not above the sufficiency bound "
            f"{required_field_size(dt)}; pass an override to force it"
        )
    n = dt.n_servers
    if field.p - 1 < n:
        raise ConstructionError(
            f"field of size {field.p} has fewer than {n} nonzero points"
        )
    for _ in range(max_retries):
        chosen: list[int] = []
        seen = {0}
        while len(chosen) < n:
            c = field.sample_residue(rng)
            if c not in seen:
                seen.add(c)
                chosen.append(c)
        if not _security_submatrices_ok(field, dt, chosen):
            continue
        v = _successive_power_rows(field, chosen, dt.exponents)
        inverse = _invert(field, v)
        if inverse is None:
            continue
        return tuple(chosen), inverse
    raise ConstructionError(
        f"evaluation point search exhausted {max_retries} attempts "
        f"(modulus {field.p}, N={n}, T={dt.T})"
    )


class GaspCode:
    """A fully constructed code: exponents, points, inverse, power tables."""

    __slots__ = ("params", "table", "field", "points", "interp_inverse", "powers")

    def __init__(self, params, table, field, points, interp_inverse, powers) -> None:
        self.params = params
        self.table = table
        self.field = field
        self.points = points
        self.interp_inverse = interp_inverse
        self.powers = powers

    @property
    def n_servers(self) -> int:
        return self.table.n_servers

    def __repr__(self) -> str:
        p = self.params
        return (
            f"GaspCode(K={p.K}, L={p.L}, T={p.T}, N={self.n_servers}, "
            f"modulus={self.field.p})"
        )


def assemble_code(
    params: GaspParams,
    field: PrimeField,
    points,
    alpha: tuple[int, ...] | None = None,
    beta: tuple[int, ...] | None = None,
    check_security: bool = True,
) -> GaspCode:
    """Build a code from explicit evaluation points.

    Used by the descriptor loader and by tests that need deliberately bad
    points; check_security=False skips the T-subset mask conditions (the
    interpolation matrix must still invert or there is no code at all).
    """
    if alpha is None or beta is None:
        alpha, beta = gasp_exponents(params.K, params.L, params.T)
    dt = build_degree_table(alpha, beta, params.K, params.L, params.T)
    points = tuple(int(a) % field.p for a in points)
    if len(points) != dt.n_servers:
        raise ParameterError(f"need {dt.n_servers} points, got {len(points)}")
    if len(set(points)) != len(points):
        raise ParameterError("evaluation points must be distinct")
    if check_security:
        if 0 in points:
            raise ConstructionError("zero evaluation point leaks a data block")
        if not _security_submatrices_ok(field, dt, points):
            raise ConstructionError("points fail the mask invertibility conditions")
    v = _successive_power_rows(field, points, dt.exponents)
    inverse = _invert(field, v)
    if inverse is None:
        raise ConstructionError("interpolation matrix is singular for these points")
    exps = tuple(sorted(set(dt.alpha) | set(dt.beta)))
    powers = point_power_table(field, points, exps)
    return GaspCode(params, dt, field, points, inverse, powers)


def build_code(
    params: GaspParams,
    field: PrimeField,
    rng: SeededSource,
    allow_small_field: bool = False,
    max_retries: int = DEFAULT_POINT_RETRIES,
) -> GaspCode:
    """Construct a code in the given field with randomized point search."""
    dt = degree_table_for(params)
    points, inverse = choose_eval_points(
        field, dt, rng, max_retries=max_retries, require_admissible=not allow_small_field
    )
    exps = tuple(sorted(set(dt.alpha) | set(dt.beta)))
    powers = point_power_table(field, points, exps)
    return GaspCode(params, dt, field, points, inverse, powers)


def _combine_blocks(field: PrimeField, blocks, coeffs) -> list[int]:
    """sum(coeff * block) elementwise; counts len(blocks)*size muls and
    (len(blocks)-1)*size adds, one multiply per term even for coeff 1."""
    p = field.p
    size = len(blocks[0])
    c0 = coeffs[0]
    acc = [x * c0 % p for x in blocks[0]]
    for blk, c in zip(blocks[1:], coeffs[1:]):
        acc = [(u + x * c) % p for u, x in zip(acc, blk)]
    field.counter.tally(adds=(len(blocks) - 1) * size, muls=len(blocks) * size)
    return acc


def gasp_encode(
    a: MatrixF, b: MatrixF, code: GaspCode, rng: SeededSource
) -> list[tuple[MatrixF, MatrixF]]:
    """Mask and evaluate: one (f, g) share pair per server.

    Draws the T mask blocks for each side, then combines data and mask
    blocks with precomputed point powers.  Per point this costs exactly
    (K+T)*|A block| + (L+T)*|B block| multiplies and one fewer add per
    term, matching the published per-evaluation account.
    """
    params = code.params
    field = code.field
    if a.field is not field or b.field is not field:
        raise ParameterError("inputs must live in the code's field context")
    if a.shape != (params.r, params.s) or b.shape != (params.s, params.t):
        raise ParameterError(
            f"expected {params.r}x{params.s} and {params.s}x{params.t}, "
            f"got {a.shape} and {b.shape}"
        )
    a_blocks = [m.data for m in partition_rows(a, params.K)]
    b_blocks = [m.data for m in partition_cols(b, params.L)]
    br, bc = params.block_rows, params.block_cols
    for _ in range(params.T):
        a_blocks.append(MatrixF.random(field, br, params.s, rng).data)
    for _ in range(params.T):
        b_blocks.append(MatrixF.random(field, params.s, bc, rng).data)
    alpha, beta = code.table.alpha, code.table.beta
    shares = []
    for pw in code.powers:
        f_eval = _combine_blocks(field, a_blocks, [pw[e] for e in alpha])
        g_eval = _combine_blocks(field, b_blocks, [pw[e] for e in beta])
        shares.append(
            (MatrixF(field, br, params.s, f_eval), MatrixF(field, params.s, bc, g_eval))
        )
    return shares


def server_multiply(
    f_share: MatrixF,
    g_share: MatrixF,
    algorithm: str = "standard",
    split: int = 1,
    cutoff: int = 1,
) -> MatrixF:
    """One server's work: multiply its two evaluations.

    "standard" is the plain kernel; "strassen-block" splits the shared
    dimension into `split` square chunks and runs Strassen on each, the
    fast path for square inputs partitioned with K = L.
    """
    if algorithm == "standard":
        return mat_mul_standard(f_share, g_share)
    if algorithm == "strassen-block":
        return block_split_multiply(
            f_share, g_share, split, inner=lambda x, y: mat_mul_strassen(x, y, cutoff)
        )
    raise ParameterError(f"unknown multiply algorithm {algorithm!r}")


def gasp_decode(h_shares: list[MatrixF], code: GaspCode) -> MatrixF:
    """Interpolate the useful coefficients and assemble the product.

    Each useful block is a linear combination of all N returned products
    using one precomputed inverse row: KL*N*blocksize multiplies and
    KL*(N-1)*blocksize adds in total.  Only the KL data rows of the
    inverse are used; mask coefficients are never materialized.
    """
    params = code.params
    field = code.field
    n = code.n_servers
    if len(h_shares) != n:
        raise ParameterError(f"expected {n} shares, got {len(h_shares)}")
    br, bc = params.block_rows, params.block_cols
    for sh in h_shares:
        if sh.shape != (br, bc):
            raise ParameterError(f"share shape {sh.shape} != ({br}, {bc})")
        if sh.field.p != field.p:
            raise ParameterError("share modulus differs from code modulus")
    row_of = {e: i for i, e in enumerate(code.table.exponents)}
    datas = [sh.data for sh in h_shares]
    grid = []
    for k in range(params.K):
        row_blocks = []
        for j in range(params.L):
            e = code.table.alpha[k] + code.table.beta[j]
            coeffs = code.interp_inverse[row_of[e]]
            row_blocks.append(
                MatrixF(field, br, bc, _combine_blocks(field, datas, coeffs))
            )
        grid.append(row_blocks)
    return assemble_grid(grid).crop(params.r, params.t)


@dataclass(frozen=True)
class PrivacyVerdict:
    ok: bool
    detail: str = ""


def verify_privacy_bruteforce(
    code: GaspCode, colluding: int | None = None, cap: int = 1 << 24
) -> PrivacyVerdict:
    """Exhaustively check that colluding views carry no input information.

    Requires scalar inputs (r = s = t = 1) so the whole view distribution
    is enumerable.  The two mask draws are independent, so the joint view
    of any server subset is the product of its f-side and g-side
    distributions; each side is enumerated over all mask values and
    compared across every input value.  Returns the first distinguishable
    pair as a counterexample.

    `colluding` defaults to the code's own threshold; passing a larger
    value models a stronger collusion than the code was built for.
    """
    params = code.params
    if (params.r, params.s, params.t) != (1, 1, 1):
        raise ParameterError("enumeration requires r = s = t = 1")
    c = params.T if colluding is None else colluding
    p = code.field.p
    n = code.n_servers
    space = p ** (2 * params.T) * math.comb(n, c)
    if space > cap:
        raise ParameterError(f"enumeration space {space} exceeds cap {cap}")
    sides = (
        ("f", code.table.alpha, params.K),
        ("g", code.table.beta, params.L),
    )
    for subset in combinations(range(n), c):
        for name, exps, nblocks in sides:
            data_pw = [code.powers[i][exps[0]] for i in subset]
            mask_pw = [
                [code.powers[i][exps[nblocks + t]] for i in subset]
                for t in range(params.T)
            ]
            ref: dict | None = None
            for inp in range(p):
                hist: dict[tuple[int, ...], int] = {}
                for masks in product(range(p), repeat=params.T):
                    view = tuple(
                        (
                            inp * data_pw[i]
                            + sum(masks[t] * mask_pw[t][i] for t in range(params.T))
                        )
                        % p
                        for i in range(c)
                    )
                    hist[view] = hist.get(view, 0) + 1
                if ref is None:
                    ref = hist
                elif hist != ref:
                    return PrivacyVerdict(
                        False,
                        f"{name}-side views at servers {subset} distinguish "
                        f"input 0 from input {inp}",
                    )
    return PrivacyVerdict(True, "all enumerated colluding views are input-independent")


def format_descriptor(code: GaspCode) -> str:
    """Serialize a code: K L T r s t modulus alpha... beta... points..."""
    params = code.params
    tokens = [
        params.K,
        params.L,
        params.T,
        params.r,
        params.s,
        params.t,
        code.field.p,
        *code.table.alpha,
        *code.table.beta,
        *code.points,
    ]
    return " ".join(str(v) for v in tokens) + "\n"


def parse_descriptor(text: str):
    """Inverse of format_descriptor; returns (params, modulus, alpha, beta, points)."""
    tokens = [int(v) for v in text.split()]
    if len(tokens) < 7:
        raise ParameterError("descriptor too short")
    K, L, T, r, s, t, modulus = tokens[:7]
    params = GaspParams(K, L, T, r, s, t)
    rest = tokens[7:]
    if len(rest) < K + T + L + T:
        raise ParameterError("descriptor missing exponent vectors")
    alpha = tuple(rest[: K + T])
    beta = tuple(rest[K + T : K + T + L + T])
    points = tuple(rest[K + T + L + T :])
    return params, modulus, alpha, beta, points


def code_from_descriptor(
    text: str,
    field: PrimeField | None = None,
    allow_small_field: bool = False,
    check_security: bool = True,
) -> GaspCode:
    """Rebuild and re-verify a code pinned by a descriptor."""
    params, modulus, alpha, beta, points = parse_descriptor(text)
    if field is None:
        field = PrimeField(modulus)
    elif field.p != modulus:
        raise ParameterError(f"descriptor modulus {modulus} != field modulus {field.p}")
    dt = build_degree_table(alpha, beta, params.K, params.L, params.T)
    if not allow_small_field and field.p <= required_field_size(dt):
        raise ParameterError(
            f"descriptor modulus {modulus} below the sufficiency bound; "
            "pass allow_small_field to accept it"
        )
    return assemble_code(params, field, points, alpha, beta, check_security=check_security)
