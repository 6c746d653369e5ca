"""Dense matrices over a prime field with counted multiplication kernels.

Matrices store raw residues row-major; the bulk kernels work on those
lists directly and tally the exact number of elementary field operations
they execute into the owning field's counter.  Reductions are deferred
where convenient (Python ints never overflow), which changes nothing
about the count: one semantic add or multiply is one tallied operation.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .errors import ParameterError
from .field import FieldElem, PrimeField, SeededSource

MultiplyAlgorithm = Callable[["MatrixF", "MatrixF"], "MatrixF"]

#: Below this side length the Strassen recursion falls back to the
#: standard kernel.  Exact 7**m multiply counts need cutoff=1.
DEFAULT_STRASSEN_CUTOFF = 64


class MatrixF:
    """rows x cols matrix over one prime field."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: PrimeField, rows: int, cols: int, data: list[int]) -> None:
        if rows < 0 or cols < 0:
            raise ParameterError("negative matrix dimension")
        if len(data) != rows * cols:
            raise ParameterError(f"data length {len(data)} != {rows}x{cols}")
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def zeros(cls, field: PrimeField, rows: int, cols: int) -> "MatrixF":
        return cls(field, rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> "MatrixF":
        m = cls.zeros(field, n, n)
        one = 1 % field.p
        for i in range(n):
            m.data[i * n + i] = one
        return m

    @classmethod
    def from_rows(cls, field: PrimeField, rows: Sequence[Sequence[int]]) -> "MatrixF":
        """Build from nested ints, canonicalizing every entry."""
        r = len(rows)
        c = len(rows[0]) if r else 0
        data = []
        for row in rows:
            if len(row) != c:
                raise ParameterError("ragged rows")
            data.extend(int(v) % field.p for v in row)
        return cls(field, r, c, data)

    @classmethod
    def random(cls, field: PrimeField, rows: int, cols: int, rng: SeededSource) -> "MatrixF":
        """Uniform matrix; every entry is one counted random draw."""
        return cls(field, rows, cols, [field.sample_residue(rng) for _ in range(rows * cols)])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def at(self, i: int, j: int) -> int:
        return self.data[i * self.cols + j]

    def entry(self, i: int, j: int) -> FieldElem:
        return FieldElem(self.at(i, j), self.field)

    def row_list(self, i: int) -> list[int]:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def rebind(self, field: PrimeField) -> "MatrixF":
        """Same values under another party's field context."""
        if field.p != self.field.p:
            raise ParameterError("cannot rebind across different moduli")
        return MatrixF(field, self.rows, self.cols, list(self.data))

    def crop(self, rows: int, cols: int) -> "MatrixF":
        """Top-left sub-matrix; strips zero padding after a padded multiply."""
        if rows > self.rows or cols > self.cols:
            raise ParameterError("crop larger than matrix")
        if (rows, cols) == (self.rows, self.cols):
            return self
        data = []
        for i in range(rows):
            data.extend(self.data[i * self.cols : i * self.cols + cols])
        return MatrixF(self.field, rows, cols, data)

    def pad_to(self, rows: int, cols: int) -> "MatrixF":
        """Zero-pad on the bottom/right."""
        if rows < self.rows or cols < self.cols:
            raise ParameterError("pad smaller than matrix")
        if (rows, cols) == (self.rows, self.cols):
            return self
        data = []
        for i in range(self.rows):
            data.extend(self.data[i * self.cols : (i + 1) * self.cols])
            data.extend([0] * (cols - self.cols))
        data.extend([0] * ((rows - self.rows) * cols))
        return MatrixF(self.field, rows, cols, data)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatrixF)
            and self.field.p == other.field.p
            and self.shape == other.shape
            and self.data == other.data
        )

    def __hash__(self) -> int:  # pragma: no cover
        return hash((self.field.p, self.rows, self.cols, tuple(self.data)))

    def __repr__(self) -> str:
        return f"MatrixF({self.rows}x{self.cols} mod {self.field.p})"


def _same_field(a: MatrixF, b: MatrixF) -> PrimeField:
    if a.field is not b.field:
        raise ParameterError("matrices belong to different field contexts")
    return a.field


def mat_mul_standard(a: MatrixF, b: MatrixF) -> MatrixF:
    """Triple-loop product; tallies r*s*t muls and r*(s-1)*t adds."""
    field = _same_field(a, b)
    if a.cols != b.rows:
        raise ParameterError(f"shape mismatch: {a.shape} x {b.shape}")
    r, s, t = a.rows, a.cols, b.cols
    p = field.p
    bcols = [b.data[j :: t] for j in range(t)]
    out = []
    ad = a.data
    for i in range(r):
        arow = ad[i * s : (i + 1) * s]
        for bcol in bcols:
            out.append(sum(x * y for x, y in zip(arow, bcol)) % p)
    field.counter.tally(adds=r * (s - 1) * t, muls=r * s * t)
    return MatrixF(field, r, t, out)


def _ewise(field: PrimeField, x: list[int], y: list[int], sign: int) -> list[int]:
    # one counted add per entry, subtraction included
    p = field.p
    field.counter.adds += len(x)
    if sign > 0:
        return [(u + v) % p for u, v in zip(x, y)]
    return [(u - v) % p for u, v in zip(x, y)]


def mat_add(a: MatrixF, b: MatrixF) -> MatrixF:
    field = _same_field(a, b)
    if a.shape != b.shape:
        raise ParameterError("shape mismatch in add")
    return MatrixF(field, a.rows, a.cols, _ewise(field, a.data, b.data, +1))


def mat_sub(a: MatrixF, b: MatrixF) -> MatrixF:
    field = _same_field(a, b)
    if a.shape != b.shape:
        raise ParameterError("shape mismatch in sub")
    return MatrixF(field, a.rows, a.cols, _ewise(field, a.data, b.data, -1))


def _quad(data: list[int], n: int, qi: int, qj: int) -> list[int]:
    h = n // 2
    out = []
    base = qi * h * n + qj * h
    for i in range(h):
        out.extend(data[base + i * n : base + i * n + h])
    return out


def _strassen_rec(field: PrimeField, x: list[int], y: list[int], n: int, cutoff: int) -> list[int]:
    if n <= cutoff:
        p = field.p
        ycols = [y[j::n] for j in range(n)]
        out = []
        for i in range(n):
            xrow = x[i * n : (i + 1) * n]
            for yc in ycols:
                out.append(sum(u * v for u, v in zip(xrow, yc)) % p)
        field.counter.tally(adds=n * (n - 1) * n, muls=n * n * n)
        return out

    h = n // 2
    a11, a12 = _quad(x, n, 0, 0), _quad(x, n, 0, 1)
    a21, a22 = _quad(x, n, 1, 0), _quad(x, n, 1, 1)
    b11, b12 = _quad(y, n, 0, 0), _quad(y, n, 0, 1)
    b21, b22 = _quad(y, n, 1, 0), _quad(y, n, 1, 1)
    ew = _ewise

    p1 = _strassen_rec(field, ew(field, a11, a22, +1), ew(field, b11, b22, +1), h, cutoff)
    p2 = _strassen_rec(field, ew(field, a21, a22, +1), b11, h, cutoff)
    p3 = _strassen_rec(field, a11, ew(field, b12, b22, -1), h, cutoff)
    p4 = _strassen_rec(field, a22, ew(field, b21, b11, -1), h, cutoff)
    p5 = _strassen_rec(field, ew(field, a11, a12, +1), b22, h, cutoff)
    p6 = _strassen_rec(field, ew(field, a21, a11, -1), ew(field, b11, b12, +1), h, cutoff)
    p7 = _strassen_rec(field, ew(field, a12, a22, -1), ew(field, b21, b22, +1), h, cutoff)

    c11 = ew(field, ew(field, ew(field, p1, p4, +1), p5, -1), p7, +1)
    c12 = ew(field, p3, p5, +1)
    c21 = ew(field, p2, p4, +1)
    c22 = ew(field, ew(field, ew(field, p1, p2, -1), p3, +1), p6, +1)

    out = [0] * (n * n)
    for i in range(h):
        out[i * n : i * n + h] = c11[i * h : (i + 1) * h]
        out[i * n + h : (i + 1) * n] = c12[i * h : (i + 1) * h]
        out[(h + i) * n : (h + i) * n + h] = c21[i * h : (i + 1) * h]
        out[(h + i) * n + h : (h + i + 1) * n] = c22[i * h : (i + 1) * h]
    return out


def mat_mul_strassen(a: MatrixF, b: MatrixF, cutoff: int = DEFAULT_STRASSEN_CUTOFF) -> MatrixF:
    """Strassen product for square inputs.

    Non-power-of-two sides are zero-padded up to the next power of two;
    with cutoff=1 and side 2**m the tallied multiply count is exactly 7**m
    on the padded side.
    """
    field = _same_field(a, b)
    if a.rows != a.cols or b.rows != b.cols or a.rows != b.rows:
        raise ParameterError("strassen needs equal square operands")
    if cutoff < 1:
        raise ParameterError("cutoff must be >= 1")
    n = a.rows
    if n == 0:
        return MatrixF(field, 0, 0, [])
    m = 1 << (n - 1).bit_length()
    ap = a.pad_to(m, m)
    bp = b.pad_to(m, m)
    out = _strassen_rec(field, ap.data, bp.data, m, cutoff)
    return MatrixF(field, m, m, out).crop(n, n)


def block_split_multiply(
    a: MatrixF, b: MatrixF, split: int, inner: MultiplyAlgorithm = mat_mul_standard
) -> MatrixF:
    """Product via a split of the shared dimension into `split` chunks.

    a (m x n) times b (n x m') becomes the sum of `split` chunk products,
    costing (split-1)*m*m' accumulation adds on top of the inner
    multiplies.  With m = m' = n/split each chunk product is square, which
    is what makes a fast square-multiply kernel applicable to the
    rectangular product.
    """
    field = _same_field(a, b)
    if a.cols != b.rows:
        raise ParameterError(f"shape mismatch: {a.shape} x {b.shape}")
    if split < 1:
        raise ParameterError("split must be >= 1")
    if split == 1:
        return inner(a, b)
    n = a.cols
    w = -(-n // split)
    ap = a.pad_to(a.rows, split * w)
    bp = b.pad_to(split * w, b.cols)
    acc: MatrixF | None = None
    for i in range(split):
        ablock_data = []
        for row in range(ap.rows):
            ablock_data.extend(ap.data[row * ap.cols + i * w : row * ap.cols + (i + 1) * w])
        ablock = MatrixF(field, ap.rows, w, ablock_data)
        bblock = MatrixF(field, w, bp.cols, bp.data[i * w * bp.cols : (i + 1) * w * bp.cols])
        prod = inner(ablock, bblock)
        acc = prod if acc is None else mat_add(acc, prod)
    assert acc is not None
    return acc


def partition_rows(a: MatrixF, k: int) -> list[MatrixF]:
    """k row blocks of shape (ceil(rows/k) x cols); zero rows pad the tail."""
    if k < 1:
        raise ParameterError("row partition count must be >= 1")
    h = -(-a.rows // k)
    ap = a.pad_to(h * k, a.cols)
    return [
        MatrixF(a.field, h, a.cols, ap.data[i * h * a.cols : (i + 1) * h * a.cols])
        for i in range(k)
    ]


def partition_cols(b: MatrixF, ell: int) -> list[MatrixF]:
    """ell column blocks of shape (rows x ceil(cols/ell)); zero cols pad."""
    if ell < 1:
        raise ParameterError("column partition count must be >= 1")
    w = -(-b.cols // ell)
    bp = b.pad_to(b.rows, w * ell)
    blocks = []
    for j in range(ell):
        data = []
        for i in range(b.rows):
            data.extend(bp.data[i * bp.cols + j * w : i * bp.cols + (j + 1) * w])
        blocks.append(MatrixF(b.field, b.rows, w, data))
    return blocks


def stack_rows(blocks: Sequence[MatrixF]) -> MatrixF:
    """Vertical concatenation (inverse of partition_rows before unpadding)."""
    field = blocks[0].field
    cols = blocks[0].cols
    data: list[int] = []
    for blk in blocks:
        if blk.cols != cols:
            raise ParameterError("column mismatch in stack")
        data.extend(blk.data)
    return MatrixF(field, sum(b.rows for b in blocks), cols, data)


def concat_cols(blocks: Sequence[MatrixF]) -> MatrixF:
    """Horizontal concatenation (inverse of partition_cols before unpadding)."""
    field = blocks[0].field
    rows = blocks[0].rows
    data: list[int] = []
    for i in range(rows):
        for blk in blocks:
            if blk.rows != rows:
                raise ParameterError("row mismatch in concat")
            data.extend(blk.data[i * blk.cols : (i + 1) * blk.cols])
    return MatrixF(field, rows, sum(b.cols for b in blocks), data)


def assemble_grid(grid: Sequence[Sequence[MatrixF]]) -> MatrixF:
    """K x L grid of equally shaped blocks into one matrix."""
    return stack_rows([concat_cols(row) for row in grid])


def write_matrix_text(m: MatrixF) -> str:
    """Fixture format: 'rows cols modulus' then row-major decimal residues."""
    lines = [f"{m.rows} {m.cols} {m.field.p}"]
    for i in range(m.rows):
        lines.append(" ".join(str(v) for v in m.row_list(i)))
    return "\n".join(lines) + "\n"


def read_matrix_text(text: str, field: PrimeField | None = None) -> MatrixF:
    """Parse the fixture format; builds a fresh field unless one is given."""
    tokens = text.split()
    if len(tokens) < 3:
        raise ParameterError("matrix text too short")
    rows, cols, modulus = (int(tokens[i]) for i in range(3))
    if field is None:
        field = PrimeField(modulus)
    elif field.p != modulus:
        raise ParameterError(f"fixture modulus {modulus} != field modulus {field.p}")
    body = tokens[3:]
    if len(body) != rows * cols:
        raise ParameterError(f"expected {rows * cols} entries, got {len(body)}")
    return MatrixF(field, rows, cols, [int(v) % field.p for v in body])
