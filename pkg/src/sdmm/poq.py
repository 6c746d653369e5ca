"""Private oracle querying: matrix multiplication as information retrieval.

If the download volume is the only metric that matters, the servers can
simply precompute every possible product.  There are q**(s(r+t)) input
pairs, so each server stores that many files of r*t entries; the user
then privately retrieves the one file matching its inputs with a
two-server, one-collusion scheme: server 1 gets a uniformly random
selector vector, server 2 gets the same vector plus the indicator of the
wanted file, and subtracting the two inner-product responses yields the
file.  Download is 2*r*t symbols (rate 1/2), while the upload and the
precomputation are exponential in the input size, which is the point this
module makes measurable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError
from .field import PrimeField, SeededSource
from .matrix import MatrixF, mat_mul_standard

#: Refuse to materialize databases beyond this many field elements.
DEFAULT_DB_CAP = 1 << 26

#: Fixed retrieval topology: two servers, single-server privacy.
N_SERVERS = 2
COLLUSION = 1


def pair_count(p: int, r: int, s: int, t: int) -> int:
    """Number of distinct (A, B) input pairs: q**(s*(r+t))."""
    return p ** (s * (r + t))


@dataclass
class OracleDatabase:
    """All possible products, one flattened r x t file per input pair."""

    field: PrimeField
    r: int
    s: int
    t: int
    files: list[list[int]]

    @property
    def n_files(self) -> int:
        return len(self.files)

    @property
    def file_len(self) -> int:
        return self.r * self.t


def index_of(a: MatrixF, b: MatrixF) -> int:
    """Canonical pair index: row-major entries of A then B as base-q digits,
    most significant first."""
    if a.field.p != b.field.p:
        raise ParameterError("pair matrices use different moduli")
    if a.cols != b.rows:
        raise ParameterError(f"shape mismatch: {a.shape} x {b.shape}")
    p = a.field.p
    idx = 0
    for d in a.data:
        idx = idx * p + d
    for d in b.data:
        idx = idx * p + d
    return idx


def pair_from_index(
    field: PrimeField, index: int, r: int, s: int, t: int
) -> tuple[MatrixF, MatrixF]:
    """Inverse of index_of."""
    total = pair_count(field.p, r, s, t)
    if not 0 <= index < total:
        raise ParameterError(f"index {index} outside [0, {total})")
    digits = []
    for _ in range(r * s + s * t):
        index, d = divmod(index, field.p)
        digits.append(d)
    digits.reverse()
    a = MatrixF(field, r, s, digits[: r * s])
    b = MatrixF(field, s, t, digits[r * s :])
    return a, b


def build_database(
    field: PrimeField, r: int, s: int, t: int, cap: int = DEFAULT_DB_CAP
) -> OracleDatabase:
    """Precompute every product; the exponential cost lands in the counter."""
    m = pair_count(field.p, r, s, t)
    if m * r * t > cap:
        raise ParameterError(
            f"database of {m} files x {r * t} entries exceeds the cap of {cap} elements"
        )
    files = []
    for i in range(m):
        a, b = pair_from_index(field, i, r, s, t)
        files.append(mat_mul_standard(a, b).data)
    return OracleDatabase(field, r, s, t, files)


def pir_query(
    field: PrimeField, n_files: int, file_len: int, index: int, rng: SeededSource
) -> tuple[list[int], list[int]]:
    """Selector pair: (uniform q, q plus the indicator of file `index`).

    The indicator raises the index-th file block by one in every one of
    its file_len coordinates, so the per-coordinate inner products of the
    two responses differ by exactly the wanted file.
    """
    if not 0 <= index < n_files:
        raise ParameterError(f"index {index} outside [0, {n_files})")
    q1 = [field.sample_residue(rng) for _ in range(n_files * file_len)]
    q2 = list(q1)
    base = index * file_len
    one = 1 % field.p
    for j in range(file_len):
        q2[base + j] = (q2[base + j] + one) % field.p
    field.counter.adds += file_len
    return q1, q2


def pir_respond(db: OracleDatabase, query: list[int]) -> list[int]:
    """Per-coordinate inner product of the database with the query."""
    m, flen = db.n_files, db.file_len
    if len(query) != m * flen:
        raise ParameterError(f"query length {len(query)} != {m * flen}")
    p = db.field.p
    files = db.files
    resp = [
        sum(files[i][j] * query[i * flen + j] for i in range(m)) % p
        for j in range(flen)
    ]
    db.field.counter.tally(adds=(m - 1) * flen, muls=m * flen)
    return resp


def pir_decode(
    field: PrimeField, resp1: list[int], resp2: list[int], r: int, t: int
) -> MatrixF:
    """Subtract responses and reshape into the r x t product."""
    if len(resp1) != r * t or len(resp2) != r * t:
        raise ParameterError("response length mismatch")
    p = field.p
    field.counter.adds += r * t
    return MatrixF(field, r, t, [(y - x) % p for x, y in zip(resp1, resp2)])


def download_rate(n_servers: int = N_SERVERS, colluding: int = COLLUSION) -> float:
    """Analytic rate (N-T)/N of the secret-shared retrieval."""
    if not 1 <= colluding < n_servers:
        raise ParameterError("need 1 <= T < N")
    return (n_servers - colluding) / n_servers


def dump_database(db: OracleDatabase) -> str:
    """Text dump: header 'q r s t M' then one line of residues per file."""
    lines = [f"{db.field.p} {db.r} {db.s} {db.t} {db.n_files}"]
    for f in db.files:
        lines.append(" ".join(str(v) for v in f))
    return "\n".join(lines) + "\n"


def load_database(text: str, field: PrimeField | None = None) -> OracleDatabase:
    tokens = text.split()
    if len(tokens) < 5:
        raise ParameterError("database dump too short")
    q, r, s, t, m = (int(tokens[i]) for i in range(5))
    if field is None:
        field = PrimeField(q)
    elif field.p != q:
        raise ParameterError(f"dump modulus {q} != field modulus {field.p}")
    body = [int(v) for v in tokens[5:]]
    if len(body) != m * r * t:
        raise ParameterError(f"expected {m * r * t} entries, got {len(body)}")
    files = [body[i * r * t : (i + 1) * r * t] for i in range(m)]
    return OracleDatabase(field, r, s, t, files)
