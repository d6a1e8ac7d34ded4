"""Sampling, storage, coupling, and serialization of mirror configurations.

A configuration is a dense boolean field over sites (a, b) with |a|, |b| <= M
(True = closed edge = mirror present).  Sampling is counter-based: the
uniform for a site is a pure hash of (seed, stream_index, a, b), so fields
are bit-reproducible for any worker count and remain coupled across p and
across extents.  The generator id is recorded in every serialized output;
changing it is a format-breaking change.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import ConfigParseError, ResourceLimitError

GENERATOR_ID = "splitmix64-v1"
FORMAT_VERSION = 1

# Dense fields above this byte count are rejected (one byte per site).
MAX_FIELD_BYTES = 1 << 29

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _fmix(z):
    """splitmix64 finalizer, elementwise on uint64 arrays or scalars."""
    with np.errstate(over="ignore"):  # wraparound is the point
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def _check_extent(M):
    if M < 1:
        raise ValueError("extent M must be >= 1")
    n_bytes = (2 * M + 1) ** 2
    if n_bytes > MAX_FIELD_BYTES:
        raise ResourceLimitError(
            f"extent {M} needs {n_bytes} bytes, over the {MAX_FIELD_BYTES} budget"
        )


@dataclass(frozen=True)
class UniformField:
    """Per-site uniforms in [0, 1), deterministic in (seed, stream_index, site)."""

    extent: int
    u: np.ndarray  # shape (2M+1, 2M+1), u[a+M, b+M]
    seed: int
    stream_index: int
    generator: str = GENERATOR_ID


@dataclass(frozen=True)
class Configuration:
    """A finite mirror field with sampling metadata.

    ``closed[a + M, b + M]`` is True when the edge keyed by site (a, b)
    carries a mirror.
    """

    extent: int
    closed: np.ndarray
    p: float | None = None
    seed: int | None = None
    stream_index: int | None = None
    provenance: str = "explicit"
    generator: str = GENERATOR_ID

    def __post_init__(self):
        M = self.extent
        if self.closed.shape != (2 * M + 1, 2 * M + 1):
            raise ValueError("closed field shape does not match extent")
        self.closed.flags.writeable = False

    def in_extent(self, site) -> bool:
        a, b = site
        return abs(a) <= self.extent and abs(b) <= self.extent

    def closed_at(self, site) -> bool:
        a, b = site
        M = self.extent
        return bool(self.closed[a + M, b + M])

    def same_field(self, other) -> bool:
        return self.extent == other.extent and np.array_equal(self.closed, other.closed)


def uniforms(M: int, seed: int, stream_index: int) -> UniformField:
    """Counter-based uniform field over sites |a|, |b| <= M."""
    _check_extent(M)
    coords = np.arange(-M, M + 1, dtype=np.int64).astype(np.uint64)
    base = _fmix(np.uint64(np.int64(seed)) ^ _GOLDEN)
    base = _fmix(np.uint64(np.int64(stream_index)) ^ base)
    ha = _fmix(coords ^ base)
    h = _fmix(coords[np.newaxis, :] ^ ha[:, np.newaxis])
    u = (h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
    u.flags.writeable = False
    return UniformField(extent=M, u=u, seed=seed, stream_index=stream_index)


def threshold(f: UniformField, p: float) -> Configuration:
    """Close exactly the sites with uniform below ``p`` (monotone in p)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return Configuration(
        extent=f.extent,
        closed=f.u < p,
        p=p,
        seed=f.seed,
        stream_index=f.stream_index,
        provenance="sampled",
        generator=f.generator,
    )


def sample(p: float, M: int, seed: int, stream_index: int = 0) -> Configuration:
    """Bernoulli(p) mirror field, each site independent."""
    return threshold(uniforms(M, seed, stream_index), p)


def constant(M: int, value: bool) -> Configuration:
    """All-closed or all-open configuration (provenance 'explicit')."""
    _check_extent(M)
    arr = np.full((2 * M + 1, 2 * M + 1), bool(value))
    return Configuration(extent=M, closed=arr)


def from_closed_sites(M: int, sites) -> Configuration:
    """Explicit configuration with exactly the given sites closed."""
    _check_extent(M)
    arr = np.zeros((2 * M + 1, 2 * M + 1), dtype=bool)
    for a, b in sites:
        if abs(a) > M or abs(b) > M:
            raise ValueError(f"site ({a}, {b}) outside extent {M}")
        arr[a + M, b + M] = True
    return Configuration(extent=M, closed=arr)


def edge_inside_q_mask(M: int, k: int) -> np.ndarray:
    """Mask over sites whose tilted edge has both endpoints in Q_k."""
    A, B = np.meshgrid(
        np.arange(-M, M + 1), np.arange(-M, M + 1), indexing="ij"
    )
    ne = (A - B) % 2 == 0
    # endpoint offsets: NE edge (a-+1/2, b-+1/2); NW edge (a-+1/2, b+-1/2)
    ex1 = A - 0.5
    ex2 = A + 0.5
    ey1 = np.where(ne, B - 0.5, B + 0.5)
    ey2 = np.where(ne, B + 0.5, B - 0.5)
    inq = lambda x, y: (np.abs(x + y - 1) <= k) & (np.abs(x - y) <= k)
    return inq(ex1, ey1) & inq(ex2, ey2)


def hybrid(inner: Configuration, outer: Configuration, k: int) -> Configuration:
    """Inner values on edges inside Q_k, outer values elsewhere."""
    if inner.extent != outer.extent:
        raise ValueError("hybrid requires matching extents")
    if k < 1:
        raise ValueError("hybrid radius k must be >= 1")
    mask = edge_inside_q_mask(inner.extent, k)
    closed = np.where(mask, inner.closed, outer.closed)
    return Configuration(extent=inner.extent, closed=closed, provenance="hybrid")


# ---------------------------------------------------------------------------
# file format: text header, then run-length-encoded rows of the closed field.
# Rows are constant-b lines from b = -M to M; each row scans a = -M..M and is
# encoded as run lengths alternating open/closed, starting with open.
# ---------------------------------------------------------------------------


def _meta_str(v):
    return "none" if v is None else repr(v) if isinstance(v, float) else str(v)


def dumps(c: Configuration) -> str:
    M = c.extent
    lines = [
        f"manhattan-pinball configuration v{FORMAT_VERSION}",
        f"generator {c.generator}",
        f"extent {M}",
        f"p {_meta_str(c.p)}",
        f"seed {_meta_str(c.seed)}",
        f"stream {_meta_str(c.stream_index)}",
        f"provenance {c.provenance}",
    ]
    for ib in range(2 * M + 1):
        row = c.closed[:, ib]
        runs = []
        cur = False
        count = 0
        for v in row:
            if bool(v) == cur:
                count += 1
            else:
                runs.append(count)
                cur = bool(v)
                count = 1
        runs.append(count)
        lines.append(" ".join(str(r) for r in runs))
    return "\n".join(lines) + "\n"


def atomic_write_text(path, text):
    """Write via temp file + rename so readers never see partial output."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(c: Configuration, path) -> None:
    atomic_write_text(path, dumps(c))


def _parse_meta(value, kind, lineno):
    if value == "none":
        return None
    try:
        return kind(value)
    except ValueError:
        raise ConfigParseError(f"bad value {value!r}", line=lineno)


def loads(text: str) -> Configuration:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("manhattan-pinball configuration v"):
        raise ConfigParseError("missing configuration header", line=1)
    version = lines[0].rsplit("v", 1)[-1]
    if version != str(FORMAT_VERSION):
        raise ConfigParseError(f"unsupported format version {version}", line=1)
    meta = {}
    for i, key in enumerate(("generator", "extent", "p", "seed", "stream", "provenance")):
        lineno = i + 2
        if lineno > len(lines):
            raise ConfigParseError("truncated header", line=lineno)
        parts = lines[lineno - 1].split(None, 1)
        if len(parts) != 2 or parts[0] != key:
            raise ConfigParseError(f"expected '{key} ...'", line=lineno)
        meta[key] = parts[1]
    M = _parse_meta(meta["extent"], int, 3)
    if M is None or M < 1:
        raise ConfigParseError("bad extent", line=3)
    n_rows = 2 * M + 1
    if len(lines) != 7 + n_rows:
        raise ConfigParseError(
            f"expected {n_rows} data rows, found {len(lines) - 7}", line=len(lines)
        )
    closed = np.zeros((n_rows, n_rows), dtype=bool)
    for ib in range(n_rows):
        lineno = 8 + ib
        try:
            runs = [int(t) for t in lines[lineno - 1].split()]
        except ValueError:
            raise ConfigParseError("non-integer run length", line=lineno)
        if any(r < 0 for r in runs) or (runs and runs[0] == 0 and len(runs) == 1):
            raise ConfigParseError("bad run length", line=lineno)
        total = sum(runs)
        if total != n_rows:
            a = -M + total
            raise ConfigParseError(
                f"row covers site ({a}, {ib - M}) outside extent {M}"
                if total > n_rows
                else f"row for b={ib - M} is short ({total} of {n_rows} sites)",
                line=lineno,
            )
        pos = 0
        cur = False
        for r in runs:
            if cur:
                closed[pos : pos + r, ib] = True
            pos += r
            cur = not cur
    return Configuration(
        extent=M,
        closed=closed,
        p=_parse_meta(meta["p"], float, 4),
        seed=_parse_meta(meta["seed"], int, 5),
        stream_index=_parse_meta(meta["stream"], int, 6),
        provenance=meta["provenance"],
        generator=meta["generator"],
    )


def load(path) -> Configuration:
    with open(path) as fh:
        return loads(fh.read())
