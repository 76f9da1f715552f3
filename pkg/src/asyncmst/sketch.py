"""XOR edge sketches and the shared counter-based PRF.

Every node sketches its incident (filtered) edges; XOR-combining the
per-node states up a fragment tree cancels internal edges, leaving only the
cut. One sketch level samples edges with probability 2^-level under a hash
seeded per invocation, so all members sample identically with no extra
communication. A parallel endpoint-signed checksum field sums to zero over
any set of internal edges, which gives an (up to hash collision) exact
empty-cut test from a single convergecast.

Edge encoding: ((hi-1) << 34) | ((lo-1) << 4) | check4. Fits one 64-bit
word for ids up to 2^30, i.e. networks up to n = 1024 with ids from
[1, n^3]. A single surviving edge therefore decodes and self-validates.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1
_C1 = 0x9E3779B97F4A7C15
_C2 = 0xBF58476D1CE4E5B9
_C3 = 0x94D049BB133111EB
_SUM_SALT = 0x8F462907255F5A1D
_LVL_SALT = 0x3C79AC492BA7B653

ID_LIMIT = 1 << 30


def mix64(x: int) -> int:
    x = (x + _C1) & _M64
    x = ((x ^ (x >> 30)) * _C2) & _M64
    x = ((x ^ (x >> 27)) * _C3) & _M64
    return (x ^ (x >> 31)) & _M64


def prf(*parts: int) -> int:
    """Splittable PRF over an integer tuple; the global key goes first."""
    h = 0x6A09E667F3BCC909
    for p in parts:
        h = mix64(h ^ (p & _M64))
    return h


def _np_mix(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = x + np.uint64(_C1)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_C2)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_C3)
        return x ^ (x >> np.uint64(31))


def check4(hi: int, lo: int) -> int:
    return mix64((hi << 31) ^ lo) & 0xF


def encode_edge(hi: int, lo: int) -> int:
    if hi >= ID_LIMIT or lo >= ID_LIMIT:
        raise ValueError("node id exceeds the 2^30 encoding ceiling")
    return ((hi - 1) << 34) | ((lo - 1) << 4) | check4(hi, lo)


def decode_edge(word: int) -> tuple[int, int] | None:
    """Recover (hi, lo) if ``word`` is a valid single-edge encoding."""
    if word == 0:
        return None
    hi = (word >> 34) + 1
    lo = ((word >> 4) & (ID_LIMIT - 1)) + 1
    if hi <= lo:
        return None
    if (word & 0xF) != check4(hi, lo):
        return None
    return hi, lo


class EdgeTable:
    """Vectorized view of one node's incident edges for sketching.

    Weight order is the lexicographic key (w, hi, lo), identical to the
    unique-weight order, so range filters never need big integers.
    """

    __slots__ = ("own", "nbr", "w", "hi", "lo", "enc", "h0", "sign_hi", "size")

    def __init__(self, know):
        self.own = know.own
        nbrs = know.nbrs
        self.size = len(nbrs)
        w = np.empty(self.size, dtype=np.int64)
        hi = np.empty(self.size, dtype=np.int64)
        lo = np.empty(self.size, dtype=np.int64)
        for i, v in enumerate(nbrs):
            w[i], hi[i], lo[i] = know.wt[v]
        self.nbr = np.asarray(nbrs, dtype=np.int64)
        self.w, self.hi, self.lo = w, hi, lo
        if self.size and int(hi.max()) >= ID_LIMIT:
            raise ValueError("node id exceeds the 2^30 encoding ceiling")
        henc = (hi - 1).astype(np.uint64) << np.uint64(34)
        lenc = (lo - 1).astype(np.uint64) << np.uint64(4)
        self.enc = henc | lenc | _np_chk(hi, lo)
        self.h0 = _np_mix(self.enc)
        self.sign_hi = hi == np.int64(self.own)  # True where we are the hi endpoint

    def index_of(self, nbr: int) -> int:
        idx = int(np.searchsorted(self.nbr, nbr))
        if idx >= self.size or self.nbr[idx] != nbr:
            raise KeyError(nbr)
        return idx

    def range_mask(self, bound) -> np.ndarray:
        """Edges with weight key strictly below ``bound`` (w, hi, lo)."""
        w, h, l = bound
        return (self.w < w) | ((self.w == w) & ((self.hi < h) |
                ((self.hi == h) & (self.lo < l))))

    # -- sketch pulls -------------------------------------------------------

    def pull(self, seed: int, level: int, mask: np.ndarray) -> tuple[int, int]:
        """(signed sum mod 2^32, xor of sampled encodings) over selected edges.

        The sum covers every selected edge regardless of level, so a zero
        combined sum is a whp-exact empty-cut certificate; only the XOR
        accumulator is subsampled at probability 2^-level.
        """
        if not self.size or not mask.any():
            return 0, 0
        s = np.uint64(seed)
        base = _np_mix(self.h0 ^ s)
        hs = _np_mix(base ^ np.uint64(_SUM_SALT))
        with np.errstate(over="ignore"):
            contrib = np.where(self.sign_hi[mask], hs[mask],
                               (~hs[mask]) + np.uint64(1))
            total = int(np.sum(contrib, dtype=np.uint64)) & 0xFFFFFFFF
        if level > 0:
            hl = _np_mix(base ^ np.uint64(_LVL_SALT))
            sel = mask & ((hl & np.uint64((1 << level) - 1)) == np.uint64(0))
        else:
            sel = mask
        x = 0
        for v in self.enc[sel]:
            x ^= int(v)
        return total, x

    def occupancy(self, seed: int, reps: int, levels: int,
                  mask: np.ndarray) -> np.ndarray:
        """(reps, levels) table of 16-bit signed level sums for cut estimation."""
        out = np.zeros((reps, levels), dtype=np.int64)
        if not self.size or not mask.any():
            return out
        for r in range(reps):
            s = np.uint64(prf(seed, 0x0CC0, r))
            base = _np_mix(self.h0 ^ s)
            hl = _np_mix(base ^ np.uint64(_LVL_SALT))
            hs = _np_mix(base ^ np.uint64(_SUM_SALT)) & np.uint64(0xFFFF)
            tz = _trailing_zeros(hl)
            tz = np.minimum(tz, levels - 1)
            sign = np.where(self.sign_hi, 1, -1)
            vals = (hs.astype(np.int64) * sign)[mask]
            lv = tz[mask]
            counts = np.zeros(levels, dtype=np.int64)
            np.add.at(counts, lv, vals)
            # level l collects edges sampled at probability 2^-l: tz >= l
            out[r] = counts[::-1].cumsum()[::-1] & 0xFFFF
        return out

    def local_min(self, mask: np.ndarray) -> tuple[tuple[int, int, int], int] | None:
        """Lightest selected edge as ((w, hi, lo), neighbor) or None."""
        if not self.size or not mask.any():
            return None
        idxs = np.flatnonzero(mask)
        sub = idxs[np.flatnonzero(self.w[idxs] == self.w[idxs].min())]
        return min(((int(self.w[i]), int(self.hi[i]), int(self.lo[i])), int(self.nbr[i]))
                   for i in sub)


def _np_chk(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    return _np_mix((hi.astype(np.uint64) << np.uint64(31)) ^
                   lo.astype(np.uint64)) & np.uint64(0xF)


def _trailing_zeros(x: np.ndarray) -> np.ndarray:
    low = (x & (~x + np.uint64(1))).astype(np.float64)
    tz = np.where(x == np.uint64(0), 64, np.log2(np.maximum(low, 1.0)) + 0.5)
    return tz.astype(np.int64)


def combine(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    """Associative, commutative merge of (sum32, xor64) sketch states."""
    return (a[0] + b[0]) & 0xFFFFFFFF, a[1] ^ b[1]


def estimate_from_occupancy(table: np.ndarray) -> int:
    """Cut-size estimate from an occupancy table: 2^(median top level - 3)."""
    reps, levels = table.shape
    tops = []
    for r in range(reps):
        nz = np.flatnonzero(table[r] != 0)
        tops.append(int(nz[-1]) if len(nz) else -1)
    tops.sort()
    med = tops[reps // 2]
    if med < 0:
        return 0
    return max(1, 1 << max(0, med - 3))
