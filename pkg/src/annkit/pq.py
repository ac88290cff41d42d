"""Product quantization: codebook training, encode/decode, and ADC search.

A vector is split into m contiguous sub-vectors, each quantized against its
own codebook of ks = 2^nbits centroids. Search is asymmetric: the query stays
uncompressed and scores come from a per-subspace table of squared distances,
so one table build amortizes over the whole candidate list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .base import SearchResult, VectorIndex, make_result
from .data import EmbeddingSet
from .distances import Metric
from .kmeans import Centroids, assign_to_centroids, kmeans_fit
from .wire import Reader, Writer


def default_m(dim: int) -> int:
    """Default subquantizer count: 8, or the largest divisor of dim <= 8."""
    for m in range(min(8, dim), 0, -1):
        if dim % m == 0:
            return m
    return 1


@dataclass
class PqCodebook:
    """Per-subspace centroid tables for an m x ks product code."""

    nbits: int
    books: list[Centroids]  # m entries, each ks x sub_dim

    @property
    def m(self) -> int:
        return len(self.books)

    @property
    def ks(self) -> int:
        return 1 << self.nbits

    @property
    def sub_dim(self) -> int:
        return self.books[0].dim

    @property
    def dim(self) -> int:
        return self.m * self.sub_dim

    def split(self, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float64).reshape(-1)
        if arr.shape[0] != self.dim:
            raise ValueError(f"vector has dim {arr.shape[0]}, codebook expects {self.dim}")
        return arr.reshape(self.m, self.sub_dim)


def pq_train(data: np.ndarray, m: int, nbits: int, seed: int = 0) -> PqCodebook:
    """Train one k-means codebook per contiguous subspace.

    Requires m to divide the dimension and 2^nbits <= len(data). Sub-codebooks
    get derived seeds so the whole training is deterministic in `seed`.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or len(data) == 0:
        raise ValueError("data must be a non-empty 2-d array")
    dim = data.shape[1]
    if m < 1 or dim % m != 0:
        raise ValueError(f"m={m} must divide dim={dim}")
    if not 1 <= nbits <= 8:
        raise ValueError("nbits must be in 1..8 (codes are stored as single bytes)")
    ks = 1 << nbits
    if ks > len(data):
        raise ValueError(f"2^nbits={ks} exceeds the number of training points")
    sub = dim // m
    books = [
        kmeans_fit(data[:, j * sub : (j + 1) * sub], ks, seed=np.random.SeedSequence([seed, j]))
        for j in range(m)
    ]
    return PqCodebook(nbits=nbits, books=books)


def pq_encode(cb: PqCodebook, v: np.ndarray) -> np.ndarray:
    """Nearest sub-centroid per subspace (ties to the lowest index); m bytes."""
    parts = cb.split(v)
    code = np.empty(cb.m, dtype=np.uint8)
    for j in range(cb.m):
        assign, _ = assign_to_centroids(parts[j][np.newaxis, :], cb.books[j].vectors)
        code[j] = assign[0]
    return code


def pq_encode_batch(cb: PqCodebook, vectors: np.ndarray) -> np.ndarray:
    """Encode many vectors at once; returns an (n, m) uint8 matrix."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != cb.dim:
        raise ValueError("vectors must be 2-d with the codebook dimension")
    sub = cb.sub_dim
    codes = np.empty((len(arr), cb.m), dtype=np.uint8)
    for j in range(cb.m):
        assign, _ = assign_to_centroids(arr[:, j * sub : (j + 1) * sub], cb.books[j].vectors)
        codes[:, j] = assign
    return codes


def pq_decode(cb: PqCodebook, code: np.ndarray) -> np.ndarray:
    """Concatenate the selected sub-centroids back into a float32 vector."""
    code = np.asarray(code)
    if code.shape != (cb.m,):
        raise ValueError(f"code must have exactly m={cb.m} entries")
    return np.concatenate(
        [cb.books[j].vectors[int(code[j])] for j in range(cb.m)]
    ).astype(np.float32)


def adc_table(cb: PqCodebook, query: np.ndarray) -> np.ndarray:
    """(m, ks) table of squared L2 distances, query sub-vector vs sub-centroids."""
    parts = cb.split(query)
    table = np.empty((cb.m, cb.ks), dtype=np.float64)
    for j in range(cb.m):
        diff = cb.books[j].vectors.astype(np.float64) - parts[j]
        table[j] = np.sum(diff * diff, axis=1)
    return table


def adc_scores(cb: PqCodebook, codes: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Asymmetric distances for an (n, m) code matrix: sqrt of m table lookups."""
    codes = np.asarray(codes)
    table = adc_table(cb, query)
    total = np.zeros(len(codes), dtype=np.float64)
    for j in range(cb.m):
        total += table[j, codes[:, j]]
    return np.sqrt(total)


def pq_adc_search(
    cb: PqCodebook,
    codes: Iterable[tuple[int, np.ndarray]] | Sequence[tuple[int, np.ndarray]],
    query: np.ndarray,
    k: int,
) -> SearchResult:
    """Rank (id, code) pairs by asymmetric distance; ascending-id tie-break."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pairs = list(codes)
    if not pairs:
        return SearchResult([])
    ids = np.array([i for i, _ in pairs], dtype=np.uint64)
    matrix = np.stack([np.asarray(c, dtype=np.uint8) for _, c in pairs])
    return make_result(Metric.L2, ids, adc_scores(cb, matrix, query), k)


class PqIndex(VectorIndex):
    """Standalone product-quantization index: stores only codes, never vectors."""

    family = "pq"

    def __init__(self, codebook: PqCodebook, ids: np.ndarray, codes: np.ndarray):
        self.codebook = codebook
        self._ids = np.asarray(ids, dtype=np.uint64)
        self._codes = np.asarray(codes, dtype=np.uint8)

    @classmethod
    def build(
        cls,
        emb_set: EmbeddingSet,
        m: int | None = None,
        nbits: int = 8,
        seed: int = 0,
    ) -> "PqIndex":
        if len(emb_set) == 0:
            raise ValueError("cannot build an index over an empty set")
        m = default_m(emb_set.dim) if m is None else m
        cb = pq_train(emb_set.vectors, m, nbits, seed)
        return cls(cb, emb_set.ids.copy(), pq_encode_batch(cb, emb_set.vectors))

    @property
    def dim(self) -> int:
        return self.codebook.dim

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    def __len__(self) -> int:
        return len(self._ids)

    def search(self, query: np.ndarray, k: int) -> SearchResult:
        if k < 1:
            raise ValueError("k must be >= 1")
        if len(self._ids) == 0:
            return SearchResult([])
        return make_result(
            Metric.L2, self._ids, adc_scores(self.codebook, self._codes, query), k
        )

    def memory_bytes(self) -> int:
        book_bytes = sum(b.vectors.nbytes for b in self.codebook.books)
        return book_bytes + self._ids.nbytes + self._codes.nbytes

    def config(self) -> dict:
        return {"m": self.codebook.m, "nbits": self.codebook.nbits}

    def write_payload(self, w: Writer) -> None:
        write_codebook(w, self.codebook)
        w.u64(len(self))
        w.u64_array(self._ids)
        w.u8_array(self._codes)

    @classmethod
    def read_payload(cls, r: Reader) -> "PqIndex":
        cb = read_codebook(r)
        count = r.u64()
        ids = r.u64_array(count)
        codes = r.u8_array(count * cb.m).reshape(count, cb.m)
        return cls(cb, ids, codes)


def write_codebook(w: Writer, cb: PqCodebook) -> None:
    w.u32(cb.m)
    w.u32(cb.nbits)
    w.u32(cb.sub_dim)
    for book in cb.books:
        w.f32_array(book.vectors)
        w.f64(book.distortion)


def read_codebook(r: Reader) -> PqCodebook:
    m = r.u32()
    nbits = r.u32()
    sub_dim = r.u32()
    ks = 1 << nbits
    books = []
    for _ in range(m):
        vectors = r.f32_array(ks * sub_dim).reshape(ks, sub_dim)
        books.append(Centroids(vectors=vectors, distortion=r.f64()))
    return PqCodebook(nbits=nbits, books=books)
