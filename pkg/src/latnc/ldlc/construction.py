"""Latin-square LDLC parity-check matrices."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import ConstructionFailed, DimensionMismatch, SingularTriangle

# fmt: off
SAMPLE_PARITY = np.array([
    [0.0, -0.8, 0.0, -0.5, 1.0, 0.0],
    [0.8, 0.0, 0.0, 1.0, 0.0, -0.5],
    [0.0, 0.5, 1.0, 0.0, 0.8, 0.0],
    [0.0, 0.0, -0.5, -0.8, 0.0, 1.0],
    [1.0, 0.0, 0.0, 0.0, 0.5, 0.8],
    [0.5, -1.0, -0.8, 0.0, 0.0, 0.0],
])
# fmt: on
SAMPLE_SEQUENCE = (1.0, 0.8, 0.5)


def degree7_sequence() -> tuple[float, ...]:
    return (1.0,) + (1.0 / math.sqrt(7.0),) * 6


@dataclass(frozen=True, eq=False)
class LdlcCode:
    """Square LDLC: sparse parity ``H`` and dense generator ``G = H^-1``.

    ``generating_sequence`` is the sequence the code was built from;
    ``scale`` is the factor applied to it to normalize |det H| to 1, so the
    magnitudes actually present in ``H`` are ``scale * generating_sequence``.
    """

    parity: np.ndarray
    generating_sequence: tuple[float, ...]
    seed: int | None = None
    scale: float = 1.0
    slots: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.parity.shape[0]

    @property
    def degree(self) -> int:
        return len(self.generating_sequence)

    @property
    def magnitudes(self) -> np.ndarray:
        return self.scale * np.asarray(self.generating_sequence)

    @cached_property
    def generator(self) -> np.ndarray:
        return np.linalg.inv(self.parity)

    @cached_property
    def triangular(self) -> tuple[np.ndarray, np.ndarray]:
        """(T, Q) with H = T Q, T lower triangular and Q orthogonal.

        From the QR factorization H^T = Q0 R: Q = Q0^T and T = R^T.
        """
        q0, r = np.linalg.qr(self.parity.T)
        t, q = r.T, q0.T
        if np.min(np.abs(np.diag(t))) < 1e-12:
            raise SingularTriangle("parity matrix has a vanishing triangular pivot")
        return t, q

    def to_json(self) -> str:
        return json.dumps(
            {"sequence": list(self.generating_sequence), "n": self.n, "seed": self.seed, "normalize": self.scale != 1.0}
        )

    @classmethod
    def from_json(cls, text: str) -> "LdlcCode":
        obj = json.loads(text)
        return build_parity(obj["sequence"], int(obj["n"]), int(obj["seed"]), normalize=obj.get("normalize", True))


def from_parity(parity, sequence=None) -> LdlcCode:
    """Wrap an explicit parity matrix (e.g. the printed 6x6 example)."""
    h = np.asarray(parity, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch("parity matrix must be square")
    if sequence is None:
        sequence = tuple(sorted(np.abs(h[0][h[0] != 0]).tolist(), reverse=True))
    return LdlcCode(h, tuple(float(s) for s in sequence))


def is_latin_square(parity, sequence, scale: float | None = None, tol: float = 1e-9) -> bool:
    """Every row and column holds exactly the magnitudes ``scale * sequence``.

    With ``scale=None`` the common factor is inferred from the largest entry,
    so a determinant-normalized matrix is accepted against its raw sequence.
    """
    h = np.asarray(parity, dtype=float)
    seq = np.sort(np.asarray(sequence, dtype=float))
    if scale is None:
        scale = np.max(np.abs(h)) / seq[-1]
    want = scale * seq
    for mat in (h, h.T):
        for row in mat:
            mags = np.sort(np.abs(row[row != 0]))
            if mags.shape != want.shape or np.max(np.abs(mags - want)) > tol * max(1.0, want[-1]):
                return False
    return True


def _latin_permutations(n: int, d: int, rng: np.random.Generator, max_sweeps: int = 200) -> np.ndarray | None:
    """d permutations with pairwise distinct images in every row, or None.

    Each new permutation starts random; rows whose image collides with an
    earlier permutation are repaired by swapping with a random row when the
    swap clears both rows.
    """
    perms = [rng.permutation(n)]
    for _ in range(1, d):
        p = rng.permutation(n)
        used = np.stack(perms)  # (k, n)
        for _sweep in range(max_sweeps):
            bad = np.flatnonzero(np.any(used == p[None, :], axis=0))
            if bad.size == 0:
                break
            for i in bad:
                if not np.any(used[:, i] == p[i]):
                    continue
                for r in rng.permutation(n):
                    if r == i:
                        continue
                    if not np.any(used[:, i] == p[r]) and not np.any(used[:, r] == p[i]):
                        p[i], p[r] = p[r], p[i]
                        break
        else:
            return None
        if np.any(np.stack(perms) == p[None, :]):
            return None
        perms.append(p)
    return np.stack(perms)


def _cyclic_permutations(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """d rows of a randomly relabeled cyclic Latin square; always succeeds.

    Used when the repair search stalls, which happens when d is close to n.
    """
    rows = rng.permutation(n)
    cols = rng.permutation(n)
    shifts = rng.choice(n, size=d, replace=False)
    return cols[(rows[None, :] + shifts[:, None]) % n]


def build_parity(
    generating_sequence, n: int, seed: int = 0, normalize: bool = True, max_retries: int = 50
) -> LdlcCode:
    """Random Latin-square parity matrix with random signs.

    Slot ``k`` places ``+-h_k`` at ``(i, perm_k[i])`` for every row ``i``, so
    each row and column receives every sequence element exactly once. With
    ``normalize`` the matrix is rescaled to |det H| = 1.
    """
    seq = tuple(float(s) for s in generating_sequence)
    d = len(seq)
    if d == 0 or any(s <= 0 for s in seq):
        raise ConstructionFailed("generating sequence must be nonempty and positive")
    if any(a < b for a, b in zip(seq, seq[1:])):
        raise ConstructionFailed("generating sequence must be sorted in descending order")
    if d > n:
        raise ConstructionFailed(f"degree {d} exceeds dimension {n}")
    rng = np.random.default_rng(seed)
    rows = np.arange(n)
    for _ in range(max_retries):
        perms = _latin_permutations(n, d, rng)
        if perms is None:
            perms = _cyclic_permutations(n, d, rng)
        signs = rng.choice([-1.0, 1.0], size=(d, n))
        h = np.zeros((n, n))
        for k in range(d):
            h[rows, perms[k]] = seq[k] * signs[k]
        sign, logdet = np.linalg.slogdet(h)
        if sign == 0 or np.linalg.cond(h) > 1e10:
            continue
        scale = math.exp(-logdet / n) if normalize else 1.0
        return LdlcCode(h * scale, seq, seed, scale, perms)
    raise ConstructionFailed(f"no valid Latin-square assignment after {max_retries} attempts")


def ldlc_encode(code: LdlcCode, b) -> np.ndarray:
    """x = G b; ``b`` may carry leading batch dimensions."""
    b = np.asarray(b)
    if b.shape[-1] != code.n:
        raise DimensionMismatch(f"message length {b.shape[-1]} != code length {code.n}")
    return b @ code.generator.T
