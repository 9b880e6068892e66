"""Complex Zernike moments of square patches by direct summation.

The patch is mapped so that its inscribed circle is the unit disk. The
basis is integrated over each pixel by subsampling, so pixels straddling
the rim contribute only their covered part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np

from ..errors import ConfigError, DataError


def check_pair(n: int, l: int) -> None:
    if n < 0 or abs(l) > n or (n - abs(l)) % 2:
        raise ConfigError(f"invalid Zernike index (n={n}, l={l}): need |l| <= n and n - |l| even")


def valid_pairs(n_max: int, nonnegative: bool = False) -> list[tuple[int, int]]:
    """All ``(n, l)`` with ``n <= n_max``, ``|l| <= n`` and ``n - |l|`` even."""
    lo = 0 if nonnegative else None
    out = []
    for n in range(n_max + 1):
        for l in range(-n, n + 1):
            if (n - abs(l)) % 2 == 0 and (lo is None or l >= lo):
                out.append((n, l))
    return out


def radial_polynomial(n: int, l: int, r: np.ndarray) -> np.ndarray:
    check_pair(n, l)
    m = abs(l)
    out = np.zeros_like(r, dtype=np.float64)
    for s in range((n - m) // 2 + 1):
        c = (-1) ** s * factorial(n - s) / (
            factorial(s) * factorial((n + m) // 2 - s) * factorial((n - m) // 2 - s))
        out += c * r ** (n - 2 * s)
    return out


OVERSAMPLE = 5


@lru_cache(maxsize=8)
def _subpixel_polar(size: int, k: int):
    off = (np.arange(k) + 0.5) / k - 0.5
    c = (2.0 * (np.arange(size)[:, None] + off[None, :]).ravel() + 1 - size) / size
    x = c[None, :]
    y = -c[:, None]  # y up
    return np.hypot(x, y), np.arctan2(y, x)


@lru_cache(maxsize=8)
def disk_coverage(size: int, k: int = OVERSAMPLE) -> np.ndarray:
    """Fraction of each pixel lying inside the inscribed unit disk."""
    r, _ = _subpixel_polar(size, k)
    cov = (r <= 1.0).reshape(size, k, size, k).mean(axis=(1, 3))
    cov.setflags(write=False)
    return cov


@lru_cache(maxsize=256)
def zernike_polynomial(n: int, l: int, size: int, k: int = OVERSAMPLE) -> np.ndarray:
    """``V_nl = R_nl(r) exp(i l theta)`` averaged over each pixel of a ``size x size`` grid.

    Pixels map onto ``[-1, 1]^2`` with y up; each is split into ``k x k``
    subpixels and the basis is zero outside the unit disk. Averaging over
    the pixel turns the moment sum into an exact integral of the
    piecewise-constant image, up to subpixel error.
    """
    r, theta = _subpixel_polar(size, k)
    inside = r <= 1.0
    v = np.where(inside, radial_polynomial(n, l, np.minimum(r, 1.0)) * np.exp(1j * l * theta), 0.0)
    v = v.reshape(size, k, size, k).mean(axis=(1, 3))
    v.setflags(write=False)
    return v


@dataclass
class ZernikeTable:
    n_max: int
    entries: dict[tuple[int, int], complex] = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int]) -> complex:
        check_pair(*key)
        return self.entries[key]

    def __setitem__(self, key: tuple[int, int], value: complex) -> None:
        n, l = key
        check_pair(n, l)
        if n > self.n_max:
            raise ConfigError(f"order {n} exceeds table n_max {self.n_max}")
        self.entries[key] = complex(value)

    def __len__(self) -> int:
        return len(self.entries)

    def magnitudes(self) -> list[float]:
        """``|A_nl|`` for ``l >= 0`` in ``valid_pairs`` order."""
        return [abs(self.entries[k]) for k in valid_pairs(self.n_max, nonnegative=True)]


def _check_patch(patch) -> np.ndarray:
    f = np.asarray(patch, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != f.shape[1] or f.shape[0] < 1:
        raise DataError(f"Zernike moments need a square patch, got shape {f.shape}")
    return f


def zernike_moment(patch: np.ndarray, n: int, l: int) -> complex:
    """``A_nl = (n + 1)/pi * sum conj(V_nl) f dA`` over the unit disk."""
    check_pair(n, l)
    f = _check_patch(patch)
    size = f.shape[0]
    da = (2.0 / size) ** 2
    v = zernike_polynomial(n, l, size)
    return complex((n + 1) / np.pi * np.sum(np.conj(v) * f) * da)


def zernike_moments(patch: np.ndarray, n_max: int) -> ZernikeTable:
    if n_max < 0:
        raise ConfigError("n_max must be >= 0")
    f = _check_patch(patch)
    table = ZernikeTable(n_max)
    for n, l in valid_pairs(n_max, nonnegative=True):
        a = zernike_moment(f, n, l)
        table[(n, l)] = a
        if l > 0:
            # real patch: A_{n,-l} is the conjugate of A_{n,l}
            table[(n, -l)] = a.conjugate()
    return table


def zernike_reconstruct(table: ZernikeTable, size: int) -> np.ndarray:
    """Real part of ``sum A_nl V_nl`` over the stored entries; zero outside the disk.

    Rim pixels hold the pixel average, so they fade with their coverage.
    """
    out = np.zeros((size, size), dtype=np.complex128)
    for (n, l), a in table.entries.items():
        out += a * zernike_polynomial(n, l, size)
    return out.real
