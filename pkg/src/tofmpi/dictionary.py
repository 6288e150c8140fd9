"""Oversampled DFT dictionary over delay phase, and grid <-> depth conversion.

Column l of the dictionary is the harmonic response of a reflector whose
base-frequency phase is 2*pi*l/L, so the L columns tile one unambiguous
range c / (2 f0) exactly once.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AliasedDepthError, ConfigError, DomainError
from .model import SPEED_OF_LIGHT


@dataclass(frozen=True, eq=False)
class Dictionary:
    harmonic_count: int
    grid_size: int
    base_frequency_hz: float
    atoms: np.ndarray  # (N, L), atom(n, l) = exp(2j pi n l / L), n = 1..N

    @property
    def shape(self):
        return self.atoms.shape

    @property
    def unambiguous_range(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.base_frequency_hz)

    @property
    def grid_step(self) -> float:
        """Depth spacing of adjacent columns, in meters."""
        return self.unambiguous_range / self.grid_size

    @cached_property
    def adjoint(self) -> np.ndarray:
        """Conjugate transpose, (L, N), contiguous for fast correlation."""
        a = np.ascontiguousarray(self.atoms.conj().T)
        a.setflags(write=False)
        return a

    @cached_property
    def gram_kernel(self) -> np.ndarray:
        """<atom_i, atom_j> depends only on (j - i) mod L; entry m holds that value."""
        mn = np.outer(np.arange(self.grid_size), np.arange(1, self.harmonic_count + 1)) % self.grid_size
        k = np.exp(2j * np.pi * mn / self.grid_size).sum(axis=1)
        k[0] = self.harmonic_count
        k.setflags(write=False)
        return k

    def normalized(self) -> np.ndarray:
        """Unit-norm columns."""
        return self.atoms / math.sqrt(self.harmonic_count)

    def column(self, l: int) -> np.ndarray:
        return self.atoms[:, l]

    def __eq__(self, other):
        if not isinstance(other, Dictionary):
            return NotImplemented
        return (self.harmonic_count, self.grid_size, self.base_frequency_hz) == (
            other.harmonic_count, other.grid_size, other.base_frequency_hz)

    __hash__ = None


def build_dictionary(N: int, L: int, f0: float) -> Dictionary:
    if int(N) != N or N < 1:
        raise ConfigError(f"harmonic count must be a positive integer, got {N}")
    if int(L) != L or L < 2 * N:
        raise ConfigError(f"insufficient oversampling: grid size {L} < 2 * {N}")
    if not f0 > 0:
        raise ConfigError(f"base frequency must be positive, got {f0}")
    N, L = int(N), int(L)
    n = np.arange(1, N + 1)[:, None]
    l = np.arange(L)[None, :]
    # reduce n*l mod L in integers first so large products keep full precision
    atoms = np.exp(2j * np.pi * ((n * l) % L) / L)
    atoms.setflags(write=False)
    return Dictionary(N, L, float(f0), atoms)


def grid_index_to_depth(l: int, dictionary: Dictionary) -> float:
    if int(l) != l or not 0 <= l < dictionary.grid_size:
        raise DomainError(f"grid index {l} outside [0, {dictionary.grid_size})")
    return SPEED_OF_LIGHT * int(l) / (2.0 * dictionary.base_frequency_hz * dictionary.grid_size)


def depth_to_nearest_grid_index(d: float, dictionary: Dictionary) -> int:
    """Nearest grid index to depth ``d``; exact halves round down.

    A depth within half a cell of the unambiguous range maps to index 0,
    which is the same phase.
    """
    if not d >= 0 or not math.isfinite(d):
        raise DomainError(f"depth must be finite and >= 0, got {d}")
    if d >= dictionary.unambiguous_range:
        raise AliasedDepthError(
            f"depth {d} m aliases: unambiguous range is {dictionary.unambiguous_range} m"
        )
    x = d * 2.0 * dictionary.base_frequency_hz * dictionary.grid_size / SPEED_OF_LIGHT
    return int(math.ceil(x - 0.5)) % dictionary.grid_size


def forward_vandermonde(phases, N: int) -> np.ndarray:
    """N x K matrix with entry (n, k) = exp(j n phi_k), n = 1..N."""
    phi = np.atleast_1d(np.asarray(phases, dtype=float))
    n = np.arange(1, int(N) + 1)[:, None]
    return np.exp(1j * n * phi[None, :])


def dump_dictionary_csv(dictionary: Dictionary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "l", "re", "im"])
        for ni in range(dictionary.harmonic_count):
            row = dictionary.atoms[ni]
            for l in range(dictionary.grid_size):
                w.writerow([ni + 1, l, repr(float(row[l].real)), repr(float(row[l].imag))])
