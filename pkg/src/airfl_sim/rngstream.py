"""Counter-based deterministic random streams.

Every source of randomness in the simulator is a :class:`RngStream`: a master
seed plus a path of (label, index) pairs naming a substream.  Streams are
derived by hashing, not by splitting a shared generator, so any substream can
be opened in any order -- or from any worker process -- and always yields the
same sample sequence.  This is what makes Monte Carlo results reproducible at
any parallelism degree.

Usage contract: a stream is consumed by exactly one drawing call (which may
draw many values internally).  Independent purposes get independent child
streams via :meth:`RngStream.child`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_U64 = 0xFFFFFFFFFFFFFFFF


def _philox_key(master_seed: int, path: tuple[tuple[str, int], ...]) -> int:
    """Hash (seed, path) into a 128-bit Philox key, injectively."""
    h = hashlib.sha256()
    h.update((master_seed & _U64).to_bytes(8, "little"))
    for label, index in path:
        raw = label.encode("utf-8")
        h.update(len(raw).to_bytes(4, "little"))
        h.update(raw)
        h.update((index & _U64).to_bytes(8, "little"))
    return int.from_bytes(h.digest()[:16], "little")


@dataclass(frozen=True)
class RngStream:
    """A value-type handle for one deterministic substream.

    Copies are free and safe to ship between workers; the underlying
    generator state is created on demand by :meth:`generator`, never shared.
    """

    master_seed: int
    path: tuple[tuple[str, int], ...] = ()

    def child(self, label: str, index: int = 0) -> "RngStream":
        """Derive the substream at ``path + [(label, index)]``."""
        return RngStream(self.master_seed, self.path + ((label, index),))

    def generator(self) -> np.random.Generator:
        """Open a fresh generator positioned at the start of this stream.

        Calling this twice on the same stream yields two generators that
        produce identical sequences.
        """
        key = _philox_key(self.master_seed, self.path)
        return np.random.Generator(np.random.Philox(key=key))


def derive_stream(master_seed: int, *path: tuple[str, int]) -> RngStream:
    """Build the stream identified by ``master_seed`` and ``path``."""
    for item in path:
        label, index = item
        if not isinstance(label, str) or not isinstance(index, int):
            raise TypeError(f"path items must be (str, int) pairs, got {item!r}")
    return RngStream(master_seed, tuple(path))


def complex_gaussian(gen: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: independent real/imag parts of variance 1/2 each."""
    re = gen.standard_normal(shape)
    im = gen.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def draw_complex_gaussian(n: int, stream: RngStream) -> np.ndarray:
    """Draw ``n`` i.i.d. CN(0, 1) samples from ``stream``.

    Unit total variance: E[|h|^2] = 1, so |h| is Rayleigh with mean
    sqrt(pi)/2.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return complex_gaussian(stream.generator(), n)
