"""Orthogonal m-ary signal ensembles, orthogonality errors and correlation.

Waveforms are complex baseband sample vectors built from rectangular chips,
``oversampling`` samples per chip. Correlations are normalized by the
nominal symbol length T (in samples), so every undistorted waveform has
unit energy: sum(|s|**2) / T == 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import hadamard

from .channel import is_power_of_two
from .errors import ConfigError, DomainError

WALSH = "walsh"
MSEQ = "m-sequence"

# x^n + ... + 1 as exponent tuples, one primitive polynomial per degree
PRIMITIVE_POLYNOMIALS = {
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 3, 0),
    11: (11, 2, 0),
    12: (12, 6, 4, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 10, 6, 1, 0),
    15: (15, 1, 0),
    16: (16, 12, 3, 1, 0),
}


@dataclass(frozen=True, eq=False)
class SignalEnsemble:
    kind: str
    m: int
    chips_per_symbol: int
    oversampling: int
    sequences: np.ndarray  # (m, T) complex
    degree: int = 0        # M-sequence polynomial degree, 0 for Walsh

    @property
    def T(self) -> int:
        return self.sequences.shape[1]

    def __len__(self):
        return self.m

    def __getitem__(self, i):
        return self.sequences[i]

    def gram(self) -> np.ndarray:
        """Normalized Gram matrix of the undistorted ensemble."""
        s = self.sequences
        return (s.conj() @ s.T) / self.T


def _chips_to_waveform(chips: np.ndarray, oversampling: int) -> np.ndarray:
    return np.repeat(np.asarray(chips, dtype=float), oversampling, axis=-1).astype(complex)


def walsh_ensemble(m: int, oversampling: int = 8) -> SignalEnsemble:
    """Rows of the order-m Sylvester-Hadamard matrix as +/-1 chip waveforms."""
    if int(m) != m or not is_power_of_two(m) or not 2 <= m <= 1024:
        raise ConfigError(f"Walsh ensembles need m a power of 2 in [2, 1024], got {m}")
    if oversampling < 1:
        raise ConfigError("oversampling must be >= 1")
    chips = hadamard(m)
    return SignalEnsemble(WALSH, m, m, oversampling, _chips_to_waveform(chips, oversampling))


def lfsr_bits(polynomial: Sequence[int], n_bits: int, seed_state: int = 1) -> np.ndarray:
    """Bits of the linear recurrence with characteristic polynomial ``polynomial``.

    ``polynomial`` lists exponents, e.g. (3, 1, 0) for x^3 + x + 1, giving
    a[t + 3] = a[t + 1] ^ a[t].
    """
    n = max(polynomial)
    taps = [e for e in polynomial if e != n]
    state = [(seed_state >> i) & 1 for i in range(n)]
    if not any(state):
        raise ConfigError("LFSR seed state must be non-zero")
    out = np.empty(n_bits, dtype=np.int8)
    for t in range(n_bits):
        out[t] = state[0]
        fb = 0
        for e in taps:
            fb ^= state[e]
        state = state[1:] + [fb]
    return out


def sequence_period(bits: np.ndarray, n_max: int) -> int:
    """Smallest p <= n_max with bits periodic at p over the given span."""
    L = len(bits)
    for p in range(1, n_max + 1):
        if np.array_equal(bits[p:], bits[:L - p]):
            return p
    return 0


def mseq_chips(n: int, polynomial: Sequence[int] = None) -> np.ndarray:
    """One period of the +/-1 maximal-length sequence of degree ``n``."""
    if polynomial is None:
        if n not in PRIMITIVE_POLYNOMIALS:
            raise ConfigError(f"no default primitive polynomial for degree {n}")
        polynomial = PRIMITIVE_POLYNOMIALS[n]
    polynomial = tuple(sorted(set(int(e) for e in polynomial), reverse=True))
    if polynomial[0] != n or polynomial[-1] != 0:
        raise ConfigError(f"polynomial {polynomial} is not a degree-{n} polynomial with constant term")
    N = 2 ** n - 1
    bits = lfsr_bits(polynomial, 2 * N + n)
    period = sequence_period(bits, N)
    if period != N:
        raise ConfigError(
            f"polynomial {polynomial} is not primitive: period {period or '> ' + str(N)} != {N}"
        )
    return 1 - 2 * bits[:N].astype(float)


def mseq_ensemble(n: int, polynomial: Sequence[int] = None, m: int = None,
                  oversampling: int = 8, offset: int = 0) -> SignalEnsemble:
    """``m`` cyclic shifts (starting at ``offset``) of a degree-``n`` M-sequence."""
    chips = mseq_chips(n, polynomial)
    N = len(chips)
    if m is None:
        m = N
    if not 1 <= m <= N:
        raise ConfigError(f"at most {N} distinct shifts exist for degree {n}")
    if oversampling < 1:
        raise ConfigError("oversampling must be >= 1")
    rows = np.stack([np.roll(chips, offset + k) for k in range(m)])
    return SignalEnsemble(MSEQ, m, N, oversampling, _chips_to_waveform(rows, oversampling), degree=n)


class ErrorVector(NamedTuple):
    """Orthogonality errors of one transmitted signal.

    amplitude: relative amplitude error; delay: chips; duration: relative
    stretch; frequency: radians per chip; phase: radians.
    """

    amplitude: float = 0.0
    delay: float = 0.0
    duration: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def scaled(self, k: float) -> "ErrorVector":
        return ErrorVector(*(k * v for v in self))


def apply_errors(s: np.ndarray, e: ErrorVector, oversampling: int = 8) -> np.ndarray:
    """Distort one waveform by an error vector (see :func:`apply_errors_batch`)."""
    arr = np.asarray([tuple(e)], dtype=float)
    return apply_errors_batch(s, arr, oversampling)[0]


def apply_errors_batch(s: np.ndarray, errors: np.ndarray, oversampling: int = 8) -> np.ndarray:
    """Distort ``s`` by each row of ``errors`` (columns in ErrorVector order).

    Output sample n takes the input at (n - delay * oversampling) / (1 + duration)
    by linear interpolation (zero outside the symbol), then is scaled by
    (1 + amplitude) and rotated by exp(i(frequency * k + phase)) with k the
    chip index of sample n. Zero error components leave the samples untouched.
    """
    s = np.asarray(s, dtype=complex)
    errors = np.atleast_2d(np.asarray(errors, dtype=float))
    if not np.all(np.isfinite(errors)):
        raise DomainError("error components must be finite")
    amp, delay, dur, freq, phase = errors.T
    if np.any(np.abs(dur) >= 1):
        raise DomainError("duration error magnitude must be < 1")
    T = s.size
    n = np.arange(T, dtype=float)
    out = np.broadcast_to(s, (errors.shape[0], T)).copy()
    warp = (delay != 0) | (dur != 0)
    if warp.any():
        src = (n[None, :] - delay[warp, None] * oversampling) / (1 + dur[warp, None])
        out[warp] = _interp(s, src)
    if np.any(amp != 0):
        out *= (1 + amp)[:, None]
    if np.any(freq != 0) or np.any(phase != 0):
        k = np.floor(n / oversampling)
        out *= np.exp(1j * (freq[:, None] * k[None, :] + phase[:, None]))
    return out


def _interp(s: np.ndarray, src: np.ndarray) -> np.ndarray:
    # linear interpolation on s[-1] = s[T] = 0 padding
    T = s.size
    padded = np.concatenate(([0], s, [0]))
    pos = src + 1.0
    inside = (pos >= 0) & (pos <= T + 1)
    pos = np.clip(pos, 0, T + 1)
    i0 = np.minimum(np.floor(pos).astype(int), T)
    frac = pos - i0
    vals = padded[i0] * (1 - frac) + padded[i0 + 1] * frac
    exact = frac == 0
    vals[exact] = padded[i0[exact]]
    return np.where(inside, vals, 0)


class Correlation(NamedTuple):
    value: float      # real part: coherent in-phase correlation
    magnitude: float  # |K|, includes quadrature leakage


def correlation(s_i: np.ndarray, s_j_distorted: np.ndarray) -> Correlation:
    """Normalized correlation K_ij = (1/T) sum conj(s_i) * s_j over the nominal window."""
    a = np.asarray(s_i, dtype=complex)
    b = np.asarray(s_j_distorted, dtype=complex)
    T = a.size
    if b.size < T:
        b = np.concatenate((b, np.zeros(T - b.size, dtype=complex)))
    k = np.vdot(a, b[:T]) / T
    return Correlation(float(k.real), float(abs(k)))


def correlate_batch(template: np.ndarray, distorted: np.ndarray) -> np.ndarray:
    """Complex normalized correlations of one template with many rows."""
    template = np.asarray(template, dtype=complex)
    return (distorted[..., :template.size] @ template.conj()) / template.size


def ensemble_to_csv(ensemble: SignalEnsemble, path) -> None:
    """One waveform per row: index, then real parts, then imaginary parts."""
    T = ensemble.T
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + [f"re_{k}" for k in range(T)] + [f"im_{k}" for k in range(T)])
        for i, s in enumerate(ensemble.sequences):
            w.writerow([i] + [repr(float(v)) for v in s.real] + [repr(float(v)) for v in s.imag])


def max_offdiagonal(ensemble: SignalEnsemble) -> float:
    G = ensemble.gram()
    return float(np.max(np.abs(G - np.diag(np.diag(G))))) if ensemble.m > 1 else 0.0


def mseq_crosscorrelation_bound(n: int) -> float:
    return 1.0 / (2 ** n - 1)
