"""Initial-state families for the torus NLS runs.

The workhorse is the rough-data family

    u0(x) = amplitude * sum_{k != 0} |k|^(-exponent_offset - alpha) e^{ikx}

whose coefficients are real, even in k, and summable for alpha > 0 with
exponent offset > 1/2: u0 lies in H^s exactly for s < alpha + offset - 1/2,
so `alpha` dials the regularity.  Plane-wave and constant states are kept
for closed-form checks; `custom` carries explicit coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InitialDataSpec",
    "coefficient",
    "coefficients",
    "sample_on_grid",
    "resolve_tail_cutoff",
]

KINDS = ("sobolev", "plane", "constant", "custom")

# series tail kept when sampling rough data on an m-point grid
DEFAULT_TAIL_FLOOR = 2 ** 14


@dataclass(frozen=True)
class InitialDataSpec:
    """Parameters of one initial state.

    kind 'sobolev' uses (alpha, amplitude, exponent_offset); 'plane' is
    amplitude * e^{i mode x}; 'constant' is the constant amplitude; 'custom'
    takes explicit {frequency: coefficient} pairs.
    """

    kind: str = "sobolev"
    alpha: float = 1.0
    amplitude: float = 0.1
    exponent_offset: float = 0.51
    mode: int = 1
    modes: tuple[tuple[int, complex], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown initial-data kind {self.kind!r}")
        if self.kind == "sobolev":
            if self.alpha <= 0:
                raise ValueError(f"alpha must be > 0, got {self.alpha}")
            if self.exponent_offset <= 0.5:
                raise ValueError(
                    f"exponent offset must exceed 1/2 for a square-summable "
                    f"series, got {self.exponent_offset}"
                )
        if self.kind == "custom" and not self.modes:
            raise ValueError("custom initial data needs at least one mode")


def coefficient(spec: InitialDataSpec, k: int) -> complex:
    """Fourier coefficient of u0 at frequency k."""
    if spec.kind == "sobolev":
        if k == 0:
            return 0.0 + 0.0j
        return complex(spec.amplitude * abs(k) ** (-spec.exponent_offset - spec.alpha))
    if spec.kind == "plane":
        return complex(spec.amplitude) if k == spec.mode else 0.0 + 0.0j
    if spec.kind == "constant":
        return complex(spec.amplitude) if k == 0 else 0.0 + 0.0j
    for kk, val in spec.modes:
        if kk == k:
            return complex(val)
    return 0.0 + 0.0j


def coefficients(spec: InitialDataSpec, cutoff: int) -> np.ndarray:
    """Coefficients for |k| <= cutoff in ascending order (length 2*cutoff+1)."""
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    k = np.arange(-cutoff, cutoff + 1)
    if spec.kind == "sobolev":
        out = np.zeros(2 * cutoff + 1, dtype=np.complex128)
        nz = k != 0
        out[nz] = spec.amplitude * np.abs(k[nz]) ** (-spec.exponent_offset - spec.alpha)
        return out
    out = np.zeros(2 * cutoff + 1, dtype=np.complex128)
    if spec.kind == "plane":
        if abs(spec.mode) <= cutoff:
            out[spec.mode + cutoff] = spec.amplitude
    elif spec.kind == "constant":
        out[cutoff] = spec.amplitude
    else:
        for kk, val in spec.modes:
            if abs(kk) <= cutoff:
                out[kk + cutoff] = val
    return out


def resolve_tail_cutoff(spec: InitialDataSpec, cutoff: int, tail_cutoff: int | None) -> int:
    """Series length used when sampling: max(16 N, 2^14) by default for the
    rough family, the natural support for the band-limited kinds."""
    if tail_cutoff is not None:
        if tail_cutoff < cutoff:
            raise ValueError(
                f"tail cutoff {tail_cutoff} is below the target cutoff {cutoff}"
            )
        return tail_cutoff
    if spec.kind == "sobolev":
        return max(16 * cutoff, DEFAULT_TAIL_FLOOR)
    if spec.kind == "plane":
        return max(cutoff, abs(spec.mode))
    if spec.kind == "custom":
        return max([cutoff] + [abs(kk) for kk, _ in spec.modes])
    return cutoff


def sample_on_grid(spec: InitialDataSpec, m: int, tail_cutoff: int | None = None) -> np.ndarray:
    """Values of the series truncated at |k| <= tail on the m-point grid.

    The samples match dft.grid(m) ordering.  When tail_cutoff is omitted it
    defaults via resolve_tail_cutoff with target cutoff (m - 1) // 4, the
    cutoff an m-point product grid serves.

    Exploits e^{ikx_n} = e^{i(k mod m)x_n}: the tail coefficients are folded
    onto the m frequency bins and one inverse transform evaluates the sum, so
    the cost is O(tail + m log m) rather than O(tail * m).
    """
    if m < 1:
        raise ValueError(f"grid size must be >= 1, got {m}")
    if tail_cutoff is None:
        tail = resolve_tail_cutoff(spec, max((m - 1) // 4, 0), None)
    elif tail_cutoff < 0:
        raise ValueError(f"tail cutoff must be >= 0, got {tail_cutoff}")
    else:
        tail = tail_cutoff
    k = np.arange(-tail, tail + 1)
    c = coefficients(spec, tail)
    folded = np.zeros(m, dtype=np.complex128)
    np.add.at(folded, np.mod(k, m), c)
    return np.fft.fftshift(np.fft.ifft(folded, norm="forward"))
