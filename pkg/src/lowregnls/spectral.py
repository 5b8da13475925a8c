"""Band-limited fields on the torus and the operators the schemes are built from.

A :class:`SpectralField` stores the coefficients c_k of a trigonometric
polynomial f(x) = sum_{|k| <= N} c_k e^{ikx} on (-pi, pi].  N is the cutoff.
All operators return new fields; coefficient arrays are read-only.

Products of two band-limited fields are formed without aliasing: a product of
two degree-N polynomials has degree 2N, so evaluating both factors on any
grid with at least 4N+1 points, multiplying pointwise and transforming back
recovers the exact product coefficients.  `dealiased_product` truncates that
exact product to the common cutoff.  Internally the evaluation grid is the
smallest power of two >= 4N+1, which keeps the FFT cost smooth in N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralField",
    "project",
    "zero_mode",
    "nonzero_part",
    "derivative",
    "inv_derivative",
    "conjugate",
    "free_propagator",
    "twist_propagator",
    "dealiased_product",
    "sobolev_norm",
    "l2_error",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class SpectralField:
    """Trigonometric polynomial sum_{|k| <= cutoff} coeffs[k + cutoff] e^{ikx}.

    coeffs has length 2*cutoff + 1 and is indexed by k + cutoff, i.e. ascending
    frequency from -cutoff to +cutoff.
    """

    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be >= 0, got {self.cutoff}")
        arr = np.array(self.coeffs, dtype=np.complex128)
        if arr.shape != (2 * self.cutoff + 1,):
            raise ValueError(
                f"expected {2 * self.cutoff + 1} coefficients for cutoff "
                f"{self.cutoff}, got shape {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, cutoff: int) -> "SpectralField":
        return cls(cutoff, np.zeros(2 * cutoff + 1, dtype=np.complex128))

    @classmethod
    def from_modes(cls, cutoff: int, modes: dict[int, complex]) -> "SpectralField":
        """Field with the given {frequency: coefficient} entries, zeros elsewhere."""
        arr = np.zeros(2 * cutoff + 1, dtype=np.complex128)
        for k, v in modes.items():
            if abs(k) > cutoff:
                raise ValueError(f"frequency {k} outside cutoff {cutoff}")
            arr[k + cutoff] = v
        return cls(cutoff, arr)

    def coefficient(self, k: int) -> complex:
        """c_k, with c_k = 0 for |k| > cutoff."""
        if abs(k) > self.cutoff:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.cutoff])

    def frequencies(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    # arithmetic aligns mismatched cutoffs by zero extension
    def __add__(self, other: "SpectralField") -> "SpectralField":
        a, b = _align(self, other)
        return SpectralField(a.cutoff, a.coeffs + b.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        a, b = _align(self, other)
        return SpectralField(a.cutoff, a.coeffs - b.coeffs)

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.cutoff, -self.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        if isinstance(scalar, SpectralField):
            raise TypeError("use dealiased_product for field*field products")
        return SpectralField(self.cutoff, self.coeffs * complex(scalar))

    __rmul__ = __mul__


def _align(f: SpectralField, g: SpectralField) -> tuple[SpectralField, SpectralField]:
    n = max(f.cutoff, g.cutoff)
    return project(f, n), project(g, n)


def project(f: SpectralField, cutoff: int) -> SpectralField:
    """Change of cutoff: modes with |k| <= min(cutoff, f.cutoff) are copied,
    everything else in the target window is zero.  Truncation for smaller
    cutoffs, zero extension for larger ones."""
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    if cutoff == f.cutoff:
        return f
    out = np.zeros(2 * cutoff + 1, dtype=np.complex128)
    m = min(cutoff, f.cutoff)
    out[cutoff - m: cutoff + m + 1] = f.coeffs[f.cutoff - m: f.cutoff + m + 1]
    return SpectralField(cutoff, out)


def zero_mode(f: SpectralField) -> complex:
    """The mean value c_0."""
    return complex(f.coeffs[f.cutoff])


def nonzero_part(f: SpectralField) -> SpectralField:
    """f minus its mean: the k=0 coefficient is zeroed."""
    out = f.coeffs.copy()
    out[f.cutoff] = 0.0
    return SpectralField(f.cutoff, out)


def derivative(f: SpectralField) -> SpectralField:
    """d/dx, i.e. multiplication by ik."""
    return SpectralField(f.cutoff, 1j * f.frequencies() * f.coeffs)


def inv_derivative(f: SpectralField) -> SpectralField:
    """Antiderivative on nonzero modes: c_k / (ik) for k != 0, zero at k = 0.

    Composes with `derivative` to the identity on mean-free fields.
    """
    mult = np.zeros(2 * f.cutoff + 1, dtype=np.complex128)
    k = f.frequencies()
    nz = k != 0
    mult[nz] = 1.0 / (1j * k[nz])
    return SpectralField(f.cutoff, mult * f.coeffs)


def conjugate(f: SpectralField) -> SpectralField:
    """Complex conjugate of the field: c_k -> conj(c_{-k})."""
    return SpectralField(f.cutoff, np.conj(f.coeffs[::-1]))


def free_propagator(f: SpectralField, t: float) -> SpectralField:
    """exp(i t d_xx) f: the flow of i u_t + u_xx = 0, mode k picks up e^{-i t k^2}."""
    k = f.frequencies()
    return SpectralField(f.cutoff, np.exp(-1j * t * k.astype(float) ** 2) * f.coeffs)


def twist_propagator(
    f: SpectralField, tau: float, lam: float, mass: float, momentum: complex
) -> SpectralField:
    """One step of the constant-coefficient part of the scheme.

    Multiplies mode k by exp(i tau (-2 lam mass - k^2 - 2 lam momentum/(ik)))
    for k != 0 and by exp(-2i lam tau mass) for k = 0.  mass is real and
    momentum purely imaginary (it is Pi_0(u d_x conj(u)) of some field), so
    the exponent is purely imaginary and the map is unitary.
    """
    if abs(momentum.real) > 1e-10 * (1.0 + abs(momentum)):
        raise ValueError(
            f"momentum must be purely imaginary, got real part {momentum.real!r}"
        )
    k = f.frequencies().astype(float)
    q_over_k = np.zeros_like(k)
    nz = k != 0
    # -2 lam momentum/(ik) = -2 lam Im(momentum)/k, a real phase contribution
    q_over_k[nz] = momentum.imag / k[nz]
    theta = tau * (-2.0 * lam * mass - k * k - 2.0 * lam * q_over_k)
    return SpectralField(f.cutoff, np.exp(1j * theta) * f.coeffs)


def _pow2_grid_size(cutoff: int) -> int:
    """Smallest power of two with at least 4*cutoff + 1 points, so that a
    product of two degree-cutoff polynomials is represented exactly."""
    p = 1
    while p < 4 * cutoff + 1:
        p *= 2
    return p


def _scatter_modes(coeffs: np.ndarray, cutoff: int, m: int) -> np.ndarray:
    """Centered coefficients -> standard-order length-m spectrum (rows kept)."""
    out = np.zeros(coeffs.shape[:-1] + (m,), dtype=np.complex128)
    out[..., : cutoff + 1] = coeffs[..., cutoff:]
    if cutoff > 0:
        out[..., m - cutoff:] = coeffs[..., :cutoff]
    return out


def _gather_modes(std: np.ndarray, cutoff: int) -> np.ndarray:
    """Standard-order spectrum -> centered coefficients for |k| <= cutoff."""
    out = np.empty(std.shape[:-1] + (2 * cutoff + 1,), dtype=np.complex128)
    out[..., cutoff:] = std[..., : cutoff + 1]
    if cutoff > 0:
        out[..., :cutoff] = std[..., std.shape[-1] - cutoff:]
    return out


def _to_grid(coeffs: np.ndarray, cutoff: int, m: int) -> np.ndarray:
    """Evaluate (batched) centered coefficients on the m-point standard grid."""
    return np.fft.ifft(_scatter_modes(coeffs, cutoff, m), axis=-1, norm="forward")


def _from_grid(values: np.ndarray, cutoff: int) -> np.ndarray:
    """Forward transform of (batched) grid values, truncated to |k| <= cutoff."""
    return _gather_modes(np.fft.fft(values, axis=-1, norm="forward"), cutoff)


def dealiased_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Truncated product Pi_N(f*g) at the common cutoff N = max(f.N, g.N).

    The coefficients agree with the exact convolution of the inputs on
    |k| <= N; no aliasing error is committed for band-limited inputs.
    """
    f, g = _align(f, g)
    m = _pow2_grid_size(f.cutoff)
    vals = _to_grid(np.stack([f.coeffs, g.coeffs]), f.cutoff, m)
    return SpectralField(f.cutoff, _from_grid(vals[0] * vals[1], f.cutoff))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm sqrt(2 pi sum_k (1 + k^2)^s |c_k|^2); s = 0 is the L^2 norm."""
    k = f.frequencies().astype(float)
    w = (1.0 + k * k) ** s
    return float(np.sqrt(2.0 * np.pi * np.sum(w * np.abs(f.coeffs) ** 2)))


def l2_error(f: SpectralField, g: SpectralField) -> float:
    """L^2 distance ||f - g||; mismatched cutoffs are aligned by zero extension."""
    return sobolev_norm(f - g, 0.0)


def save_field(f: SpectralField, path) -> None:
    """Write the text form: header line "N <cutoff>", then one line "k re im"
    per coefficient in ascending k, floats in shortest round-trip form."""
    lines = [f"N {f.cutoff}"]
    for k, c in zip(f.frequencies(), f.coeffs):
        lines.append(f"{int(k)} {float(c.real)!r} {float(c.imag)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path) -> SpectralField:
    """Read the text form written by save_field."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw or not raw[0].startswith("N "):
        raise ValueError(f"{path}: missing 'N <cutoff>' header")
    try:
        cutoff = int(raw[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed header {raw[0]!r}") from exc
    body = raw[1:]
    if len(body) != 2 * cutoff + 1:
        raise ValueError(
            f"{path}: expected {2 * cutoff + 1} coefficient lines, got {len(body)}"
        )
    arr = np.empty(2 * cutoff + 1, dtype=np.complex128)
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}: malformed coefficient line {line!r}")
        k = int(parts[0])
        if k != i - cutoff:
            raise ValueError(f"{path}: expected frequency {i - cutoff}, got {k}")
        arr[i] = complex(float(parts[1]), float(parts[2]))
    return SpectralField(cutoff, arr)
