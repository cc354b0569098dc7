"""Spatial averaging kernels: top-hat and delta limit, Fourier symbols, periodic convolution.

The top-hat kernel of half-width alpha is 1/(2*alpha) on [-alpha, alpha] and 0
elsewhere, so it has unit mass.  Its Fourier symbol is sin(kappa*alpha)/(kappa*alpha).
The delta kernel is the alpha -> 0 limit, with symbol identically 1.  Convolution
is done pseudospectrally using the analytic symbol, which avoids the sampling
error of the discontinuous top-hat profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IMAG_RESIDUE_TOL = 1e-12


class KernelError(ValueError):
    """Invalid kernel specification or unsupported kernel operation."""


class ConsistencyError(RuntimeError):
    """Internal numerical consistency violation (e.g. unexpectedly complex output)."""


@dataclass(frozen=True)
class KernelSpec:
    """Averaging kernel: kind is 'tophat' (with half-width alpha > 0) or 'delta'."""

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("tophat", "delta"):
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "tophat":
            if self.alpha is None or not self.alpha > 0:
                raise KernelError("top-hat kernel requires alpha > 0")
        elif self.alpha is not None:
            raise KernelError("delta kernel takes no alpha")

    def validate_for_domain(self, L: float):
        """Check that the kernel support fits inside a periodic domain of length L."""
        if self.kind == "tophat" and not 2 * self.alpha < L:
            raise KernelError(f"top-hat support 2*alpha={2 * self.alpha} must be < L={L}")

    @property
    def sup_norm(self) -> float:
        """L-infinity norm of the kernel; infinite for the delta kernel."""
        if self.kind == "delta":
            return np.inf
        return 1.0 / (2.0 * self.alpha)


def tophat(alpha: float) -> KernelSpec:
    return KernelSpec("tophat", alpha)


def delta() -> KernelSpec:
    return KernelSpec("delta")


def kernel_eval(spec: KernelSpec, x, L: float | None = None):
    """Pointwise kernel value at displacement x.

    If a domain length L is given, x is wrapped to the nearest-image distance on
    the torus first.  Only defined for the top-hat kernel.
    """
    if spec.kind == "delta":
        raise KernelError("delta kernel has no pointwise evaluation")
    x = np.asarray(x, dtype=float)
    if L is not None:
        x = np.mod(x + L / 2, L) - L / 2
    return np.where(np.abs(x) <= spec.alpha, 1.0 / (2.0 * spec.alpha), 0.0)


def kernel_fourier(spec: KernelSpec, kappa):
    """Real Fourier symbol K_hat(kappa); 1 at kappa=0 and for the delta kernel."""
    kappa = np.asarray(kappa, dtype=float)
    if spec.kind == "delta":
        return np.ones_like(kappa)
    z = kappa * spec.alpha
    return np.sinc(z / np.pi)  # sin(z)/z with the z=0 limit handled


def periodic_convolve(field: np.ndarray, spec: KernelSpec, grid) -> np.ndarray:
    """Circular convolution K * field via FFT with the analytic kernel symbol.

    Accepts a length-M array or an (N, M) stack of fields on the grid.
    """
    field = np.asarray(field, dtype=float)
    if field.shape[-1] != grid.M:
        raise ValueError(f"field length {field.shape[-1]} does not match grid size {grid.M}")
    if not np.all(np.isfinite(field)):
        raise ValueError("field contains non-finite values")
    if spec.kind == "delta":
        return field.copy()
    khat = kernel_fourier(spec, grid.kappa)
    out = np.fft.ifft(np.fft.fft(field, axis=-1) * khat, axis=-1)
    resid = np.max(np.abs(out.imag))
    scale = max(np.max(np.abs(out.real)), 1.0)
    if resid > IMAG_RESIDUE_TOL * scale:
        raise ConsistencyError(f"imaginary residue {resid:.3e} exceeds tolerance")
    return out.real
