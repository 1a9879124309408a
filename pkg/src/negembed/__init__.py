"""Fourier-analytic tests of embedding normed spaces into L_{-p}."""
__version__ = "0.1.0"

from .config import (  # noqa: E402
    DomainError,
    InfeasibleCertificateError,
    MomentNotFiniteError,
    NegembedError,
    NonConvergenceError,
    PoleError,
    QuadratureConfig,
    ScanConfig,
)

__all__ = [
    "DomainError",
    "InfeasibleCertificateError",
    "MomentNotFiniteError",
    "NegembedError",
    "NonConvergenceError",
    "PoleError",
    "QuadratureConfig",
    "ScanConfig",
    "__version__",
]
