"""Complex linear-algebra helpers.

Inner products follow the conjugate-first convention ``<a, b> = a^H b``
everywhere in the package.
"""
import numpy as np

RANK_TOLERANCE = 1e-10


class SingularChannelError(np.linalg.LinAlgError):
    """Raised when a channel matrix is (numerically) rank deficient."""

    def __init__(self, condition, message=None):
        self.condition = condition
        super().__init__(message or f"channel matrix is rank deficient (condition number {condition:.3e})")


def condition_number(H):
    s = np.linalg.svd(np.asarray(H), compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def right_pseudo_inverse(H, rtol=RANK_TOLERANCE):
    """Minimum-norm right inverse ``H^H (H H^H)^{-1}`` of a wide matrix.

    Computed from the SVD rather than by inverting the Gram matrix. Raises
    :class:`SingularChannelError` if the smallest singular value is below
    ``rtol`` times the largest.
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    rows, cols = H.shape
    if rows > cols:
        raise ValueError(f"right pseudo-inverse needs rows <= cols, got {rows}x{cols}")
    u, s, vh = np.linalg.svd(H, full_matrices=False)
    if s[-1] <= rtol * s[0]:
        cond = np.inf if s[-1] == 0.0 else s[0] / s[-1]
        raise SingularChannelError(cond)
    return (vh.conj().T / s) @ u.conj().T


def hermitian_inner(a, b):
    """``sum(conj(a) * b)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))
