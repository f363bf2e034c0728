"""Linear precoders with unit-norm columns (equal per-user power)."""
from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix
from .linalg import RANK_TOLERANCE, SingularChannelError, right_pseudo_inverse

ZERO_FORCING = "zero-forcing"
REGULARIZED = "regularized"


@dataclass(frozen=True, eq=False)
class Precoder:
    """N x U beamforming weights; column u is w_u.

    ``kind`` records how the weights were built so that evaluators which
    rely on zero-forcing nulls can refuse other precoders.
    """

    weights: np.ndarray
    kind: str
    channel: np.ndarray

    @property
    def n_users(self):
        return self.weights.shape[1]

    def gains(self):
        """Matrix of effective gains <h_u, w_v> = (H W)[u, v]."""
        return self.channel @ self.weights


def _channel_values(H):
    if isinstance(H, ChannelMatrix):
        return H.values
    return np.atleast_2d(np.asarray(H, dtype=complex))


def _normalize(W, H):
    W = W / np.linalg.norm(W, axis=0, keepdims=True)
    # remove the per-column phase so that <h_u, w_u> is real positive
    diag = np.einsum("un,nu->u", H, W)
    W = W * (np.abs(diag) / diag)[None, :]
    W.setflags(write=False)
    return W


def zero_forcing(H, rtol=RANK_TOLERANCE):
    """Zero-forcing precoder from the right pseudo-inverse of ``H``.

    Raises :class:`~cohvol.linalg.SingularChannelError` for rank-deficient
    channels.
    """
    values = _channel_values(H)
    W = right_pseudo_inverse(values, rtol=rtol)
    return Precoder(_normalize(W, values), ZERO_FORCING, values)


def regularized(H, noise_power):
    """MMSE-style regularized precoder, W ~ H^H (H H^H + N_o I)^{-1}.

    Provided as an alternative; none of the presets use it.
    """
    values = _channel_values(H)
    U = values.shape[0]
    if U > values.shape[1]:
        raise ValueError("regularized precoding needs N >= U")
    gram = values @ values.conj().T + noise_power * np.eye(U)
    W = values.conj().T @ np.linalg.solve(gram, np.eye(U))
    return Precoder(_normalize(W, values), REGULARIZED, values)


def snr_at_origin(H, W, u, noise_power):
    """|<h_u, w_u>|^2 / N_o: the SINR at the nominal position under ZF."""
    values = _channel_values(H)
    weights = W.weights if isinstance(W, Precoder) else np.asarray(W)
    gain = values[u] @ weights[:, u]
    return float(abs(gain) ** 2 / noise_power)


def leakage(precoder):
    """Largest normalized cross-gain |<h_u, w_v>| / (|h_u| |w_v|), v != u."""
    H = precoder.channel
    G = np.abs(H @ precoder.weights)
    G = G / np.linalg.norm(H, axis=1)[:, None] / np.linalg.norm(precoder.weights, axis=0)[None, :]
    np.fill_diagonal(G, 0.0)
    return float(G.max()) if G.size > 1 else 0.0


__all__ = ["Precoder", "zero_forcing", "regularized", "snr_at_origin", "leakage",
           "SingularChannelError", "ZERO_FORCING", "REGULARIZED"]
