"""Numpy implementations of the numerical kernels.

These are the reference versions; ``_ckernels.pyx`` must agree with them
bit-for-bit up to floating point rounding.  Qubit ``q`` is bit ``q`` of the
basis index (least significant first).
"""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 20


def _split(amps: np.ndarray, q: int) -> np.ndarray:
    n = amps.shape[0]
    return amps.reshape(n >> (q + 1), 2, 1 << q)


def z_diagonal(masks: np.ndarray, coeffs: np.ndarray, n_qubits: int) -> np.ndarray:
    """``sum_t coeffs[t] * (-1)**popcount(masks[t] & i)`` for every basis index ``i``.

    Few terms are accumulated one by one; otherwise the coefficients are
    scattered onto their supports and Walsh-Hadamard transformed.
    """
    size = 1 << n_qubits
    out = np.zeros(size, dtype=np.float64)
    if len(masks) <= n_qubits:
        idx = np.arange(size, dtype=np.uint64)
        for mask, c in zip(masks, coeffs):
            parity = np.bitwise_count(idx & np.uint64(mask)) & 1
            out += c * (1.0 - 2.0 * parity)
        return out
    np.add.at(out, np.asarray(masks, dtype=np.int64), np.asarray(coeffs, dtype=np.float64))
    for q in range(n_qubits):
        view = _split(out, q)
        a = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = a - view[:, 1, :]
    return out


def apply_cz(amps: np.ndarray, a: int, b: int) -> None:
    if a > b:
        a, b = b, a
    n = amps.shape[0]
    view = amps.reshape(n >> (b + 1), 2, 1 << (b - a - 1), 2, 1 << a)
    view[:, 1, :, 1, :] *= -1.0


def apply_x(amps: np.ndarray, q: int) -> None:
    view = _split(amps, q)
    view[:] = view[:, ::-1, :].copy()


def apply_z(amps: np.ndarray, q: int) -> None:
    _split(amps, q)[:, 1, :] *= -1.0


def apply_rx(amps: np.ndarray, q: int, beta: float) -> None:
    """In place ``exp(-i beta X)`` on qubit ``q``."""
    view = _split(amps, q)
    c, s = np.cos(beta), np.sin(beta)
    lo = view[:, 0, :].copy()
    hi = view[:, 1, :].copy()
    view[:, 0, :] = c * lo - 1j * s * hi
    view[:, 1, :] = c * hi - 1j * s * lo


def apply_phase(amps: np.ndarray, diag: np.ndarray, gamma: float) -> None:
    """In place multiplication by ``exp(-i gamma diag)``."""
    amps *= np.exp(-1j * gamma * diag)


def project_out(amps: np.ndarray, q: int, c0: complex, c1: complex) -> tuple[np.ndarray, float]:
    """Contract qubit ``q`` with the bra ``conj(c0)<0| + conj(c1)<1|``.

    Returns the unnormalised reduced vector and its squared norm.
    """
    view = _split(amps, q)
    out = np.conj(c0) * view[:, 0, :] + np.conj(c1) * view[:, 1, :]
    out = out.reshape(-1)
    return out, float(np.vdot(out, out).real)


def cut_values(
    n_vertices: int,
    k: int,
    us: np.ndarray,
    vs: np.ndarray,
    ws: np.ndarray,
    start: int,
    count: int,
) -> np.ndarray:
    """Cut value of assignments ``start .. start+count-1`` in base-``k`` order.

    Vertex ``j`` carries digit ``j`` (least significant first).
    """
    out = np.empty(count, dtype=np.float64)
    for lo in range(0, count, _CHUNK):
        hi = min(count, lo + _CHUNK)
        idx = np.arange(start + lo, start + hi, dtype=np.int64)
        digits = np.empty((n_vertices, hi - lo), dtype=np.int64)
        rest = idx
        for j in range(n_vertices):
            digits[j] = rest % k
            rest = rest // k
        vals = np.zeros(hi - lo, dtype=np.float64)
        for u, v, w in zip(us, vs, ws):
            vals += w * (digits[u] != digits[v])
        out[lo:hi] = vals
    return out
