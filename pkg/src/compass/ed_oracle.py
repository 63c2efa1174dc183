"""Dense exact-diagonalization reference for small chains (N <= 12).

Builds the literal spin Hamiltonians

    H(lam') = J * sum_j [ I^z_j I^z_{j+1} + lam' * I^x_j ]

with I^z, I^x Pauli matrices (not spin-1/2), either on a ring (the sum
runs j = 1..N with site N+1 identified with site 1, so N = 2 counts the
single bond twice) or on an open chain (sum to N-1).

Basis convention: z-basis bit strings, little-endian; bit j of the state
index is spin j, bit value 0 means I^z = +1.  This fixes golden files.

Everything here favours clarity over speed: dense real-symmetric
eigendecompositions only, N capped at 12 (matrix side 4096).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DerivedCouplings

MAX_DENSE_N = 12


@dataclass(frozen=True)
class SpinHamiltonian:
    """Dense spin Hamiltonian with its construction parameters."""

    N: int
    boundary: str
    matrix: np.ndarray


def build_spin_hamiltonian(
    N: int, J: float, lam_prime: float, boundary: str = "periodic"
) -> SpinHamiltonian:
    """Assemble the dense 2^N x 2^N Ising + transverse-field matrix.

    J may be negative here (the model-level J > 0 constraint lives in
    EnvironmentParams); the oracle uses that freedom to verify the
    sublattice-rotation invariance J -> -J.

    Raises
    ------
    ValueError
        If N < 2, N > 12 (memory guard), or boundary is not
        "periodic" / "open".
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if N > MAX_DENSE_N:
        raise ValueError(
            f"N = {N} exceeds the dense-oracle cap of {MAX_DENSE_N} "
            f"(matrix side 2^{N}); use the free-fermion engine instead"
        )
    if boundary not in ("periodic", "open"):
        raise ValueError(f"boundary must be 'periodic' or 'open', got {boundary!r}")

    dim = 1 << N
    idx = np.arange(dim)
    # I^z eigenvalues per site: bit 0 -> +1, bit 1 -> -1.
    sz = 1.0 - 2.0 * (((idx[:, None] >> np.arange(N)[None, :]) & 1).astype(float))

    H = np.zeros((dim, dim))
    n_bonds = N if boundary == "periodic" else N - 1
    diag = np.zeros(dim)
    for j in range(n_bonds):
        diag += sz[:, j] * sz[:, (j + 1) % N]
    H[idx, idx] = J * diag

    for j in range(N):
        flipped = idx ^ (1 << j)
        H[flipped, idx] += J * lam_prime

    return SpinHamiltonian(N=N, boundary=boundary, matrix=H)


def apply_parity(state: np.ndarray) -> np.ndarray:
    """Apply the parity operator prod_j I^x_j (flip every spin)."""
    dim = state.shape[0]
    return state[np.arange(dim) ^ (dim - 1)]


def ground_state(H: SpinHamiltonian) -> np.ndarray:
    """Normalized minimal eigenvector of H.

    The Hamiltonian commutes with the parity operator prod_j I^x_j.  If
    the lowest level is (numerically) degenerate, the eigensolver may
    return an arbitrary mixture of parity sectors; the tie is broken by
    returning the +1-parity representative, matching the even-sector
    choice of the free-fermion engine.
    """
    evals, evecs = np.linalg.eigh(H.matrix)
    scale = max(1.0, float(evals[-1] - evals[0]))
    members = np.flatnonzero(evals - evals[0] <= 1e-10 * scale)
    if members.size == 1:
        return evecs[:, 0]
    # Diagonalize parity restricted to the degenerate subspace and pick
    # the +1 eigenvector.
    sub = evecs[:, members]
    flipped = np.column_stack([apply_parity(sub[:, i]) for i in range(members.size)])
    p_sub = sub.T @ flipped
    p_evals, p_evecs = np.linalg.eigh(0.5 * (p_sub + p_sub.T))
    pick = int(np.argmax(p_evals))
    vec = sub @ p_evecs[:, pick]
    return vec / np.linalg.norm(vec)


def thermal_state(H: SpinHamiltonian, T: float) -> np.ndarray:
    """Canonical density matrix exp(-H/T)/Z via eigendecomposition.

    Raises
    ------
    ValueError
        If T <= 0 (use ground_state for the pure zero-temperature case).
    """
    if T <= 0:
        raise ValueError(f"T must be > 0 for a thermal state, got {T}")
    evals, evecs = np.linalg.eigh(H.matrix)
    w = np.exp(-(evals - evals[0]) / T)
    w /= w.sum()
    return (evecs * w) @ evecs.T


def trace_echo_factor(
    h_plus: np.ndarray,
    h_minus: np.ndarray,
    rho: np.ndarray,
    times: np.ndarray,
) -> np.ndarray:
    """Exact tr[U+ rho (U-)^dag] with U± = exp(-i h± t), for every t.

    Works for any Hermitian pair (h_plus, h_minus) and density matrix;
    the test suite also feeds it constant-shifted Hamiltonians to verify
    that the electron Zeeman constants drop out of the echo.
    """
    ep, vp = np.linalg.eigh(h_plus)
    em, vm = np.linalg.eigh(h_minus)
    # z(t) = sum_pq W_pq exp(-i (ep_p - em_q) t)
    W = (vp.T @ rho @ vm) * (vm.T @ vp).T
    phase_p = np.exp(-1j * np.outer(ep, times))
    phase_m = np.exp(1j * np.outer(em, times))
    return np.einsum("pt,pq,qt->t", phase_p, W, phase_m, optimize=True)


class EDEchoContext:
    """Prepared dense-oracle echo for one parameter point.

    Precomputes the three Hamiltonians plus the initial state so that
    repeated time-grid evaluations (quadrature refinement) only pay for
    the phase sums.
    """

    def __init__(
        self,
        N: int,
        J: float,
        couplings: DerivedCouplings,
        T: float = 0.0,
        boundary: str = "periodic",
    ):
        if T < 0:
            raise ValueError(f"T must be >= 0, got {T}")
        self.N = N
        self.J = J
        self.couplings = couplings
        self.T = T
        self.boundary = boundary

        h0 = build_spin_hamiltonian(N, J, couplings.lam, boundary)
        hp = build_spin_hamiltonian(N, J, couplings.lambda_plus, boundary)
        hm = build_spin_hamiltonian(N, J, couplings.lambda_minus, boundary)
        if T == 0:
            psi = ground_state(h0)
            rho = np.outer(psi, psi)
        else:
            rho = thermal_state(h0, T)

        ep, vp = np.linalg.eigh(hp.matrix)
        em, vm = np.linalg.eigh(hm.matrix)
        self._ep = ep
        self._em = em
        self._W = (vp.T @ rho @ vm) * (vm.T @ vp).T
        # Highest beat frequency between the two evolutions, for
        # quadrature grid sizing.
        self._max_frequency = (np.ptp(ep) + np.ptp(em)) / (2.0 * np.pi)

    @property
    def max_frequency(self) -> float:
        return self._max_frequency

    def trace_factor(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        phase_p = np.exp(-1j * np.outer(self._ep, times))
        phase_m = np.exp(1j * np.outer(self._em, times))
        return np.einsum("pt,pq,qt->t", phase_p, self._W, phase_m, optimize=True)

    def echo(self, times: np.ndarray) -> np.ndarray:
        z = self.trace_factor(times)
        return np.abs(z) ** 2

    def __call__(self, times: np.ndarray) -> np.ndarray:
        return self.echo(times)


def echo_ed(
    N: int,
    J: float,
    couplings: DerivedCouplings,
    T: float,
    times: np.ndarray,
    boundary: str = "periodic",
) -> tuple[np.ndarray, np.ndarray]:
    """Exact echo L(t) = |tr[U+ rho (U-)^dag]|^2 and the complex factor.

    rho is the ground projector of H(couplings.lam) for T = 0 and the
    canonical thermal state otherwise.
    """
    ctx = EDEchoContext(N, J, couplings, T, boundary)
    z = ctx.trace_factor(np.asarray(times, dtype=float))
    return np.abs(z) ** 2, z
