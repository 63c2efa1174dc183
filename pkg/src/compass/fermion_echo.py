"""Loschmidt echo of a periodic transverse-field Ising ring via free fermions.

The ring H(lam') = J sum_j [I^z I^z + lam' I^x] (J > 0, N even) maps to
free fermions after a sublattice rotation I^z_j -> (-1)^j I^z_j (which
flips the zz sign on the bipartite ring and leaves the echo invariant)
and a Jordan-Wigner transformation.  Spin parity prod_j I^x_j becomes
fermion-number parity: even-parity states live on the antiperiodic
momentum grid k = (2j-1) pi / N, odd-parity states on the periodic grid
2 pi j / N (whose k = 0, pi modes are unpaired).

Within one mode pair (k, -k) the even-occupation block is, up to the
pair's mean energy (which is independent of lam' and cancels between
the forward and backward evolutions),

    h(k, lam') = 2J [ (lam' - cos k) * sz + sin k * sx ]

with eigenvalues +/- eps_k(lam'), eps_k = 2J sqrt(1 + lam'^2
- 2 lam' cos k); the two single-occupancy levels sit exactly at that
mean, i.e. midway in the even gap.

Zero temperature uses the even-sector ground state (the true ground
state).  Finite temperature supports two constructions:

* "exact": the canonical state exp(-H/T)/Z of the full spin ring,
  evaluated as the parity-projected combination of both momentum
  sectors.  All four required traces factorize over modes, so this
  stays a mode-product computation and agrees with dense
  diagonalization to roundoff at any N and T.  It is the default: in
  the ordered phase the opposite-parity partner state lies far below
  the quasiparticle gap and carries O(1) thermal weight, which a
  single-sector treatment cannot represent.
* "mode_pair": the per-mode-pair canonical form rho_k ~ exp(-H_k/T) on
  the 4-dimensional mode-pair space of the antiperiodic sector.  This
  is the textbook single-sector treatment; its small-N deviation from
  the exact thermal state is measured in the validation suite.

Echo factors come from the closed-form 2x2 eigendecomposition (never
from time stepping) and are accumulated in log magnitude plus phase:
near criticality the product over N/2 modes underflows double
precision long before it stops being meaningful.  On uniform time
grids the per-mode phases advance by complex-rotation recurrences in a
compiled kernel; arbitrary grids fall back to a vectorized numpy path
computing the same quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DerivedCouplings

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

# Modes are processed in fixed-size chunks in the numpy path so the
# (modes x times) work arrays stay cache-friendly; the accumulation
# order is fixed by ascending momentum, independent of chunking and
# thread count.
_MODE_CHUNK = 128

_CONSTRUCTIONS = ("exact", "mode_pair")


@dataclass(frozen=True, eq=False)
class ModeGrid:
    """Antiperiodic-sector positive momenta of an even ring."""

    N: int
    momenta: np.ndarray


@dataclass(frozen=True, eq=False)
class ModeBlock:
    """One momentum's 2x2 blocks and single-occupancy energies.

    h_init / h_plus / h_minus are the even-occupation blocks of
    H(lam), H(lam+), H(lam-) in the centered convention (eigenvalues
    exactly +/- eps_k).  a_plus / a_minus are the bare single-occupancy
    diagonal energies 2J(lam± - cos k); relative to each block's
    removed mean they sit at zero, which is how the thermal kernel
    weights them.  Their difference 2J(lam+ - lam-) is k-independent.
    """

    k: float
    h_init: np.ndarray
    h_plus: np.ndarray
    h_minus: np.ndarray
    a_plus: float
    a_minus: float


@dataclass(frozen=True, eq=False)
class EchoSeries:
    """Echo samples |D(t)| on a time grid, with optional complex D(t).

    For a pair of identical environments the decoherence factor D is
    real and equals L(t), so `values` is the Loschmidt echo; for
    distinct environments `d_values` holds the complex factor and
    `values` its magnitude.
    """

    times: np.ndarray
    values: np.ndarray
    d_values: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.size == 0:
            raise ValueError("empty time grid")
        if t.shape != v.shape:
            raise ValueError("times and values must have matching shapes")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise ValueError("echo values outside [0, 1] beyond roundoff slack")
        if t[0] == 0.0 and abs(v[0] - 1.0) > 1e-12:
            raise ValueError(f"echo at t = 0 must be 1, got {v[0]}")
        if self.d_values is not None:
            d = np.asarray(self.d_values)
            if d.shape != t.shape:
                raise ValueError("d_values grid mismatch")
            if np.any(np.abs(d) > 1 + 1e-12):
                raise ValueError("|D(t)| exceeds 1 beyond roundoff slack")
            if not np.allclose(np.abs(d), v, atol=1e-12):
                raise ValueError("values must equal |d_values|")


def build_mode_grid(N: int) -> ModeGrid:
    """Positive antiperiodic momenta (2j-1) pi / N, j = 1..N/2."""
    if N < 2 or N % 2 != 0:
        raise ValueError(
            f"free-fermion engine needs even N >= 2, got {N}; "
            f"use ed_oracle for this N"
        )
    j = np.arange(1, N // 2 + 1)
    return ModeGrid(N=N, momenta=(2 * j - 1) * math.pi / N)


def _axis(lam_prime: float, k: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unnormalized Bloch axis (x, z) of the even block and its norm."""
    x = np.sin(k)
    z = lam_prime - np.cos(k)
    return x, z, np.sqrt(x * x + z * z)


def dispersion(lam_prime: float, k, J: float) -> np.ndarray:
    """Quasiparticle energy eps_k = 2J sqrt(1 + lam'^2 - 2 lam' cos k)."""
    _, _, n = _axis(lam_prime, np.asarray(k, dtype=float))
    return 2.0 * J * n


def build_mode_block(k: float, couplings: DerivedCouplings, J: float) -> ModeBlock:
    """Assemble one momentum's ModeBlock; k must lie in (0, pi)."""
    if not 0.0 < k < math.pi:
        raise ValueError(f"momentum must lie in (0, pi), got {k}")

    def block(lam_prime: float) -> np.ndarray:
        x, z, _ = _axis(lam_prime, np.asarray(k, dtype=float))
        return 2.0 * J * np.array([[z, x], [x, -z]])

    ck = math.cos(k)
    return ModeBlock(
        k=k,
        h_init=block(couplings.lam),
        h_plus=block(couplings.lambda_plus),
        h_minus=block(couplings.lambda_minus),
        a_plus=2.0 * J * (couplings.lambda_plus - ck),
        a_minus=2.0 * J * (couplings.lambda_minus - ck),
    )


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _uniform_products(u, v, c1, c2, c3, c4, c5, t0, dt, nt, need_signed):
        """Per-time products of (even ± odd) mode factors on a uniform grid.

        The per-mode factor is
            z_m(t) = c1 cos(v t) + c2 cos(u t) + c5
                     + i [c3 sin(u t) + c4 sin(v t)]
        and the signed variant flips c5.  Phases advance by complex
        rotations, one multiply per mode and step; running products are
        renormalized periodically into a log offset to dodge underflow.
        Returns (logmag_plain, phase_plain, logmag_signed, phase_signed).
        """
        pr = np.ones(nt)
        pi = np.zeros(nt)
        sr = np.ones(nt)
        si = np.zeros(nt)
        off_p = np.zeros(nt)
        off_s = np.zeros(nt)
        n_modes = u.size
        for m in range(n_modes):
            ur = math.cos(u[m] * t0)
            ui = math.sin(u[m] * t0)
            usr = math.cos(u[m] * dt)
            usi = math.sin(u[m] * dt)
            vr = math.cos(v[m] * t0)
            vi = math.sin(v[m] * t0)
            vsr = math.cos(v[m] * dt)
            vsi = math.sin(v[m] * dt)
            a1 = c1[m]
            a2 = c2[m]
            a3 = c3[m]
            a4 = c4[m]
            a5 = c5[m]
            for it in range(nt):
                re = a1 * vr + a2 * ur
                im = a3 * ui + a4 * vi
                zr = re + a5
                t_r = pr[it] * zr - pi[it] * im
                t_i = pr[it] * im + pi[it] * zr
                pr[it] = t_r
                pi[it] = t_i
                if need_signed:
                    zr = re - a5
                    t_r = sr[it] * zr - si[it] * im
                    t_i = sr[it] * im + si[it] * zr
                    sr[it] = t_r
                    si[it] = t_i
                t_r = ur * usr - ui * usi
                ui = ur * usi + ui * usr
                ur = t_r
                t_r = vr * vsr - vi * vsi
                vi = vr * vsi + vi * vsr
                vr = t_r
            if (m & 63) == 63 or m == n_modes - 1:
                for it in range(nt):
                    m2 = pr[it] * pr[it] + pi[it] * pi[it]
                    if m2 > 0.0:
                        half_log = 0.5 * math.log(m2)
                        scale = math.exp(-half_log)
                        off_p[it] += half_log
                        pr[it] *= scale
                        pi[it] *= scale
                    else:
                        off_p[it] = -np.inf
                        pr[it] = 1.0
                        pi[it] = 0.0
                    if need_signed:
                        m2 = sr[it] * sr[it] + si[it] * si[it]
                        if m2 > 0.0:
                            half_log = 0.5 * math.log(m2)
                            scale = math.exp(-half_log)
                            off_s[it] += half_log
                            sr[it] *= scale
                            si[it] *= scale
                        else:
                            off_s[it] = -np.inf
                            sr[it] = 1.0
                            si[it] = 0.0
        phase_p = np.empty(nt)
        phase_s = np.empty(nt)
        for it in range(nt):
            phase_p[it] = math.atan2(pi[it], pr[it])
            phase_s[it] = math.atan2(si[it], sr[it]) if need_signed else 0.0
        return off_p, phase_p, off_s, phase_s


def _uniform_grid_params(times: np.ndarray) -> tuple[float, float] | None:
    """(t0, dt) when the grid is uniform to within 1e-12 absolute, else None."""
    if times.size < 2:
        return None
    t0 = float(times[0])
    dt = float((times[-1] - t0) / (times.size - 1))
    if dt <= 0:
        return None
    ideal = t0 + dt * np.arange(times.size)
    tol = 1e-12 * max(1.0, abs(float(times[-1])))
    if np.max(np.abs(times - ideal)) <= tol:
        return t0, dt
    return None


class _PairModes:
    """Geometry and thermal weights of one momentum grid's paired modes.

    The per-pair trace splits into an even-block part and the inert odd
    doublet; both are normalized here by the dominant Boltzmann weight
    exp(+eps0/T) of the even ground level, whose accumulated log is
    kept in ``log_scale`` for cross-sector comparisons.
    """

    def __init__(self, momenta: np.ndarray, J: float, couplings: DerivedCouplings, T: float):
        self.n_modes = momenta.size
        x0, z0, n0 = _axis(couplings.lam, momenta)
        xp, zp, npl = _axis(couplings.lambda_plus, momenta)
        xm, zm, nmi = _axis(couplings.lambda_minus, momenta)

        self.eps0 = 2.0 * J * n0
        self.eps_plus = 2.0 * J * npl
        self.eps_minus = 2.0 * J * nmi

        if couplings.lambda_plus == couplings.lambda_minus:
            # Identical branch Hamiltonians: unit overlaps and zero beat
            # frequency make every factor exactly 1.
            dot_pm = np.ones_like(momenta)
            dot_p0 = (xp * x0 + zp * z0) / (npl * n0)
            dot_m0 = dot_p0.copy()
        else:
            dot_pm = (xp * xm + zp * zm) / (npl * nmi)
            dot_p0 = (xp * x0 + zp * z0) / (npl * n0)
            dot_m0 = (xm * x0 + zm * z0) / (nmi * n0)
        self.dot_pm = dot_pm
        self.dot_p0 = dot_p0
        self.dot_m0 = dot_m0

        if T == 0:
            w_excited = np.zeros_like(momenta)
            w_odd = np.zeros_like(momenta)
            self.log_scale = 0.0
        else:
            arg = self.eps0 / T
            w_excited = np.exp(-2.0 * arg)
            w_odd = np.exp(-arg)
            self.log_scale = float(arg.sum())
        self.w_excited = w_excited
        self.w_odd = w_odd

        # Coefficients of the per-mode factor in beat-frequency form:
        # z = c1 cos(vt) + c2 cos(ut) + c5 + i [c3 sin(ut) + c4 sin(vt)]
        # with u = eps+ + eps-, v = eps+ - eps-.
        self.u = self.eps_plus + self.eps_minus
        self.v = self.eps_plus - self.eps_minus
        self.c1 = 0.5 * (1.0 + w_excited) * (1.0 + dot_pm)
        self.c2 = 0.5 * (1.0 + w_excited) * (1.0 - dot_pm)
        self.c3 = 0.5 * (1.0 - w_excited) * (dot_p0 - dot_m0)
        self.c4 = 0.5 * (1.0 - w_excited) * (dot_p0 + dot_m0)
        self.c5 = 2.0 * w_odd

    def chunk_traces(self, sl: slice, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Normalized even-block traces and odd weights for one chunk.

        Returns (even, odd): even has shape (chunk, nt); odd is the
        t-independent odd-doublet weight, broadcastable against it.
        The full per-pair trace is even + odd, the parity-signed one
        even - odd.
        """
        u = self.u[sl, None] * times[None, :]
        v = self.v[sl, None] * times[None, :]
        eu = np.exp(1j * u)
        ev = np.exp(1j * v)
        even = (
            self.c1[sl, None] * ev.real
            + self.c2[sl, None] * eu.real
            + 1j * (self.c3[sl, None] * eu.imag + self.c4[sl, None] * ev.imag)
        )
        return even, self.c5[sl, None]

    def log_products(self, times: np.ndarray, need_signed: bool) -> tuple[np.ndarray, np.ndarray]:
        """Complex logs of prod_pairs (even + odd) and (even - odd)."""
        grid = _uniform_grid_params(times) if _HAVE_NUMBA else None
        if grid is not None:
            off_p, ph_p, off_s, ph_s = _uniform_products(
                self.u, self.v, self.c1, self.c2, self.c3, self.c4, self.c5,
                grid[0], grid[1], times.size, need_signed,
            )
            return off_p + 1j * ph_p, off_s + 1j * ph_s

        plain = np.zeros(times.size, dtype=complex)
        signed = np.zeros(times.size, dtype=complex)
        for lo in range(0, self.n_modes, _MODE_CHUNK):
            even, odd = self.chunk_traces(slice(lo, min(lo + _MODE_CHUNK, self.n_modes)), times)
            plain += _sum_logs(even + odd)
            if need_signed:
                signed += _sum_logs(even - odd)
        return plain, signed


def _sum_logs(z: np.ndarray) -> np.ndarray:
    """Sum of complex logs along the mode axis of a (modes, nt) array."""
    mag2 = z.real * z.real + z.imag * z.imag
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(mag2).sum(axis=0) + 1j * np.arctan2(z.imag, z.real).sum(axis=0)


class FermionEchoContext:
    """Prepared per-parameter-point mode data, immutable after setup.

    All k-dependent geometry (energies and Bloch-axis dot products of
    the initial and the two branch Hamiltonians) is computed once and
    reused for every time grid; evaluations at distinct times are
    independent, so instances are safe to share across threads.
    """

    def __init__(
        self,
        N: int,
        J: float,
        couplings: DerivedCouplings,
        T: float = 0.0,
        construction: str = "exact",
    ):
        if T < 0:
            raise ValueError(f"T must be >= 0, got {T}")
        if construction not in _CONSTRUCTIONS:
            raise ValueError(
                f"construction must be one of {_CONSTRUCTIONS}, got {construction!r}"
            )
        self.N = N
        self.J = J
        self.couplings = couplings
        self.T = T
        self.construction = construction

        self._ap = _PairModes(build_mode_grid(N).momenta, J, couplings, T)
        if T > 0 and construction == "exact":
            m = np.arange(1, N // 2)
            self._p = _PairModes(2.0 * m * math.pi / N, J, couplings, T)
        else:
            self._p = None

    @property
    def max_frequency(self) -> float:
        """Fastest echo oscillation, max_k eps_k(lambda_plus) / pi."""
        return float(self._ap.eps_plus.max()) / math.pi

    def mode_factors(self, times) -> np.ndarray:
        """Antiperiodic-sector per-mode factors, shape (N/2, nt).

        At T = 0 these are the ground-state overlaps; at T > 0 they are
        the normalized mode-pair traces of the "mode_pair" construction
        (the exact construction has no single-product form).
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        ap = self._ap
        out = np.empty((ap.n_modes, times.size), dtype=complex)
        for lo in range(0, ap.n_modes, _MODE_CHUNK):
            sl = slice(lo, min(lo + _MODE_CHUNK, ap.n_modes))
            even, odd = ap.chunk_traces(sl, times)
            norm = (1.0 + ap.w_excited[sl, None] + odd) if self.T > 0 else 1.0
            out[sl] = (even + odd) / norm
        return out

    def trace_factor(self, times) -> np.ndarray:
        """Complex bath factor tr[U+ rho (U-)^dag] for every t."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.T == 0 or self._p is None:
            # Single product over the antiperiodic grid (pure ground
            # state, or the mode_pair thermal approximation).
            log_z, _ = self._ap.log_products(times, need_signed=False)
            if self.T > 0:
                log_z -= np.log(1.0 + self._ap.w_excited + 2.0 * self._ap.w_odd).sum()
            with np.errstate(over="ignore"):
                return np.exp(log_z)
        return self._exact_thermal_factor(times)

    def _sector_logs(self, times: np.ndarray) -> np.ndarray:
        """Complex logs of the four parity-resolved sector products.

        Rows: [AP plain, AP parity-signed, P plain, P parity-signed];
        the canonical trace is (row0 + row1 + row2 - row3) / (2 Z) with
        2 Z read off at t = 0.  Each row carries its grid's Boltzmann
        log-scale so the rows are directly comparable.
        """
        ap, p = self._ap, self._p
        logs = np.empty((4, times.size), dtype=complex)
        ap_plain, ap_signed = ap.log_products(times, need_signed=True)
        logs[0] = ap_plain + ap.log_scale
        logs[1] = ap_signed + ap.log_scale
        p_plain, p_signed = p.log_products(times, need_signed=True)
        u_scale, u_plain, u_signed = self._unpaired_logs(times)
        base = p.log_scale + u_scale
        logs[2] = p_plain + u_plain + base
        logs[3] = p_signed + u_signed + base
        return logs

    def _unpaired_logs(self, times: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Log factors of the unpaired k = 0, pi modes of the periodic grid.

        In the fermion frame the k = 0 (resp. pi) occupation energies
        for field lam' are J lam' when empty and -J(lam' + 2) (resp.
        J(2 - lam')) when occupied; the empty/occupied phases between
        the two branch evolutions are exp(-/+ i J (lam+ - lam-) t).
        Returns (log weight scale, log plain product, log signed product).
        """
        c = self.couplings
        J = self.J
        beta = 1.0 / self.T
        split = c.lambda_plus - c.lambda_minus
        ph_empty = np.exp(-1j * J * split * times)
        ph_occ = np.conj(ph_empty)

        e0_empty = -beta * J * c.lam
        e0_occ = beta * J * (c.lam + 2.0)
        epi_empty = e0_empty
        epi_occ = -beta * J * (2.0 - c.lam)
        m0 = max(e0_empty, e0_occ)
        mpi = max(epi_empty, epi_occ)

        f0_even = math.exp(e0_empty - m0) * ph_empty
        f0_odd = math.exp(e0_occ - m0) * ph_occ
        fpi_even = math.exp(epi_empty - mpi) * ph_empty
        fpi_odd = math.exp(epi_occ - mpi) * ph_occ

        plain = (f0_even + f0_odd) * (fpi_even + fpi_odd)
        signed = (f0_even - f0_odd) * (fpi_even - fpi_odd)

        def clog(z):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(z)) + 1j * np.arctan2(z.imag, z.real)

        return m0 + mpi, clog(plain), clog(signed)

    def _exact_thermal_factor(self, times: np.ndarray) -> np.ndarray:
        logs = self._sector_logs(times)
        logs0 = self._sector_logs(np.zeros(1))
        ref = float(np.max(logs0.real))
        signs = np.array([1.0, 1.0, 1.0, -1.0])
        with np.errstate(over="ignore"):
            den = (signs * np.exp(logs0[:, 0].real - ref) * np.cos(logs0[:, 0].imag)).sum()
            num = (signs[:, None] * np.exp(logs - ref)).sum(axis=0)
        return num / den

    def echo(self, times) -> np.ndarray:
        """L(t) = |trace_factor|^2, exactly 1 whenever the branches coincide."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.T == 0:
            # Cheaper zero-temperature path: magnitudes only.
            log_z, _ = self._ap.log_products(times, need_signed=False)
            with np.errstate(over="ignore"):
                return np.exp(2.0 * log_z.real)
        return np.abs(self.trace_factor(times)) ** 2

    def __call__(self, times) -> np.ndarray:
        return self.echo(times)


def echo_pure(N: int, J: float, couplings: DerivedCouplings, times) -> np.ndarray | float:
    """Zero-temperature echo from the even-sector ground state of H(lam)."""
    ctx = FermionEchoContext(N, J, couplings, T=0.0)
    out = ctx.echo(times)
    return float(out[0]) if np.isscalar(times) else out


def echo_thermal(
    N: int,
    J: float,
    couplings: DerivedCouplings,
    T: float,
    times,
    construction: str = "exact",
) -> tuple[np.ndarray, np.ndarray]:
    """Finite-temperature echo and its complex trace factor.

    The initial state is the canonical state of H(lam) at temperature
    T.  With the default construction="exact" this is the true
    canonical state of the ring (parity-projected two-sector mode
    product; agrees with the dense oracle to roundoff).  With
    construction="mode_pair" it is the per-mode-pair canonical form
    rho_k ~ exp(-H_k(lam)/T) on the 4-dimensional mode-pair space of
    the antiperiodic sector, which ignores the parity-sector
    constraint; its small-N deviation is quantified in the validation
    suite.  T -> 0 converges to echo_pure for both constructions.
    """
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    ctx = FermionEchoContext(N, J, couplings, T=T, construction=construction)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    z = ctx.trace_factor(times)
    return np.abs(z) ** 2, z


def echo_series(
    N: int,
    J: float,
    couplings: DerivedCouplings,
    T: float,
    time_grid,
    construction: str = "exact",
) -> EchoSeries:
    """Echo on a full grid; the grid must be increasing and start at 0."""
    t = np.atleast_1d(np.asarray(time_grid, dtype=float))
    if t.size == 0:
        raise ValueError("empty time grid")
    if t[0] != 0.0:
        raise ValueError(f"time grid must start at 0, got {t[0]}")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    ctx = FermionEchoContext(N, J, couplings, T=T, construction=construction)
    return EchoSeries(times=t, values=ctx.echo(t))


def decoherence_factor(times1, factors1, times2, factors2) -> EchoSeries:
    """Combine two environments' trace factors into D(t) = z1 * conj(z2).

    For identical environments this is the real echo L(t) = |z|^2; for
    distinct environments the complex product is kept in d_values.
    Factor streams must share one time grid.
    """
    t1 = np.atleast_1d(np.asarray(times1, dtype=float))
    t2 = np.atleast_1d(np.asarray(times2, dtype=float))
    if t1.shape != t2.shape or not np.array_equal(t1, t2):
        raise ValueError("environment factor streams must share one time grid")
    z1 = np.atleast_1d(np.asarray(factors1, dtype=complex))
    z2 = np.atleast_1d(np.asarray(factors2, dtype=complex))
    if z1.shape != t1.shape or z2.shape != t1.shape:
        raise ValueError("factor streams must match the time grid")
    d = z1 * np.conj(z2)
    return EchoSeries(times=t1, values=np.abs(d), d_values=d)


def gaussian_rate(N: int, J: float, couplings: DerivedCouplings, K_c: int = 3) -> float:
    """Near-critical Gaussian decay rate 8 J^2 g^2 N K_c^3 cos^2(theta) / (3 pi (1-lam)^2).

    K_c counts retained low-momentum modes and enters the printed
    formula verbatim.  The formula is a coarse cutoff estimate: the
    validation report compares it against the fitted early-time
    quadratic coefficient of the exact echo, and the two agree only at
    the order-of-magnitude level whatever small integer K_c is chosen
    (see the gaussian-rate diagnostic of `compass check`).

    Raises
    ------
    ValueError
        At the critical point lam = 1 (the rate diverges) or for a
        non-positive K_c.
    """
    if K_c < 1:
        raise ValueError(f"K_c must be a positive integer, got {K_c}")
    if couplings.lam == 1.0:
        raise ValueError("gaussian_rate diverges at the critical point lam = 1")
    # g * cos(theta) is recoverable from the branch-field split.
    g_cos = 0.5 * (couplings.lambda_plus - couplings.lambda_minus)
    return (
        8.0 * J * J * N * K_c**3 * g_cos * g_cos
        / (3.0 * math.pi * (1.0 - couplings.lam) ** 2)
    )
