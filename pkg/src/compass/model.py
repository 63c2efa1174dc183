"""Physical parameters and the analytic field-to-coupling reduction.

Unit system: the Ising coupling J is the energy unit (hbar = 1, k_B = 1,
times in 1/J).  The external field enters only through two dimensionless
transverse fields,

    lambda       = nuclear_moment * B * cos(theta) / J
    lambda_plus  = lambda + g * cos(theta)
    lambda_minus = lambda - g * cos(theta)

with g = g0 / sqrt(N).  lambda drives the initial bath state; the pair
(lambda_plus, lambda_minus) drives the conditional bath evolution for the
two electronic branches.  These four numbers, together with (N, J, T),
are everything the echo depends on.

The electron Zeeman splitting omega is carried for documentation only:
it adds opposite constants to the two branch Hamiltonians, which
contribute conjugate global phases to the evolution operators and cancel
in the decoherence factor (checked against the dense oracle in the test
suite).  It is therefore never propagated into DerivedCouplings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FieldConfig:
    """External magnetic field.

    Attributes
    ----------
    B : float
        Field magnitude, in units of J / nuclear_moment (so that with the
        defaults, B is numerically the transverse field at theta = 0).
    theta : float
        Field direction angle in radians, restricted to [0, pi/2] as in
        the sweep presets; symmetry extensions are the caller's job.
    nuclear_moment : float
        Nuclear magnetic moment g_N * mu_N as a dimensionless scale
        factor (default 1).
    omega : float
        Electron Zeeman splitting in units of J (default 0).  Not
        propagated; see the module docstring.
    """

    B: float
    theta: float
    nuclear_moment: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if self.B < 0:
            raise ValueError(f"B must be >= 0, got {self.B}")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(
                f"theta must lie in [0, pi/2], got {self.theta}"
            )
        if self.nuclear_moment <= 0:
            raise ValueError(
                f"nuclear_moment must be > 0, got {self.nuclear_moment}"
            )
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")


@dataclass(frozen=True)
class EnvironmentParams:
    """One nuclear-spin bath: an antiferromagnetic Ising ring.

    Attributes
    ----------
    N : int
        Number of nuclear spins (>= 2).  The free-fermion engine
        additionally requires N even; that is enforced there, not here.
    J : float
        Ising coupling constant, the energy unit.  J > 0
        (antiferromagnetic); dropping the longitudinal Zeeman term is
        justified only in that case.
    g0 : float
        Bare dimensionless electron-nucleus coupling; the effective
        per-spin coupling is g0 / sqrt(N).
    """

    N: int
    J: float
    g0: float

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.J <= 0:
            raise ValueError(f"J must be > 0, got {self.J}")


@dataclass(frozen=True)
class DerivedCouplings:
    """The dimensionless transverse fields governing the echo.

    Invariants: lambda_plus - lambda_minus == 2 * g * cos(theta) exactly,
    and theta = pi/2 collapses all three fields to the coupling-free
    values (lambda = 0, lambda_plus == lambda_minus).
    """

    lam: float
    g: float
    lambda_plus: float
    lambda_minus: float


@dataclass(frozen=True)
class ReactionParams:
    """Singlet recombination rate k_S, in units of J."""

    k_S: float

    def __post_init__(self):
        if self.k_S <= 0:
            raise ValueError(f"k_S must be > 0, got {self.k_S}")


@dataclass(frozen=True)
class ThermalParams:
    """Bath temperature in units of J (k_B = 1); T = 0 is the pure ground state."""

    T: float

    def __post_init__(self):
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")


def derive_couplings(field: FieldConfig, env: EnvironmentParams) -> DerivedCouplings:
    """Reduce a field configuration to the effective transverse fields.

    Returns lambda = nuclear_moment * B * cos(theta) / J, the scaled
    coupling g = g0 / sqrt(N), and the branch fields
    lambda +/- g * cos(theta).

    Raises
    ------
    ValueError
        Propagated from the input invariants (theta outside [0, pi/2],
        N < 2, J <= 0, ...); the dataclasses validate on construction.
    """
    # cos(pi/2) rounds to 6.1e-17; snap it so the documented identities
    # (lambda == 0, lambda_plus == lambda_minus) hold exactly at theta = pi/2.
    cos_theta = 0.0 if field.theta == math.pi / 2 else math.cos(field.theta)
    lam = field.nuclear_moment * field.B * cos_theta / env.J
    g = env.g0 / math.sqrt(env.N)
    shift = g * cos_theta
    return DerivedCouplings(
        lam=lam,
        g=g,
        lambda_plus=lam + shift,
        lambda_minus=lam - shift,
    )
