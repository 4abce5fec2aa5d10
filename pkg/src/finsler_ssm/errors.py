"""Exception types shared across the package."""
from __future__ import annotations


class FinslerError(Exception):
    """Base class for all domain errors raised by this package."""


class ZeroDirection(FinslerError):
    """The fiber direction y vanishes; quantities live on the slit bundle."""


class OutOfDomain(FinslerError):
    """(u, s, v, t) falls outside the model's admissible domain."""


class OrderUnsupported(FinslerError):
    """Requested jet order exceeds the engine's cap."""


class InfeasibleInvariants(FinslerError):
    """No Euclidean configuration realizes the requested scalar invariants."""


class SingularMetric(FinslerError):
    """The fundamental tensor is not (numerically) positive definite."""


class DegenerateSigma1(FinslerError):
    """sigma_1 = phi - s*phi_s - t*phi_t vanished; closed forms undefined."""


class RiemannianPoint(FinslerError):
    """Mean torsion vanishes here; the torsion decomposition is undefined."""


class RankDeficientFrame(FinslerError):
    """{x, y, a} do not span the frame a decomposition requires."""


class NotSphericallySymmetric(FinslerError):
    """Operation requires an anchor-free model evaluated at a = 0."""


class ConfigError(FinslerError):
    """Invalid CLI configuration (maps to exit code 2)."""
