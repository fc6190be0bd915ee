"""Exception hierarchy for the jqfsim package."""


class JqfsimError(Exception):
    """Base class for all package errors."""


class ConfigError(JqfsimError):
    """Invalid scenario configuration (bad field, unit, or value)."""


class PhysicsError(JqfsimError):
    """Base class for physics-domain errors (CLI exit code 2)."""


class CouplingNodeError(PhysicsError):
    """Qubit sits at a node of the waveguide mode: coupling vanishes.

    Raised where a finite drive coupling or radiative lifetime is required,
    e.g. l1 at an odd multiple of a quarter wavelength.
    """


class ResonantFilterError(PhysicsError):
    """Filter position resonant with the effective cavity (l2 near an odd
    multiple of lambda/4), where adiabatic elimination of the filter breaks
    down."""


class NonColocatedError(PhysicsError):
    """Operation requires both qubits at the waveguide end (l1 = l2 = 0)."""


class GeometryError(PhysicsError):
    """Unsupported qubit geometry for the requested solver."""


class StepSizeError(PhysicsError):
    """Integrator step exceeds its stability/accuracy bound."""


class IntegrationError(PhysicsError):
    """Integration produced an invalid state (non-finite values or a
    positivity/trace violation beyond tolerance)."""
