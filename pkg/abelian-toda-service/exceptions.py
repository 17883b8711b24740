"""
Exception hierarchy for the abelian Toda service.

Input and configuration problems subclass ValueError; numerical failures that
depend on the data being computed subclass RuntimeError. Every error carries
enough context to name the offending object in a report row.
"""

from typing import Any, Optional, Sequence


class AbelianTodaError(Exception):
    """Base class for all service errors."""


class PrecisionUnreachableError(AbelianTodaError, RuntimeError):
    """Theta truncation radius exceeds the configured cap."""

    def __init__(self, radius: float, cap: float):
        self.radius = radius
        self.cap = cap
        super().__init__(f"Precision unreachable: truncation radius {radius:.2f} exceeds cap {cap:.2f}")


class PoleError(AbelianTodaError, ValueError):
    """Argument sits on a lattice point where the function has a pole."""

    def __init__(self, z: complex, distance: float):
        self.z = z
        self.distance = distance
        super().__init__(f"Pole at z={z!r}: distance {distance:.3e} to the lattice")


class BasePointError(AbelianTodaError, ValueError):
    """All Kummer coordinates vanish at the requested point."""


class SingularJetError(AbelianTodaError, ValueError):
    """Leading jet coefficient vanishes where an inverse or logarithm is needed."""


class WindowUnderflowError(AbelianTodaError, IndexError):
    """Site access outside the window of a site sequence."""

    def __init__(self, site: int, window: Sequence[int]):
        self.site = site
        self.window = tuple(window)
        super().__init__(f"Site {site} outside window [{window[0]}, {window[1]}]")


class NormalizationError(AbelianTodaError, ValueError):
    """Wave or dressing input does not have a unit leading coefficient."""


class NormalizationImpossibleError(AbelianTodaError, ValueError):
    """No linear form with l(U) = 1 is nonzero on the distinguished period."""


class DegenerateConfigurationError(AbelianTodaError, RuntimeError):
    """Linear solve is ill-conditioned or rank deficient."""

    def __init__(self, message: str, condition: Optional[float] = None):
        self.condition = condition
        super().__init__(message)


class QuasiPeriodError(AbelianTodaError, RuntimeError):
    """Quasi-periods of a lattice violate the Legendre relation."""

    def __init__(self, residual: float, tau: complex):
        self.residual = residual
        self.tau = tau
        super().__init__(f"Legendre relation fails for tau={tau!r}: residual {residual:.3e}")


class NoSimplePoleSolutionError(AbelianTodaError, RuntimeError):
    """Collocation of the recursion leaves a residual above the acceptance level."""

    def __init__(self, step: int, residual: float, node: Optional[float] = None):
        self.step = step
        self.residual = residual
        self.node = node
        super().__init__(f"No simple-pole solution at step {step} (t={node}): residual {residual:.3e}")


class InconclusiveRankError(AbelianTodaError, RuntimeError):
    """Singular value spectrum has no clear gap at the rank threshold."""

    def __init__(self, spectrum: Sequence[float]):
        self.spectrum = list(spectrum)
        shown = ", ".join(f"{s:.3e}" for s in self.spectrum)
        super().__init__(f"Inconclusive numerical rank; singular values: [{shown}]")


class DerivativeResolutionError(AbelianTodaError, RuntimeError):
    """Time grid too coarse: Richardson estimates disagree."""

    def __init__(self, disagreement: float):
        self.disagreement = disagreement
        super().__init__(f"Derivative resolution failure: Richardson disagreement {disagreement:.3e}")


class ContourError(AbelianTodaError, RuntimeError):
    """A zero sits on the counting contour even after perturbation retries."""


class RefinementError(AbelianTodaError, RuntimeError):
    """Newton refinement of a zero did not converge inside its box."""

    def __init__(self, box: Any, message: str = "Newton refinement did not converge"):
        self.box = box
        super().__init__(f"{message} in box {box}")


class CollisionError(AbelianTodaError, RuntimeError):
    """Two particles (or a particle and a shifted partner) came too close."""

    def __init__(self, pair: Sequence[int], separation: float):
        self.pair = tuple(pair)
        self.separation = separation
        super().__init__(f"Collision between particles {self.pair}: separation {separation:.3e}")


class StepUnderflowError(AbelianTodaError, RuntimeError):
    """The adaptive integrator could not keep its step above machine spacing."""

    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(f"Step size underflow at t={time:.6g}. {message}".strip())


class VacuousCaseError(AbelianTodaError, ValueError):
    """The requested test carries no information for this genus."""


class NotASectionError(AbelianTodaError, RuntimeError):
    """Shift ratio of a tau model is not the exponential of a linear form."""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"Not a section: monodromy ratio residual {residual:.3e}")


class TimeDependentConstantsError(AbelianTodaError, RuntimeError):
    """Dependency constants fitted per time node (or level) are not constant."""

    def __init__(self, variation: float, tolerance: float):
        self.variation = variation
        self.tolerance = tolerance
        super().__init__(f"Dependency constants vary by {variation:.3e} across nodes (tolerance {tolerance:.1e})")
