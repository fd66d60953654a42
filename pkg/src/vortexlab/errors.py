"""Exception types shared across the package."""


class VortexLabError(Exception):
    """Base class for all package errors."""


class BadParams(VortexLabError):
    """Malformed or inconsistent parameters."""


class WeightMismatch(VortexLabError):
    """Total weights of two measures differ where they must agree."""


class NonFiniteInput(VortexLabError):
    """NaN or infinite coordinates in input data."""


class CoincidentVortices(VortexLabError):
    """Operation requires strictly separated vortices (r_alpha > 0)."""


class UnsupportedDomain(VortexLabError):
    """Domain geometry not supported by this operation."""


class EvaluationAtVortex(VortexLabError):
    """Field evaluation requested exactly at a vortex center."""


class NoConvergence(VortexLabError):
    """Iterative solver failed to reach its tolerance."""


class NonPositiveDensity(VortexLabError):
    """Density iterate lost positivity beyond repair."""


class ResolutionTooCoarse(VortexLabError):
    """Grid spacing too large for the requested core size."""


class LinearSolveFailure(VortexLabError):
    """Inner linear solve did not reach the requested residual."""


class BlowupDetected(VortexLabError):
    """Field amplitude exceeded the blow-up guard."""


class GeometryMismatch(VortexLabError):
    """Grids of two fields do not share the same geometry."""


class UnresolvedCore(VortexLabError):
    """Phase winding detected without an amplitude dip (aliasing)."""


class SolverFailure(VortexLabError):
    """Time integrator failed (step underflow or similar)."""
