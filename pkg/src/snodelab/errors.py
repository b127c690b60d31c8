"""Exception types shared across the package.

Every failure mode that a caller may want to branch on gets its own class;
report-style operations return dataclasses with a ``passed`` flag instead of
raising.
"""


class SNodeLabError(Exception):
    """Base class for all package errors."""


# -- node construction / validation ----------------------------------------

class DimensionMismatch(SNodeLabError):
    """Operator blocks have inconsistent shapes."""


class NonHermitianS(SNodeLabError):
    """S deviates from its adjoint beyond tolerance."""


class IdentityViolation(SNodeLabError):
    """The node identity residual exceeds tolerance."""


class SNotPositive(SNodeLabError):
    """S has an eigenvalue at or below the positivity floor."""


class Phi2RankDeficient(SNodeLabError):
    """Phi2 has a nontrivial null space."""


class ConstructionInfeasible(SNodeLabError):
    """The linear solve inside a node constructor is inconsistent."""


# -- frame / transfer evaluation --------------------------------------------

class ResolventSingular(SNodeLabError):
    """A resolvent factor is numerically singular at the requested point."""


class FramePole(SNodeLabError):
    """The requested point is (within refusal distance of) a frame pole."""


class RealAxisPoint(SNodeLabError):
    """Operation requires a point off the real axis."""


# -- pairs and linear-fractional transforms ---------------------------------

class EvaluatorFailure(SNodeLabError):
    """A pair evaluator raised or returned a malformed matrix."""


class NotContractive(SNodeLabError):
    """A disk parameter exceeds unit norm."""


class DenominatorSingular(SNodeLabError):
    """The LFT denominator is singular at the requested point."""


class CBlockSingular(SNodeLabError):
    """The 21-block of the frame is singular where its inverse is needed."""


class SumBlockSingular(SNodeLabError):
    """The 21+22 block sum is singular at the requested point."""


class SingularForm(SNodeLabError):
    """A quadratic block form is singular where its inverse is needed."""


# -- conformal transport -----------------------------------------------------

class MapSingularity(SNodeLabError):
    """Evaluation at the singular point of the disk/half-plane map."""


# -- spectral factorization ---------------------------------------------------

class SzegoFail(SNodeLabError):
    """The log-integrability condition fails for the density."""


class DensityNotPD(SNodeLabError):
    """Density samples are not positive definite where required."""


class NotConverged(SNodeLabError):
    """Iterative factorization did not reach the step tolerance."""


class TooCloseToBoundary(SNodeLabError):
    """Interior evaluation requested too close to the unit circle."""


# -- diagnostics ---------------------------------------------------------------

class InteriorSingularity(SNodeLabError):
    """The 21-block has a pole or determinant zero strictly inside the disk."""


class PoleInRegion(SNodeLabError):
    """A resolvent pole lies inside a region that must be pole-free."""


# -- CLI / IO -------------------------------------------------------------------

class ConfigParse(SNodeLabError):
    """Command line or config file could not be parsed."""
