"""Exception hierarchy.

Everything the toolkit raises on purpose derives from FraglimError so callers
(and the CLI exit-code mapping) can distinguish domain failures from bugs.
"""


class FraglimError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(FraglimError):
    """A physical or numerical parameter is outside its admissible range."""


class PoleEvaluationError(FraglimError):
    """Rational function evaluated too close to a root of its denominator."""

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class ClosedLoopPoleError(FraglimError):
    """1 + L vanished at an evaluation point: closed-loop pole on the path."""


class FragilitySingularityError(FraglimError):
    """q = p: the robustness bound is genuinely infinite at this point.

    Raised instead of returning a saturated value; sweep callers are expected
    to skip the singular band.
    """


class IntegrandSingularityError(FraglimError):
    """|T| underflowed at a quadrature node, so ln|T| is effectively -inf."""


class EmptySweepError(FraglimError):
    """Every requested sweep point was singular; nothing to emit."""


class RealizationError(FraglimError):
    """Controller transfer function is improper; no state-space realization."""


class InterpolationNotApplicableError(FraglimError):
    """The interpolation identities only hold for internally stable loops."""


class InconclusiveStabilityError(FraglimError):
    """Contour sampling hit its cap without a confident winding number.

    Never downgraded to a silent verdict; the CLI maps this to exit code 4.
    """
