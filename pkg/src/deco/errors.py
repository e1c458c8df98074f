"""Exception hierarchy shared across the toolkit."""


class DecoError(Exception):
    """Base class for all toolkit errors."""


# --- demonstration / decomposition ---

class EmptyDemo(DecoError):
    pass


class MalformedDemo(DecoError):
    pass


class NoInteraction(DecoError):
    pass


class AnnotationMismatch(DecoError):
    pass


# --- planning ---

class UnknownTask(DecoError):
    pass


class UnsatisfiablePlan(DecoError):
    pass


class TransportError(DecoError):
    pass


class ParseError(DecoError):
    pass


class HallucinatedStep(DecoError):
    def __init__(self, step):
        super().__init__(f"planned step not in instruction library: {step!r}")
        self.step = step


# --- cost map / chaining ---

class DegenerateBounds(DecoError):
    pass


class NoFreeChain(DecoError):
    pass


class PlanningFailure(DecoError):
    pass


# --- simulator / policies ---

class UnknownInstruction(DecoError):
    pass


class PreconditionUnmet(DecoError):
    pass


class OutOfBounds(DecoError):
    pass
