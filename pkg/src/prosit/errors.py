"""Exception hierarchy shared by every layer of the interpreter."""


class PrositError(Exception):
    """Base class for interpreter errors."""


class ReaderError(PrositError):
    def __init__(self, message: str, span: tuple[int, int]):
        super().__init__(f"{message} at {span[0]}..{span[1]}")
        self.message = message
        self.span = span


class LexError(ReaderError):
    pass


class ParseError(ReaderError):
    pass


class InconsistentEquality(PrositError):
    """Two distinct constants were P-unified into one class."""

    def __init__(self, left, right):
        super().__init__(f"cannot identify {left!r} with {right!r}")
        self.left = left
        self.right = right


class EvalError(PrositError):
    """Arithmetic evaluation failed (unbound operand, bad operator, ...)."""


class DepthLimitExceeded(PrositError):
    def __init__(self, goal, depth: int):
        from .reader import to_text

        super().__init__(f"depth bound {depth} exceeded while solving {to_text(goal)}")
        self.goal = goal
        self.depth = depth


class AssertionBudgetExceeded(PrositError):
    pass


class BuiltinError(PrositError):
    """Arity or mode violation when calling a system predicate."""
