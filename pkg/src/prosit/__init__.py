"""An interpreter for a situation-theoretic logic programming language."""

from .engine import Answer, Engine, Verdict
from .reader import Param, Var, read, read_one, to_text
from .store import Situation, SituationStore

__all__ = ["Answer", "Engine", "Verdict", "Param", "Var", "read", "read_one",
           "to_text", "Situation", "SituationStore"]
