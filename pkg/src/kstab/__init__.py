"""Stabilization calculus for K-theoretic psi classes, with the group and cover bookkeeping around it."""

from .delta import delta
from .pullback import PullbackProblem, pullback_closed, pullback_oracle
from .ring import KExpr, parse, serialize

__all__ = ["KExpr", "PullbackProblem", "delta", "parse", "pullback_closed", "pullback_oracle", "serialize"]
