"""Discrete data of a cover: marked-point partitions, gerbe orders and degrees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

from sympy.combinatorics import Permutation, PermutationGroup

from .checks import Check
from .errors import InfeasibleError


@dataclass(frozen=True)
class XiData:
    g: int
    d: int
    J_size: int
    k: int
    gamma: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(sorted(self.gamma, reverse=True)))

    @property
    def I_size(self) -> int:
        return len(self.gamma)

    @property
    def n(self) -> int:
        return self.J_size + self.k + 1

    @property
    def ell(self) -> int:
        return self.J_size * (self.g + 1) + self.k * self.g + self.I_size

    @property
    def R(self) -> int:
        return self.I_size + self.J_size

    @property
    def A_size(self) -> int:
        return self.ell - self.R

    @property
    def r_infinity(self) -> int:
        return reduce(math.lcm, self.gamma, 1)

    @property
    def gerbe_orders(self) -> tuple[int, ...]:
        """r_j for the points of [n] in the order J, [k], infinity."""
        return (1,) * max(self.J_size, 0) + (2,) * max(self.k, 0) + (self.r_infinity,)

    def as_dict(self) -> dict:
        return {
            "g": self.g, "d": self.d, "J": self.J_size, "k": self.k, "gamma": list(self.gamma),
            "n": self.n, "ell": self.ell, "R": self.R, "A": self.A_size,
            "r": list(self.gerbe_orders), "r_infinity": self.r_infinity,
        }

    @classmethod
    def from_dims(cls, g: int, J_size: int, gamma) -> "XiData":
        """Build the data with d = g + 1 and k fixed by dimension matching."""
        gamma = tuple(gamma)
        return cls(g, g + 1, J_size, k_from_dims(g, len(gamma)), gamma)


@dataclass(frozen=True)
class XiReport:
    xi: XiData
    checks: tuple[Check, ...]
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def k_from_dims(g: int, I_size: int) -> int:
    k = I_size + 3 * g - 1
    if k < 0:
        raise InfeasibleError(f"no simple-ramification count for g={g}, #I={I_size}")
    return k


def validate_xi(x: XiData) -> XiReport:
    rh_lhs = 2 * x.g - 2
    rh_rhs = -2 * x.d + x.k + sum(c - 1 for c in x.gamma)
    checks = [
        Check("counts_nonnegative", min(x.g, x.J_size, x.k) >= 0 and x.d >= 1,
              "g, #J, k >= 0 and d >= 1", [x.g, x.J_size, x.k, x.d]),
        Check("gamma_positive", bool(x.gamma) and all(c >= 1 for c in x.gamma), "nonempty, entries >= 1", list(x.gamma)),
        Check("degree_is_g_plus_1", x.d == x.g + 1, x.g + 1, x.d),
        Check("fiber_over_infinity", sum(x.gamma) == x.d, x.d, sum(x.gamma)),
        Check("riemann_hurwitz", rh_lhs == rh_rhs, rh_lhs, rh_rhs),
        Check("dimension_match", x.k == x.I_size + 3 * x.g - 1, x.I_size + 3 * x.g - 1, x.k),
        Check("point_partition", x.n == x.J_size + x.k + 1 and len(x.gerbe_orders) == x.n, x.n, len(x.gerbe_orders)),
        Check("label_partition", x.ell == x.A_size + x.R and x.A_size == x.J_size * x.g + x.k * x.g,
              x.J_size * x.g + x.k * x.g, x.A_size),
        Check("r_infinity_lcm", x.r_infinity == reduce(math.lcm, x.gamma, 1), reduce(math.lcm, x.gamma, 1), x.r_infinity),
        # k transpositions and one permutation of cycle type gamma must multiply to 1
        Check("monodromy_parity", (x.k + x.d - x.I_size) % 2 == 0, "even", x.k + x.d - x.I_size),
    ]
    return XiReport(x, tuple(checks), ("monodromy realizability: not checked",))


def degree_e(x: XiData) -> int:
    return math.factorial(x.k) * math.factorial(x.g) ** x.J_size * math.factorial(x.g) ** x.k


def _symmetric_generators(points: list[int], size: int) -> list[Permutation]:
    if len(points) < 2:
        return []
    swap = list(range(size))
    swap[points[0]], swap[points[1]] = points[1], points[0]
    cycle = list(range(size))
    for a, b in zip(points, points[1:] + points[:1]):
        cycle[a] = b
    return [Permutation(swap), Permutation(cycle)]


def gamma_group(g: int, J_size: int, k: int) -> PermutationGroup:
    """(S_g)^J x (S_g wr S_k) acting on J blocks of g points and k blocks of g+1 points.

    The extra point in each of the k blocks is an anchor that keeps the block
    permutations faithful when g = 0.
    """
    size = J_size * g + k * (g + 1)
    size = max(size, 1)
    gens: list[Permutation] = []
    for j in range(J_size):
        gens += _symmetric_generators(list(range(j * g, (j + 1) * g)), size)
    offset = J_size * g
    blocks = [list(range(offset + b * (g + 1), offset + (b + 1) * (g + 1))) for b in range(k)]
    if blocks:
        gens += _symmetric_generators(blocks[0][:g], size)
    if k >= 2:
        for shift in ((1, 0), tuple(range(1, k)) + (0,)):
            # block permutation: b -> shift[b] for the swap, b -> b+1 for the cycle
            image = list(range(size))
            targets = list(shift) + list(range(len(shift), k)) if len(shift) < k else list(shift)
            for b, tb in enumerate(targets):
                for p, q in zip(blocks[b], blocks[tb]):
                    image[p] = q
            gens.append(Permutation(image))
    return PermutationGroup(gens or [Permutation(size - 1)])


def gamma_order(x: XiData) -> int:
    return int(gamma_group(x.g, x.J_size, x.k).order())
