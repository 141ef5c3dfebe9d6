"""
Label permutations used to build model pairs with matching distributions.
"""
from enum import Enum
from math import gcd
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from ...core.exceptions import InfeasibleConstructionError


class PermutationKind(str, Enum):
    """How the second model of a constructed pair rearranges the first."""
    IDENTITY = "identity"
    CIRCLE_SWAP = "circle_swap"
    DECORRELATING = "decorrelating"
    THEOREM_KM2 = "theorem_kM2"
    THEOREM_KM1 = "theorem_kM1"


class PermutationSpec(BaseModel):
    """A bijection pi of the k label indices together with its construction kind."""

    pi: List[int] = Field(..., description="pi[j] is the cluster that label j moves to")
    kind: PermutationKind

    model_config = {"frozen": True, "use_enum_values": False}

    @model_validator(mode="after")
    def _check_bijection(self) -> "PermutationSpec":
        if sorted(self.pi) != list(range(len(self.pi))):
            raise ValueError(f"pi is not a permutation of 0..{len(self.pi) - 1}: {self.pi}")
        return self

    @property
    def k(self) -> int:
        return len(self.pi)

    @property
    def is_identity(self) -> bool:
        return self.pi == list(range(self.k))

    @classmethod
    def identity(cls, k: int) -> "PermutationSpec":
        return cls(pi=list(range(k)), kind=PermutationKind.IDENTITY)

    @classmethod
    def circle_swap(cls, k: int, first: int = 0, second: Optional[int] = None) -> "PermutationSpec":
        """Swap two clusters, by default cluster 0 with the one opposite to it."""
        second = k // 2 if second is None else second
        if first == second or not (0 <= first < k and 0 <= second < k):
            raise InfeasibleConstructionError(f"cannot swap clusters {first} and {second} of {k}")
        pi = list(range(k))
        pi[first], pi[second] = second, first
        return cls(pi=pi, kind=PermutationKind.CIRCLE_SWAP)

    @classmethod
    def decorrelating(cls, k: int, multiplier: Optional[int] = None) -> "PermutationSpec":
        """
        pi(j) = m j mod k with gcd(m, k) = 1 and m != +-1 mod k.

        With equally spaced clusters sharing one local offset pattern, the
        embeddings of the two models then have zero cross-covariance.
        """
        candidates = [multiplier] if multiplier is not None else range(2, k - 1)
        for m in candidates:
            if gcd(m, k) == 1 and m % k not in (1, k - 1):
                return cls(pi=[(m * j) % k for j in range(k)], kind=PermutationKind.DECORRELATING)
        raise InfeasibleConstructionError(
            f"no decorrelating multiplier exists for k={k}" if multiplier is None
            else f"multiplier {multiplier} does not decorrelate k={k} clusters"
        )

    @classmethod
    def theorem(cls, dim: int, k: int) -> "PermutationSpec":
        """Swap of the last two labels for k = M+2; the identity labelling for k = M+1."""
        if k == dim + 2:
            pi = list(range(k))
            pi[-2], pi[-1] = pi[-1], pi[-2]
            return cls(pi=pi, kind=PermutationKind.THEOREM_KM2)
        if k == dim + 1:
            return cls(pi=list(range(k)), kind=PermutationKind.THEOREM_KM1)
        raise InfeasibleConstructionError(f"theorem construction needs k in {{M+1, M+2}}, got M={dim}, k={k}")

    @classmethod
    def for_kind(cls, kind: PermutationKind, k: int) -> "PermutationSpec":
        kind = PermutationKind(kind)
        if kind == PermutationKind.IDENTITY:
            return cls.identity(k)
        if kind == PermutationKind.CIRCLE_SWAP:
            return cls.circle_swap(k)
        if kind == PermutationKind.DECORRELATING:
            return cls.decorrelating(k)
        raise InfeasibleConstructionError(f"{kind.value} permutations are built by the theorem construction")
