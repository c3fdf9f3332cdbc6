"""AAMI heartbeat super-classes and the beat-symbol mapping.

The five groups (N, S, V, F, Q) follow the ANSI/AAMI EC57 convention for
MIT-BIH beat symbols. The enum order is fixed so that confusion matrices,
per-class reports, and class indices stay deterministic everywhere.
"""
from __future__ import annotations

from enum import IntEnum

from .errors import UnknownSymbol


class AamiClass(IntEnum):
    N = 0  # normal and bundle-branch/escape beats
    S = 1  # supraventricular ectopic
    V = 2  # ventricular ectopic
    F = 3  # fusion of ventricular and normal
    Q = 4  # paced / unclassifiable

    @property
    def letter(self) -> str:
        return self.name


# 15 MIT-BIH beat symbols partitioned into the five groups.
SYMBOL_TO_CLASS: dict[str, AamiClass] = {
    "N": AamiClass.N,  # normal
    "L": AamiClass.N,  # left bundle branch block
    "R": AamiClass.N,  # right bundle branch block
    "e": AamiClass.N,  # atrial escape
    "j": AamiClass.N,  # nodal (junctional) escape
    "A": AamiClass.S,  # atrial premature
    "a": AamiClass.S,  # aberrated atrial premature
    "J": AamiClass.S,  # nodal (junctional) premature
    "S": AamiClass.S,  # supraventricular premature
    "V": AamiClass.V,  # premature ventricular contraction
    "E": AamiClass.V,  # ventricular escape
    "F": AamiClass.F,  # fusion of ventricular and normal
    "/": AamiClass.Q,  # paced
    "f": AamiClass.Q,  # fusion of paced and normal
    "Q": AamiClass.Q,  # unclassifiable
}


def map_symbol_to_aami(symbol: str) -> AamiClass:
    """Map a single beat symbol to its AAMI class.

    Raises UnknownSymbol for anything outside the 15-symbol table.
    """
    try:
        return SYMBOL_TO_CLASS[symbol]
    except KeyError:
        raise UnknownSymbol(f"beat symbol {symbol!r} is not in the AAMI table") from None
