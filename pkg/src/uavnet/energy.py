"""Rotary-wing propulsion power and radiated-energy bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class EnergyParams:
    # rotary-wing reference constants (blade profile / induced hover power etc.)
    P0: float = 79.86
    Pi: float = 88.63
    U_tip: float = 120.0
    v0: float = 4.03
    d0_drag: float = 0.6
    rho: float = 1.225
    s_solidity: float = 0.05
    A: float = 0.503
    initial: float = 50_000.0

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not v > 0:
                raise ValueError(f"energy parameter {k} must be positive, got {v}")


def propulsion_power(v: float, p: EnergyParams) -> float:
    """Propulsion power in W of a rotary-wing UAV flying level at speed ``v``."""
    if v < 0:
        raise ValueError("speed must be non-negative")
    if v == 0:
        return p.P0 + p.Pi
    v2 = v * v
    blade = p.P0 * (1.0 + 3.0 * v2 / (p.U_tip * p.U_tip))
    v0sq = p.v0 * p.v0
    induced = p.Pi * math.sqrt(math.sqrt(1.0 + v2 * v2 / (4.0 * v0sq * v0sq)) - v2 / (2.0 * v0sq))
    parasite = 0.5 * p.d0_drag * p.rho * p.s_solidity * p.A * v2 * v
    return blade + induced + parasite


def propulsion_energy(v: float, t_move: float, p: EnergyParams) -> float:
    if t_move < 0:
        raise ValueError("t_move must be non-negative")
    return propulsion_power(v, p) * t_move


def comm_energy(p_t: float, t_packet: float) -> float:
    if p_t < 0 or t_packet < 0:
        raise ValueError("power and duration must be non-negative")
    return p_t * t_packet


@dataclass
class EnergyLedger:
    initial: float
    residual: float = -1.0
    spent_propulsion: float = 0.0
    spent_comm: float = 0.0
    depleted: bool = False

    def __post_init__(self):
        if self.residual < 0:
            self.residual = self.initial

    def debit(self, amount: float, category: str) -> "EnergyLedger":
        """Charge ``amount`` joules; the residual never goes below zero.

        The charged amount is capped at what is left so the ledger always
        balances: ``initial == residual + spent_propulsion + spent_comm``.
        """
        if amount < 0:
            raise ValueError("amount must be non-negative")
        if category not in ("propulsion", "comm"):
            raise ValueError(f"unknown energy category {category!r}")
        if self.depleted or amount == 0:
            return self
        charged = min(amount, self.residual)
        if category == "propulsion":
            self.spent_propulsion += charged
        else:
            self.spent_comm += charged
        self.residual -= charged
        if self.residual <= 0.0:
            self.residual = 0.0
            self.depleted = True
        return self
