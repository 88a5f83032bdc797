from decimal import Decimal, getcontext

import pytest
from hypothesis import given, strategies as st

from uavnet.energy import EnergyLedger, EnergyParams, comm_energy, propulsion_energy, propulsion_power

P = EnergyParams()


def power_oracle(v: float) -> Decimal:
    """Rotary-wing power evaluated with 50-digit decimals."""
    getcontext().prec = 50
    P0, Pi, U, v0, d0, rho, s, A = (Decimal(str(x)) for x in
                                    (P.P0, P.Pi, P.U_tip, P.v0, P.d0_drag, P.rho, P.s_solidity, P.A))
    v = Decimal(str(v))
    induced = ((1 + v ** 4 / (4 * v0 ** 4)).sqrt() - v ** 2 / (2 * v0 ** 2)).sqrt()
    return P0 * (1 + 3 * v ** 2 / U ** 2) + Pi * induced + Decimal("0.5") * d0 * rho * s * A * v ** 3


def test_hover_power_is_sum_of_profile_and_induced():
    assert propulsion_power(0.0, P) == P.P0 + P.Pi
    assert propulsion_power(0.0, P) == pytest.approx(168.49, abs=1e-9)


def test_power_at_10ms_pinned():
    # frozen from the 50-digit evaluation above
    assert propulsion_power(10.0, P) == pytest.approx(126.03368677372115, rel=1e-12)


@pytest.mark.parametrize("v", [0.5, 3.0, 10.0, 15.0, 25.0, 40.0])
def test_power_matches_high_precision(v):
    assert propulsion_power(v, P) == pytest.approx(float(power_oracle(v)), rel=1e-12)


def test_power_is_continuous_at_hover():
    assert propulsion_power(1e-9, P) == pytest.approx(propulsion_power(0.0, P), abs=1e-6)


def test_negative_speed_rejected():
    with pytest.raises(ValueError):
        propulsion_power(-1.0, P)


def test_propulsion_energy():
    assert propulsion_energy(5.0, 0.0, P) == 0.0
    assert propulsion_energy(0.0, 10.0, P) == pytest.approx(1684.9)
    assert propulsion_energy(7.0, 4.0, P) == pytest.approx(2 * propulsion_energy(7.0, 2.0, P))


def test_comm_energy():
    assert comm_energy(0.1, 4328e-6) == pytest.approx(4.328e-4)
    assert comm_energy(0.1, 120e-6) == pytest.approx(1.2e-5)
    assert comm_energy(0.1, 0.0) == 0.0


def test_debit_examples():
    led = EnergyLedger(initial=1.0)
    led.debit(0.4, "comm")
    assert led.residual == pytest.approx(0.6) and led.spent_comm == pytest.approx(0.4)
    led = EnergyLedger(initial=0.1)
    led.debit(0.5, "propulsion")
    assert led.residual == 0.0 and led.depleted
    led = EnergyLedger(initial=1.0)
    led.debit(0.0, "comm")
    assert led.residual == 1.0 and not led.depleted


def test_debit_rejects_bad_input():
    led = EnergyLedger(initial=1.0)
    with pytest.raises(ValueError):
        led.debit(-1.0, "comm")
    with pytest.raises(ValueError):
        led.debit(1.0, "rx")


@given(st.lists(st.tuples(st.floats(0, 30, allow_nan=False), st.sampled_from(["comm", "propulsion"])),
                max_size=50))
def test_ledger_conserves_energy(debits):
    led = EnergyLedger(initial=100.0)
    last = led.residual
    for amount, cat in debits:
        led.debit(amount, cat)
        assert led.residual + led.spent_comm + led.spent_propulsion == pytest.approx(100.0, abs=1e-9)
        assert 0.0 <= led.residual <= last
        assert led.depleted == (led.residual == 0.0)
        last = led.residual


def test_depleted_uav_freezes_and_drops_its_packets():
    from conftest import static_pair
    # 100 J lasts about 0.59 s of hovering
    sim = static_pair(150.0, extra="energy.initial = 100\n", duration=2.0)
    sim.run()
    dead = sim.uavs[0]
    assert dead.energy.depleted and not dead.alive
    assert dead.energy.residual == 0.0
    assert dead.energy.spent_propulsion + dead.energy.spent_comm == pytest.approx(100.0)
    dead.inject(1)
    assert sim.metrics.drops["dead_node"] == 1
