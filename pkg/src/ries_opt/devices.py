"""Stateless conversion models for the park's generation and conversion units."""

from __future__ import annotations

from .core import DT, ChpParams, EbParams, GbParams, GtParams, HpParams, PvParams, WindParams


def wind_output(v: float, p: WindParams) -> float:
    """Turbine output in kW for hub wind speed ``v`` (m/s)."""
    if v < 0:
        raise ValueError("wind speed must be non-negative")
    if v < p.v_in or v >= p.v_out:
        return 0.0
    if v >= p.v_star:
        return p.p_star
    return p.p_star * (v - p.v_in) / (p.v_star - p.v_in)


def pv_output(g: float, t_cell: float, p: PvParams) -> float:
    """Array output in kW; clamped at zero for extreme cell temperatures."""
    if g < 0:
        raise ValueError("irradiance must be non-negative")
    value = p.p_max * (g / p.g_nominal) * (1.0 + p.temp_coeff * (t_cell - p.t_ref))
    return max(value, 0.0)


def _split(fuel: float, eta_e: float, eta_h: float, capacity: float) -> tuple[float, float]:
    if fuel < 0:
        raise ValueError("fuel energy must be non-negative")
    used = min(fuel, capacity * DT / eta_e)
    return eta_e * used, eta_h * used


def chp_output(fuel_energy: float, p: ChpParams) -> tuple[float, float]:
    """(electric kWh, thermal kWh) from ``fuel_energy`` kWh of syngas/biogas.

    When the electric rating binds, only the fuel the unit can burn is
    converted, so heat is capped in the same proportion.
    """
    return _split(fuel_energy, p.eta_e, p.eta_h, p.capacity)


def gt_output(gas_energy: float, p: GtParams) -> tuple[float, float]:
    """(electric kWh, recovered heat kWh) from ``gas_energy`` kWh of natural gas."""
    return _split(gas_energy, p.eta_e, p.eta_h, p.capacity)


def gb_fuel_coefficients(p: GbParams, lhv_kwh: float) -> tuple[float, float, float]:
    """(a, b, c) of the boiler's gas curve, filling ``b`` from efficiency if unset."""
    b = p.fuel_b if p.fuel_b is not None else 1.0 / (p.eta_h * lhv_kwh)
    return p.fuel_a, b, p.fuel_c


def gb_fuel_and_emissions(heat_out: float, p: GbParams, lhv_kwh: float = 35.486 / 3.6) -> tuple[float, float]:
    """Gas use (Nm3) and CO2 (kg) for a boiler heat setpoint ``heat_out`` (kW).

    The curve maps thermal output to gas volume: F = a*h^2 + b*h + c. ``c`` is
    a standby draw paid in every slot (units are never decommitted).
    """
    if heat_out < 0 or heat_out > p.capacity + 1e-9:
        raise ValueError(f"boiler heat {heat_out} outside [0, {p.capacity}]")
    a, b, c = gb_fuel_coefficients(p, lhv_kwh)
    fuel = (a * heat_out**2 + b * heat_out + c) * DT
    return fuel, p.emission_factor * fuel


def gb_segments(p: GbParams, lhv_kwh: float) -> list[tuple[float, float]]:
    """Equal-width (width kW, slope Nm3/kWh) pieces of the convex fuel curve.

    Each slope is the secant over its piece, so the pieces interpolate the
    curve exactly at every breakpoint and slopes are non-decreasing.
    """
    a, b, _ = gb_fuel_coefficients(p, lhv_kwh)
    width = p.capacity / p.segments
    out = []
    for k in range(p.segments):
        h0, h1 = k * width, (k + 1) * width
        slope = a * (h0 + h1) + b
        out.append((width, slope))
    return out


def eb_output(electric_in: float, p: EbParams) -> float:
    """Electric boiler heat in kW, capped at the thermal rating."""
    if electric_in < 0:
        raise ValueError("electric input must be non-negative")
    return min(p.eta * electric_in, p.capacity)


def hp_output(electric_in: float, p: HpParams) -> float:
    if electric_in < 0:
        raise ValueError("electric input must be non-negative")
    return p.cop * min(electric_in, p.capacity)
