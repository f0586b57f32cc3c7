"""Biomass feed chains: pyrolysis gasification, co-digestion biogas, upgrading."""

from __future__ import annotations

from .core import BiogasParams, DigesterParams, PyrolysisParams


def pyrolysis_fuel(m_straw: float, m_garbage: float, p: PyrolysisParams) -> float:
    """Combustible fuel mass (kg) recovered from straw and dry garbage feed."""
    if m_straw < 0 or m_garbage < 0:
        raise ValueError("feed masses must be non-negative")
    raw = m_straw * p.beta_straw * p.beta_straw_r2f + m_garbage * p.beta_garbage * p.beta_garbage_r2f
    return raw * p.eta_pf


def syngas_energy(fuel_kg: float, lhv_mj_per_kg: float, p: PyrolysisParams) -> float:
    """Usable CHP fuel energy in kWh from ``fuel_kg`` of pyrolysis fuel."""
    return fuel_kg * lhv_mj_per_kg / 3.6 * p.eta_pg


def sludge_mass(wastewater: float, p: BiogasParams) -> float:
    """Settled sludge mass (kg) from ``wastewater`` m3 through the sedimentation tank."""
    volume = wastewater * p.beta_st * p.eta_ab
    return volume * p.beta_sludge * p.rho_sludge


def biogas_yield(wastewater: float, wet_garbage: float, p: BiogasParams) -> float:
    """Raw biogas (Nm3) from co-digesting sludge with wet organic waste."""
    if wastewater < 0 or wet_garbage < 0:
        raise ValueError("feed quantities must be non-negative")
    return (sludge_mass(wastewater, p) + wet_garbage) * p.beta_bg


def digester_transfer_coefficient(d: DigesterParams) -> float:
    """Overall wall heat-transfer coefficient in W/(m2 K)."""
    resistance = 1.0 / d.alpha1 + 1.0 / d.alpha2 + d.phi1 / d.theta1 + d.phi2 / d.theta2
    return 1.0 / resistance


def digester_heat_demand(delta_t: float, p: BiogasParams) -> float:
    """Wall heat loss (kW) the digester must be supplied to hold its set temperature."""
    if delta_t < 0:
        raise ValueError("temperature difference must be non-negative")
    d = p.digester
    return d.area * digester_transfer_coefficient(d) * delta_t / 1000.0


def digester_heat_input(delta_t: float, p: BiogasParams) -> float:
    """Network heat (kW) drawn to cover :func:`digester_heat_demand` after exchanger losses."""
    d = p.digester
    return digester_heat_demand(delta_t, p) / (d.eta_eq * d.eta_thermal)


def upgrade_biogas(biogas: float, p: BiogasParams) -> float:
    if biogas < 0:
        raise ValueError("biogas volume must be non-negative")
    return biogas * p.eta_b2g
