"""Regenerate the bundled winter typical-day profiles under src/ries_opt/data/profiles.

The series are synthetic: windy nights, a midday solar peak, an evening
electric peak and a heat-dominated load. Shapes are fixed by the hourly
anchor tables below, so rerunning this script is byte-stable.
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "ries_opt" / "data" / "profiles"

HOURS = np.arange(24)

load_electric = [3100, 2950, 2850, 2800, 2850, 3050, 3500, 4200, 4700, 4900, 5000, 5100,
                 4900, 4700, 4650, 4800, 5200, 5900, 6300, 6200, 5700, 4900, 4100, 3500]
load_thermal = [7600, 7800, 7900, 8000, 7900, 7700, 7400, 7000, 6500, 6000, 5600, 5300,
                5100, 5000, 5100, 5400, 5900, 6500, 7000, 7300, 7400, 7500, 7500, 7500]
wind_speed = [10.5, 11.0, 11.2, 11.0, 10.6, 10.0, 9.2, 8.2, 7.0, 6.2, 5.6, 5.2,
              5.0, 5.0, 5.4, 6.0, 6.8, 7.6, 8.4, 9.0, 9.6, 10.0, 10.2, 10.4]
outdoor = [-6.0, -6.5, -7.0, -7.3, -7.5, -7.2, -6.5, -5.0, -3.0, -1.0, 1.0, 2.5,
           3.5, 4.0, 3.8, 3.0, 1.5, -0.5, -2.0, -3.0, -3.8, -4.5, -5.0, -5.5]
irradiance = np.clip(750.0 * np.sin(np.pi * (HOURS + 0.5 - 7.5) / 9.0), 0.0, None)
irradiance[(HOURS < 8) | (HOURS > 16)] = 0.0
cell_temperature = np.array(outdoor) + 0.03 * irradiance
straw = [2500.0] * 24
garbage = [1600.0] * 24
wastewater = [150, 140, 130, 130, 140, 170, 230, 280, 260, 230, 210, 210,
              220, 210, 200, 200, 210, 240, 270, 260, 230, 200, 180, 160]
wet_garbage = [900.0] * 24
# park-level scalings applied to the anchor tables above
load_electric = [round(1.0376 * v) for v in load_electric]
load_thermal = [round(1.214 * v) for v in load_thermal]
straw = [round(0.6339 * v) for v in straw]
garbage = [round(0.6339 * v) for v in garbage]
wastewater = [round(0.687 * v, 1) for v in wastewater]
wet_garbage = [round(0.687 * v) for v in wet_garbage]
urban_load = [42000, 40000, 39000, 38500, 39000, 41000, 46000, 52000, 56000, 58000, 59000, 60000,
              58000, 57000, 57000, 58000, 60000, 64000, 66000, 65000, 61000, 55000, 49000, 45000]

SERIES = {
    "load_electric": load_electric,
    "load_thermal": load_thermal,
    "wind_speed": wind_speed,
    "irradiance": irradiance,
    "cell_temperature": cell_temperature,
    "outdoor_temperature": outdoor,
    "straw": straw,
    "garbage": garbage,
    "wastewater": wastewater,
    "wet_garbage": wet_garbage,
    "urban_load": urban_load,
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, values in SERIES.items():
        lines = ["slot,value"] + [f"{t},{round(float(v), 4)!r}" for t, v in enumerate(values)]
        (OUT / f"{name}.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
