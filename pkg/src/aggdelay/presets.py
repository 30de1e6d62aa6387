"""Named run presets for the built-in reproduction experiments.

Each preset is a plain mapping in the CLI's JSON config schema, so
``--preset fig3`` and ``--config fig3.json`` travel the same code path.

Pinned by the experiment definitions: the standard and data rate, CW=16,
a 20 us backoff slot, DIFS and preamble of the chosen standard, and a
deterministic 800-bit mean payload. Everything else (SIFS 10 us, 192-bit
MAC header, 32-bit CRC, 112-bit ACK at the data rate, the queue-wait
form, and the sweep grids) is a package default filling values the
experiment definitions leave open; use ``caption_only_overhead`` to
bound the influence of the filled-in overhead terms.

- ``fig3``:          gain-vs-load sweep, 802.11b at 11 Mbit/s, k = 2..10.
- ``fig4-<mbps>``:   break-even rate per k = 2..20 for one 802.11b rate
                     (1, 2, 5.5, 11).
- ``fig5-<mbps>``:   the same for one 802.11g rate (6..54).
"""

from __future__ import annotations

import copy

_TRAFFIC_800_BITS = {
    "payload_family": "deterministic",
    "payload_mean_bits": 800.0,
}

PRESETS: dict[str, dict] = {
    "fig3": {
        "phy": {"standard": "b", "rate_bps": 11e6},
        "traffic": dict(_TRAFFIC_800_BITS),
        "form": "deterministic-service",
        "k": "2..10",
        "lambda": {"kind": "linear", "min": 1.0, "max": 1600.0, "points": 200},
        "output": {"format": "csv", "path": None},
    },
}

for _mbps, _rate in (("1", 1e6), ("2", 2e6), ("5.5", 5.5e6), ("11", 11e6)):
    PRESETS[f"fig4-{_mbps}"] = {
        "phy": {"standard": "b", "rate_bps": _rate},
        "traffic": dict(_TRAFFIC_800_BITS),
        "form": "deterministic-service",
        "k": "2..20",
        "output": {"format": "csv", "path": None},
    }

for _mbps, _rate in (
    ("6", 6e6),
    ("9", 9e6),
    ("12", 12e6),
    ("18", 18e6),
    ("24", 24e6),
    ("36", 36e6),
    ("48", 48e6),
    ("54", 54e6),
):
    PRESETS[f"fig5-{_mbps}"] = {
        "phy": {"standard": "g", "rate_bps": _rate},
        "traffic": dict(_TRAFFIC_800_BITS),
        "form": "deterministic-service",
        "k": "2..20",
        "output": {"format": "csv", "path": None},
    }


def preset(name: str) -> dict:
    """Deep copy of a named preset config; KeyError lists the valid names."""
    if name not in PRESETS:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    return copy.deepcopy(PRESETS[name])
