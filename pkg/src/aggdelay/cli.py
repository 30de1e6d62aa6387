"""Command-line entry point.

Subcommands wrap the analytic model, the solver, and the simulator:

    profiles    list the built-in standard/rate presets
    gain        evaluate one G(k, lambda) point
    sweep       (k, lambda) grid of the analytic chain
    threshold   break-even rate lambda*(k) per k
    optimal-k   batch size minimizing mean system time at one rate
    simulate    one seeded Monte Carlo run (or replications)
    validate    simulation vs analytic side-by-side

Data goes to stdout or ``--output``; diagnostics go to stderr. Exit
codes: 0 success, 2 configuration error, 3 threshold non-convergence,
4 simulation failure.

CSV contract: header
``k,lambda,erlang_wait_s,service_mean_s,rho,queue_wait_s,system_time_s,gain_s,stable``,
12 significant digits, ``.`` decimal separator, ``inf``/``-inf``/``nan``
literals for non-finite values, booleans as ``true``/``false``, rows in
k-outer lambda-inner order. The JSON config schema uses ``_us``/``_s``
suffixed keys for durations; CSV durations are always seconds.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace

from .model import PayloadFamily, PKForm, TrafficSpec
from .phy import (
    RATES_11B,
    RATES_11G,
    PhyProfile,
    Standard,
    overhead_gamma,
    profile_for,
)
from .presets import PRESETS, preset
from .sim import SimConfig, SimMode, replications, simulate, validate_against_model
from .solver import SearchParams, gain_grid, lambda_threshold, optimal_k

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_SIM = 4

SWEEP_HEADER = (
    "k,lambda,erlang_wait_s,service_mean_s,rho,queue_wait_s,"
    "system_time_s,gain_s,stable"
)
THRESHOLD_HEADER = "k,lambda_star,lambda_low,lambda_high,iterations,converged,note"
PROFILES_HEADER = (
    "standard,rate_bps,slot_us,difs_us,sifs_us,preamble_us,cw,"
    "mac_header_bits,crc_bits,ack_bits,ack_rate_bps,gamma_us"
)
SIM_HEADER = (
    "seed,frames_generated,frames_measured,warmup_excluded,in_flight,"
    "sojourn_mean_s,sojourn_stddev_s,ci95_halfwidth_s,buffer_wait_mean_s,"
    "buffer_wait_ci95_s,queue_wait_mean_s,service_mean_s"
)


class ConfigError(ValueError):
    """Bad command line, config file, or parameter combination."""


# --------------------------------------------------------------------------
# formatting


def fmt(value) -> str:
    """Deterministic CSV cell: 12 significant digits for floats."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    return str(value)


def _json_value(value):
    """Map non-finite floats to their CSV literals for strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return fmt(value)
    return value


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _to_us(seconds: float) -> float:
    """Microsecond value that divides back to exactly ``seconds``."""
    us = seconds * 1e6
    if us / 1e6 == seconds:
        return us
    for candidate in (math.nextafter(us, math.inf), math.nextafter(us, -math.inf)):
        if candidate / 1e6 == seconds:
            return candidate
    return us


# --------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class GridSpec:
    """Arrival-rate grid: ``points`` values from min to max inclusive."""

    kind: str
    min: float
    max: float
    points: int

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "geometric"):
            raise ConfigError(f"grid kind must be linear or geometric, got {self.kind!r}")
        if not self.min < self.max:
            raise ConfigError("grid needs min < max")
        if self.min <= 0.0:
            raise ConfigError("grid rates must be positive")
        if self.points < 2:
            raise ConfigError("grid needs points >= 2")

    def values(self) -> list[float]:
        n = self.points
        if self.kind == "linear":
            step = (self.max - self.min) / (n - 1)
            vals = [self.min + i * step for i in range(n)]
        else:
            ratio = (self.max / self.min) ** (1.0 / (n - 1))
            vals = [self.min * ratio**i for i in range(n)]
        vals[-1] = self.max
        return vals


@dataclass(frozen=True)
class SimSettings:
    mode: SimMode
    seed: int
    num_frames: int
    warmup_frames: int
    k: int
    sources: tuple[float, ...] | None
    replications: int


@dataclass(frozen=True)
class RunConfig:
    """Everything one subcommand invocation needs, config-file round-trippable."""

    phy: PhyProfile
    traffic: TrafficSpec
    form: PKForm
    k_values: tuple[int, ...]
    k_max: int | None
    lam: float | None
    grid: GridSpec | None
    sim: SimSettings | None
    search: SearchParams | None
    out_format: str
    out_path: str | None


def _parse_phy(section: dict) -> PhyProfile:
    std = section.get("standard")
    if std in ("b", "g"):
        if "rate_bps" not in section:
            raise ConfigError("phy.rate_bps is required for standard presets")
        profile = profile_for(std, float(section["rate_bps"]))
        override = section.get("backoff_override_us")
        if override is not None:
            profile = replace(profile, backoff_override=float(override) / 1e6)
        if section.get("caption_only_overhead", False):
            profile = replace(profile, caption_only_overhead=True)
        return profile
    if std == "custom":
        required = (
            "bit_rate_bps",
            "slot_us",
            "difs_us",
            "sifs_us",
            "preamble_us",
            "cw",
            "mac_header_bits",
            "crc_bits",
            "ack_bits",
            "ack_rate_bps",
        )
        missing = [key for key in required if key not in section]
        if missing:
            raise ConfigError(f"custom phy is missing keys: {', '.join(missing)}")
        override = section.get("backoff_override_us")
        return PhyProfile(
            standard_id=Standard.CUSTOM,
            bit_rate=float(section["bit_rate_bps"]),
            slot=float(section["slot_us"]) / 1e6,
            difs=float(section["difs_us"]) / 1e6,
            sifs=float(section["sifs_us"]) / 1e6,
            preamble=float(section["preamble_us"]) / 1e6,
            cw=int(section["cw"]),
            mac_header_bits=int(section["mac_header_bits"]),
            crc_bits=int(section["crc_bits"]),
            ack_bits=int(section["ack_bits"]),
            ack_rate=float(section["ack_rate_bps"]),
            backoff_override=None if override is None else float(override) / 1e6,
            caption_only_overhead=bool(section.get("caption_only_overhead", False)),
        )
    raise ConfigError(f"phy.standard must be 'b', 'g', or 'custom', got {std!r}")


def _dump_phy(profile: PhyProfile) -> dict:
    if profile.standard_id is not Standard.CUSTOM:
        out = {
            "standard": profile.standard_id.value,
            "rate_bps": profile.bit_rate,
        }
        if profile.backoff_override is not None:
            out["backoff_override_us"] = _to_us(profile.backoff_override)
        if profile.caption_only_overhead:
            out["caption_only_overhead"] = True
        return out
    return {
        "standard": "custom",
        "bit_rate_bps": profile.bit_rate,
        "slot_us": _to_us(profile.slot),
        "difs_us": _to_us(profile.difs),
        "sifs_us": _to_us(profile.sifs),
        "preamble_us": _to_us(profile.preamble),
        "cw": profile.cw,
        "mac_header_bits": profile.mac_header_bits,
        "crc_bits": profile.crc_bits,
        "ack_bits": profile.ack_bits,
        "ack_rate_bps": profile.ack_rate,
        "backoff_override_us": (
            None
            if profile.backoff_override is None
            else _to_us(profile.backoff_override)
        ),
        "caption_only_overhead": profile.caption_only_overhead,
    }


def _parse_traffic(section: dict, lam: float) -> TrafficSpec:
    family_name = section.get("payload_family", "deterministic")
    try:
        family = PayloadFamily(family_name)
    except ValueError:
        valid = ", ".join(f.value for f in PayloadFamily)
        raise ConfigError(
            f"unknown payload_family {family_name!r}; valid: {valid}"
        ) from None

    has_bits = "payload_mean_bits" in section
    has_bytes = "payload_mean_bytes" in section
    if has_bits and has_bytes:
        raise ConfigError(
            "payload_mean_bits and payload_mean_bytes are mutually exclusive"
        )
    mean_bits = None
    if has_bits:
        mean_bits = float(section["payload_mean_bits"])
    elif has_bytes:
        mean_bits = 8.0 * float(section["payload_mean_bytes"])

    if family is PayloadFamily.UNIFORM_RANGE:
        if mean_bits is not None:
            raise ConfigError("uniform-range derives its mean from lo/hi")
        if "uniform_lo_bits" not in section or "uniform_hi_bits" not in section:
            raise ConfigError("uniform-range needs uniform_lo_bits and uniform_hi_bits")
        return TrafficSpec.uniform_range(
            lam, float(section["uniform_lo_bits"]), float(section["uniform_hi_bits"])
        )
    if family is PayloadFamily.EMPIRICAL:
        if mean_bits is not None:
            raise ConfigError("empirical derives its mean from the value list")
        values = section.get("empirical_values_bits")
        if not values:
            raise ConfigError("empirical needs a non-empty empirical_values_bits list")
        return TrafficSpec.empirical(lam, values)
    if mean_bits is None:
        raise ConfigError(
            "one of payload_mean_bits / payload_mean_bytes is required"
        )
    if family is PayloadFamily.DETERMINISTIC:
        return TrafficSpec.deterministic(lam, mean_bits)
    return TrafficSpec.exponential(lam, mean_bits)


def _dump_traffic(traffic: TrafficSpec) -> dict:
    out = {"payload_family": traffic.payload_family.value}
    if traffic.payload_family is PayloadFamily.UNIFORM_RANGE:
        out["uniform_lo_bits"] = traffic.uniform_lo
        out["uniform_hi_bits"] = traffic.uniform_hi
    elif traffic.payload_family is PayloadFamily.EMPIRICAL:
        out["empirical_values_bits"] = list(traffic.empirical_values)
    else:
        out["payload_mean_bits"] = traffic.payload_mean
    return out


def _parse_k_values(spec) -> tuple[int, ...]:
    if isinstance(spec, int) and not isinstance(spec, bool):
        return (spec,)
    if isinstance(spec, str):
        if ".." in spec:
            lo_text, hi_text = spec.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if lo > hi:
                raise ConfigError(f"bad k range {spec!r}")
            return tuple(range(lo, hi + 1))
        return tuple(int(part) for part in spec.split(","))
    if isinstance(spec, list):
        return tuple(int(v) for v in spec)
    raise ConfigError(f"cannot parse k specification {spec!r}")


def _parse_lambda(spec) -> tuple[float | None, GridSpec | None]:
    """Returns (fixed lambda, grid); exactly one is non-None."""
    if isinstance(spec, dict):
        try:
            grid = GridSpec(
                kind=spec.get("kind", "linear"),
                min=float(spec["min"]),
                max=float(spec["max"]),
                points=int(spec["points"]),
            )
        except KeyError as exc:
            raise ConfigError(f"lambda grid is missing key {exc}") from None
        return None, grid
    lam = float(spec)
    if lam <= 0.0:
        raise ConfigError("lambda must be positive")
    return lam, None


def parse_run_config(cfg: dict) -> RunConfig:
    """Build a validated RunConfig from a config mapping (JSON schema)."""
    unknown = set(cfg) - {
        "phy",
        "traffic",
        "form",
        "k",
        "k_max",
        "lambda",
        "sim",
        "search",
        "output",
    }
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    phy_section = dict(cfg.get("phy") or {})
    phy_section.setdefault("standard", "b")
    if phy_section["standard"] == "b":
        phy_section.setdefault("rate_bps", 11e6)
    phy = _parse_phy(phy_section)

    lam = None
    grid = None
    if "lambda" in cfg and cfg["lambda"] is not None:
        lam, grid = _parse_lambda(cfg["lambda"])

    sim_settings = None
    if "sim" in cfg and cfg["sim"] is not None:
        section = dict(cfg["sim"])
        sources = section.get("sources")
        sources = None if sources is None else tuple(float(s) for s in sources)
        if lam is None and sources is not None:
            lam = sum(sources)
        mode_name = section.get("mode", "standard")
        try:
            mode = SimMode(mode_name)
        except ValueError:
            raise ConfigError(
                f"sim.mode must be 'standard' or 'aggregated', got {mode_name!r}"
            ) from None
        k_default = 1 if mode is SimMode.STANDARD else None
        k = section.get("k", k_default)
        if k is None:
            raise ConfigError("aggregated simulation needs sim.k >= 2")
        sim_settings = SimSettings(
            mode=mode,
            seed=int(section.get("seed", 0)),
            num_frames=int(section.get("num_frames", 100_000)),
            warmup_frames=int(section.get("warmup_frames", 1_000)),
            k=int(k),
            sources=sources,
            replications=int(section.get("replications", 1)),
        )
        if sim_settings.replications < 1:
            raise ConfigError("sim.replications must be >= 1")

    traffic_section = dict(cfg.get("traffic") or {})
    family_name = traffic_section.get("payload_family", "deterministic")
    if (
        family_name in ("deterministic", "exponential")
        and "payload_mean_bits" not in traffic_section
        and "payload_mean_bytes" not in traffic_section
    ):
        traffic_section["payload_mean_bits"] = 800.0  # package default payload
    traffic = _parse_traffic(traffic_section, lam if lam is not None else 1.0)

    form_name = cfg.get("form", PKForm.DETERMINISTIC_SERVICE.value)
    try:
        form = PKForm(form_name)
    except ValueError:
        valid = ", ".join(f.value for f in PKForm)
        raise ConfigError(f"unknown form {form_name!r}; valid: {valid}") from None

    k_values = _parse_k_values(cfg["k"]) if "k" in cfg and cfg["k"] is not None else ()
    k_max = int(cfg["k_max"]) if cfg.get("k_max") is not None else None

    search = None
    if "search" in cfg and cfg["search"] is not None:
        section = cfg["search"]
        try:
            search = SearchParams(
                lambda_min=float(section.get("lambda_min", 1.0)),
                lambda_max=(
                    None
                    if section.get("lambda_max") is None
                    else float(section["lambda_max"])
                ),
                rel_tol=float(section.get("rel_tol", 1e-6)),
                max_iter=int(section.get("max_iter", 200)),
                scan_points=int(section.get("scan_points", 64)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    output = cfg.get("output") or {}
    out_format = output.get("format", "csv")
    if out_format not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {out_format!r}")

    return RunConfig(
        phy=phy,
        traffic=traffic,
        form=form,
        k_values=k_values,
        k_max=k_max,
        lam=lam,
        grid=grid,
        sim=sim_settings,
        search=search,
        out_format=out_format,
        out_path=output.get("path"),
    )


def dump_run_config(rc: RunConfig) -> dict:
    """Canonical config mapping; parse_run_config inverts it exactly."""
    out: dict = {
        "phy": _dump_phy(rc.phy),
        "traffic": _dump_traffic(rc.traffic),
        "form": rc.form.value,
        "output": {"format": rc.out_format, "path": rc.out_path},
    }
    if rc.k_values:
        out["k"] = list(rc.k_values)
    if rc.k_max is not None:
        out["k_max"] = rc.k_max
    if rc.grid is not None:
        out["lambda"] = {
            "kind": rc.grid.kind,
            "min": rc.grid.min,
            "max": rc.grid.max,
            "points": rc.grid.points,
        }
    elif rc.lam is not None:
        out["lambda"] = rc.lam
    if rc.sim is not None:
        out["sim"] = {
            "mode": rc.sim.mode.value,
            "seed": rc.sim.seed,
            "num_frames": rc.sim.num_frames,
            "warmup_frames": rc.sim.warmup_frames,
            "k": rc.sim.k,
            "sources": None if rc.sim.sources is None else list(rc.sim.sources),
            "replications": rc.sim.replications,
        }
    if rc.search is not None:
        out["search"] = {
            "lambda_min": rc.search.lambda_min,
            "lambda_max": rc.search.lambda_max,
            "rel_tol": rc.search.rel_tol,
            "max_iter": rc.search.max_iter,
            "scan_points": rc.search.scan_points,
        }
    return out


# --------------------------------------------------------------------------
# argument handling


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE", help="JSON config file")
    sub.add_argument("--preset", metavar="NAME", help="named preset (see README)")
    sub.add_argument(
        "--dump-config",
        action="store_true",
        help="print the effective config as JSON and exit",
    )
    sub.add_argument("--format", choices=("csv", "json"), default=None)
    sub.add_argument("--output", metavar="PATH", default=None)
    sub.add_argument("--standard", choices=("b", "g"), default=None)
    sub.add_argument("--rate", type=float, default=None, help="PHY rate, bit/s")
    sub.add_argument(
        "--form", choices=tuple(f.value for f in PKForm), default=None
    )
    sub.add_argument("--payload-mean-bits", type=float, default=None)
    sub.add_argument("--payload-mean-bytes", type=float, default=None)
    sub.add_argument(
        "--payload-family",
        choices=tuple(f.value for f in PayloadFamily),
        default=None,
    )
    sub.add_argument(
        "--payload-uniform", metavar="LO:HI", default=None, help="bits, inclusive range"
    )
    sub.add_argument(
        "--payload-empirical", metavar="V1,V2,...", default=None, help="bits"
    )
    sub.add_argument(
        "--caption-only-gamma",
        action="store_true",
        help="overhead = difs + 2*preamble only",
    )
    sub.add_argument(
        "--backoff-literal-us",
        type=float,
        default=None,
        help="pin the mean backoff to this constant (us)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aggdelay",
        description="Decide when 802.11 frame aggregation reduces mean delay.",
    )
    commands = parser.add_subparsers(dest="command")

    p = commands.add_parser("profiles", help="list built-in standard/rate presets")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", metavar="PATH", default=None)

    p = commands.add_parser("gain", help="evaluate one G(k, lambda) point")
    _add_common_flags(p)
    p.add_argument("--k", default=None, help="batch size")
    p.add_argument("--lambda", dest="lam", type=float, default=None)

    p = commands.add_parser("sweep", help="(k, lambda) grid of the analytic chain")
    _add_common_flags(p)
    p.add_argument("--k", default=None, help="e.g. 5, 2..10, or 2,5,8")
    p.add_argument(
        "--lambda", dest="lam", default=None, help="grid MIN:MAX:POINTS or one rate"
    )
    p.add_argument("--grid-kind", choices=("linear", "geometric"), default=None)

    p = commands.add_parser("threshold", help="break-even rate lambda*(k) per k")
    _add_common_flags(p)
    p.add_argument("--k", default=None, help="e.g. 2..20")
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--scan-points", type=int, default=None)

    p = commands.add_parser("optimal-k", help="best batch size at one rate")
    _add_common_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--k-max", type=int, default=None)

    for name in ("simulate", "validate"):
        p = commands.add_parser(name)
        _add_common_flags(p)
        p.add_argument("--mode", choices=("standard", "aggregated"), default=None)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument(
            "--sources", default=None, help="per-source rates, e.g. 50,50 (pps)"
        )
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--frames", type=int, default=None)
        p.add_argument("--warmup", type=int, default=None)
        if name == "simulate":
            p.add_argument("--replications", type=int, default=None)

    return parser


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, value in extra.items():
        if (
            key in out
            and isinstance(out[key], dict)
            and isinstance(value, dict)
        ):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _config_from_args(args: argparse.Namespace) -> dict:
    """preset < config file < command-line flags."""
    cfg: dict = {}
    if getattr(args, "preset", None):
        try:
            cfg = preset(args.preset)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = _merge(cfg, file_cfg)

    overrides: dict = {}
    phy: dict = {}
    if args.standard is not None:
        phy["standard"] = args.standard
    if args.rate is not None:
        phy["rate_bps"] = args.rate
    if args.caption_only_gamma:
        phy["caption_only_overhead"] = True
    if args.backoff_literal_us is not None:
        phy["backoff_override_us"] = args.backoff_literal_us
    if phy:
        base_phy = cfg.get("phy", {})
        if "standard" in phy and phy["standard"] != base_phy.get("standard"):
            overrides["phy"] = phy  # switching standards replaces the block
        else:
            overrides["phy"] = _merge(base_phy, phy)

    traffic: dict = {}
    if args.payload_family is not None:
        traffic["payload_family"] = args.payload_family
    if args.payload_mean_bits is not None:
        traffic["payload_mean_bits"] = args.payload_mean_bits
    if args.payload_mean_bytes is not None:
        traffic["payload_mean_bytes"] = args.payload_mean_bytes
    if args.payload_uniform is not None:
        try:
            lo_text, hi_text = args.payload_uniform.split(":", 1)
            traffic["uniform_lo_bits"] = float(lo_text)
            traffic["uniform_hi_bits"] = float(hi_text)
        except ValueError:
            raise ConfigError("--payload-uniform expects LO:HI") from None
        traffic.setdefault("payload_family", "uniform-range")
    if args.payload_empirical is not None:
        traffic["empirical_values_bits"] = [
            float(v) for v in args.payload_empirical.split(",")
        ]
        traffic.setdefault("payload_family", "empirical")
    if traffic:
        if "payload_mean_bits" in traffic or "payload_mean_bytes" in traffic:
            base_traffic = dict(cfg.get("traffic", {}))
            base_traffic.pop("payload_mean_bits", None)
            base_traffic.pop("payload_mean_bytes", None)
            overrides["traffic"] = _merge(base_traffic, traffic)
        else:
            overrides["traffic"] = _merge(cfg.get("traffic", {}), traffic)

    if args.form is not None:
        overrides["form"] = args.form
    if getattr(args, "k", None) is not None and args.command not in (
        "simulate",
        "validate",
    ):
        overrides["k"] = args.k
    if getattr(args, "k_max", None) is not None:
        overrides["k_max"] = args.k_max

    if getattr(args, "lam", None) is not None:
        if args.command == "sweep" and isinstance(args.lam, str) and ":" in args.lam:
            try:
                lo_text, hi_text, pts_text = args.lam.split(":", 2)
                grid = {
                    "min": float(lo_text),
                    "max": float(hi_text),
                    "points": int(pts_text),
                }
            except ValueError:
                raise ConfigError("--lambda grid expects MIN:MAX:POINTS") from None
            if args.grid_kind is not None:
                grid["kind"] = args.grid_kind
            else:
                grid["kind"] = cfg.get("lambda", {}).get("kind", "linear") if isinstance(cfg.get("lambda"), dict) else "linear"
            overrides["lambda"] = grid
        else:
            overrides["lambda"] = float(args.lam)
    elif getattr(args, "grid_kind", None) is not None and isinstance(
        cfg.get("lambda"), dict
    ):
        overrides["lambda"] = _merge(cfg["lambda"], {"kind": args.grid_kind})

    search: dict = {}
    for flag, key in (
        ("lambda_min", "lambda_min"),
        ("lambda_max", "lambda_max"),
        ("rel_tol", "rel_tol"),
        ("max_iter", "max_iter"),
        ("scan_points", "scan_points"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            search[key] = value
    if search:
        overrides["search"] = _merge(cfg.get("search", {}), search)
    elif args.command == "threshold" and "search" not in cfg:
        overrides["search"] = {}

    sim: dict = {}
    for flag, key in (
        ("mode", "mode"),
        ("seed", "seed"),
        ("frames", "num_frames"),
        ("warmup", "warmup_frames"),
        ("replications", "replications"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            sim[key] = value
    if args.command in ("simulate", "validate"):
        if getattr(args, "k", None) is not None:
            sim["k"] = args.k
        if getattr(args, "sources", None) is not None:
            sim["sources"] = [float(v) for v in args.sources.split(",")]
        overrides["sim"] = _merge(cfg.get("sim", {}), sim)

    output: dict = {}
    if args.format is not None:
        output["format"] = args.format
    elif args.command in ("simulate", "validate") and not (
        cfg.get("output") or {}
    ).get("format"):
        output["format"] = "json"
    if args.output is not None:
        output["path"] = args.output
    if output:
        overrides["output"] = _merge(cfg.get("output", {}), output)

    return _merge(cfg, overrides)


# --------------------------------------------------------------------------
# command implementations


def _emit(text: str, rc_path: str | None) -> None:
    if rc_path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(rc_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def sweep_csv(rows) -> str:
    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                fmt(value)
                for value in (
                    row.k,
                    row.lam,
                    row.erlang_wait,
                    row.service_mean,
                    row.rho,
                    row.queue_wait,
                    row.system_time,
                    row.gain,
                    row.stable,
                )
            )
        )
    return "\n".join(lines) + "\n"


def sweep_json(rows) -> str:
    payload = [
        {
            "k": row.k,
            "lambda": row.lam,
            "erlang_wait_s": _json_value(row.erlang_wait),
            "service_mean_s": _json_value(row.service_mean),
            "rho": _json_value(row.rho),
            "queue_wait_s": _json_value(row.queue_wait),
            "system_time_s": _json_value(row.system_time),
            "gain_s": _json_value(row.gain),
            "stable": row.stable,
        }
        for row in rows
    ]
    return _dump_json(payload) + "\n"


def _run_profiles(args: argparse.Namespace) -> int:
    entries = []
    for std, rates in ((Standard.DOT11B, RATES_11B), (Standard.DOT11G, RATES_11G)):
        for rate in rates:
            profile = profile_for(std, rate)
            entries.append(
                {
                    "standard": std.value,
                    "rate_bps": profile.bit_rate,
                    "slot_us": _to_us(profile.slot),
                    "difs_us": _to_us(profile.difs),
                    "sifs_us": _to_us(profile.sifs),
                    "preamble_us": _to_us(profile.preamble),
                    "cw": profile.cw,
                    "mac_header_bits": profile.mac_header_bits,
                    "crc_bits": profile.crc_bits,
                    "ack_bits": profile.ack_bits,
                    "ack_rate_bps": profile.ack_rate,
                    "gamma_us": overhead_gamma(profile).gamma_total * 1e6,
                }
            )
    if args.format == "json":
        text = _dump_json(entries) + "\n"
    else:
        lines = [PROFILES_HEADER]
        for e in entries:
            lines.append(",".join(fmt(v) for v in e.values()))
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _run_gain(rc: RunConfig) -> int:
    _require(rc.lam is not None, "gain needs --lambda")
    _require(len(rc.k_values) == 1, "gain needs exactly one --k")
    rows = gain_grid(rc.k_values, [rc.lam], rc.phy, rc.traffic, rc.form)
    text = sweep_json(rows) if rc.out_format == "json" else sweep_csv(rows)
    _emit(text, rc.out_path)
    return EXIT_OK


def _run_sweep(rc: RunConfig) -> int:
    _require(bool(rc.k_values), "sweep needs --k")
    _require(
        rc.grid is not None or rc.lam is not None,
        "sweep needs --lambda (grid MIN:MAX:POINTS or a single rate)",
    )
    lam_values = rc.grid.values() if rc.grid is not None else [rc.lam]
    rows = gain_grid(rc.k_values, lam_values, rc.phy, rc.traffic, rc.form)
    text = sweep_json(rows) if rc.out_format == "json" else sweep_csv(rows)
    _emit(text, rc.out_path)
    return EXIT_OK


def _run_threshold(rc: RunConfig) -> int:
    _require(bool(rc.k_values), "threshold needs --k")
    _require(all(k >= 2 for k in rc.k_values), "threshold needs every k >= 2")
    search = rc.search if rc.search is not None else SearchParams()
    results = [
        lambda_threshold(k, rc.phy, rc.traffic, rc.form, search) for k in rc.k_values
    ]
    if rc.out_format == "json":
        payload = [
            {
                "k": r.k,
                "lambda_star": _json_value(r.lambda_star),
                "lambda_low": r.bracket[0],
                "lambda_high": r.bracket[1],
                "iterations": r.iterations,
                "converged": r.converged,
                "note": r.note,
            }
            for r in results
        ]
        text = _dump_json(payload) + "\n"
    else:
        lines = [THRESHOLD_HEADER]
        for r in results:
            lines.append(
                ",".join(
                    fmt(v)
                    for v in (
                        r.k,
                        r.lambda_star,
                        r.bracket[0],
                        r.bracket[1],
                        r.iterations,
                        r.converged,
                        r.note,
                    )
                )
            )
        text = "\n".join(lines) + "\n"
    _emit(text, rc.out_path)
    if not all(r.converged for r in results):
        failed = [str(r.k) for r in results if not r.converged]
        print(
            f"threshold did not converge for k = {', '.join(failed)}",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _run_optimal_k(rc: RunConfig) -> int:
    _require(rc.lam is not None, "optimal-k needs --lambda")
    _require(rc.k_max is not None, "optimal-k needs --k-max")
    k_best, metrics = optimal_k(rc.lam, rc.phy, rc.traffic, rc.form, rc.k_max)
    record = {
        "k_best": k_best,
        "k_max": rc.k_max,
        "lambda": rc.lam,
        "erlang_wait_s": metrics.erlang_wait,
        "service_mean_s": metrics.service_mean,
        "rho": metrics.rho,
        "queue_wait_s": metrics.queue_wait,
        "system_time_s": metrics.system_time,
        "gain_s": metrics.gain,
        "stable": metrics.stable,
    }
    if rc.out_format == "json":
        text = _dump_json({k: _json_value(v) for k, v in record.items()}) + "\n"
    else:
        header = ",".join(record)
        values = ",".join(fmt(v) for v in record.values())
        text = header + "\n" + values + "\n"
    _emit(text, rc.out_path)
    return EXIT_OK


def _sim_config(rc: RunConfig) -> SimConfig:
    _require(rc.sim is not None, "this command needs simulation settings")
    _require(
        rc.lam is not None, "simulation needs --lambda or --sources"
    )
    settings = rc.sim
    return SimConfig(
        mode=settings.mode,
        phy=rc.phy,
        traffic=rc.traffic,
        seed=settings.seed,
        num_frames=settings.num_frames,
        warmup_frames=settings.warmup_frames,
        k=settings.k,
        sources=settings.sources,
    )


def _sim_rows(pairs) -> str:
    lines = [SIM_HEADER]
    for seed, result in pairs:
        lines.append(
            ",".join(
                fmt(v)
                for v in (
                    seed,
                    result.frames_generated,
                    result.frames_measured,
                    result.warmup_excluded,
                    result.in_flight,
                    result.sojourn_mean,
                    result.sojourn_stddev,
                    result.ci95_halfwidth,
                    result.buffer_wait_mean,
                    result.buffer_wait_ci95,
                    result.queue_wait_mean,
                    result.service_mean,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _run_simulate(rc: RunConfig) -> int:
    config = _sim_config(rc)
    n = rc.sim.replications
    try:
        if n == 1:
            pairs = [(config.seed, simulate(config))]
        else:
            pairs = replications(config, range(config.seed, config.seed + n))
    except Exception as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIM
    if rc.out_format == "csv":
        text = _sim_rows(pairs)
    elif n == 1:
        text = _dump_json(pairs[0][1].to_dict()) + "\n"
    else:
        text = (
            _dump_json([{"seed": s, "result": r.to_dict()} for s, r in pairs]) + "\n"
        )
    _emit(text, rc.out_path)
    return EXIT_OK


def _run_validate(rc: RunConfig) -> int:
    config = _sim_config(rc)
    try:
        report = validate_against_model(config, rc.form)
    except Exception as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_SIM
    if rc.out_format == "csv":
        sim_result = report.sim
        record = {
            "mode": report.mode.value,
            "k": report.k,
            "lambda": report.lam,
            "form": report.form.value,
            "analytic_stable": report.analytic_stable,
            "analytic_system_time_s": report.analytic_system_time,
            "sim_sojourn_mean_s": math.nan if sim_result is None else sim_result.sojourn_mean,
            "ci95_halfwidth_s": math.nan if sim_result is None else sim_result.ci95_halfwidth,
            "abs_deviation_s": report.abs_deviation,
            "rel_deviation": report.rel_deviation,
            "within_ci95": "" if report.within_ci95 is None else report.within_ci95,
            "interbatch_cv": report.interbatch_cv,
        }
        text = (
            ",".join(record)
            + "\n"
            + ",".join(fmt(v) for v in record.values())
            + "\n"
        )
    else:
        text = _dump_json(report.to_dict()) + "\n"
    _emit(text, rc.out_path)
    return EXIT_OK


_HANDLERS = {
    "gain": _run_gain,
    "sweep": _run_sweep,
    "threshold": _run_threshold,
    "optimal-k": _run_optimal_k,
    "simulate": _run_simulate,
    "validate": _run_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    if args.command == "profiles":
        return _run_profiles(args)
    try:
        cfg = _config_from_args(args)
        rc = parse_run_config(cfg)
        if args.dump_config:
            _emit(_dump_json(dump_run_config(rc)) + "\n", None)
            return EXIT_OK
        return _HANDLERS[args.command](rc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
