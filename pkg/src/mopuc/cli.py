"""Command-line harness.

    mopuc <command> --config CONFIG.json --out OUTPUT

Commands: moments, opuc, favard, scan, verify. Exit codes: 0 success,
2 invalid config or input, 3 numerical failure (including a failed verify).
"""
import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError, ReflectionTooLarge, VerificationFailed
from .matkernel import singular_values
from .measure import MatMeasure, compute_moments
from .opuc import OPUCSystem, build_system
from .rakhmanov import DEFAULT_LMAX, DEFAULT_RESOLUTION, scan, verify_system
from .recurrence import ReflectionSequence, favard_synthesize, recovered_reflections

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed config. Only the fields a command needs are required by it."""

    measure: dict = None
    N: int = None
    M: int = None
    Lmax: int = DEFAULT_LMAX
    resolution: int = DEFAULT_RESOLUTION
    seed: int = 0
    method: str = None
    reflection: dict = None
    random: dict = None
    system: object = None
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.N is not None and (not isinstance(self.N, int) or self.N < 1):
            raise ConfigError("N must be an integer >= 1")
        if not isinstance(self.Lmax, int) or self.Lmax < 1:
            raise ConfigError("Lmax must be an integer >= 1")
        if not isinstance(self.resolution, int) or self.resolution < 2 or self.resolution % 2:
            raise ConfigError("resolution must be a positive multiple of 2")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        if self.method not in (None, "quadrature", "moments"):
            raise ConfigError("method must be 'quadrature' or 'moments'")

    @classmethod
    def load(cls, path):
        path = Path(path)
        with path.open() as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if raw.get("schema") != SCHEMA:
            raise ConfigError(f"config needs \"schema\": {SCHEMA}")
        known = {"schema", "measure", "N", "M", "Lmax", "resolution", "seed",
                 "method", "reflection", "random", "system"}
        extra = sorted(set(raw) - known)
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(extra)}")
        fields = {k: raw[k] for k in known - {"schema"} if k in raw}
        return cls(base_dir=path.parent, **fields)

    def need(self, name):
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"config is missing {name!r}")
        return value

    def build_measure(self):
        return MatMeasure.from_json(self.need("measure"))


def _dump(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    Path(out).write_text(text)


def cmd_moments(cfg, out):
    measure = cfg.build_measure()
    M = cfg.M if cfg.M is not None else cfg.need("N")
    if not isinstance(M, int) or M < 0:
        raise ConfigError("M must be an integer >= 0")
    table = compute_moments(measure, M)
    _dump({"spec_hash": measure.spec_hash(), **table.to_json()}, out)


def cmd_opuc(cfg, out):
    measure = cfg.build_measure()
    system = build_system(measure, cfg.need("N"), method=cfg.method)
    _dump({"spec_hash": measure.spec_hash(), "system": system.to_json()}, out)


def _sequence(cfg):
    # prescribed coefficients are input data, so a norm >= 1 is a config error
    try:
        if cfg.reflection is not None:
            return ReflectionSequence.from_json(cfg.reflection)
        if cfg.random is not None:
            r = cfg.random
            rng = np.random.default_rng(cfg.seed)
            return ReflectionSequence.random(rng, int(r["p"]), int(r["N"]), float(r.get("maxNorm", 0.9)))
    except ReflectionTooLarge as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("config needs 'reflection' or 'random'")


def cmd_favard(cfg, out):
    seq = _sequence(cfg)
    system = favard_synthesize(seq)
    given, recovered = _svs(seq.H), _svs(recovered_reflections(seq))
    gap = float(np.max(np.abs(np.subtract(given, recovered)))) if given else 0.0
    _dump(
        {
            "system": system.to_json(),
            "input_singular_values": given,
            "recovered_singular_values": recovered,
            "roundtrip_discrepancy": gap,
        },
        out,
    )


def _svs(H):
    return [[float(x) for x in row] for row in singular_values(H)] if len(H) else []


def cmd_scan(cfg, out):
    measure = cfg.build_measure()
    report = scan(measure, cfg.need("N"), cfg.Lmax, cfg.resolution)
    out = Path(out)
    out.write_text(report.to_csv())
    out.with_suffix(".json").write_text(report.dumps())


def _verify_target(cfg):
    if cfg.system is not None:
        data = cfg.system
        if isinstance(data, str):
            with (cfg.base_dir / data).open() as fh:
                data = json.load(fh)
        return OPUCSystem.from_json(data.get("system", data))
    if cfg.measure is not None:
        return build_system(cfg.build_measure(), cfg.need("N"), method=cfg.method)
    return favard_synthesize(_sequence(cfg))


def cmd_verify(cfg, out):
    system = _verify_target(cfg)
    report = verify_system(system, cfg.Lmax, cfg.resolution)
    _dump(report, out)
    if report["breaches"]:
        raise VerificationFailed("identity check breached: " + ", ".join(report["breaches"]))


COMMANDS = {
    "moments": cmd_moments,
    "opuc": cmd_opuc,
    "favard": cmd_favard,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


def make_parser():
    parser = argparse.ArgumentParser(prog="mopuc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", required=True, help="output path")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        COMMANDS[args.command](cfg, args.out)
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
