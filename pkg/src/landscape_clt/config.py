"""Experiment configuration: a sectioned key-value file where unknown keys are errors."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .disorder import KINDS as DISORDER_KINDS
from .disorder import ConfigurationError, DisorderSpec
from .empirical import DEFAULT_GRID, CenteringMode, ZGrid
from .landscapes import MODEL_KINDS, Landscape, make_model

SECTIONS = {
    "model": {"kind", "n", "n_list", "d", "offspring", "graph", "box", "eps_rule", "size"},
    "disorder": {"kind", "a"},
    "run": {"seed", "replicates", "samples", "grid", "centering", "wbank_draws", "wbank_depth"},
    "output": {"directory", "formats"},
    "verify": {"suites", "multiplier_scale", "ks_threshold", "replicates"},
}
VERIFY_SUITES = ("spin_glass_identities", "hermite_orthonormality", "combinatorics", "local_limit",
                 "limit_ks")
FORMATS = ("csv", "json")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


@dataclass
class ExperimentConfig:
    model_kind: str
    n_list: tuple
    model_params: dict
    disorder: DisorderSpec
    seed: int | None
    replicates: int = 100
    samples: int = 0
    grid: ZGrid = field(default_factory=ZGrid)
    centering: CenteringMode | None = None
    wbank_draws: int = 10**4
    wbank_depth: int = 25
    output_dir: Path = Path("out")
    formats: tuple = FORMATS
    suites: tuple = ()
    multiplier_scale: float = 1.0
    ks_threshold: float = 0.10
    verify_replicates: int = 100

    def model(self, n: int) -> Landscape:
        return make_model(self.model_kind, n, **self.model_params)

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigurationError("a seed is required: set [run] seed or pass --seed")
        return self.seed


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from None
    return parse_config(parser)


def parse_config(parser: configparser.ConfigParser) -> ExperimentConfig:
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigurationError(f"unknown section [{section}]")
        unknown = set(parser[section]) - SECTIONS[section]
        if unknown:
            raise ConfigurationError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    model = parser["model"] if parser.has_section("model") else {}
    disorder = parser["disorder"] if parser.has_section("disorder") else {}
    run = parser["run"] if parser.has_section("run") else {}
    output = parser["output"] if parser.has_section("output") else {}
    verify = parser["verify"] if parser.has_section("verify") else {}

    try:
        kind = model.get("kind", "assignment")
        if kind not in MODEL_KINDS:
            raise ConfigurationError(f"unknown model kind {kind!r}; choose from {', '.join(MODEL_KINDS)}")
        if "n_list" in model:
            n_list = _ints(model["n_list"])
        elif "n" in model:
            n_list = (int(model["n"]),)
        else:
            n_list = ()
        params = {}
        if "d" in model:
            params["d"] = int(model["d"])
        if "offspring" in model:
            params["offspring"] = model["offspring"]
        if "graph" in model:
            params["graph"] = model["graph"]
        if "box" in model:
            params["box"] = tuple(int(v) for v in model["box"].lower().split("x"))
        if "eps_rule" in model:
            params["eps_rule"] = model["eps_rule"]
        if "size" in model:
            params["size"] = int(float(model["size"]))

        dkind = disorder.get("kind", "rademacher")
        if dkind not in DISORDER_KINDS:
            raise ConfigurationError(f"unknown disorder kind {dkind!r}; choose from {', '.join(DISORDER_KINDS)}")
        spec = DisorderSpec(dkind, float(disorder["a"]) if "a" in disorder else None)

        suites = tuple(s.strip() for s in verify.get("suites", "").split(",") if s.strip())
        for s in suites:
            if s not in VERIFY_SUITES:
                raise ConfigurationError(f"unknown verify suite {s!r}; choose from {', '.join(VERIFY_SUITES)}")
        formats = tuple(f.strip() for f in output.get("formats", "csv,json").split(",") if f.strip())
        for f in formats:
            if f not in FORMATS:
                raise ConfigurationError(f"unknown output format {f!r}")

        cfg = ExperimentConfig(
            model_kind=kind,
            n_list=n_list,
            model_params=params,
            disorder=spec,
            seed=int(run["seed"]) if "seed" in run else None,
            replicates=int(run.get("replicates", 100)),
            samples=int(float(run.get("samples", 0))),
            grid=ZGrid(_floats(run["grid"])) if "grid" in run else ZGrid(DEFAULT_GRID),
            centering=CenteringMode.parse(run["centering"]) if "centering" in run else None,
            wbank_draws=int(float(run.get("wbank_draws", 10**4))),
            wbank_depth=int(run.get("wbank_depth", 25)),
            output_dir=Path(output.get("directory", "out")),
            formats=formats,
            suites=suites,
            multiplier_scale=float(verify.get("multiplier_scale", 1.0)),
            ks_threshold=float(verify.get("ks_threshold", 0.10)),
            verify_replicates=int(verify.get("replicates", 100)),
        )
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"invalid config value: {exc}") from None
    # build every model once so invalid n surfaces before any computation
    for n in cfg.n_list:
        cfg.model(n)
    return cfg
