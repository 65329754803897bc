"""Command-line entry point: ``genauto {dist,play,evolve,emerge,eval}``.

Every option can also be set in a ``key = value`` file passed with
``--config``; command-line flags override file values. Exit status is 0 on
success, 1 on invalid input, 2 on a failure during the computation.
"""

from __future__ import annotations

import argparse
import importlib
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .algebra import Norm, automaton_distance
from .errors import ConfigError, GenautoError, MissingRequired, ParseError, UnknownKey
from .rng import DEFAULT_SEED

SUBCOMMANDS = ("dist", "play", "evolve", "emerge", "eval")


def _seed(text) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return value


def _pos_int(text) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text) -> int:
    value = int(text)
    if value < 0:
        raise ValueError(f"expected a nonnegative integer, got {text}")
    return value


def _pos_float(text) -> float:
    value = float(text)
    if not value > 0:
        raise ValueError(f"expected a positive number, got {text}")
    return value


@dataclass(frozen=True)
class Option:
    parse: Callable[[str], Any]
    default: Any = None
    required: bool = False
    help: str = ""
    kind: str = "value"  # "value", "in_path", "out_path", "out_dir"


_SEED = Option(_seed, DEFAULT_SEED, help="master seed (default 0)")

SCHEMAS: dict[str, dict[str, Option]] = {
    "dist": {
        "a": Option(str, required=True, kind="in_path", help="first automaton file"),
        "b": Option(str, required=True, kind="in_path", help="second automaton file"),
        "alpha": Option(str, "2", help="Hölder exponent >= 1, or 'max'"),
        "seed": _SEED,
    },
    "play": {
        "a": Option(str, required=True, help="strategy of player A"),
        "b": Option(str, required=True, help="strategy of player B"),
        "rounds": Option(_pos_int, 10, help="rounds in the match"),
        "table": Option(str, "default", help="payoff table file or 'default'"),
        "out": Option(str, None, kind="out_path", help="history CSV (stdout if omitted)"),
        "seed": _SEED,
    },
    "evolve": {
        "s0": Option(str, required=True, help="fixed opponent strategy"),
        "pop": Option(_pos_int, 50, help="population size (even)"),
        "gens": Option(_nonneg_int, 100, help="generations"),
        "plays": Option(_pos_int, 10, help="matches per fitness evaluation"),
        "rounds": Option(_pos_int, 50, help="rounds per match"),
        "table": Option(str, "default", help="payoff table file or 'default'"),
        "out": Option(str, required=True, kind="out_path", help="generation statistics CSV"),
        "dump_every": Option(_nonneg_int, 0, help="dump the best automaton every N generations (0: never)"),
        "dump_dir": Option(str, None, kind="out_dir", help="directory for dumps (default: next to --out)"),
        "seed": _SEED,
    },
    "emerge": {
        "agents": Option(_pos_int, 20, help="number of agents"),
        "grid_w": Option(_pos_int, 5, help="grid width"),
        "grid_h": Option(_pos_int, 4, help="grid height"),
        "neighborhood": Option(str, "radius:1.5", help="radius:<r> | knearest:<k> | graph:<path>"),
        "tau": Option(_pos_float, 0.1, help="cluster threshold"),
        "gens": Option(_nonneg_int, 200, help="generations"),
        "norm_alpha": Option(str, "2", help="Hölder exponent for the matrix norm, or 'max'"),
        "task": Option(str, None, help="task fitness hook as module:function"),
        "task_weight": Option(float, 1.0, help="weight of the neighborhood fitness in [0, 1]"),
        "states": Option(_pos_int, 3, help="states per behavior automaton"),
        "letters": Option(str, "a b", help="perception alphabet, space separated"),
        "initial": Option(str, "0", help="initial state indices, space separated"),
        "final": Option(str, "2", help="final state indices, space separated"),
        "out_dir": Option(str, required=True, kind="out_dir", help="directory for trend.csv and clusters.csv"),
        "seed": _SEED,
    },
    "eval": {
        "agent": Option(str, required=True, kind="in_path", help="behavior automaton file"),
        "seed": _SEED,
    },
}


@dataclass
class RunConfig:
    subcommand: str
    master_seed: int
    params: dict = field(default_factory=dict)
    print_config: bool = False

    def render(self) -> str:
        lines = [f"# genauto {self.subcommand}", f"seed = {self.master_seed}"]
        for key, value in self.params.items():
            if value is not None:
                lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def read_config_file(path: str, schema: dict[str, Option]) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in schema:
            raise UnknownKey(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno, path)
        values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="genauto", description="Genetic automata with multiplicities.")
    parser.add_argument("--version", action="version", version=f"genauto {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"{name} subcommand")
        p.add_argument("--config", default=None, help="key = value file; flags override it")
        p.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
        for key, opt in SCHEMAS[name].items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=opt.help)
    return parser


def parse_config(argv, config_file: str | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.subcommand is None:
        raise ConfigError("missing subcommand; choose one of " + ", ".join(SUBCOMMANDS))
    schema = SCHEMAS[args.subcommand]
    raw: dict[str, str] = {}
    path = args.config or config_file
    if path:
        raw.update(read_config_file(path, schema))
    for key in schema:
        flag = getattr(args, key)
        if flag is not None:
            raw[key] = flag
    params = {}
    for key, opt in schema.items():
        if key in raw:
            try:
                params[key] = opt.parse(raw[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from None
        elif opt.required:
            raise MissingRequired(f"missing required option --{key.replace('_', '-')}")
        else:
            params[key] = opt.default
    _validate_paths(schema, params)
    return RunConfig(args.subcommand, params.pop("seed"), params, args.print_config)


def _validate_paths(schema, params):
    for key, opt in schema.items():
        value = params.get(key)
        if value is None:
            continue
        if opt.kind == "in_path" and not Path(value).is_file():
            raise ConfigError(f"--{key}: no such file {value}")
        if opt.kind == "out_path":
            parent = Path(value).parent
            if parent.exists() and not parent.is_dir():
                raise ConfigError(f"--{key}: {parent} is not a directory")
        if opt.kind == "out_dir" and Path(value).exists() and not Path(value).is_dir():
            raise ConfigError(f"--{key.replace('_', '-')}: {value} is not a directory")


def _norm(text: str) -> Norm:
    try:
        return Norm.parse(text)
    except ValueError as exc:
        raise ConfigError(f"bad norm exponent {text!r}: {exc}") from None


def _table(text: str):
    from .dilemma import DEFAULT_TABLE, PayoffTable

    if text == "default":
        return DEFAULT_TABLE
    if not Path(text).is_file():
        raise ConfigError(f"--table: no such file {text}")
    return PayoffTable.load(text)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write(path: Path, lines, emitted: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines))
    emitted.append(str(path))


# Each command has a prepare step (may raise validation errors, exit 1) that
# returns a thunk doing the work (failures there exit 2).


def _prepare_dist(cfg: RunConfig, out):
    from .textio import load_automaton

    a = load_automaton(cfg.params["a"])
    b = load_automaton(cfg.params["b"])
    norm = _norm(cfg.params["alpha"])
    if not a.same_shape(b):
        raise ConfigError("automata differ in alphabet or state count")

    def work():
        out.write(_fmt(automaton_distance(a, b, norm)) + "\n")
        return []

    return work


def _prepare_eval(cfg: RunConfig, out):
    from .emergence import MAX_EVAL_STATES, evaluate
    from .textio import load_automaton

    A = load_automaton(cfg.params["agent"])
    if A.n > MAX_EVAL_STATES:
        raise ConfigError(f"{A.n} states exceed the evaluation limit of {MAX_EVAL_STATES}")

    def work():
        for row in evaluate(A):
            out.write(" ".join(_fmt(x) for x in row) + "\n")
        return []

    return work


def _prepare_play(cfg: RunConfig, out):
    from .dilemma import parse_strategy, play_match
    from .rng import derive_stream

    p = cfg.params
    a = parse_strategy(p["a"])
    b = parse_strategy(p["b"])
    table = _table(p["table"])

    def work():
        result = play_match(a, b, p["rounds"], table, derive_stream(cfg.master_seed, "play"))
        lines = ["round,action_a,action_b,pay_a,pay_b"]
        for r, (x, y) in enumerate(zip(result.actions_a, result.actions_b), start=1):
            pa, pb = table[(x, y)]
            lines.append(f"{r},{x.name},{y.name},{pa},{pb}")
        emitted = []
        if p["out"]:
            _write(Path(p["out"]), lines, emitted)
            out.write(f"totals {result.total_a} {result.total_b}\n")
        else:
            out.write("\n".join(lines) + "\n")
        return emitted

    return work


def _prepare_evolve(cfg: RunConfig, out):
    from .dilemma import MatchConfig, parse_strategy, train
    from .genetics import GAConfig, snapshot_csv_header, snapshot_csv_row
    from .textio import save_automaton

    p = cfg.params
    s0 = parse_strategy(p["s0"])
    if p["pop"] % 2 or p["pop"] < 2:
        raise ConfigError(f"--pop must be even and >= 2, got {p['pop']}")
    ga = GAConfig(population_size=p["pop"], generations=p["gens"], rng_seed=cfg.master_seed, dump_every=p["dump_every"])
    match = MatchConfig(plays=p["plays"], rounds=p["rounds"], table=_table(p["table"]))
    out_path = Path(p["out"])
    dump_dir = Path(p["dump_dir"]) if p["dump_dir"] else out_path.parent

    def work():
        stats = [snapshot_csv_header()]
        ipd = ["generation,mean_cooperation_rate,best_payoff_per_round"]
        emitted: list = []
        dumps = []
        for snap in train(s0, ga, match):
            stats.append(snapshot_csv_row(snap.snapshot))
            ipd.append(f"{snap.generation},{_fmt(snap.mean_cooperation_rate)},{_fmt(snap.best_payoff_per_round)}")
            g = snap.generation
            if ga.dump_every and (g % ga.dump_every == 0 or g == ga.generations):
                dumps.append((g, snap.snapshot.best))
        _write(out_path, stats, emitted)
        _write(out_path.with_name(out_path.stem + "_ipd.csv"), ipd, emitted)
        if dumps:
            dump_dir.mkdir(parents=True, exist_ok=True)
        for g, best in dumps:
            path = dump_dir / f"best_gen{g:05d}.wa"
            save_automaton(best.automaton, path, comment=f"best individual {best.id} at generation {g}")
            emitted.append(str(path))
        return emitted

    return work


def _load_task(spec: str):
    module, _, name = spec.partition(":")
    if not module or not name:
        raise ConfigError(f"task must look like module:function, got {spec!r}")
    try:
        return getattr(importlib.import_module(module), name)
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"cannot load task hook {spec!r}: {exc}") from None


def _int_list(text: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key} must be a list of integers, got {text!r}") from None


def neighborhood_from_text(text: str):
    from .emergence import Graph, GridRadius, KNearest

    kind, _, arg = text.partition(":")
    try:
        if kind == "radius":
            return GridRadius(_pos_float(arg))
        if kind == "knearest":
            return KNearest(_pos_int(arg))
    except ValueError as exc:
        raise ConfigError(f"bad neighborhood {text!r}: {exc}") from None
    if kind == "graph":
        return Graph(read_adjacency(arg))
    raise ConfigError(f"neighborhood must be radius:<r>, knearest:<k> or graph:<path>, got {text!r}")


def read_adjacency(path: str) -> dict[int, list[int]]:
    """Lines ``<agent>: <neighbor> <neighbor> ...``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc.strerror}") from None
    adjacency: dict[int, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, tail = line.partition(":")
        try:
            if not sep:
                raise ValueError
            adjacency.setdefault(int(head), []).extend(int(x) for x in tail.split())
        except ValueError:
            raise ParseError(f"expected '<id>: <id> ...', got {raw.strip()!r}", lineno, path) from None
    return adjacency


def _prepare_emerge(cfg: RunConfig, out):
    from .emergence import (
        CLUSTERS_HEADER,
        TREND_HEADER,
        BehaviorShape,
        EmergenceConfig,
        build_neighborhoods,
        cluster_rows,
        emerge,
        initial_agents,
        trend_row,
    )

    p = cfg.params
    task = _load_task(p["task"]) if p["task"] else None
    if task is None and p["task_weight"] != 1.0:
        raise ConfigError("task_weight below 1 needs a task hook (task = module:function)")
    try:
        shape = BehaviorShape(
            states=p["states"],
            letters=tuple(p["letters"].split()),
            initial=_int_list(p["initial"], "initial"),
            final=_int_list(p["final"], "final"),
        )
        ecfg = EmergenceConfig(
            agents=p["agents"],
            grid_w=p["grid_w"],
            grid_h=p["grid_h"],
            neighborhood=neighborhood_from_text(p["neighborhood"]),
            generations=p["gens"],
            norm=_norm(p["norm_alpha"]),
            tau=p["tau"],
            seed=cfg.master_seed,
            shape=shape,
            task=task,
            task_weight=p["task_weight"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    build_neighborhoods(initial_agents(ecfg), ecfg.neighborhood)
    out_dir = Path(p["out_dir"])

    def work():
        trend = [TREND_HEADER]
        clusters = [CLUSTERS_HEADER]
        for snap in emerge(ecfg):
            trend.append(trend_row(snap))
            clusters.extend(cluster_rows(snap))
        emitted: list = []
        _write(out_dir / "trend.csv", trend, emitted)
        _write(out_dir / "clusters.csv", clusters, emitted)
        return emitted

    return work


_PREPARE = {
    "dist": _prepare_dist,
    "eval": _prepare_eval,
    "play": _prepare_play,
    "evolve": _prepare_evolve,
    "emerge": _prepare_emerge,
}


def _origin(exc: BaseException) -> str:
    tb = traceback.extract_tb(exc.__traceback__)
    for frame in reversed(tb):
        parts = Path(frame.filename).parts
        if "genauto" in parts:
            return Path(frame.filename).stem
    return "genauto"


def run(config: RunConfig, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    if config.print_config:
        out.write(config.render())
        return 0
    try:
        work = _PREPARE[config.subcommand](config, out)
    except (GenautoError, ValueError, OSError) as exc:
        err.write(f"genauto {config.subcommand}: {_origin(exc)}: {exc}\n")
        return 1
    try:
        emitted = work()
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        err.write(f"genauto {config.subcommand}: {_origin(exc)}: {type(exc).__name__}: {exc}\n")
        return 2
    for path in emitted:
        out.write(f"wrote {path}\n")
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except GenautoError as exc:
        sys.stderr.write(f"genauto: {exc}\n")
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
