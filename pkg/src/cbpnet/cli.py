"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 invalid model or configuration.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytics.diagnostics import birth_time_diagnostic, expectation_bound_check
from .analytics.isomorphism import RootedMultigraph
from .analytics.neighborhood import joint_tail, joint_tail_frequency, neighborhood_frequency
from .analytics.pagerank import graph_pagerank
from .analytics.stats import EmpiricalDistribution, tv_distance
from .collapse import generate_cbp
from .coupling import coupling_success_rate
from .engine import DEFAULT_NODE_CAP, grow_lifted_run
from .kernel import AttachmentKernel, KernelError, NoMalthusianRoot, malthusian_rate, rho_hat, validate_assumptions
from .limit import pmf_for_kernel, sample_stopped_batch
from .outdegree import DistributionError, OutDegreeDistribution
from .rng import GRAPH, LIMIT, Streams


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kernel: dict = field(default_factory=lambda: {"family": "linear", "slope": 1.0, "offset": 0.0})
    outdeg: dict = field(default_factory=lambda: {"point": 1})
    n: int = 1000
    m: int = 1
    replicas: int = 100
    samples: int = 10_000
    damping: float = 0.5
    seed: int = 0
    node_cap: int = DEFAULT_NODE_CAP
    tol: float = 1e-10
    workers: int = 1
    root_loop: bool = True
    x_max: int = 50
    out_dir: str | None = None
    dot: bool = False

    def model(self) -> tuple[AttachmentKernel, OutDegreeDistribution]:
        try:
            k = AttachmentKernel.from_dict(self.kernel)
            h = OutDegreeDistribution.from_dict(self.outdeg)
        except (KernelError, DistributionError, KeyError, TypeError) as e:
            raise ConfigError(f"invalid model: {e}") from e
        return k, h

    def validate(self) -> None:
        for name in ("n", "m", "replicas", "samples", "node_cap", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0 < self.damping < 1:
            raise ConfigError("damping must lie in (0, 1)")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.x_max < 0:
            raise ConfigError("x_max must be >= 0")
        self.model()

    def hashed_fields(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out_dir")
        d.pop("workers")
        return d

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.hashed_fields(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _f(x) -> str:
    return format(float(x), ".17g")


class Output:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.dir = Path(cfg.out_dir) if cfg.out_dir else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, payload: dict) -> None:
        payload = {"config_hash": self.cfg.config_hash, **payload}
        if self.dir:
            (self.dir / name).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")

    def csv(self, name: str, header: list, rows) -> None:
        if not self.dir:
            return
        with open(self.dir / name, "w", newline="") as fh:
            fh.write(f"# config_hash={self.cfg.config_hash}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_f(x) if isinstance(x, (float, np.floating)) else x for x in r])

    def text(self, name: str, body: str) -> None:
        if self.dir:
            (self.dir / name).write_text(body)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


# ---------------------------------------------------------------------------
# commands


def cmd_malthusian(cfg: ExperimentConfig, out: Output) -> int:
    kernel, _ = cfg.model()
    try:
        res = malthusian_rate(kernel, tol=cfg.tol)
    except NoMalthusianRoot as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    payload = {"lambda": res.lam, "residual": res.residual, "bracket": list(res.bracket),
               "domain_edge": kernel.domain_edge, "config_hash": cfg.config_hash}
    out.json("malthusian.json", payload)
    _emit(payload)
    return 0


def cmd_generate(cfg: ExperimentConfig, out: Output) -> int:
    kernel, h = cfg.model()
    run, g = generate_cbp(kernel, h, cfg.n, Streams(cfg.seed).generator(GRAPH), cfg.root_loop)
    out.json("graph.json", g.to_dict())
    if cfg.dot:
        if cfg.n > 200:
            raise ConfigError("DOT export is limited to n <= 200")
        out.text("graph.dot", g.to_dot())
    payload = {"n": g.n, "edge_count": g.edge_count, "S_n": int(run.node_count),
               "max_in_degree": int(g.in_degree[1:].max()), "config_hash": cfg.config_hash}
    _emit(payload)
    return 0


def cmd_couple(cfg: ExperimentConfig, out: Output) -> int:
    kernel, h = cfg.model()
    lam = malthusian_rate(kernel, tol=cfg.tol).lam
    ms = sorted({1, cfg.m})
    summary, rows = {}, []
    for m in ms:
        res = coupling_success_rate(kernel, h, cfg.n, m, cfg.replicas, cfg.seed, lam, cfg.workers, cfg.node_cap)
        summary[f"m={m}"] = res.to_dict()
        for r in res.rows:
            outs = r.get("outcomes", [])
            rows.append([m, r["replica"], " ".join(map(str, r["roots"])), int(r["success"]), r["failure_reason"],
                         sum(o["J"] for o in outs), sum(o["J_star"] for o in outs),
                         sum(o["dummy_count"] for o in outs),
                         " ".join(_f(o["s_star"]) for o in outs), " ".join(_f(o["t_target"]) for o in outs)])
    out.csv("couple_replicas.csv", ["m", "replica", "roots", "success", "failure_reason", "J", "J_star",
                                    "dummy_count", "s_star", "t_target"], rows)
    payload = {"lambda": lam, "n": cfg.n, "replicas": cfg.replicas, "rates": summary}
    out.json("couple_summary.json", payload)
    _emit({"config_hash": cfg.config_hash, **payload})
    return 0


def _pmf_table(kernel, h, x_max):
    xs = np.arange(x_max + 1)
    p = pmf_for_kernel(kernel, h, xs)
    return xs, p


def cmd_limit_sample(cfg: ExperimentConfig, out: Output) -> int:
    kernel, h = cfg.model()
    lam = malthusian_rate(kernel, tol=cfg.tol).lam
    batch = sample_stopped_batch(kernel, h, lam, cfg.samples, Streams(cfg.seed).generator(LIMIT),
                                 cfg.node_cap, cfg.damping)
    out.csv("limit_samples.csv", ["chi", "size", "N_root", "R_root"],
            zip(batch.chi, batch.size, batch.N_root, batch.R_root))
    payload = {"lambda": lam, "samples": len(batch), "discard_rate": batch.discard_rate,
               "mean_N_root": float(batch.N_root.mean())}
    xs, p = _pmf_table(kernel, h, cfg.x_max)
    if p is not None:
        emp = EmpiricalDistribution.from_samples(batch.N_root)
        payload["tv_closed_form"] = tv_distance(emp, p, support=range(cfg.x_max + 1))
        out.csv("limit_pmf.csv", ["x", "prob", "empirical"], ((int(x), float(q), emp.prob(int(x)))
                                                              for x, q in zip(xs, p)))
    out.json("limit_summary.json", payload)
    _emit({"config_hash": cfg.config_hash, **payload})
    return 0


def cmd_pmf(cfg: ExperimentConfig, out: Output) -> int:
    kernel, h = cfg.model()
    xs, p = _pmf_table(kernel, h, cfg.x_max)
    if p is None:
        print("error: closed forms exist for linear kernels with slope 1 and constant kernels", file=sys.stderr)
        return 2
    out.csv("pmf.csv", ["x", "prob"], zip(xs.tolist(), p))
    if not out.dir:
        print("x,prob")
        for x, q in zip(xs, p):
            print(f"{int(x)},{_f(q)}")
    return 0


R_GRID = (float("-inf"), 0.7, 1.3, 2.1)
K_GRID = (0, 1, 2, 5)


def cmd_compare(cfg: ExperimentConfig, out: Output) -> int:
    kernel, h = cfg.model()
    lam = malthusian_rate(kernel, tol=cfg.tol).lam
    st = Streams(cfg.seed)
    run, g = generate_cbp(kernel, h, cfg.n, st.generator(GRAPH), cfg.root_loop)
    pr = graph_pagerank(g, cfg.damping)
    batch = sample_stopped_batch(kernel, h, lam, cfg.samples, st.generator(LIMIT), cfg.node_cap, cfg.damping)
    kept = batch.kept()

    grid = []
    for k in K_GRID:
        for r in R_GRID:
            grid.append((k, r, joint_tail_frequency(g, pr, k, r), joint_tail(kept.N_root, kept.R_root, k, r)))
    out.csv("compare_grid.csv", ["k", "r", "graph_freq", "limit_freq"], grid)

    neigh = {}
    support = np.flatnonzero(h.pmf) + 1
    for d in support[:3].tolist():
        root_only = RootedMultigraph(1, 0, (d,), (0,), {})
        neigh[f"root_only_mark{d}"] = {
            "graph": neighborhood_frequency(g, root_only),
            "limit": float(np.mean((kept.size == 1) & (kept.root_mark == d))),
        }
    bt = birth_time_diagnostic(run, lam)
    payload = {
        "lambda": lam, "n": cfg.n, "samples": len(batch), "discard_rate": batch.discard_rate,
        "pagerank_iterations": pr.iterations, "pagerank_mean": float(pr.R.mean()),
        "joint_tail": [{"k": k, "r": r if np.isfinite(r) else None, "graph": a, "limit": b}
                       for k, r, a, b in grid],
        "max_joint_tail_delta": max(abs(a - b) for _, _, a, b in grid),
        "neighborhoods": neigh,
        "birth_time_diagnostic": [{"m": m, "stat": s} for m, s in bt],
    }
    out.json("compare_report.json", payload)
    _emit({"config_hash": cfg.config_hash, "max_joint_tail_delta": payload["max_joint_tail_delta"],
           "discard_rate": batch.discard_rate})
    return 0


def cmd_diagnose(cfg: ExperimentConfig, out: Output) -> int:
    kernel, h = cfg.model()
    rep = validate_assumptions(kernel)
    payload = {"assumptions": rep.to_dict()}
    if rep.lam is not None:
        st = Streams(cfg.seed)
        run = grow_lifted_run(kernel, cfg.n, rng=st.generator(GRAPH))
        if cfg.n >= 10:
            payload["birth_time_diagnostic"] = [{"m": m, "stat": s} for m, s in birth_time_diagnostic(run, rep.lam)]
        rows = expectation_bound_check(kernel, h, (0.0, 0.25, 0.5, 1.0), cfg.samples, st.generator(LIMIT),
                                       cfg.node_cap)
        payload["expectation_bound"] = [r.to_dict() for r in rows]
        payload["rho_hat_at_lambda"] = rho_hat(kernel, rep.lam).value
    out.json("diagnose.json", payload)
    _emit({"config_hash": cfg.config_hash, **payload})
    return 0


COMMANDS = {
    "malthusian": cmd_malthusian,
    "generate": cmd_generate,
    "couple": cmd_couple,
    "limit-sample": cmd_limit_sample,
    "compare": cmd_compare,
    "pmf": cmd_pmf,
    "diagnose": cmd_diagnose,
}


def _parse_pmf(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cbpnet", description="Collapsed branching process graphs and their local limit")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    g = p.add_argument_group("model")
    g.add_argument("--kernel", choices=["linear", "constant"], help="kernel family")
    g.add_argument("--slope", type=float)
    g.add_argument("--offset", type=float, help="additive constant (beta)")
    g.add_argument("--outdeg-point", type=int, metavar="D")
    g.add_argument("--outdeg-uniform", type=int, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--outdeg-pmf", type=_parse_pmf, metavar="P1,P2,...")
    g.add_argument("--outdeg-gamma", type=float)
    g.add_argument("--outdeg-truncation", type=int)
    e = p.add_argument_group("experiment")
    for name, typ in (("n", int), ("m", int), ("replicas", int), ("samples", int), ("damping", float),
                      ("seed", int), ("node-cap", int), ("tol", float), ("workers", int), ("x-max", int)):
        e.add_argument(f"--{name}", type=typ)
    e.add_argument("--out-dir")
    e.add_argument("--dot", action="store_true", default=None, help="also write graph.dot (generate)")
    e.add_argument("--no-root-loop", dest="root_loop", action="store_false", default=None)
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from e
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(base) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = ExperimentConfig(**base)

    if args.kernel is not None:
        cfg.kernel = {"family": args.kernel}
        if args.kernel == "linear":
            cfg.kernel["slope"] = 1.0
        cfg.kernel["offset"] = 1.0 if args.kernel == "constant" else 0.0
    if args.slope is not None:
        cfg.kernel = {**cfg.kernel, "slope": args.slope}
    if args.offset is not None:
        cfg.kernel = {**cfg.kernel, "offset": args.offset}
    if args.outdeg_point is not None:
        cfg.outdeg = {"point": args.outdeg_point}
    if args.outdeg_uniform is not None:
        cfg.outdeg = {"uniform": list(args.outdeg_uniform)}
    if args.outdeg_pmf is not None:
        cfg.outdeg = {"pmf": args.outdeg_pmf}
    if args.outdeg_gamma is not None:
        cfg.outdeg = {"gamma": args.outdeg_gamma}
    if args.outdeg_truncation is not None:
        cfg.outdeg = {**cfg.outdeg, "truncation": args.outdeg_truncation}
    for name in ("n", "m", "replicas", "samples", "damping", "seed", "node_cap", "tol", "workers", "x_max",
                 "out_dir", "dot", "root_loop"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg, Output(cfg))
    except (ConfigError, KernelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
