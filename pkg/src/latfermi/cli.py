"""Command-line orchestration: deterministic file-based scans and runs.

Every subcommand writes CSV (tabular scans) or JSON (structured results)
with an embedded metadata block: tool version, the effective configuration,
quadrature resolution, and the seed.  Identical configuration and seed give
byte-identical output files.  Options may also come from a key=value config
file (--config); command-line flags take precedence.  Environment variables
are never consulted.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__, bounds, bulk, lattice, manybody, segregation
from .errors import BudgetExceededError, ConvergenceError


def _meta_lines(args: argparse.Namespace, keys, seed=None) -> list:
    lines = [f"# tool=latfermi {__version__}"]
    for key in keys:
        lines.append(f"# {key}={getattr(args, key)}")
    if seed is not None:
        lines.append(f"# seed={seed}")
    return lines


def _meta_dict(args: argparse.Namespace, keys, seed=None) -> dict:
    meta = {"tool": f"latfermi {__version__}"}
    for key in keys:
        val = getattr(args, key)
        meta[key] = str(val) if isinstance(val, Fraction) else val
    if seed is not None:
        meta["seed"] = seed
    return meta


def _write(path: str, text: str):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _quad(args) -> bulk.QuadratureSpec:
    if getattr(args, "points", None):
        return bulk.QuadratureSpec(args.dim, args.points)
    return bulk.QuadratureSpec.default(args.dim)


def cmd_bulk_table(args) -> int:
    q = _quad(args)
    rhos = np.linspace(args.rho_min, args.rho_max, args.rho_count)
    table = bulk.BulkTable.build(args.dim, rhos, q)
    meta = {
        "tool": f"latfermi {__version__}",
        "rho_min": args.rho_min,
        "rho_max": args.rho_max,
        "rho_count": args.rho_count,
        "seed": args.seed,
    }
    _write(args.out, table.to_csv(meta))
    return 0


def cmd_bounds_scan(args) -> int:
    q = _quad(args)
    if args.disconnected:
        rng = np.random.default_rng(args.seed)
        domains = lattice.random_subset_domains(
            args.dim, args.box, args.count, rng,
            sizes=range(1, args.max_size + 1),
        )
    else:
        domains = list(
            lattice.enumerate_domains(args.dim, args.max_size, connected=True, budget=args.budget)
        )
    records = bounds.scan_records(domains, q)
    keys = ["dim", "max_size", "disconnected", "box", "count", "budget", "points"]
    lines = _meta_lines(args, keys, args.seed)
    lines.append("domain_id,size,B,N,rho,S,lower_margin,upper_margin,ratio,lower_ok,upper_ok")
    dom_ids = {}
    for rec in records:
        dom_id = dom_ids.setdefault(rec.domain, len(dom_ids))
        lines.append(
            f"{dom_id},{len(rec.domain)},{rec.bond_count},{rec.n},{rec.rho!r},"
            f"{rec.s_lowest!r},{rec.lower_margin!r},{rec.upper_margin!r},"
            f"{rec.surface_ratio!r},{int(rec.lower_ok)},{int(rec.upper_ok)}"
        )
    _write(args.out, "\n".join(lines) + "\n")
    violations = sum(1 for r in records if not (r.lower_ok and r.upper_ok))
    print(f"{len(records)} records, {violations} violations -> {args.out}")
    return 0 if violations == 0 else 1


def cmd_surface_energy(args) -> int:
    q = _quad(args)
    fam = bounds.FamilySpec(
        connected=not args.disconnected,
        max_size=args.max_size,
        box_side=args.box if args.disconnected else None,
        budget=args.budget,
    )
    est = bounds.estimate_a(args.rho, args.dim, fam, q, eta=args.eta)
    report = bounds.check_theorem2(args.rho, args.dim, est, args.eta, q)
    payload = {
        "meta": _meta_dict(args, ["dim", "rho", "max_size", "disconnected", "box", "eta", "points"], args.seed),
        "empirical_min": est.empirical_min,
        "n_domains_searched": est.n_domains_searched,
        "witness": est.witness.to_text(),
        "window_low": est.window_low,
        "window_high": est.window_high,
        "positive": report.positive,
        "above_lower": report.above_lower,
    }
    _write(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_phase_diagram(args) -> int:
    rows = segregation.phase_diagram(args.dim, nx=args.nx, nt=args.nt)
    keys = ["dim", "nx", "nt"]
    lines = _meta_lines(args, keys, args.seed)
    lines.append("d,rho1,rho2,x,t,nu_star,heavy_density,phase")
    for r in rows:
        lines.append(
            f"{r.d},{r.rho1!r},{r.rho2!r},{r.x!r},{r.t!r},"
            f"{r.nu_star!r},{r.heavy_density!r},{r.phase}"
        )
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _domain_from_args(args) -> lattice.LatticeDomain:
    if args.domain_file:
        with open(args.domain_file) as fh:
            return lattice.LatticeDomain.from_text(fh.read())
    if args.length:
        return lattice.segment(args.length)
    raise ValueError("provide --length or --domain-file")


def cmd_fk_ground(args) -> int:
    dom = _domain_from_args(args)
    result = manybody.fk_ground(
        dom, args.n_light, args.n_heavy, args.U,
        strategy=args.strategy, budget=args.budget,
        seed=args.seed, steps=args.steps,
    )
    payload = {
        "meta": _meta_dict(
            args, ["length", "domain_file", "n_light", "n_heavy", "U", "strategy", "steps"],
            args.seed,
        ),
        "energy": result.energy,
        "strategy": result.strategy,
        "n_evaluated": result.n_evaluated,
        "configs": [manybody.word_string(c.word, c.n_sites) for c in result.configs],
        "bond_counts": [c.bond_count(dom) for c in result.configs],
    }
    _write(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_ed_run(args) -> int:
    dom = _domain_from_args(args)
    sector = manybody.FockSector(dom, args.n_light, args.n_heavy, budget=args.budget)
    op = manybody.build_hubbard(sector, args.U, args.t)
    gs = manybody.ground_state(op, seed=args.seed)
    weights = manybody.heavy_marginals(gs)
    order = np.argsort(weights)[::-1][:20]
    top = [
        {
            "config": manybody.word_string(int(sector.heavy_words[i]), len(dom)),
            "weight": float(weights[i]),
            "bond_count": manybody.HeavyConfig(int(sector.heavy_words[i]), len(dom)).bond_count(dom),
        }
        for i in order
    ]
    profile = {
        ",".join(str(c) for c in x): val
        for x, val in sorted(manybody.sigma_profile(gs, max_range=4).items())
    }
    rho1 = args.n_light / len(dom)
    rho2 = args.n_heavy / len(dom)
    prop_report = None
    if rho1 + rho2 < 1.0 and args.a_estimate is not None:
        rep = manybody.coefficient_bound_report(gs, args.U, args.t, args.a_estimate)
        prop_report = {
            "lhs": rep.lhs,
            "rhs": rep.rhs,
            "admissible": rep.admissible,
            "gamma": rep.gamma,
            "note": rep.note,
        }
    payload = {
        "meta": _meta_dict(
            args,
            ["length", "domain_file", "n_light", "n_heavy", "U", "t", "a_estimate"],
            args.seed,
        ),
        "sector_dim": sector.dim,
        "energy": gs.energy,
        "degeneracy": gs.degeneracy,
        "residual": gs.residual,
        "top_marginals": top,
        "sigma_profile": profile,
        "coefficient_bound": prop_report,
    }
    _write(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_scaling(args) -> int:
    lengths = [int(tok) for tok in args.sizes.split(",")]
    study = manybody.theorem1_scaling(
        lengths, Fraction(args.rho1), Fraction(args.rho2), args.U, args.t,
        x=args.x, seed=args.seed, budget=args.budget,
    )
    keys = ["sizes", "rho1", "rho2", "U", "t", "x"]
    lines = _meta_lines(args, keys, args.seed)
    if study.exponent is not None:
        lines.append(f"# fitted_exponent={study.exponent!r}")
    lines.append("L,N1,N2,U,t,x,sigma,sum_a2B")
    for r in study.rows:
        lines.append(
            f"{r.length},{r.n_light},{r.n_heavy},{r.u!r},{r.t!r},"
            f"{'+'.join(str(c) for c in r.x)},{r.sigma!r},{r.sum_a2_bonds!r}"
        )
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _apply_config_file(parser: argparse.ArgumentParser, argv: list) -> list:
    """Prepend key=value pairs from --config as defaults (flags win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    injected = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            injected.extend([f"--{key.strip().replace('_', '-')}", val.strip()])
    # injected options go first so explicit flags override them
    return rest[:1] + injected + rest[1:]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latfermi",
        description="Lattice free-fermion surface bounds, segregation, and small-system ED.",
    )
    parser.add_argument("--config", help="key=value config file; flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_points=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)
        if with_points:
            p.add_argument("--points", type=int, default=None,
                           help="transverse quadrature points per axis")

    p = sub.add_parser("bulk-table", help="tabulate fermi/e/xi/b on a density grid")
    p.add_argument("--dim", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--rho-min", type=float, default=0.01)
    p.add_argument("--rho-max", type=float, default=0.99)
    p.add_argument("--rho-count", type=int, default=99)
    common(p)
    p.set_defaults(func=cmd_bulk_table)

    p = sub.add_parser("bounds-scan", help="verify sandwich bounds over a domain family")
    p.add_argument("--dim", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--max-size", type=int, default=6)
    p.add_argument("--disconnected", action="store_true")
    p.add_argument("--box", type=int, default=5)
    p.add_argument("--count", type=int, default=200, help="random subsets when disconnected")
    p.add_argument("--budget", type=int, default=1_000_000)
    common(p)
    p.set_defaults(func=cmd_bounds_scan)

    p = sub.add_parser("surface-energy", help="empirical minimal surface-energy estimate")
    p.add_argument("--dim", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--rho", type=Fraction, required=True, help="rational density, e.g. 1/2")
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--disconnected", action="store_true")
    p.add_argument("--box", type=int, default=4)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--budget", type=int, default=1_000_000)
    common(p)
    p.set_defaults(func=cmd_surface_energy)

    p = sub.add_parser("phase-diagram", help="restricted segregation phase diagram grid")
    p.add_argument("--dim", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--nt", type=int, default=50)
    common(p, with_points=False)
    p.set_defaults(func=cmd_phase_diagram)

    def sector_args(p):
        p.add_argument("--length", type=int, default=None, help="1-D chain length")
        p.add_argument("--domain-file", default=None)
        p.add_argument("--n-light", type=int, required=True)
        p.add_argument("--n-heavy", type=int, required=True)
        p.add_argument("-U", type=float, required=True)

    p = sub.add_parser("fk-ground", help="heavy-configuration ground search at t=0")
    sector_args(p)
    p.add_argument("--strategy", choices=("exhaustive", "anneal"), default="exhaustive")
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--budget", type=int, default=1_000_000)
    common(p, with_points=False)
    p.set_defaults(func=cmd_fk_ground)

    p = sub.add_parser("ed-run", help="sector exact diagonalization with observables")
    sector_args(p)
    p.add_argument("-t", type=float, required=True)
    p.add_argument("--a-estimate", type=float, default=None)
    p.add_argument("--budget", type=int, default=manybody.SECTOR_BUDGET)
    common(p, with_points=False)
    p.set_defaults(func=cmd_ed_run)

    p = sub.add_parser("scaling", help="sigma across chain sizes at fixed densities")
    p.add_argument("--sizes", required=True, help="comma-separated chain lengths")
    p.add_argument("--rho1", required=True)
    p.add_argument("--rho2", required=True)
    p.add_argument("-U", type=float, required=True)
    p.add_argument("-t", type=float, required=True)
    p.add_argument("--x", type=int, default=1)
    p.add_argument("--budget", type=int, default=manybody.SECTOR_BUDGET)
    common(p, with_points=False)
    p.set_defaults(func=cmd_scaling)

    return parser


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, OSError, BudgetExceededError, ConvergenceError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
