"""Command-line surface: ``python -m app.cli <subcommand>``.

Subcommands: generate, infer, probability, decide, campaign. Results go to
stdout, logs to stderr. Exit codes: 0 success, 1 usage/config error,
2 generation failure, 3 internal invariant violation.
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple
import logging

from app.campaign import (
    campaign_config_from_options,
    load_campaign_config,
    points_frame,
    run_campaign,
    unsat_trend,
)
from app.config import get_settings
from app.decider import k_satisfiable
from app.errors import ModalBenchError
from app.generator import generate_batch, generate_formula
from app.inference import infer_gen_params, infer_params
from app.param_spec import GenParams, Method, build_specs, format_spec, normalize_spec
from app.parser import parse_formulas, print_formula
from app.probability_oracle import (
    ProbabilityMode,
    ProbabilityOracle,
    Widening,
    check_monotonicity,
    monte_carlo_frequency,
)
from app.visualization_service import PlotKind, VisualizationService

logger = logging.getLogger(__name__)

# campaign flags that may also come from a config file
CAMPAIGN_KEYS = (
    "depth", "boxes", "vars", "clause_size", "length_spec", "prop_prob", "prop_spec", "method", "seed",
    "l_values", "l_from", "l_to", "l_step", "l_per_var", "samples", "percentiles", "timeout", "csv", "workers",
)


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 1, leaving 2 for generation failures."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_param_flags(parser: argparse.ArgumentParser, required: bool) -> None:
    parser.add_argument("--depth", type=int, default=None if not required else 0, help="modal depth d")
    parser.add_argument("--boxes", type=int, default=None if not required else 1, help="number of box symbols m")
    parser.add_argument("--vars", type=int, required=required, help="number of propositional variables N")
    length = parser.add_mutually_exclusive_group()
    length.add_argument("--clause-size", help="mean clause length C (scalar)")
    length.add_argument("--length-spec", help="clause-length distribution, e.g. [[0,1,1]]")
    props = parser.add_mutually_exclusive_group()
    props.add_argument("--prop-prob", help="propositional probability p (scalar)")
    props.add_argument("--prop-spec", help="propositional-rate distribution, e.g. [[[],[0,1,0]]]")
    parser.add_argument("--method", choices=[m.value for m in Method], default=None if not required else "new")


def _parse_coordinates(text: str) -> Tuple[Tuple[int, ...], ...]:
    """'0,1;1,2,0' -> ((0, 1), (1, 2, 0))"""
    coords = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            coords.append(tuple(int(v) for v in part.split(",")))
    return tuple(coords)


def _read_formulas(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    formulas = parse_formulas(text)
    if not formulas:
        raise ModalBenchError(f"no formula found in {path}")
    return formulas


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(prog="kmbench", description="Random CNF-box-m benchmark toolkit for K(m)")
    parser.add_argument("--log-level", default=None, help="logging level (default from settings)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate random formulas")
    _add_param_flags(gen, required=True)
    gen.add_argument("--clauses", type=int, required=True, help="number of top-level clauses L")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=1, help="number of formulas (seeds derived from --seed)")
    gen.add_argument("--out", help="output file (default stdout)")

    inf = sub.add_parser("infer", help="infer C and p from a formula")
    inf.add_argument("file", help="formula file ('-' for stdin)")
    inf.add_argument("--normalize", action="store_true", help="divide each list by its GCD")

    prob = sub.add_parser("probability", help="exact emission probability of a formula")
    prob.add_argument("file", help="formula file ('-' for stdin)")
    _add_param_flags(prob, required=False)
    prob.add_argument("--mode", choices=[m.value for m in ProbabilityMode], default=ProbabilityMode.AS_SET.value)
    prob.add_argument("--guard", type=int, help="enumeration guard (default from settings)")
    prob.add_argument("--monte-carlo", type=int, metavar="SAMPLES", help="also estimate by sampling")
    prob.add_argument("--seed", type=int, default=0, help="master seed for --monte-carlo")
    prob.add_argument("--check-monotonicity", action="store_true", help="check positivity and monotonicity")
    prob.add_argument("--widen-c", help="C zeros to widen, 'depth,length;...'")
    prob.add_argument("--widen-p", help="p zeros to widen, 'depth,length,r;...'")
    prob.add_argument("--fill", type=int, default=1, help="weight put in widened positions")

    dec = sub.add_parser("decide", help="decide K(m) satisfiability")
    dec.add_argument("file", help="formula file ('-' for stdin)")
    dec.add_argument("--timeout", type=float, help="seconds per formula (default from settings)")

    camp = sub.add_parser("campaign", help="run a satisfiability sweep over L")
    camp.add_argument("--config", help="key=value campaign file; flags override it")
    _add_param_flags(camp, required=False)
    camp.add_argument("--seed", type=int)
    camp.add_argument("--l-values", help="explicit comma-separated L values")
    camp.add_argument("--l-from")
    camp.add_argument("--l-to")
    camp.add_argument("--l-step")
    camp.add_argument("--l-per-var", action="store_const", const="true", help="L range is given in units of N")
    camp.add_argument("--samples", type=int)
    camp.add_argument("--percentiles", help="comma-separated, e.g. 50,90")
    camp.add_argument("--timeout", type=float)
    camp.add_argument("--csv", help="CSV output path")
    camp.add_argument("--workers", type=int)
    camp.add_argument("--plot-dir", help="write gnuplot scripts and data here")
    camp.add_argument("--png", action="store_true", help="also render PNG plots into --plot-dir")
    return parser


def cmd_generate(args: argparse.Namespace) -> int:
    C, p = build_specs(
        d=args.depth, method=args.method, clause_size=args.clause_size, length_spec=args.length_spec,
        prop_prob=args.prop_prob, prop_spec=args.prop_spec,
    )
    gp = GenParams(d=args.depth, m=args.boxes, L=args.clauses, N=args.vars, C=C, p=p,
                   method=Method(args.method), seed=args.seed)
    if args.count == 1:
        formulas = [generate_formula(gp)]
    else:
        formulas = generate_batch(gp, args.count)
    text = "".join(print_formula(f) + "\n" for f in formulas)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(formulas)} formula(s) to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_infer(args: argparse.Namespace) -> int:
    for phi in _read_formulas(args.file):
        C, p = infer_params(phi)
        if args.normalize:
            C, p = normalize_spec(C), normalize_spec(p)
        print(f"C = {format_spec(C)}")
        print(f"p = {format_spec(p)}")
    return 0


def _explicit_params(args: argparse.Namespace, phi) -> Optional[GenParams]:
    """GenParams from flags, or None when no distribution flag was given."""
    if not any((args.clause_size, args.length_spec, args.prop_prob, args.prop_spec)):
        return None
    inferred = infer_gen_params(phi, m=args.boxes, N=args.vars)
    d = inferred.d if args.depth is None else args.depth
    method = args.method or "new"
    C, p = build_specs(
        d=d, method=method, clause_size=args.clause_size, length_spec=args.length_spec,
        prop_prob=args.prop_prob, prop_spec=args.prop_spec,
    )
    return GenParams(d=d, m=inferred.m, L=phi.num_clauses, N=inferred.N, C=C, p=p, method=Method(method))


def cmd_probability(args: argparse.Namespace) -> int:
    for phi in _read_formulas(args.file):
        gp = _explicit_params(args, phi) or infer_gen_params(phi, m=args.boxes, N=args.vars)
        if args.check_monotonicity or args.widen_c or args.widen_p:
            widenings = []
            if args.widen_c:
                widenings.append(Widening("C", _parse_coordinates(args.widen_c), args.fill))
            if args.widen_p:
                widenings.append(Widening("p", _parse_coordinates(args.widen_p), args.fill))
            report = check_monotonicity(
                phi, widenings, specs=(gp.C, gp.p), m=gp.m, N=gp.N, guard=args.guard,
                d=gp.d if args.depth is None else args.depth,
            )
            print(f"P = {report.P}")
            print(f"P_widened = {report.P_widened}")
            print(f"positive = {str(report.positive).lower()} monotone = {str(report.monotone).lower()}")
            for violation in report.premise_violations:
                print(f"premise: {violation}")
            for note in report.notes:
                print(f"note: {note}")
        else:
            result = ProbabilityOracle(gp, args.guard).formula_probability(phi, args.mode)
            print(f"{result.mode.value} {result.value} ({float(result.value):.6g})")
            if result.note:
                print(f"note: {result.note}")
            for c in result.zero_support:
                print(f"zero-support clause: {c}")
        if args.monte_carlo:
            mc = monte_carlo_frequency(phi, gp, args.monte_carlo, args.seed)
            print(f"monte_carlo {mc.hits}/{mc.samples} = {mc.frequency:.6g} "
                  f"[{mc.ci_low:.6g}, {mc.ci_high:.6g}] at {mc.confidence:.0%}")
    return 0


def cmd_decide(args: argparse.Namespace) -> int:
    for phi in _read_formulas(args.file):
        print(k_satisfiable(phi, args.timeout).to_line())
    return 0


def campaign_overrides(args: argparse.Namespace) -> Dict[str, str]:
    """Flag values given on the command line, keyed like the config file."""
    overrides = {}
    for key in CAMPAIGN_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key.replace("_", "-")] = str(value)
    return overrides


def cmd_campaign(args: argparse.Namespace) -> int:
    overrides = campaign_overrides(args)
    config = load_campaign_config(args.config, overrides) if args.config else campaign_config_from_options(overrides)
    points = run_campaign(config)
    if config.csv_path is None:
        sys.stdout.write(points_frame(points, config.percentiles).to_csv(index=False))
    if len(points) >= 3:
        rho, pvalue = unsat_trend(points)
        logger.info(f"Unsatisfiable-fraction trend: Spearman rho={rho:.3f} (p={pvalue:.3g})")
    if args.plot_dir:
        service = VisualizationService()
        for kind in PlotKind:
            plot = service.emit_plot_script(points, kind, data_filename=f"{kind.value}.dat", output=f"{kind.value}.png")
            service.write_plot(plot, args.plot_dir, name=kind.value)
            if args.png:
                service.render_png(points, kind, Path(args.plot_dir) / f"{kind.value}_mpl.png")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "infer": cmd_infer,
    "probability": cmd_probability,
    "decide": cmd_decide,
    "campaign": cmd_campaign,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (args.log_level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except ModalBenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
