"""CLI entrypoint for NB-LDPC coded-modulation simulations."""

from __future__ import annotations

import argparse
import sys
import uuid
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .campaign_loader import CampaignError, CodeSource, InterleaverSource, campaign_summary, load_campaign
from .compare import compare_records, format_comparison
from .config import load_config
from .gf import field_new
from .graph_utils import format_girth
from .interleaver import (
    KINDS,
    VISIT_ORDERS,
    InterleaverError,
    InterleaverFileError,
    InterleaverPattern,
    degree_profile,
    global_girth,
    identity_pattern,
    multi_edge_count,
    peg_pattern,
    random_pattern,
    read_pattern,
    write_pattern,
)
from .logging_setup import setup_logging
from .modem_channel import MODULATIONS, constellation_for
from .results_store import (
    ResultsFileError,
    ResultsWriter,
    build_manifest,
    manifest_path_for,
    read_manifest,
    read_results,
    stale_inputs,
    write_manifest,
)
from .sim import SimConfig, Simulator, load_system
from .tanner import CodeFileError, ConstructionError, TannerGraph, girth, peg_construct, read_code, write_code
from .validator import ValidationError, check_consistency, field_bits, parse_ebn0_range, parse_on_off


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONSTRUCTION = 2
EXIT_IO = 3


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_USAGE."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(description="NB-LDPC coded modulation over Rayleigh fading")
    subparsers = parser.add_subparsers(dest="command", required=True)

    code_parser = subparsers.add_parser("make-code", help="Build a (dv, dc)-regular code by PEG")
    code_parser.add_argument("--field", type=int, required=True, help="Field order q (4, 16, 64, 256)")
    code_parser.add_argument("--n-symbols", type=int, required=True, help="Code length N in symbols")
    code_parser.add_argument("--dv", type=int, default=2, help="Symbol-node degree")
    code_parser.add_argument("--dc", type=int, required=True, help="Constraint-node degree")
    code_parser.add_argument("--seed", type=int, default=0, help="Construction seed")
    code_parser.add_argument("--min-girth", type=int, default=6, help="Regrow the graph below this girth")
    code_parser.add_argument("--out", required=True, help="Code file to write")

    interleaver_parser = subparsers.add_parser("make-interleaver", help="Build an interleaver for a code")
    interleaver_parser.add_argument("--code", required=True, help="Code file")
    interleaver_parser.add_argument("--kind", choices=KINDS, required=True)
    interleaver_parser.add_argument("--modulation", choices=sorted(MODULATIONS), required=True)
    interleaver_parser.add_argument("--seed", type=int, default=0)
    interleaver_parser.add_argument("--local-scramble", default="off", help="on|off: permute bits inside each symbol")
    interleaver_parser.add_argument("--order", choices=VISIT_ORDERS, default="natural", help="Modulation-node visiting order")
    interleaver_parser.add_argument("--out", required=True, help="Interleaver file to write")

    simulate_parser = subparsers.add_parser("simulate", help="Run an Eb/N0 sweep")
    simulate_parser.add_argument("--code", help="Code file")
    simulate_parser.add_argument("--interleaver", help="Interleaver file; omit for none")
    simulate_parser.add_argument("--modulation", choices=sorted(MODULATIONS))
    simulate_parser.add_argument("--ebn0", help="START:STOP:STEP in dB")
    simulate_parser.add_argument("--max-frames", type=int, default=10_000_000)
    simulate_parser.add_argument("--min-errors", type=int, default=100)
    simulate_parser.add_argument("--max-iters", type=int, default=100)
    simulate_parser.add_argument("--workers", type=int, default=1)
    simulate_parser.add_argument("--seed", type=int, default=0, help="Master seed")
    simulate_parser.add_argument("--out", help="Results CSV")
    simulate_parser.add_argument("--manifest", help="Re-run the configuration recorded in a manifest")
    simulate_parser.add_argument("--progress", action="store_true", help="Show a frame progress bar")

    campaign_parser = subparsers.add_parser("run-campaign", help="Simulate every system of a campaign file")
    campaign_parser.add_argument("--campaign", required=True, help="Campaign YAML file")
    campaign_parser.add_argument("--out-dir", help="Output directory (default RESULTS_DIR)")
    campaign_parser.add_argument("--progress", action="store_true")

    validate_parser = subparsers.add_parser("validate-code", help="Check a code and optional interleaver")
    validate_parser.add_argument("--code", required=True)
    validate_parser.add_argument("--interleaver", help="Interleaver file")
    validate_parser.add_argument("--modulation", choices=sorted(MODULATIONS))

    compare_parser = subparsers.add_parser("compare", help="Compare two results files point by point")
    compare_parser.add_argument("--a", required=True, help="Reference results CSV")
    compare_parser.add_argument("--b", required=True, help="Results CSV to compare against it")

    return parser


def build_code(
    field_order: int,
    n_symbols: int,
    dv: int,
    dc: int,
    seed: int,
    min_girth: int,
    logger,
) -> TannerGraph:
    field = field_new(field_bits(field_order))
    graph = peg_construct(
        n_symbols,
        dv,
        dc,
        field,
        np.random.default_rng(seed),
        seed=seed,
        min_girth=min_girth,
        logger=logger,
    )
    logger.info(
        "code_built",
        extra={
            "event": "code_built",
            "q": field.q,
            "nSymbols": graph.n_symbols,
            "nChecks": graph.n_checks,
            "rate": graph.rate,
            "girth": girth(graph),
            "seed": seed,
        },
    )
    return graph


def build_interleaver(
    graph: TannerGraph,
    kind: str,
    modulation: str,
    seed: int,
    local_scramble: bool,
    order: str,
    logger,
) -> InterleaverPattern:
    p = graph.field.p
    m = constellation_for(modulation).m
    if m != p:
        raise ValidationError(
            "modulation", f"{modulation} carries {m} bits but GF({graph.field.q}) symbols have {p}"
        )
    rng = np.random.default_rng(seed)
    if kind == "identity":
        pattern = identity_pattern(graph.n_symbols, p, m)
    elif kind == "random":
        pattern = random_pattern(graph.n_bits, p, m, rng, seed=seed)
    else:
        pattern = peg_pattern(graph, p, m, rng, seed=seed, local_scramble=local_scramble, order=order, logger=logger)
    logger.info(
        "interleaver_built",
        extra={
            "event": "interleaver_built",
            "kind": kind,
            "n": pattern.n,
            "seed": seed,
            "globalGirth": global_girth(graph, pattern),
            "multiEdges": multi_edge_count(pattern),
        },
    )
    return pattern


def simulate(config: SimConfig, out: str | Path, logger, progress: bool = False) -> Path:
    """Run a sweep streaming rows to ``out``, then write its manifest.

    The system is loaded and checked before ``out`` is opened, so a rejected
    run leaves earlier results untouched.
    """
    graph, pattern, constellation = load_system(config)
    simulator = Simulator(graph, pattern, constellation, config, logger, progress)
    with ResultsWriter(out) as writer:
        records = simulator.run_sweep(sink=writer)
    manifest_path = manifest_path_for(out)
    write_manifest(manifest_path, build_manifest(config.to_dict(), out))
    logger.info(
        "manifest_written",
        extra={"event": "manifest_written", "path": str(manifest_path), "points": len(records)},
    )
    return manifest_path


def _cmd_make_code(args, logger) -> int:
    graph = build_code(args.field, args.n_symbols, args.dv, args.dc, args.seed, args.min_girth, logger)
    write_code(args.out, graph)
    print(
        f"Code written: N={graph.n_symbols} M={graph.n_checks} n={graph.n_bits} bits "
        f"rate={graph.rate:.4f} girth={format_girth(girth(graph))}"
    )
    return EXIT_OK


def _cmd_make_interleaver(args, logger) -> int:
    graph = read_code(args.code)
    pattern = build_interleaver(
        graph,
        args.kind,
        args.modulation,
        args.seed,
        parse_on_off(args.local_scramble, "local-scramble"),
        args.order,
        logger,
    )
    write_pattern(args.out, pattern)
    print(
        f"Interleaver written: kind={pattern.kind} n={pattern.n} "
        f"global_girth={format_girth(global_girth(graph, pattern))} multi_edges={multi_edge_count(pattern)}"
    )
    return EXIT_OK


def _sim_config_from_args(args, parser: CliParser) -> Tuple[SimConfig, str]:
    if args.manifest:
        manifest = read_manifest(args.manifest)
        stale = stale_inputs(manifest)
        if stale:
            raise ValidationError("manifest", f"input files changed since the run: {', '.join(stale)}")
        return SimConfig.from_dict(manifest.config), args.out or manifest.results

    required = {"--code": args.code, "--modulation": args.modulation, "--ebn0": args.ebn0, "--out": args.out}
    missing = [flag for flag, value in required.items() if not value]
    if missing:
        parser.error(f"simulate needs {', '.join(missing)} (or --manifest)")
    start, stop, step = parse_ebn0_range(args.ebn0)
    config = SimConfig(
        code_path=args.code,
        interleaver_path=args.interleaver,
        modulation=args.modulation,
        ebn0_start=start,
        ebn0_stop=stop,
        ebn0_step=step,
        max_frames=args.max_frames,
        min_frame_errors=args.min_errors,
        max_iter=args.max_iters,
        master_seed=args.seed,
        workers=args.workers,
    )
    return config, args.out


def _cmd_simulate(args, logger, parser: CliParser) -> int:
    config, out = _sim_config_from_args(args, parser)
    simulate(config, out, logger, progress=args.progress)
    print(f"Results written: {out}")
    return EXIT_OK


def _materialize_code(source: CodeSource, out_dir: Path, built: Dict[CodeSource, str], logger) -> str:
    if source.path is not None:
        return source.path
    if source not in built:
        graph = build_code(source.field, source.n_symbols, source.dv, source.dc, source.seed, source.min_girth, logger)
        target = out_dir / source.build_name
        write_code(target, graph)
        built[source] = str(target)
    return built[source]


def _materialize_interleaver(
    source: InterleaverSource,
    name: str,
    code_path: str,
    modulation: str,
    out_dir: Path,
    logger,
) -> Optional[str]:
    if source.kind == "file":
        return source.path
    if source.kind == "identity":
        return None
    graph = read_code(code_path)
    pattern = build_interleaver(graph, source.kind, modulation, source.seed, source.local_scramble, source.order, logger)
    target = out_dir / f"{name}.interleaver.txt"
    write_pattern(target, pattern)
    return str(target)


def _cmd_run_campaign(args, logger, results_dir: str) -> int:
    campaign = load_campaign(args.campaign)
    logger.info(
        "campaign_loaded",
        extra={"event": "campaign_loaded", "path": args.campaign, **campaign_summary(campaign)},
    )
    out_dir = Path(args.out_dir or results_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    built: Dict[CodeSource, str] = {}
    written: List[str] = []
    for system in campaign.systems:
        code_path = _materialize_code(system.code, out_dir, built, logger)
        interleaver_path = _materialize_interleaver(
            system.interleaver, system.name, code_path, campaign.modulation, out_dir, logger
        )
        config = SimConfig(
            code_path=code_path,
            interleaver_path=interleaver_path,
            modulation=campaign.modulation,
            ebn0_start=campaign.ebn0_start,
            ebn0_stop=campaign.ebn0_stop,
            ebn0_step=campaign.ebn0_step,
            max_frames=campaign.max_frames,
            min_frame_errors=campaign.min_frame_errors,
            max_iter=campaign.max_iters,
            master_seed=campaign.seed,
            workers=campaign.workers,
        )
        out = out_dir / f"{system.name}.csv"
        simulate(config, out, logger, progress=args.progress)
        written.append(str(out))
    print(f"Campaign done: {len(written)} systems written to {out_dir}")
    return EXIT_OK


def _cmd_validate_code(args, logger) -> int:
    graph = read_code(args.code)
    graph.validate(require_regular=True)
    graph.encoder  # raises RankDeficientError
    lines = [
        f"N={graph.n_symbols} M={graph.n_checks} q={graph.field.q} dv={graph.dv} dc={graph.dc}",
        f"rate={graph.rate:.4f} girth={format_girth(girth(graph))} full_rank=yes",
    ]
    if args.interleaver:
        pattern = read_pattern(args.interleaver)
        if args.modulation:
            check_consistency(graph, pattern, constellation_for(args.modulation))
        elif pattern.p != graph.field.p or pattern.n_symbols != graph.n_symbols:
            raise ValidationError("interleaver", "pattern does not match the code dimensions")
        mod_degrees, symbol_degrees = degree_profile(pattern)
        if np.any(mod_degrees != pattern.m) or np.any(symbol_degrees != pattern.p):
            raise ValidationError("interleaver", "interleaving graph is not (m, p)-regular")
        lines.append(
            f"interleaver={pattern.kind} n={pattern.n} global_girth={format_girth(global_girth(graph, pattern))} "
            f"multi_edges={multi_edge_count(pattern)}"
        )
    print("\n".join(lines))
    print("Code validation: OK")
    return EXIT_OK


def _cmd_compare(args) -> int:
    items = compare_records(read_results(args.a), read_results(args.b))
    print(format_comparison(items))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    config = load_config()
    run_id = str(uuid.uuid4())
    logger = setup_logging(config.log_file, config.log_level, run_id, config.log_max_bytes)

    try:
        if args.command == "make-code":
            return _cmd_make_code(args, logger)
        if args.command == "make-interleaver":
            return _cmd_make_interleaver(args, logger)
        if args.command == "simulate":
            return _cmd_simulate(args, logger, parser)
        if args.command == "run-campaign":
            return _cmd_run_campaign(args, logger, config.results_dir)
        if args.command == "validate-code":
            return _cmd_validate_code(args, logger)
        if args.command == "compare":
            return _cmd_compare(args)
    except (CodeFileError, InterleaverFileError, ResultsFileError, OSError) as exc:
        return _fail(logger, args.command, exc, EXIT_IO)
    except (ConstructionError, InterleaverError) as exc:
        return _fail(logger, args.command, exc, EXIT_CONSTRUCTION)
    except (ValidationError, CampaignError, ValueError) as exc:
        return _fail(logger, args.command, exc, EXIT_USAGE)

    return EXIT_USAGE


def _fail(logger, command: str, exc: Exception, code: int) -> int:
    logger.error(
        "command_failed",
        extra={"event": "command_failed", "command": command, "detail": str(exc), "exitCode": code},
    )
    print(f"{command} failed: {exc}")
    return code


if __name__ == "__main__":
    sys.exit(main())
