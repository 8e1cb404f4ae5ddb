"""
fedmask command line.

    fedmask init-train SCENARIO --out DIR
    fedmask edge-train SCENARIO --base CKPT --out DIR [--distill] [--personalize]
    fedmask protocol-bench [--n 3 5 10] [--k 2] [--dim 16] [--latency auto]
    fedmask collusion --protocol masked --n 5 --k 2 --colluders neighbors,M
    fedmask sweep-local-updates SCENARIO --e 1 5 20 --threshold 0.1 --out sweep.csv

Reports go to stdout, logs to stderr. Exit codes: 0 success, 1 failed check,
2 scenario or flag error, 3 aborted aggregation round, 4 missing checkpoint.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .analysis.collusion import CollusionScenario, run_collusion_trials
from .analysis.report import attack_json, attack_text, conformance_json, conformance_text, text_table
from .analysis.scoreboard import benchmark_protocols
from .data.partition import PartyData
from .federation.checkpoint import (
    Checkpoint,
    CheckpointError,
    check_spec,
    csv_text,
    load_checkpoint,
    save_checkpoint,
    write_atomic,
    write_metrics_csv,
)
from .federation.distillation import student_network
from .federation.edge_phase import edge_start_params, personalize, run_edge_phase
from .federation.init_phase import run_init_phase
from .federation.locality import scan_transcripts
from .federation.runtime import RoundRecord, evaluate
from .federation.sweep import SWEEP_COLUMNS, edge_sweep_runner, local_updates_sweep
from .generators.signal_gen import generate
from .models.network_model import Batch, NetworkSpec, ParamVector, ShapeError, init_params
from .protocols.messages import RoundAborted
from .protocols.neighbor_graph import circulant_offsets
from .scenario import Scenario, ScenarioError, load_scenario, resolve_seed
from .sim.latency_presets import resolve_latency
from .sim.simnet import SimNet, Transcript

logger = logging.getLogger("fedmask")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_ABORTED = 3
EXIT_NO_CHECKPOINT = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _transcripts_jsonl(transcripts: Sequence[Transcript]) -> str:
    return "".join(t.to_jsonl() for t in transcripts)


def _check_locality(transcripts: Sequence[Transcript], parties: Sequence[PartyData]) -> bool:
    report = scan_transcripts(transcripts, parties)
    return report.clean


def _write_run(out: Path, spec: NetworkSpec, params: ParamVector, rounds: int, records, transcripts):
    save_checkpoint(out / "model.ckpt", Checkpoint(spec, params, rounds))
    write_metrics_csv(out / "metrics.csv", records)
    write_atomic(out / "transcript.jsonl", _transcripts_jsonl(transcripts))


def _load(args) -> tuple[Scenario, int]:
    scenario = load_scenario(args.scenario)
    return scenario, resolve_seed(args.seed, scenario)


def cmd_init_train(args) -> int:
    scenario, seed = _load(args)
    parties = scenario.party_data(seed)
    net = SimNet(scenario.latency_matrix(seed), scenario.processing_delay)
    result = run_init_phase(parties, scenario.model, scenario.fed, net, seed=seed)
    transcripts = result.transcripts + result.broadcasts
    _write_run(Path(args.out), scenario.model, result.params, scenario.fed.rounds, result.history, transcripts)

    last = result.history[-1]
    print(f"init phase: {scenario.fed.rounds} rounds, final loss {last.global_loss:.6f}, val accuracy {last.val_accuracy:.4f}")
    return EXIT_OK if _check_locality(transcripts, parties) else EXIT_CHECK_FAILED


def _edge_network(args, scenario: Scenario, seed: int, checkpoint: Checkpoint) -> tuple[NetworkSpec, ParamVector]:
    """Network to train at the edge: the checkpoint, or its distilled student."""
    check_spec(checkpoint, scenario.model)
    spec = checkpoint.spec.with_head_start(scenario.model.head_start)
    params = ParamVector(checkpoint.params.values, spec.head_offset)
    if not args.distill:
        return spec, params
    cfg = scenario.distill
    transfer = generate(cfg.transfer_samples, spec.input_dim, seed, 0.0, scenario.parties, scenario.data.generator)
    student_spec, student_params, result = student_network(
        spec,
        params,
        cfg.student_layer_sizes,
        transfer.windows,
        cfg.epochs,
        cfg.alpha,
        np.random.default_rng([seed, 37]),
    )
    print(
        f"distilled base: {spec.head_offset} -> {result.spec.total_param_count} params, "
        f"loss {result.initial_loss:.6f} -> {result.final_loss:.6f}"
    )
    return student_spec, student_params


def cmd_edge_train(args) -> int:
    scenario, seed = _load(args)
    checkpoint = load_checkpoint(args.base)
    spec, params = _edge_network(args, scenario, seed, checkpoint)
    if args.fresh_head:
        params = edge_start_params(spec, params.base, np.random.default_rng([seed, 41]))
    print(
        f"head parameters: {spec.head_param_count} of {spec.total_param_count} "
        f"({100.0 * spec.head_fraction:.2f}%)"
    )

    parties = scenario.party_data(seed)
    net = SimNet(scenario.latency_matrix(seed), scenario.processing_delay)
    result = run_edge_phase(parties, spec, params, scenario.fed, net, seed=seed)
    print(f"base frozen: {'ok' if result.base_frozen else 'FAILED'}")
    records: list[RoundRecord] = list(result.history)

    if args.personalize:
        epochs = args.personalize_epochs if args.personalize_epochs is not None else scenario.fed.personalize_epochs
        for party in parties:
            personal = personalize(result.params, party, spec, scenario.fed, epochs, seed)
            test = party.part("test")
            ev = evaluate(spec, personal.params, Batch.from_labels(test.windows, test.labels))
            records.append(
                RoundRecord(
                    f"personal:{party.party_id}",
                    ev.loss,
                    ev.metrics.accuracy,
                    ev.metrics.precision,
                    ev.metrics.recall,
                    ev.metrics.f1,
                    0,
                    0,
                    0.0,
                )
            )
            print(
                f"party {party.party_id}: test accuracy {personal.global_test.accuracy:.4f} -> "
                f"{personal.personal_test.accuracy:.4f}"
            )

    transcripts = result.transcripts + result.broadcasts
    _write_run(Path(args.out), spec, result.params, scenario.fed.rounds, records, transcripts)
    ok = result.base_frozen and _check_locality(transcripts, parties)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_protocol_bench(args) -> int:
    rng = np.random.default_rng([resolve_seed(args.seed), 43])
    matrices = {n: resolve_latency(args.latency, n, rng) for n in args.n}
    board = benchmark_protocols(args.n, args.k, args.dim, matrices.__getitem__, resolve_seed(args.seed), processing_delay=args.processing_delay)
    passed = board.report()
    print(conformance_text(board), end="")
    if args.out:
        out = Path(args.out)
        write_atomic(out / "conformance.json", conformance_json(board))
        write_atomic(out / "conformance.txt", conformance_text(board))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def parse_colluders(spec: str, n: int, k: int, victim: int) -> tuple[frozenset[int], bool]:
    """
    Colluder list: party ids, 'M' for the mediator, 'neighbors' for all of
    the victim's circulant neighbors, 'neighbors-1' for all but the last.
    """
    parties: set[int] = set()
    mediator = False
    neighbors = sorted(nx.circulant_graph(n, circulant_offsets(n, k)).neighbors(victim)) if k > 0 else []
    for token in (t.strip() for t in spec.split(",") if t.strip()):
        if token.upper() == "M":
            mediator = True
        elif token == "neighbors":
            parties.update(neighbors)
        elif token == "neighbors-1":
            parties.update(neighbors[:-1])
        else:
            parties.add(int(token))
    return frozenset(parties), mediator


def cmd_collusion(args) -> int:
    colluders, mediator = parse_colluders(args.colluders, args.n, args.k, args.victim)
    scenario = CollusionScenario(args.protocol, colluders, args.victim, mediator, args.trials)
    report = run_collusion_trials(scenario, args.n, args.k, args.dim, resolve_seed(args.seed))
    print(attack_text(report), end="")
    if args.out:
        write_atomic(args.out, attack_json(report))
    return EXIT_OK


def cmd_local_updates_sweep(args) -> int:
    scenario, seed = _load(args)
    seeds = [seed + i for i in range(args.seeds)]
    spec = scenario.model
    base: Optional[Checkpoint] = load_checkpoint(args.base) if args.base else None
    if base is not None:
        check_spec(base, spec)

    def params_for_seed(s: int) -> ParamVector:
        rng = np.random.default_rng([s, 47])
        if base is None:
            return init_params(spec, rng)
        return edge_start_params(spec, base.params.values[: spec.head_offset], rng)

    run = edge_sweep_runner(
        scenario.party_data,
        spec,
        params_for_seed,
        scenario.fed,
        lambda s: SimNet(scenario.latency_matrix(s), scenario.processing_delay),
    )
    rows = local_updates_sweep(run, args.e, args.threshold, seeds)
    text = csv_text(SWEEP_COLUMNS, [r.csv_row() for r in rows])
    print(text_table(("E", "median rounds", "per seed"), [(r.local_updates, r.median_label(), r.rounds) for r in rows]), end="")
    if args.out:
        write_atomic(args.out, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fedmask", description="Secure-aggregation federated learning experiments")
    p.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    p.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    sub = p.add_subparsers(dest="cmd", required=True)

    pi = sub.add_parser("init-train", help="Full-network training with aggregated gradients")
    pi.add_argument("scenario", help="Scenario JSON file")
    pi.add_argument("--out", required=True, help="Output directory (model.ckpt, metrics.csv, transcript.jsonl)")
    pi.add_argument("--seed", type=int, default=None, help="Overrides the scenario seed and $FEDMASK_SEED")
    pi.set_defaults(func=cmd_init_train)

    pe = sub.add_parser("edge-train", help="Head-only training over a frozen base")
    pe.add_argument("scenario", help="Scenario JSON file")
    pe.add_argument("--base", required=True, help="Checkpoint whose base is frozen")
    pe.add_argument("--out", required=True, help="Output directory")
    pe.add_argument("--seed", type=int, default=None)
    pe.add_argument("--distill", action="store_true", help="Distill the base into the scenario's student first")
    pe.add_argument("--fresh-head", action="store_true", help="Start from a freshly initialized head")
    pe.add_argument("--personalize", action="store_true", help="Fine-tune the global head per party afterwards")
    pe.add_argument("--personalize-epochs", type=int, default=None, help="Defaults to fed.personalize_epochs")
    pe.set_defaults(func=cmd_edge_train)

    pb = sub.add_parser("protocol-bench", help="Message-count and latency conformance of all protocols")
    pb.add_argument("--n", type=int, nargs="+", default=[3, 5, 10], help="Party counts")
    pb.add_argument("--k", type=int, default=2, help="Neighbor count / Shamir threshold")
    pb.add_argument("--dim", type=int, default=16, help="Secret vector length")
    pb.add_argument("--latency", default="auto", help="Preset name, 'auto', 'uniform:<ms>' or a JSON matrix file")
    pb.add_argument("--processing-delay", type=float, default=0.0, help="Per-hop processing delay (ms)")
    pb.add_argument("--seed", type=int, default=None)
    pb.add_argument("--out", default=None, help="Directory for conformance.json and conformance.txt")
    pb.set_defaults(func=cmd_protocol_bench)

    pc = sub.add_parser("collusion", help="Attack one party's secret with a coalition")
    pc.add_argument("--protocol", choices=["nosmc", "stsmc", "shamir", "masked"], required=True)
    pc.add_argument("--n", type=int, required=True, help="Party count")
    pc.add_argument("--k", type=int, default=2, help="Neighbor count / Shamir threshold")
    pc.add_argument("--victim", type=int, default=0)
    pc.add_argument("--colluders", default="M", help="Comma list of party ids, 'M', 'neighbors', 'neighbors-1'")
    pc.add_argument("--trials", type=int, default=1000)
    pc.add_argument("--dim", type=int, default=4, help="Secret vector length per trial")
    pc.add_argument("--seed", type=int, default=None)
    pc.add_argument("--out", default=None, help="JSON report path")
    pc.set_defaults(func=cmd_collusion)

    ps = sub.add_parser("sweep-local-updates", help="Rounds to reach a validation loss per local-update count")
    ps.add_argument("scenario", help="Scenario JSON file")
    ps.add_argument("--e", type=int, nargs="+", default=[1, 3, 5, 10, 20], help="Local-update counts")
    ps.add_argument("--threshold", type=float, required=True, help="Validation-loss target")
    ps.add_argument("--seeds", type=int, default=10, help="Seeds per E, counted up from the base seed")
    ps.add_argument("--base", default=None, help="Checkpoint providing a frozen base")
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--out", default=None, help="CSV path (columns E, median_rounds, seeds)")
    ps.set_defaults(func=cmd_local_updates_sweep)

    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except ScenarioError as exc:
        logger.error("Scenario error: %s", exc)
        return EXIT_CONFIG
    except CheckpointError as exc:
        logger.error("%s", exc)
        return EXIT_NO_CHECKPOINT
    except RoundAborted as exc:
        logger.error("%s", exc)
        return EXIT_ABORTED
    except (ValueError, KeyError, ShapeError) as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
