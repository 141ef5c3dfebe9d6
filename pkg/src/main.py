"""
llvkit command-line entry point.

    python -m src.main table1 --out results/table1.csv
    python -m src.main bound-sweep --out results/bound.csv
    python -m src.main width-sweep --c 4 --profile ci --out results/width.csv
    python -m src.main compare a.json b.json --out results/compare.json
    python -m src.main gen-data --c 4 --out results/data_c4.json
    python -m src.main train --data results/data_c4.json --width 64 --out results/model.json
    python -m src.main construct --construction theorem --rho 18 --out results/theorem
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Type

from pydantic import ValidationError

from . import __version__
from .core.config import get_settings
from .core.exceptions import LlvkitError
from .core.logging import configure_logging
from .models.reports import ComparisonBundle, DistanceReport
from .models.run_config import (
    BoundSweepConfig,
    CompareConfig,
    ConstructConfig,
    GenDataConfig,
    OutputConfig,
    Table1Config,
    TrainRunConfig,
    WidthSweepConfig,
)
from .models.samples import SampleMatrix
from .models.tables import ModelPair
from .observability.metrics import get_metrics_service
from .services.artifacts import (
    BOUND_COLUMNS,
    RHO_COLUMNS,
    WIDTH_COLUMNS,
    load_model_table,
    save_model_table,
    write_json_report,
    write_records,
)
from .services.bound_lab import verify_bound
from .services.constructions import (
    PermutationSpec,
    build_circle_pair,
    build_theorem_pair,
    default_reference_model,
    perturbation_sweep,
    rho_sweep,
    table1_family,
)
from .services.metrics import d_kl, d_llv, select_pivots, similarity_report
from .services.model_core import cond_log_probs
from .services.synth_train import PROFILES, AngularDataset, NormConstraint, TrainConfig, gen_angular_data, train, width_sweep

logger = logging.getLogger(__name__)


# ============================================================================
# Commands
# ============================================================================

def cmd_table1(config: Table1Config) -> List[Path]:
    family = table1_family(config.rho, config.seed, config.points_per_label)
    records = rho_sweep(family, config.lam, config.n_input_sets, config.seed)
    return [write_records(config.out, RHO_COLUMNS, records)]


def cmd_bound_sweep(config: BoundSweepConfig) -> List[Path]:
    reference = default_reference_model(config.seed, config.k, config.rho)
    records = perturbation_sweep(
        reference, config.sigmas, config.seed, config.lam, n_column_resamples=config.n_column_resamples
    )
    violations = [r.param for r in records if r.holds is False]
    if violations:
        logger.warning(f"Bound violated at sigma={violations}")
    return [write_records(config.out, BOUND_COLUMNS, records)]


def cmd_width_sweep(config: WidthSweepConfig) -> List[Path]:
    profile = PROFILES[config.profile]
    result = width_sweep(
        config.c,
        widths=config.widths or profile.widths,
        seeds=list(range(config.n_seeds or profile.n_seeds)),
        lam=config.lam,
        steps=config.steps or profile.steps,
        data_seed=config.seed,
        min_retained=config.min_retained,
        norm_constraint=NormConstraint(config.norm_constraint),
    )
    result = result.model_copy(update={"config": {**result.config, "command": config.model_dump(mode="json")}})
    for diagnostic in result.diagnostics:
        logger.warning(repr(diagnostic))
    written = [write_records(config.out, WIDTH_COLUMNS, result.rows)]
    if config.report is not None:
        written.append(write_json_report(config.report, result))
    return written


def compare_models(config: CompareConfig) -> ComparisonBundle:
    """d_KL both ways, d_LLV, embedding similarity and the bound certificate of two model files."""
    pair = ModelPair(load_model_table(config.model_a), load_model_table(config.model_b))
    weights = pair.weights()
    p = cond_log_probs(pair.first, weights)
    q = cond_log_probs(pair.second, weights)
    pivots = select_pivots(
        p, q, dim=pair.dim, seed=config.seed, require_diversity=pair.first.k - 2 >= pair.dim
    )
    distance = DistanceReport(d_kl_pq=d_kl(p, q), d_kl_qp=d_kl(q, p), llv=d_llv(p, q, pivots, config.lam))
    similarity = similarity_report(
        SampleMatrix(pair.first.embeddings, weights), SampleMatrix(pair.second.embeddings, weights)
    )
    certificate = verify_bound(pair, pivots, config.lam, config.n_column_resamples, config.seed)
    return ComparisonBundle(
        version=__version__,
        config=config.model_dump(mode="json"),
        distance=distance,
        embedding_similarity=similarity,
        certificate=certificate,
    )


def cmd_compare(config: CompareConfig) -> List[Path]:
    return [write_json_report(config.out, compare_models(config))]


def cmd_gen_data(config: GenDataConfig) -> List[Path]:
    data = gen_angular_data(config.c, config.n, config.sigma, config.seed)
    config.out.parent.mkdir(parents=True, exist_ok=True)
    data.save(config.out)
    return [config.out]


def cmd_train(config: TrainRunConfig) -> List[Path]:
    data = AngularDataset.load(config.data)
    model = train(
        TrainConfig(
            width=config.width,
            steps=config.steps,
            lr=config.lr,
            leaky_slope=config.leaky_slope,
            seed=config.seed,
            norm_constraint=NormConstraint(config.norm_constraint),
        ),
        data,
    )
    logger.info(f"Held-out accuracy {model.accuracy:.4f}, final loss {model.loss_curve[-1][1]:.4f}")
    config.out.parent.mkdir(parents=True, exist_ok=True)
    model.save(config.out)
    return [config.out]


def cmd_construct(config: ConstructConfig) -> List[Path]:
    k = config.resolved_k()
    if config.construction == "table1":
        first, second = table1_family([config.rho], config.seed, config.points_per_label).build_pair(config.rho)
    elif config.construction == "theorem":
        first, second = build_theorem_pair(
            dim=config.dim, k=k, rho=config.rho, points_per_label=config.points_per_label, seed=config.seed
        )
    else:
        first, second = build_circle_pair(
            k=k,
            rho=config.rho,
            points_per_label=config.points_per_label,
            permutation=PermutationSpec.for_kind(config.permutation, k),
            seed=config.seed,
        )
    stem = config.out.with_suffix("")
    return [
        save_model_table(first, stem.with_name(f"{stem.name}_a.json")),
        save_model_table(second, stem.with_name(f"{stem.name}_b.json")),
    ]


COMMANDS: Dict[str, Tuple[Type[OutputConfig], Callable[..., List[Path]]]] = {
    "table1": (Table1Config, cmd_table1),
    "bound-sweep": (BoundSweepConfig, cmd_bound_sweep),
    "width-sweep": (WidthSweepConfig, cmd_width_sweep),
    "compare": (CompareConfig, cmd_compare),
    "gen-data": (GenDataConfig, cmd_gen_data),
    "train": (TrainRunConfig, cmd_train),
    "construct": (ConstructConfig, cmd_construct),
}


# ============================================================================
# Argument Parsing
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="llvkit", description="Distances between softmax models and their representations"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.log_level)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--out", type=Path, required=True)
        command.add_argument("--seed", type=int, default=0)
        return command

    table1 = add("table1", "d_KL, d_LLV, m_CCA and max d_SVD over the rho family")
    table1.add_argument("--rho", type=float, nargs="*", default=None)
    table1.add_argument("--points-per-label", type=int, default=40)
    table1.add_argument("--lam", type=float, default=None)
    table1.add_argument("--n-input-sets", type=int, default=None)

    bound = add("bound-sweep", "bound certificates for noisy copies of a reference model")
    bound.add_argument("--sigmas", type=float, nargs="*", default=None)
    bound.add_argument("--k", type=int, default=6)
    bound.add_argument("--rho", type=float, default=4.0)
    bound.add_argument("--lam", type=float, default=None)
    bound.add_argument("--n-column-resamples", type=int, default=0)

    width = add("width-sweep", "pairwise d_LLV and max d_SVD of trained models per width")
    width.add_argument("--c", type=int, default=4)
    width.add_argument("--profile", choices=sorted(PROFILES), default=settings.profile)
    width.add_argument("--widths", type=int, nargs="+", default=None)
    width.add_argument("--n-seeds", type=int, default=None)
    width.add_argument("--steps", type=int, default=None)
    width.add_argument("--lam", type=float, default=None)
    width.add_argument("--norm-constraint", choices=[m.value for m in NormConstraint], default="none")
    width.add_argument("--min-retained", type=int, default=5)
    width.add_argument("--report", type=Path, default=None)

    compare = add("compare", "distances, similarities and bound certificate of two model files")
    compare.add_argument("model_a", type=Path)
    compare.add_argument("model_b", type=Path)
    compare.add_argument("--lam", type=float, default=None)
    compare.add_argument("--n-column-resamples", type=int, default=0)

    gen = add("gen-data", "angular-slice classification data")
    gen.add_argument("--c", type=int, default=4)
    gen.add_argument("--n", type=int, default=20000)
    gen.add_argument("--sigma", type=float, default=3.0)

    fit = add("train", "train one classifier on a dataset file")
    fit.add_argument("--data", type=Path, required=True)
    fit.add_argument("--width", type=int, default=64)
    fit.add_argument("--steps", type=int, default=3000)
    fit.add_argument("--lr", type=float, default=1e-3)
    fit.add_argument("--leaky-slope", type=float, default=0.01)
    fit.add_argument("--norm-constraint", choices=[m.value for m in NormConstraint], default="none")

    construct = add("construct", "write a constructed model pair as two model files")
    construct.add_argument("--construction", choices=["circle", "table1", "theorem"], default="circle")
    construct.add_argument("--rho", type=float, default=18.0)
    construct.add_argument("--k", type=int, default=None)
    construct.add_argument("--dim", type=int, default=2)
    construct.add_argument(
        "--permutation", choices=["identity", "circle_swap", "decorrelating"], default="decorrelating"
    )
    construct.add_argument("--points-per-label", type=int, default=40)
    return parser


def parse_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> OutputConfig:
    """Validate parsed arguments into the command's config record; invalid values are usage errors."""
    config_cls, _ = COMMANDS[args.command]
    values = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "log_level") and value is not None
    }
    try:
        return config_cls.model_validate(values)
    except ValidationError as exc:
        parser.error("; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors()))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    config = parse_config(parser, args)
    _, command = COMMANDS[args.command]

    logger.info(f"llvkit {__version__}: {args.command}")
    try:
        written = command(config)
    except LlvkitError as exc:
        for diagnostic in getattr(exc, "diagnostics", None) or []:
            logger.error(repr(diagnostic))
        logger.error(f"{args.command} failed: {exc}")
        return 1
    except ValidationError as exc:
        logger.error(f"{args.command} got an invalid configuration: {exc}")
        return 2
    finally:
        get_metrics_service().log_summary()

    for path in written:
        logger.info(f"Wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
