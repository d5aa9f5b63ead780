"""
Command-line entry point.

    inpaint360 <stage> --config run.json [--seed N] [--out DIR] [--workers K] [--force]
    inpaint360 run-all --config run.json

Exit codes: 0 success, 2 config error, 3 missing input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from inpaint360.errors import ConfigError, Inpaint360Error
from inpaint360.inpaint360_logging import get_logger, setup_logger
from inpaint360.metrics.core import METRIC_INFO
from inpaint360.settings import Inpaint360Settings
from inpaint360.tracing import setup_tracer_from_settings, shutdown_tracing
from .artifacts import RunLayout, hash_document
from .config import STAGES, PipelineConfig, load_config
from .stages import run_all, run_stage

logger = get_logger(__name__)

RUN_ALL = "run-all"


def _load_settings() -> Inpaint360Settings:
    try:
        return Inpaint360Settings()
    except ValidationError as exc:
        raise ConfigError(f"invalid environment settings: {exc}") from exc


def run_id(cfg: PipelineConfig) -> str:
    """Short content id of the run: the config hash without output location and worker count."""
    return hash_document(cfg.model_dump(mode="json", exclude={"output_dir", "workers"}))[:12]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inpaint360",
        description="Remove text-specified objects from a voxel radiance field, stage by stage.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  inpaint360 run-all --config config/default.json --out runs/flowerpot
  inpaint360 refine-masks --config config/default.json --out runs/flowerpot --workers 4
  inpaint360 eval --config config/default.json --out runs/flowerpot --force
""",
    )
    parser.add_argument("stage", choices=list(STAGES) + [RUN_ALL], help="stage to run, or run-all")
    parser.add_argument("--config", type=str, default=None, help="run configuration (JSON); defaults apply when omitted")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed (propagates to every module)")
    parser.add_argument("--out", type=str, default=None, help="run output directory")
    parser.add_argument("--workers", type=int, default=None, help="worker threads; never changes results")
    parser.add_argument("--force", action="store_true", help="re-run even when the stage is up to date")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = _load_settings()
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = load_config(args.config).with_overrides(
            seed=args.seed,
            output_dir=args.out,
            workers=args.workers if args.workers is not None else settings.workers,
        )
        setup_logger(settings, run_log_path=str(RunLayout(cfg.output_dir).log_file))
        setup_tracer_from_settings(settings)
        rid = run_id(cfg)
        METRIC_INFO.labels(service_name=settings.service_name_composed, run_id=rid).set(1)
        with logger.contextualize(run_id=rid):
            logger.info("{} | stage {} | out {}", settings, args.stage, cfg.output_dir)
            if args.stage == RUN_ALL:
                results = run_all(cfg, force=args.force, settings=settings)
            else:
                results = {args.stage: run_stage(args.stage, cfg, force=args.force, settings=settings)}
            logger.info("done: {}", results)
        return 0
    except Inpaint360Error as exc:
        logger.error("{} failed: {} (exit {})", args.stage, exc, exc.exit_code)
        return exc.exit_code
    finally:
        shutdown_tracing()


if __name__ == "__main__":
    sys.exit(main())
