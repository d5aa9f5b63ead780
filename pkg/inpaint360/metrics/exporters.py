from pathlib import Path
from typing import Union

from prometheus_client import REGISTRY, CollectorRegistry, generate_latest
from prometheus_client import write_to_textfile


def write_metrics(path: Union[str, Path], registry: CollectorRegistry = REGISTRY) -> Path:
    """
    Dump the registry in the Prometheus text format.

    The file is written atomically, so a node_exporter textfile collector (or a
    human with ``cat``) never sees a half-written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), registry)
    return path


def metrics_text(registry: CollectorRegistry = REGISTRY) -> str:
    return generate_latest(registry).decode("utf-8")
