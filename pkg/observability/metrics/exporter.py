"""Prometheus metrics export: text file next to run outputs, optional Pushgateway."""

import logging
from pathlib import Path

from prometheus_client import REGISTRY, push_to_gateway, write_to_textfile

from zerofree import settings

logger = logging.getLogger(__name__)

METRICS_FILENAME = "metrics.prom"


def write_metrics(out_dir: str | Path) -> Path:
    """Write the registry in text exposition format under out_dir."""
    path = Path(out_dir) / METRICS_FILENAME
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
    logger.info(f"Wrote metrics to {path}")
    return path


def push_metrics(job_name: str = 'zerofree'):
    """Push current metrics to Pushgateway when PUSHGATEWAY_URL is set."""
    if not settings.PUSHGATEWAY_URL:
        return

    try:
        push_to_gateway(settings.PUSHGATEWAY_URL, job=job_name, registry=REGISTRY)
        logger.info(f"Pushed metrics to Pushgateway at {settings.PUSHGATEWAY_URL}")

    except Exception as e:
        logger.warning(f"Failed to push metrics to Pushgateway: {e}")
