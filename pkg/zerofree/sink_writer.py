"""Write polynomials and result tables."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from .exceptions import ConfigError, ZeroFreeError
from .trigpoly import CosinePolynomial, SpectralFactor

logger = logging.getLogger(__name__)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_polynomial(
    output_path: str | Path,
    poly: CosinePolynomial,
    factor: Optional[SpectralFactor] = None,
    comment: str = "",
    factor_only: bool = False,
) -> Path:
    """Write a polynomial file: raw c lines when known, a lines divided by a_0.

    With ``factor_only`` the a lines are left out and readers derive them.
    """
    if factor_only and factor is None:
        raise ConfigError("factor_only needs a spectral factor")
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)

    lines = []
    if comment:
        lines.extend(f"# {text}" for text in comment.splitlines())
    lines.append(f"n {poly.n}")
    if factor is not None:
        lines.extend(f"c {k} {_fmt(x)}" for k, x in enumerate(factor.c))
    if not factor_only:
        lines.extend(f"a {k} {_fmt(x)}" for k, x in enumerate(poly.normalized().a))

    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise ZeroFreeError(f"Error writing polynomial: {e}")

    logger.info(f"Wrote degree-{poly.n} polynomial to {path}")
    return path


def write_csv(
    records: List[Dict[str, Any]] | pd.DataFrame,
    output_path: str | Path,
    save_mode: str = "OVERWRITE",
) -> Path:
    """Write rows to a CSV file, replacing or appending."""
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)

    frame = records if isinstance(records, pd.DataFrame) else pd.DataFrame(records)

    if save_mode.upper() == "OVERWRITE":
        mode, header = "w", True
    elif save_mode.upper() == "APPEND":
        mode, header = "a", not path.exists() or path.stat().st_size == 0
    else:
        raise ConfigError(f"Unknown save mode: {save_mode}")

    try:
        frame.to_csv(path, mode=mode, header=header, index=False, float_format="%.17g")
    except OSError as e:
        raise ZeroFreeError(f"Error writing output: {e}")

    logger.info(f"Wrote {len(frame)} rows to {path} ({save_mode.upper()})")
    return path
