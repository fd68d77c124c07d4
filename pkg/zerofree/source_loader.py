"""Load polynomial files.

Format (UTF-8 text): a header line ``n <degree>``, then a full set of
``c <k> <value>`` lines, a full set of ``a <k> <value>`` lines, or both.
Lines starting with ``#`` are comments.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import DomainError, PolynomialFormatError
from .trigpoly import CosinePolynomial, SpectralFactor, cosine_from_factor

logger = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-9


@dataclass
class PolynomialRecord:
    """A polynomial read from disk; ``poly`` is normalized so that a_0 = 1."""
    path: Path
    poly: CosinePolynomial
    factor: Optional[SpectralFactor] = None

    @property
    def name(self) -> str:
        return self.path.stem


class PolynomialLoader:
    """Loads polynomials from text files."""

    @staticmethod
    def load(source_path: str | Path) -> PolynomialRecord:
        path = Path(source_path)

        if not path.exists():
            raise PolynomialFormatError(f"Polynomial file not found: {path}")

        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise PolynomialFormatError(f"Error reading {path.name}: {e}")

        degree = None
        entries = {"c": {}, "a": {}}

        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue

            parts = line.split()

            if degree is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise PolynomialFormatError("expected header 'n <degree>'", line=lineno)
                try:
                    degree = int(parts[1])
                except ValueError:
                    raise PolynomialFormatError(f"degree is not an integer: {parts[1]!r}", line=lineno)
                if degree < 1:
                    raise PolynomialFormatError(f"degree must be positive, got {degree}", line=lineno)
                continue

            if len(parts) != 3 or parts[0] not in entries:
                raise PolynomialFormatError(f"expected 'c <k> <value>' or 'a <k> <value>', got {line!r}", line=lineno)

            kind, index, value = parts
            try:
                k = int(index)
                x = float(value)
            except ValueError:
                raise PolynomialFormatError(f"malformed entry {line!r}", line=lineno)

            if not 0 <= k <= degree:
                raise PolynomialFormatError(f"index {k} outside 0..{degree}", line=lineno)
            if k in entries[kind]:
                raise PolynomialFormatError(f"duplicate {kind}_{k}", line=lineno)
            if not np.isfinite(x):
                raise PolynomialFormatError(f"non-finite value for {kind}_{k}", line=lineno)

            entries[kind][k] = x

        if degree is None:
            raise PolynomialFormatError(f"No header in {path.name}")

        coefficients = {}
        for kind, values in entries.items():
            if not values:
                continue
            if len(values) != degree + 1:
                missing = sorted(set(range(degree + 1)) - set(values))
                raise PolynomialFormatError(f"{path.name}: incomplete {kind} lines, missing indices {missing}")
            coefficients[kind] = np.array([values[k] for k in range(degree + 1)])

        if not coefficients:
            raise PolynomialFormatError(f"{path.name}: no coefficient lines")

        factor = None
        if "c" in coefficients:
            try:
                factor = SpectralFactor.normalized(coefficients["c"])
            except DomainError as e:
                raise PolynomialFormatError(f"{path.name}: {e}")

        if "a" in coefficients:
            a = coefficients["a"]
            if a[0] <= 0.0:
                raise PolynomialFormatError(f"{path.name}: a_0 must be positive, got {a[0]}")
            poly = CosinePolynomial(a).normalized()
            if factor is not None:
                derived = cosine_from_factor(factor).normalized()
                drift = float(np.max(np.abs(derived.a - poly.a)))
                if drift > CONSISTENCY_TOL:
                    raise PolynomialFormatError(
                        f"{path.name}: a lines disagree with c lines (max difference {drift:.3e})"
                    )
        else:
            poly = cosine_from_factor(factor).normalized()

        logger.info(f"Loaded degree-{degree} polynomial from {path.name}")
        return PolynomialRecord(path=path, poly=poly, factor=factor)
