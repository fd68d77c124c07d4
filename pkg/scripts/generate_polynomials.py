"""Generate the bundled polynomial files for the historical R0 results.

Each entry is (b1 + cos phi)^2 (b2 + cos phi)^2, or (b1 + cos phi)^2 when b2
is absent, written as its normalized spectral factor. Run from the project
root:

    python scripts/generate_polynomials.py [output_dir]
"""

import sys
import logging
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from zerofree.sink_writer import write_polynomial
from zerofree.trigpoly import cosine_from_factor, from_product_form


logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# (file stem, year, author, b1, b2)
HISTORY = [
    ("dlvp", 1899, "de la Vallee Poussin", 1.0, None),
    ("westphal", 1938, "Westphal", 1.0, 0.25),
    ("rosser_schoenfeld", 1962, "Rosser and Schoenfeld", 1.0, 0.3),
    ("stechkin", 1970, "Stechkin", 0.91, 0.28),
    ("ford", 2002, "Ford", 0.9, 0.225),
    ("kadiri", 2005, "Kadiri", 0.91, 0.265),
]


def generate(output_dir: Path) -> list[Path]:
    written = []
    for stem, year, author, b1, b2 in HISTORY:
        factor = from_product_form(b1, b2)
        if b2 is None:
            form = f"(b1 + cos phi)^2 with b1={b1}"
        else:
            form = f"(b1 + cos phi)^2 (b2 + cos phi)^2 with b1={b1}, b2={b2}"
        comment = f"{author} ({year}): {form}\ngenerated by scripts/generate_polynomials.py"
        path = write_polynomial(
            output_dir / f"{stem}.txt",
            cosine_from_factor(factor),
            factor,
            comment=comment,
            factor_only=True,
        )
        written.append(path)
    return written


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else project_root / "data" / "polynomials"
    paths = generate(target)
    logger.info(f"Generated {len(paths)} polynomial files in {target}")
