"""
Fits the BRISQUE reference regressor on the generated distortion set and writes it as a
model file. Writing to src/app/iqa/models/brisque_reference.json makes it the bundled
reference that `load_brisque_model()` picks up.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import argparse
import logging
import sys
from pathlib import Path

from app.errors import HarnessError
from app.iqa.brisque import save_brisque_model
from app.iqa.reference import REFERENCE_RIDGE, REFERENCE_SCENES, REFERENCE_SEED, fit_reference_model

logger = logging.getLogger("fit_brisque_reference")


def fit_and_save(output: Path, seed: int, scenes: int, kind: str, ridge: float) -> Path:
    model = fit_reference_model(seed=seed, scenes=scenes, kind=kind, ridge=ridge)
    save_brisque_model(model, output)
    return output


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = argparse.ArgumentParser(description="Fit the BRISQUE reference regressor")
    parser.add_argument("output", type=Path, help="Model JSON to write")
    parser.add_argument("--seed", type=int, default=REFERENCE_SEED, help="Scene and noise seed")
    parser.add_argument("--scenes", type=int, default=REFERENCE_SCENES, help="Number of pristine scenes")
    parser.add_argument("--kind", choices=["linear", "rbf"], default="linear")
    parser.add_argument("--ridge", type=float, default=REFERENCE_RIDGE)
    args = parser.parse_args(argv)

    try:
        path = fit_and_save(args.output, args.seed, args.scenes, args.kind, args.ridge)
    except HarnessError as e:
        logger.error(f"❌ {e}")
        return 1
    logger.info(f"✅ BRISQUE reference written to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
