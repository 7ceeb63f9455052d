import argparse
import logging
import sys
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).resolve().parent.parent))

import config
from heatlab import subordinator
from heatlab.state import DensityEvalConfig
from tools import FileTool

# Define the CLI arguments
parser = argparse.ArgumentParser(description="Tabulate the series/tail crossover of the subordinator density")
parser.add_argument("--alphas", default="0.5,2.0,16", help="lo,hi,points of a linear alpha grid (hi excluded)")
parser.add_argument("--series-terms", type=int, default=60)
parser.add_argument("--out", default=str(Path(config.ARTIFACT_DIR) / "crossover_table.csv"))
args = parser.parse_args()

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

lo, hi, points = (float(v) for v in args.alphas.split(","))
alphas = np.linspace(lo, hi, int(points) + 1)[:-1]
cfg = DensityEvalConfig(series_terms=args.series_terms)

rows = []
for alpha in alphas:
    alpha = float(alpha)
    rows.append({
        "alpha": alpha,
        "crossover": subordinator.crossover(alpha, cfg),
        "smallest_usable_x": subordinator.smallest_usable_x(alpha, cfg),
        "tail_constant": subordinator.tail_constant(alpha),
    })

out = Path(args.out)
FileTool(base_dir=out.parent).save_csv(
    rows, out.name,
    metadata={"series_terms": cfg.series_terms, "target_tol": cfg.target_tol},
    columns=["alpha", "crossover", "smallest_usable_x", "tail_constant"],
)

# Confirm it worked
print(f"Wrote {len(rows)} crossover rows to {out}")
