#!/usr/bin/env python3
"""Regenerate the bundled synthetic corpus at data/toy_graph.json.

The file is a pure function of (seed, n_examples); a test pins the
bundled bytes to this exact invocation, so change the constants here
and there together or not at all.
"""

from pathlib import Path

from skillgraph.toydata import generate_toy_dataset

SEED = 1
N_EXAMPLES = 180

if __name__ == "__main__":
    out = Path(__file__).resolve().parent.parent / "data" / "toy_graph.json"
    out.write_bytes(generate_toy_dataset(SEED, N_EXAMPLES))
    print(f"wrote {out}")
