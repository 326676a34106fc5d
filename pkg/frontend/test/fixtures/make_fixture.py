"""Build the e2e fixture: a small trained bundle plus one test row's answers."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from dqo import synthetic_benchmark, train_bundle
from dqo.harness import align_test_matrix


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", required=True)
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # d=14 with 2 free features -> exactly 12 askable questions.
    train, test = synthetic_benchmark(n_train=400, n_test=5, d=14, seed=11)
    bundle = train_bundle(
        train, k=40, max_features=12, min_improvement=float("-inf"), name="energy"
    )
    bundle.save(out / "bundle.json")

    x = align_test_matrix(test, bundle)[0]
    row = {
        "prefilled": {
            bundle.specs[f - 1].name: float(x[f - 1]) for f in sorted(bundle.free_set)
        },
        "answers": {
            str(s.id): float(x[s.id - 1])
            for s in bundle.specs
            if s.id not in bundle.free_set
        },
    }
    (out / "row.json").write_text(json.dumps(row), encoding="utf-8")
    print(f"wrote {out}/bundle.json and {out}/row.json")


if __name__ == "__main__":
    main()
