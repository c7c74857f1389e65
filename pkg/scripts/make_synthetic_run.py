"""Build a synthetic contaminated corpus and push it through the full pipeline.

Writes the corpus, embeddings, and config to <out>/data, runs the cascade into
<out>/run, sweeps the text threshold, and checks the removal set against the
planted ground truth. The resulting run directory is ready for `mmdecon serve`.

    python scripts/make_synthetic_run.py --out /tmp/demo --seed 7
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from mmdecon.cli import main as cli_main
from mmdecon.runio import REMOVED_IDS_FILE
from mmdecon.synthetic import build_instance, write_instance


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True, help="output root (data/ and run/ created inside)")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--train-docs", type=int, default=400)
    ap.add_argument("--eval-docs", type=int, default=40)
    ap.add_argument("--benchmarks", type=int, default=3)
    ap.add_argument("--leaks", type=int, default=5)
    ap.add_argument("--shards", type=int, default=2, help="training corpus shard count")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    root = Path(args.out)
    inst = build_instance(
        seed=args.seed,
        n_train=args.train_docs,
        n_eval=args.eval_docs,
        n_benchmarks=args.benchmarks,
        n_leaks=args.leaks,
    )
    paths = write_instance(inst, root / "data", train_shards=args.shards)
    print(f"data: {root / 'data'}  (planted leaks: {', '.join(inst.leak_ids)})")

    run_dir = root / "run"
    corpus_flags = [
        "--train", paths["train"],
        "--eval", paths["eval"],
        "--train-emb", paths["train_emb"],
        "--eval-emb", paths["eval_emb"],
        "--config", paths["config"],
    ]
    rc = cli_main(
        ["run", *corpus_flags, "--out", str(run_dir), "--threads", str(args.threads)]
    )
    if rc != 0:
        return rc
    rc = cli_main(["sweep", *corpus_flags, "--out", str(run_dir), "--sample-k", "3"])
    if rc != 0:
        return rc

    removed = set((run_dir / REMOVED_IDS_FILE).read_text().split())
    missed = [leak for leak in inst.leak_ids if leak not in removed]
    false_keep_hits = [
        doc_id
        for doc_id in inst.same_image_ids + inst.template_ids
        if doc_id in removed
    ]
    print(
        json.dumps(
            {
                "run_dir": str(run_dir),
                "removed": len(removed),
                "planted_leaks_removed": len(inst.leak_ids) - len(missed),
                "planted_leaks_total": len(inst.leak_ids),
                "lookalikes_wrongly_removed": false_keep_hits,
            },
            indent=2,
        )
    )
    if missed or false_keep_hits:
        print("ground truth mismatch", file=sys.stderr)
        return 1
    print(f"inspect with: python -m mmdecon serve --run {run_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
