#!/usr/bin/env python3
"""Write the bundled task corpus to disk as single-task and split files."""

import argparse
from pathlib import Path

from harness_evo.canon import canonical_json
from harness_evo.simkit import bundled_task, bundled_task_ids, task_to_file_doc

TRAIN = ("T1", "T2", "T4", "T5", "T6", "T7", "T8", "T9")
TEST = ("T3", "T10", "T11", "T12")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="corpus", help="output directory (default corpus/)")
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    docs = {}
    for tid in bundled_task_ids():
        doc = task_to_file_doc(bundled_task(tid))
        docs[tid] = doc
        (out / f"{tid}.json").write_text(canonical_json(doc) + "\n", encoding="utf-8")
    for name, ids in (("train", TRAIN), ("test", TEST)):
        payload = [docs[tid] for tid in ids]
        (out / f"{name}.json").write_text(canonical_json(payload) + "\n", encoding="utf-8")
    print(f"wrote {len(docs)} tasks, train={len(TRAIN)} test={len(TEST)} under {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
